#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "nearnote/errors.hpp"

namespace nearnote {

// Radio identifier in canonical MAC form: six colon-separated pairs of
// uppercase hex digits. This is the system-wide identity key; every store,
// scan and wire message refers to devices by it. A default-constructed id
// is the empty sentinel; parse() is the only way to obtain a valid one.
class DeviceId {
public:
    DeviceId() = default;

    // Accepts upper/lower case hex; canonicalizes to uppercase.
    static DeviceId parse(std::string_view text);
    static std::optional<DeviceId> try_parse(std::string_view text);

    const std::string& str() const { return value_; }
    bool empty() const { return value_.empty(); }

    auto operator<=>(const DeviceId&) const = default;

private:
    explicit DeviceId(std::string canonical) : value_(std::move(canonical)) {}

    std::string value_;
};

// Note identity: (creator device, per-creator sequence number). Creating a
// note never needs coordination with the broker; the creator scopes the
// sequence, so ids stay globally unique even for offline creation.
struct NoteId {
    DeviceId creator;
    std::uint64_t seq = 0;

    std::string str() const;  // "<MAC>/<seq>"
    static NoteId parse(std::string_view text);

    auto operator<=>(const NoteId&) const = default;
};

// Stable 64-bit hash, used wherever behavior must not depend on the
// standard library's unspecified std::hash (scan phase offsets, reg ids).
std::uint64_t fnv1a64(std::string_view data) noexcept;

}  // namespace nearnote
