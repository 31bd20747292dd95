#include "nearnote/ids.hpp"

#include <cctype>
#include <charconv>

namespace nearnote {

namespace {

bool is_hex(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

char to_upper_hex(char c) {
    return (c >= 'a' && c <= 'f') ? static_cast<char>(c - 'a' + 'A') : c;
}

}  // namespace

DeviceId DeviceId::parse(std::string_view text) {
    auto id = try_parse(text);
    if (!id) {
        throw MalformedId("not a MAC-form device id: '" + std::string(text) + "'");
    }
    return *id;
}

std::optional<DeviceId> DeviceId::try_parse(std::string_view text) {
    // Exactly six colon-separated pairs of hex digits: length 17.
    if (text.size() != 17) {
        return std::nullopt;
    }
    std::string canonical;
    canonical.reserve(17);
    for (std::size_t i = 0; i < 17; ++i) {
        const char c = text[i];
        if (i % 3 == 2) {
            if (c != ':') return std::nullopt;
            canonical.push_back(':');
        } else {
            if (!is_hex(c)) return std::nullopt;
            canonical.push_back(to_upper_hex(c));
        }
    }
    return DeviceId(std::move(canonical));
}

std::string NoteId::str() const {
    return creator.str() + "/" + std::to_string(seq);
}

NoteId NoteId::parse(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        throw MalformedId("note id missing '/': '" + std::string(text) + "'");
    }
    DeviceId creator = DeviceId::parse(text.substr(0, slash));
    const std::string_view seq_part = text.substr(slash + 1);
    std::uint64_t seq = 0;
    const auto [ptr, ec] =
        std::from_chars(seq_part.data(), seq_part.data() + seq_part.size(), seq);
    if (ec != std::errc{} || ptr != seq_part.data() + seq_part.size() || seq == 0) {
        throw MalformedId("bad note sequence: '" + std::string(text) + "'");
    }
    return NoteId{std::move(creator), seq};
}

std::uint64_t fnv1a64(std::string_view data) noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace nearnote
