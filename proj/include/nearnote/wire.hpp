#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "nearnote/model.hpp"

namespace nearnote {

// Wire protocol version. Decoders reject documents from a different major
// version instead of guessing.
inline constexpr int kWireVersion = 1;

// Syncable client tables, in canonical (dependency) order. The broker
// applies envelope rows in this order so link rows never precede the rows
// they reference.
inline constexpr const char* kSyncTables[] = {"associations", "locations", "notes",
                                              "note_people", "note_locations",
                                              "blocked"};
int sync_table_rank(const std::string& table);  // -1 if not syncable

// One dirty row: key and payload are table-specific, version is the
// per-row mutation counter, deleted marks a tombstone (payload null).
struct RowChange {
    std::string table;
    std::string key;
    std::uint64_t version = 0;
    bool deleted = false;
    nlohmann::json payload;

    bool operator==(const RowChange&) const = default;
};

struct SyncEnvelope {
    DeviceId sender;
    std::vector<RowChange> rows;
    TimestampMs sent_at = 0;

    bool operator==(const SyncEnvelope&) const = default;
};

struct RowAck {
    std::string table;
    std::string key;
    std::uint64_t version = 0;

    auto operator<=>(const RowAck&) const = default;
};

struct IngestAck {
    std::vector<RowAck> acked;

    bool operator==(const IngestAck&) const = default;
};

struct NoteDelivery {
    ReceivedNote note;
    bool operator==(const NoteDelivery&) const = default;
};

struct BlockNotice {
    DeviceId blocker;
    bool operator==(const BlockNotice&) const = default;
};

struct UnblockNotice {
    DeviceId blocker;
    bool operator==(const UnblockNotice&) const = default;
};

// Server-initiated message. msg_id is unique per broker lifetime, which is
// what makes client-side dedup of at-least-once delivery possible.
struct PushMessage {
    std::uint64_t msg_id = 0;
    std::variant<NoteDelivery, BlockNotice, UnblockNotice> body;

    bool operator==(const PushMessage&) const = default;
};

// Canonical text encoding: minified JSON with sorted keys and a "v"
// version field. encode(decode(encode(x))) == encode(x) holds bit-exactly.
std::string encode_envelope(const SyncEnvelope& envelope);
SyncEnvelope decode_envelope(const std::string& text);

std::string encode_push(const PushMessage& message);
PushMessage decode_push(const std::string& text);

std::string encode_ack(const IngestAck& ack);
IngestAck decode_ack(const std::string& text);

// Stream framing for raw-socket transports: 4-byte big-endian length
// prefix followed by the encoded document. HTTP transports carry the same
// document as the request/response body instead.
std::string frame(const std::string& payload);
// Returns the first complete frame and erases it from `buffer`; empty
// optional if the buffer does not yet hold a full frame.
std::optional<std::string> unframe(std::string& buffer);

}  // namespace nearnote
