#include "nearnote/wire.hpp"

#include "nearnote/errors.hpp"
#include "nearnote/json_codec.hpp"

namespace nearnote {

using nlohmann::json;

namespace {

void check_version(const json& j, const char* what) {
    if (!j.is_object() || !j.contains("v") || j.at("v").get<int>() != kWireVersion) {
        throw Error(std::string("unsupported ") + what + " version");
    }
}

json parse_document(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw Error(std::string("unparseable ") + what + " document");
    }
    check_version(j, what);
    return j;
}

json row_to_json(const RowChange& row) {
    return json{{"table", row.table},
                {"key", row.key},
                {"version", row.version},
                {"deleted", row.deleted},
                {"payload", row.payload}};
}

RowChange row_from_json(const json& j) {
    return RowChange{j.at("table").get<std::string>(), j.at("key").get<std::string>(),
                     j.at("version").get<std::uint64_t>(), j.at("deleted").get<bool>(),
                     j.at("payload")};
}

}  // namespace

int sync_table_rank(const std::string& table) {
    int rank = 0;
    for (const char* name : kSyncTables) {
        if (table == name) return rank;
        ++rank;
    }
    return -1;
}

std::string encode_envelope(const SyncEnvelope& envelope) {
    json rows = json::array();
    for (const auto& row : envelope.rows) rows.push_back(row_to_json(row));
    const json j{{"v", kWireVersion},
                 {"kind", "envelope"},
                 {"sender", envelope.sender.str()},
                 {"sent_at", envelope.sent_at},
                 {"rows", rows}};
    return j.dump();
}

SyncEnvelope decode_envelope(const std::string& text) {
    const json j = parse_document(text, "envelope");
    SyncEnvelope out{DeviceId::parse(j.at("sender").get<std::string>()),
                     {},
                     j.at("sent_at").get<TimestampMs>()};
    for (const auto& row : j.at("rows")) out.rows.push_back(row_from_json(row));
    return out;
}

std::string encode_push(const PushMessage& message) {
    json j{{"v", kWireVersion}, {"kind", "push"}, {"msg_id", message.msg_id}};
    if (const auto* delivery = std::get_if<NoteDelivery>(&message.body)) {
        j["type"] = "note_delivery";
        j["note"] = received_note_to_json(delivery->note);
    } else if (const auto* block = std::get_if<BlockNotice>(&message.body)) {
        j["type"] = "block_notice";
        j["blocker"] = block->blocker.str();
    } else {
        j["type"] = "unblock_notice";
        j["blocker"] = std::get<UnblockNotice>(message.body).blocker.str();
    }
    return j.dump();
}

PushMessage decode_push(const std::string& text) {
    const json j = parse_document(text, "push");
    const auto type = j.at("type").get<std::string>();
    const auto msg_id = j.at("msg_id").get<std::uint64_t>();
    if (type == "note_delivery") {
        return PushMessage{msg_id, NoteDelivery{received_note_from_json(j.at("note"))}};
    }
    if (type == "block_notice") {
        return PushMessage{msg_id,
                           BlockNotice{DeviceId::parse(j.at("blocker").get<std::string>())}};
    }
    if (type == "unblock_notice") {
        return PushMessage{
            msg_id, UnblockNotice{DeviceId::parse(j.at("blocker").get<std::string>())}};
    }
    throw Error("unknown push message type: " + type);
}

std::string encode_ack(const IngestAck& ack) {
    json rows = json::array();
    for (const auto& a : ack.acked) {
        rows.push_back(json{{"table", a.table}, {"key", a.key}, {"version", a.version}});
    }
    const json j{{"v", kWireVersion}, {"kind", "ack"}, {"acked", rows}};
    return j.dump();
}

IngestAck decode_ack(const std::string& text) {
    const json j = parse_document(text, "ack");
    IngestAck out;
    for (const auto& a : j.at("acked")) {
        out.acked.push_back(RowAck{a.at("table").get<std::string>(),
                                   a.at("key").get<std::string>(),
                                   a.at("version").get<std::uint64_t>()});
    }
    return out;
}

std::string frame(const std::string& payload) {
    const auto n = static_cast<std::uint32_t>(payload.size());
    std::string out;
    out.reserve(payload.size() + 4);
    out.push_back(static_cast<char>((n >> 24) & 0xFF));
    out.push_back(static_cast<char>((n >> 16) & 0xFF));
    out.push_back(static_cast<char>((n >> 8) & 0xFF));
    out.push_back(static_cast<char>(n & 0xFF));
    out += payload;
    return out;
}

std::optional<std::string> unframe(std::string& buffer) {
    if (buffer.size() < 4) return std::nullopt;
    const auto b = [&](std::size_t i) {
        return static_cast<std::uint32_t>(static_cast<unsigned char>(buffer[i]));
    };
    const std::uint32_t n = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
    if (buffer.size() < 4u + n) return std::nullopt;
    std::string payload = buffer.substr(4, n);
    buffer.erase(0, 4u + n);
    return payload;
}

}  // namespace nearnote
