#include <doctest.h>

#include "nearnote/wire.hpp"

using namespace nearnote;

namespace {

const DeviceId kSender = DeviceId::parse("02:00:00:00:00:01");

SyncEnvelope sample_envelope() {
    SyncEnvelope env;
    env.sender = kSender;
    env.sent_at = 1374750177000;
    env.rows.push_back(RowChange{
        "associations", "5", 1, false,
        nlohmann::json{{"contact_id", 5},
                       {"device", "02:00:00:00:00:02"},
                       {"display_name", "Carla"}}});
    env.rows.push_back(RowChange{"blocked", "5", 2, true, nullptr});
    return env;
}

}  // namespace

TEST_CASE("envelope encoding round-trips bit-exactly") {
    const SyncEnvelope env = sample_envelope();
    const std::string once = encode_envelope(env);
    const SyncEnvelope back = decode_envelope(once);
    CHECK(back == env);
    CHECK(encode_envelope(back) == once);
}

TEST_CASE("push messages round-trip through their encodings") {
    ReceivedNote note;
    note.id = NoteId{kSender, 3};
    note.sender = kSender;
    note.body = AudioBody{{0x01, 0xFF, 0x10}, 4'500};
    note.created_at = 99;
    note.person_category = true;
    note.trigger_devices.insert(DeviceId::parse("02:00:00:00:00:03"));
    note.trigger_locations.push_back(
        LocationDef::outdoor(7, GeoPoint{38.738522, -9.1543572}, "mercado"));
    note.location_category = true;
    note.time_window = TimeWindow{10, 20};
    note.received_at = 120;

    for (const PushMessage& msg :
         {PushMessage{1, NoteDelivery{note}},
          PushMessage{2, BlockNotice{kSender}},
          PushMessage{3, UnblockNotice{kSender}}}) {
        const std::string once = encode_push(msg);
        const PushMessage back = decode_push(once);
        CHECK(back == msg);
        CHECK(encode_push(back) == once);
    }
}

TEST_CASE("acks round-trip") {
    IngestAck ack;
    ack.acked.push_back({"notes", "02:00:00:00:00:01/1", 3});
    ack.acked.push_back({"blocked", "5", 2});
    const std::string once = encode_ack(ack);
    CHECK(decode_ack(once) == ack);
    CHECK(encode_ack(decode_ack(once)) == once);
}

TEST_CASE("decoders reject foreign versions and garbage") {
    CHECK_THROWS_AS(decode_envelope("{\"v\":2,\"rows\":[]}"), Error);
    CHECK_THROWS_AS(decode_envelope("not json at all"), Error);
    CHECK_THROWS_AS(decode_push("{\"v\":1,\"type\":\"mystery\",\"msg_id\":1}"), Error);
}

TEST_CASE("stream framing carries arbitrary payloads") {
    const std::string payload = encode_envelope(sample_envelope());
    std::string buffer = frame(payload) + frame("second");
    auto first = unframe(buffer);
    REQUIRE(first.has_value());
    CHECK(*first == payload);
    auto second = unframe(buffer);
    REQUIRE(second.has_value());
    CHECK(*second == "second");
    CHECK(buffer.empty());

    std::string partial = frame(payload).substr(0, 10);
    CHECK(!unframe(partial).has_value());
    CHECK(partial.size() == 10);  // untouched until complete
}
