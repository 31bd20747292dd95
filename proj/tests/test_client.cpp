#include <doctest.h>

#include "nearnote/client.hpp"

using namespace nearnote;

namespace {

const DeviceId kOwner = DeviceId::parse("02:00:00:00:00:01");
const DeviceId kFriend = DeviceId::parse("02:00:00:00:00:02");
const DeviceId kBeaconDev = DeviceId::parse("02:00:00:00:00:0B");
const GeoPoint kHere{38.738522, -9.1543572};

ScanResult see(TimestampMs at, std::initializer_list<DeviceId> devices) {
    ScanResult scan;
    scan.at = at;
    for (const DeviceId& d : devices) scan.visible.emplace(d, std::nullopt);
    return scan;
}

}  // namespace

TEST_CASE("person nearby notifies once per session with full history") {
    ClientEngine engine(ClientStore::in_memory(kOwner), {});
    RecordingSink sink;

    auto n1 = engine.on_scan(see(0, {kFriend}), kHere, &sink);
    REQUIRE(n1.size() == 1);
    CHECK(std::get<PersonNearby>(n1[0].kind).device == kFriend);
    CHECK(sink.records.size() == 1);
    CHECK(sink.records[0].second.str() == "V500");

    // refreshes while the session stays open do not re-notify
    for (int i = 1; i <= 5; ++i) {
        CHECK(engine.on_scan(see(i * 30'000, {kFriend}), kHere, &sink).empty());
    }
    // leave (K=2) and come back: a new session notifies again
    engine.on_scan(see(6 * 30'000, {}), kHere, &sink);
    engine.on_scan(see(7 * 30'000, {}), kHere, &sink);
    auto n2 = engine.on_scan(see(8 * 30'000, {kFriend}), kHere, &sink);
    CHECK(n2.size() == 1);

    // history never shrinks
    CHECK(engine.store().notifications().size() == 2);
    engine.store().acknowledge_all_notifications();
    CHECK(engine.store().notifications().size() == 2);
}

TEST_CASE("silent mode mutes the sink but history and detection continue") {
    ClientEngine engine(ClientStore::in_memory(kOwner), {});
    RecordingSink sink;

    engine.set_silent(true, 0);
    engine.on_scan(see(1'000, {kFriend}), kHere, &sink);
    CHECK(sink.records.empty());
    CHECK(engine.store().notifications().size() == 1);  // history still grows
    CHECK(engine.people_near().size() == 1);            // detection unaffected

    // toggling silent off mid-trace: only post-toggle notifications emit
    engine.set_silent(false, 60'000);
    engine.on_scan(see(61'000, {}), kHere, &sink);
    engine.on_scan(see(91'000, {}), kHere, &sink);
    engine.on_scan(see(121'000, {kFriend}), kHere, &sink);
    CHECK(sink.records.size() == 1);
    CHECK(engine.store().notifications().size() == 2);
}

TEST_CASE("registered beacons do not raise person-nearby notifications") {
    ClientEngine engine(ClientStore::in_memory(kOwner), {});
    engine.store().save_indoor_location("sala", kBeaconDev);
    RecordingSink sink;

    const auto notifications = engine.on_scan(see(0, {kBeaconDev}), kHere, &sink);
    CHECK(notifications.empty());
    CHECK(engine.store().detections().size() == 1);  // still logged as a detection
    CHECK(engine.people_near().size() == 1);         // and near (it tags the room)
}

TEST_CASE("an indoor-located note fires while the beacon is near") {
    ClientEngine engine(ClientStore::in_memory(kOwner), {});
    const LocationDef sala = engine.store().save_indoor_location("sala", kBeaconDev);
    const NoteId note = engine.create_text_note("talk to the staff", 0);
    engine.attach_location_trigger(note, sala.location_id, 0);

    RecordingSink sink;
    const auto fired = engine.on_scan(see(1'000, {kBeaconDev}), kHere, &sink);
    REQUIRE(fired.size() == 1);
    CHECK(std::get<NoteFired>(fired[0].kind).note == note);
    CHECK(sink.records.size() == 1);
    CHECK(sink.records[0].second.str() == "V50 P100 V250");  // text-note pattern
}

TEST_CASE("a saved location is immediately usable as a trigger") {
    ClientEngine engine(ClientStore::in_memory(kOwner), {});
    engine.set_position(kHere);
    const LocationDef spot = engine.save_current_location("mercado", 0);
    CHECK(spot.kind == LocationKind::Outdoor);
    CHECK(spot.point == kHere);

    const NoteId note = engine.create_text_note("buy milk", 0);
    engine.attach_location_trigger(note, spot.location_id, 0);

    // far away: nothing
    const GeoPoint far{38.80, -9.10};
    CHECK(engine.on_scan(see(1'000, {}), far, nullptr).empty());
    // walking within the 100 m default geofence fires exactly once
    const GeoPoint close{kHere.lat + 0.0005, kHere.lon};  // ~56 m
    const auto fired = engine.on_scan(see(31'000, {}), close, nullptr);
    REQUIRE(fired.size() == 1);
    CHECK(engine.on_scan(see(61'000, {}), close, nullptr).empty());
}

TEST_CASE("audio notes use the audio pattern") {
    ClientEngine engine(ClientStore::in_memory(kOwner), {});
    engine.associate_contact(5, "Friend", kFriend, 0);
    const NoteId note = engine.create_audio_note({0x01}, 2'000, 0);
    engine.attach_person_trigger(note, 5, 0);

    RecordingSink sink;
    engine.on_scan(see(1'000, {kFriend}), kHere, &sink);
    // person-nearby (V500) then the audio note firing (V250)
    REQUIRE(sink.records.size() == 2);
    CHECK(sink.records[0].second.str() == "V500");
    CHECK(sink.records[1].second.str() == "V250");
}

TEST_CASE("detaching the only trigger reverts the note to manual view") {
    ClientEngine engine(ClientStore::in_memory(kOwner), {});
    engine.associate_contact(5, "Friend", kFriend, 0);
    const NoteId note = engine.create_text_note("x", 0);
    engine.attach_person_trigger(note, 5, 0);
    engine.detach_person_trigger(note, 5, 0);

    for (int i = 0; i < 5; ++i) {
        for (const auto& n :
             engine.on_scan(see(i * 30'000, {kFriend}), kHere, nullptr)) {
            CHECK(std::get_if<NoteFired>(&n.kind) == nullptr);
        }
    }
}

TEST_CASE("ignore closes the session and mutes events until expiry") {
    ClientEngine engine(ClientStore::in_memory(kOwner), {});
    engine.associate_contact(5, "Friend", kFriend, 0);
    engine.on_scan(see(0, {kFriend}), kHere, nullptr);
    CHECK(engine.people_near().size() == 1);

    engine.ignore_contact(5, 300'000, 10'000);
    CHECK(engine.people_near().empty());
    // the closure produced an Exited detection at application time
    const auto& detections = engine.store().detections();
    REQUIRE(detections.size() == 2);
    CHECK(detections[1].kind == PresenceDirection::Exited);
    CHECK(detections[1].at == 10'000);

    CHECK(engine.on_scan(see(30'000, {kFriend}), kHere, nullptr).empty());
    // at the exclusive expiry instant the device is visible again
    CHECK(engine.on_scan(see(300'000, {kFriend}), kHere, nullptr).size() == 1);
    CHECK_THROWS_AS(engine.ignore_contact(99, 1'000, 0), UnknownContact);
}

TEST_CASE("actions are recorded against the six-gesture vocabulary") {
    ClientEngine engine(ClientStore::in_memory(kOwner), {});
    engine.create_text_note("x", 5'000);
    engine.set_silent(true, 6'000);
    const auto& actions = engine.store().actions();
    REQUIRE(actions.size() == 2);
    CHECK(actions[0].screen == "create_note");
    CHECK(actions[0].command == GestureCommand::DoubleTap);
    CHECK(actions[1].screen == "settings");
}
