#include <doctest.h>

#include <random>

#include "nearnote/triggers.hpp"

using namespace nearnote;

namespace {

const DeviceId kAlice = DeviceId::parse("02:00:00:00:00:0A");
const DeviceId kBeacon = DeviceId::parse("02:00:00:00:00:0B");
const GeoPoint kHouse{38.74, -9.15};

TriggerContext ctx_at(TimestampMs now, bool alice_present, bool beacon_near) {
    TriggerContext ctx;
    ctx.now = now;
    ctx.observer_pos = kHouse;
    if (alice_present) {
        ctx.open_sessions.emplace(kAlice, 7);
        ctx.nearby_beacons.insert(kAlice);
    }
    if (beacon_near) {
        ctx.open_sessions.emplace(kBeacon, std::nullopt);
        ctx.nearby_beacons.insert(kBeacon);
    }
    return ctx;
}

EvalNote conjunction_note(TimestampMs window_start, TimestampMs window_end) {
    CompiledTriggers triggers;
    triggers.person_category = true;
    triggers.person_devices.insert(kAlice);
    triggers.location_category = true;
    triggers.locations.push_back(LocationDef::indoor(1, kBeacon, "casa do jules"));
    triggers.window = TimeWindow{window_start, window_end};
    return EvalNote{"o|x", NoteId{kAlice, 1}, triggers, false};
}

constexpr TimestampMs kHour = 3'600'000;

}  // namespace

TEST_CASE("the all-at-once conjunction fires exactly once at the re-entry") {
    // Window opens at 22:00. Alice is present 21:00-21:40 (window closed),
    // leaves, and re-enters at 22:30 with the beacon near the whole time.
    const TimestampMs t2100 = 21 * kHour;
    const TimestampMs t2200 = 22 * kHour;
    TriggerEvaluator eval;
    const std::vector<EvalNote> notes{conjunction_note(t2200, t2200 + 5 * kHour)};

    std::size_t firings = 0;
    // 21:00-21:40: present but before the window
    for (TimestampMs t = t2100; t <= t2100 + 40 * 60'000; t += 30'000) {
        firings += eval.evaluate(notes, ctx_at(t, true, true)).size();
    }
    CHECK(firings == 0);
    // 21:40-22:30: gone (window opens at 22:00 while she is away)
    for (TimestampMs t = t2100 + 40 * 60'000 + 30'000; t < t2200 + 30 * 60'000;
         t += 30'000) {
        firings += eval.evaluate(notes, ctx_at(t, false, true)).size();
    }
    CHECK(firings == 0);
    // 22:30: she is back, all three categories hold
    const auto fired = eval.evaluate(notes, ctx_at(t2200 + 30 * 60'000, true, true));
    REQUIRE(fired.size() == 1);
    CHECK(std::get<NoteFired>(fired[0].kind).note == NoteId{kAlice, 1});
    CHECK(fired[0].at == t2200 + 30 * 60'000);
    // staying around does not refire
    for (TimestampMs t = t2200 + 31 * 60'000; t < t2200 + 2 * kHour; t += 30'000) {
        CHECK(eval.evaluate(notes, ctx_at(t, true, true)).empty());
    }
    REQUIRE(eval.history().size() == 1);
    CHECK(eval.history()[0].satisfying_session_keys.contains(kAlice.str()));
    CHECK(eval.history()[0].satisfying_session_keys.contains(kBeacon.str()));
    CHECK(eval.history()[0].satisfying_session_keys.contains("window"));
}

TEST_CASE("a note with no triggers never fires") {
    TriggerEvaluator eval;
    EvalNote manual{"o|m", NoteId{kAlice, 2}, CompiledTriggers{}, false};
    for (TimestampMs t = 0; t < 10 * 30'000; t += 30'000) {
        CHECK(eval.evaluate({manual}, ctx_at(t, true, true)).empty());
    }
}

TEST_CASE("dedup: one firing per continuous satisfaction, refire after lapse") {
    CompiledTriggers triggers;
    triggers.person_category = true;
    triggers.person_devices.insert(kAlice);
    const EvalNote note{"o|p", NoteId{kAlice, 3}, triggers, false};
    TriggerEvaluator eval;

    std::size_t firings = 0;
    firings += eval.evaluate({note}, ctx_at(0, true, false)).size();
    for (int i = 1; i <= 10; ++i) {
        firings += eval.evaluate({note}, ctx_at(i * 30'000, true, false)).size();
    }
    CHECK(firings == 1);  // ten further scans while present: no refire

    // condition lapses, then recurs
    firings += eval.evaluate({note}, ctx_at(11 * 30'000, false, false)).size();
    CHECK(firings == 1);
    firings += eval.evaluate({note}, ctx_at(12 * 30'000, true, false)).size();
    CHECK(firings == 2);
}

TEST_CASE("within a category alternatives are OR") {
    CompiledTriggers triggers;
    triggers.location_category = true;
    triggers.locations.push_back(LocationDef::indoor(1, kBeacon, "sala"));
    triggers.locations.push_back(
        LocationDef::outdoor(2, GeoPoint{38.74, -9.15}, "mercado"));
    const EvalNote note{"o|l", NoteId{kAlice, 4}, triggers, false};

    // beacon path
    TriggerEvaluator eval_beacon;
    TriggerContext near_beacon = ctx_at(0, false, true);
    near_beacon.observer_pos = GeoPoint{0.0, 0.0};  // far from the outdoor point
    CHECK(eval_beacon.evaluate({note}, near_beacon).size() == 1);

    // outdoor path
    TriggerEvaluator eval_outdoor;
    TriggerContext near_point = ctx_at(0, false, false);
    near_point.observer_pos = GeoPoint{38.7401, -9.15};  // ~11 m away
    CHECK(eval_outdoor.evaluate({note}, near_point).size() == 1);
}

TEST_CASE("an unresolvable category blocks firing instead of vanishing") {
    CompiledTriggers triggers;
    triggers.person_category = true;  // references resolved to nothing
    triggers.window = TimeWindow{0, 10 * kHour};
    const EvalNote note{"o|u", NoteId{kAlice, 5}, triggers, false};
    TriggerEvaluator eval;
    CHECK(eval.evaluate({note}, ctx_at(kHour, true, true)).empty());
}

TEST_CASE("the time window is inclusive at start and exclusive at end") {
    CompiledTriggers triggers;
    triggers.window = TimeWindow{1'000, 2'000};
    TriggerEvaluator eval;
    CHECK(!eval.satisfied(triggers, ctx_at(999, false, false)));
    CHECK(eval.satisfied(triggers, ctx_at(1'000, false, false)));
    CHECK(eval.satisfied(triggers, ctx_at(1'999, false, false)));
    CHECK(!eval.satisfied(triggers, ctx_at(2'000, false, false)));
}

TEST_CASE("the geofence boundary is inclusive") {
    CompiledTriggers triggers;
    triggers.location_category = true;
    triggers.locations.push_back(LocationDef::outdoor(1, kHouse, "spot"));
    TriggerEvaluator eval(100.0);

    TriggerContext at_edge = ctx_at(0, false, false);
    // 0.0008 deg of latitude is ~89 m: inside
    at_edge.observer_pos = GeoPoint{kHouse.lat + 0.0008, kHouse.lon};
    CHECK(eval.satisfied(triggers, at_edge));
    // ~133 m: outside
    at_edge.observer_pos = GeoPoint{kHouse.lat + 0.0012, kHouse.lon};
    CHECK(!eval.satisfied(triggers, at_edge));
}

TEST_CASE("categories are AND across, OR within (randomized)") {
    std::mt19937_64 rng(41);
    TriggerEvaluator eval;
    for (int trial = 0; trial < 500; ++trial) {
        const bool with_person = rng() % 2 == 0;
        const bool with_location = rng() % 2 == 0;
        const bool with_window = rng() % 2 == 0;
        if (!with_person && !with_location && !with_window) continue;

        const bool person_sat = rng() % 2 == 0;
        const bool location_sat = rng() % 2 == 0;
        const bool window_sat = rng() % 2 == 0;

        CompiledTriggers triggers;
        TriggerContext ctx;
        ctx.now = 5'000;
        ctx.observer_pos = GeoPoint{0.0, 0.0};
        if (with_person) {
            triggers.person_category = true;
            triggers.person_devices.insert(kAlice);
            if (person_sat) ctx.open_sessions.emplace(kAlice, 7);
        }
        if (with_location) {
            triggers.location_category = true;
            triggers.locations.push_back(LocationDef::indoor(1, kBeacon, "x"));
            if (location_sat) ctx.nearby_beacons.insert(kBeacon);
        }
        if (with_window) {
            triggers.window = window_sat ? TimeWindow{0, 10'000} : TimeWindow{6'000, 7'000};
        }

        const bool expect = (!with_person || person_sat) &&
                            (!with_location || location_sat) &&
                            (!with_window || window_sat);
        CHECK(eval.satisfied(triggers, ctx) == expect);

        if (expect && with_location) {
            // adding an unsatisfied alternative within a satisfied category
            // never prevents firing
            CompiledTriggers more = triggers;
            more.locations.push_back(
                LocationDef::indoor(2, DeviceId::parse("02:00:00:00:00:0C"), "y"));
            CHECK(eval.satisfied(more, ctx));
        }
    }
}
