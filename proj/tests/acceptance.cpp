// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.
//
//   acceptance [scenarios_dir]
//
// The criteria exercise the full stack — scenario scripts, the feedback
// mapping, the detection-log grammar, presence hysteresis, the geofence
// distance oracle, sync convergence under partitions, block propagation,
// notification dedup, trace determinism, and log/session fidelity.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "nearnote/broker.hpp"
#include "nearnote/client.hpp"
#include "nearnote/json_codec.hpp"
#include "nearnote/logfmt.hpp"
#include "nearnote/scenario.hpp"

using namespace nearnote;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool passed,
            const std::string& detail) {
    std::printf("[%s] %2d. %s: %s\n", passed ? "PASS" : "FAIL", number, name.c_str(),
                detail.c_str());
    if (!passed) ++g_failures;
}

struct Check {
    bool ok = true;
    std::string why;
    void fail(const std::string& reason) {
        if (ok) why = reason;
        ok = false;
    }
};

DeviceId dev(int n) {
    char mac[18];
    std::snprintf(mac, sizeof(mac), "02:AC:00:00:00:%02X", n);
    return DeviceId::parse(mac);
}

// Switchable in-process link, the acceptance stand-in for connectivity.
class FlakyLink final : public BrokerLink {
public:
    explicit FlakyLink(Broker& broker) : broker_(broker) {}
    bool up = true;

    std::string register_device(const DeviceId& device) override {
        check();
        return broker_.register_device(device, 0);
    }
    IngestAck ingest(const SyncEnvelope& envelope) override {
        check();
        return broker_.ingest(envelope);
    }
    std::vector<PushMessage> deliver(const DeviceId& device) override {
        check();
        return broker_.deliver(device);
    }
    void ack_delivered(const DeviceId& device,
                       const std::vector<std::uint64_t>& ids) override {
        check();
        broker_.ack_delivered(device, ids);
    }

private:
    void check() const {
        if (!up) throw LinkDown("down");
    }
    Broker& broker_;
};

ScanResult see(TimestampMs at, std::initializer_list<DeviceId> devices) {
    ScanResult scan;
    scan.at = at;
    for (const DeviceId& d : devices) scan.visible.emplace(d, std::nullopt);
    return scan;
}

// --- 1. scenario suite -------------------------------------------------------

void criterion_scenarios(const std::filesystem::path& dir) {
    Check check;
    const auto started = std::chrono::steady_clock::now();
    std::size_t scenarios = 0, checks = 0;

    std::vector<std::filesystem::path> files;
    if (std::filesystem::exists(dir)) {
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            if (entry.path().extension() == ".scn") files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.size() != 6) {
        check.fail("expected 6 scenario scripts under " + dir.string() + ", found " +
                   std::to_string(files.size()));
    }
    for (const auto& file : files) {
        ScenarioOverrides overrides;
        overrides.seed = 1;
        const ScenarioOutcome outcome =
            run_scenario(load_scenario(file), overrides);
        ++scenarios;
        for (const ScenarioCheck& c : outcome.checks) {
            ++checks;
            if (!c.passed) {
                check.fail(file.filename().string() + ": " + c.label + " (" +
                           c.detail + ")");
            }
        }
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
            .count();
    if (seconds >= 5.0) check.fail("runtime " + std::to_string(seconds) + "s >= 5s");
    std::ostringstream detail;
    detail << scenarios << " scenarios, " << checks << " expectations, "
           << std::fixed << seconds << "s";
    report(1, "scenario-suite", check.ok, check.ok ? detail.str() : check.why);
}

// --- 2. feedback mapping ------------------------------------------------------

void criterion_feedback() {
    Check check;
    const VibePattern person = pattern_for(FeedbackKind::PersonNearby);
    const VibePattern audio = pattern_for(FeedbackKind::AudioNoteFired);
    const VibePattern text = pattern_for(FeedbackKind::TextNoteFired);
    if (person.segments != std::vector<VibeSegment>{{SegmentKind::Vibrate, 500}}) {
        check.fail("person-nearby pattern is " + person.str());
    }
    if (audio.segments != std::vector<VibeSegment>{{SegmentKind::Vibrate, 250}}) {
        check.fail("audio-note pattern is " + audio.str());
    }
    if (text.segments != std::vector<VibeSegment>{{SegmentKind::Vibrate, 50},
                                                  {SegmentKind::Pause, 100},
                                                  {SegmentKind::Vibrate, 250}}) {
        check.fail("text-note pattern is " + text.str());
    }
    report(2, "feedback-mapping", check.ok,
           check.ok ? "V500 / V250 / V50 P100 V250" : check.why);
}

// --- 3. log grammar ------------------------------------------------------------

std::string collapse_ws(const std::string& s) {
    std::string out;
    bool in_ws = false;
    for (char c : s) {
        if (c == ' ' || c == '\t') {
            in_ws = true;
            continue;
        }
        if (in_ws && !out.empty()) out.push_back(' ');
        in_ws = false;
        out.push_back(c);
    }
    return out;
}

void criterion_log_grammar() {
    Check check;

    LogLine saiu;
    saiu.direction = PresenceDirection::Exited;
    saiu.known = false;
    saiu.device = DeviceId::parse("34:C8:03:F6:F3:A8");
    saiu.at = 1374750177000;
    saiu.coord = GeoPoint{38.738522, -9.1543572};
    LogLine entrou = saiu;
    entrou.direction = PresenceDirection::Entered;
    entrou.name = "Jj";
    entrou.at = 1374750184000;

    const std::string reference_saiu =
        "Saiu desconhecido - 34:C8:03:F6:F3:A8           Time: 25/07/2013 "
        "11:02:57.000      Coord: 38.738522;-9.1543572";
    const std::string reference_entrou =
        "Entrou desconhecido - Jj 34:C8:03:F6:F3:A8      Time: 25/07/2013 "
        "11:03:04.000      Coord: 38.738522;-9.1543572";
    if (collapse_ws(render_log_line(saiu)) != collapse_ws(reference_saiu)) {
        check.fail("Saiu line: got '" + render_log_line(saiu) + "'");
    }
    if (collapse_ws(render_log_line(entrou)) != collapse_ws(reference_entrou)) {
        check.fail("Entrou line: got '" + render_log_line(entrou) + "'");
    }

    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> lat(-90.0, 90.0);
    std::uniform_real_distribution<double> lon(-180.0, 180.0);
    static const char* names[] = {"Jj", "Nokia-3310", "fonte", "tag-2"};
    std::size_t round_trips = 0;
    for (int i = 0; i < 10'000; ++i) {
        LogLine line;
        line.direction =
            rng() % 2 == 0 ? PresenceDirection::Entered : PresenceDirection::Exited;
        line.known = rng() % 2 == 0;
        if (rng() % 3 == 0) line.name = names[rng() % 4];
        char mac[18];
        std::snprintf(mac, sizeof(mac), "%02X:%02X:%02X:%02X:%02X:%02X",
                      unsigned(rng() % 256), unsigned(rng() % 256),
                      unsigned(rng() % 256), unsigned(rng() % 256),
                      unsigned(rng() % 256), unsigned(rng() % 256));
        line.device = DeviceId::parse(mac);
        line.at = static_cast<TimestampMs>(rng() % 4'102'444'800'000ull);
        line.coord = GeoPoint{lat(rng), lon(rng)};

        const std::string text = render_log_line(line);
        const ParsedLog parsed = parse_log(text);
        if (!parsed.issues.empty() || parsed.lines.size() != 1 ||
            !(parsed.lines[0] == line) || render_log_line(parsed.lines[0]) != text) {
            check.fail("round trip broke for: " + text);
            break;
        }
        ++round_trips;
    }
    report(3, "log-grammar", check.ok,
           check.ok ? "sample lines byte-exact, " + std::to_string(round_trips) +
                          " generated round trips"
                    : check.why);
}

// --- 4. hysteresis property ------------------------------------------------------

void criterion_hysteresis() {
    Check check;
    std::mt19937_64 rng(104);
    std::size_t traces = 0;
    for (int trial = 0; trial < 1'000 && check.ok; ++trial) {
        const int k = 1 + static_cast<int>(rng() % 4);
        PresenceEngine engine(PresenceConfig{k});
        PrivacyState privacy;
        std::map<DeviceId, ContactAssociation> assoc;
        std::set<DeviceId> blocked_by;
        const PresenceFilter filter{&privacy, &assoc, &blocked_by};
        const DeviceId target = dev(1);

        int gap = 0, longest_gap = 0, entered = 0, exited = 0;
        bool open = false;
        TimestampMs t = 0;
        const int steps = 40 + static_cast<int>(rng() % 120);
        for (int step = 0; step < steps; ++step) {
            const bool visible = rng() % 2 == 0;
            gap = visible ? 0 : gap + 1;
            longest_gap = std::max(longest_gap, gap);
            for (const PresenceEvent& e : engine.process_scan(
                     see(t, visible ? std::initializer_list<DeviceId>{target}
                                    : std::initializer_list<DeviceId>{}),
                     filter, GeoPoint{})) {
                if (e.kind == PresenceDirection::Entered) {
                    if (open) check.fail("two consecutive Entered");
                    open = true;
                    ++entered;
                } else {
                    if (!open) check.fail("Exited without Entered");
                    open = false;
                    ++exited;
                }
            }
            t += 30'000;
        }
        if (longest_gap < k && exited > 0) {
            check.fail("Exited despite absence shorter than K=" + std::to_string(k));
        }
        if (entered - exited != (open ? 1 : 0)) check.fail("alternation imbalance");
        ++traces;
    }
    report(4, "hysteresis-property", check.ok,
           check.ok ? std::to_string(traces) + " randomized flap traces" : check.why);
}

// --- 5. geofence oracle ------------------------------------------------------------

void criterion_geofence_oracle() {
    Check check;
    const GeoPoint a{38.738522, -9.1543572};
    if (geo_distance(a, a) != 0.0) check.fail("coincident points not exactly 0");
    const double millideg = geo_distance(a, GeoPoint{38.739522, -9.1543572});
    if (std::abs(millideg - 111.19) > 0.1) {
        check.fail("0.001 deg latitude gave " + std::to_string(millideg));
    }

    const double rad = 3.14159265358979323846 / 180.0;
    std::mt19937_64 rng(105);
    std::uniform_real_distribution<double> lat(-65.0, 65.0);
    std::uniform_real_distribution<double> lon(-179.0, 179.0);
    std::uniform_real_distribution<double> dlat(-8.0, 8.0);
    std::size_t pairs = 0;
    double worst = 0.0;
    while (pairs < 10'000 && check.ok) {
        const GeoPoint p{lat(rng), lon(rng)};
        const GeoPoint q = GeoPoint::clamped(p.lat + dlat(rng), p.lon + dlat(rng));
        const double d = geo_distance(p, q);
        if (d > 1'000'000.0 || d < 0.5) continue;
        const double oracle =
            kEarthRadiusM *
            std::acos(std::clamp(std::sin(p.lat * rad) * std::sin(q.lat * rad) +
                                     std::cos(p.lat * rad) * std::cos(q.lat * rad) *
                                         std::cos((q.lon - p.lon) * rad),
                                 -1.0, 1.0));
        const double rel = std::abs(d - oracle) / std::max(oracle, 1e-9);
        worst = std::max(worst, rel);
        if (rel >= 0.005) {
            check.fail("relative error " + std::to_string(rel) + " at distance " +
                       std::to_string(d));
        }
        ++pairs;
    }
    std::ostringstream detail;
    detail << pairs << " pairs under 1000 km, worst relative error "
           << std::scientific << worst;
    report(5, "geofence-oracle", check.ok, check.ok ? detail.str() : check.why);
}

// --- 6. sync convergence --------------------------------------------------------------

void criterion_convergence() {
    Check check;
    std::mt19937_64 rng(106);
    std::size_t schedules = 0;

    for (int trial = 0; trial < 500 && check.ok; ++trial) {
        const int n = 3;
        Broker broker;
        std::vector<std::unique_ptr<ClientEngine>> clients;
        std::vector<std::unique_ptr<FlakyLink>> links;
        for (int i = 0; i < n; ++i) {
            clients.push_back(
                std::make_unique<ClientEngine>(ClientStore::in_memory(dev(i)), ClientConfig{}));
            links.push_back(std::make_unique<FlakyLink>(broker));
            links.back()->up = rng() % 2 == 0;
        }
        // every client knows every other device as contact id 10+j
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                clients[i]->associate_contact(10 + j, "peer", dev(j), 0);
            }
        }

        auto pump = [&](int i) {
            try {
                clients[i]->sync_with(*links[i], 0, nullptr);
            } catch (const LinkDown&) {
            }
        };

        // ground truth: note id -> set of addressed recipient devices
        std::map<std::string, std::set<int>> addressed;
        std::map<std::string, int> creator_of;
        std::vector<NoteId> sendable;

        const int ops = 15 + static_cast<int>(rng() % 25);
        for (int op = 0; op < ops; ++op) {
            const int i = static_cast<int>(rng() % n);
            switch (rng() % 6) {
                case 0: {  // create a note (sometimes with a trigger)
                    const NoteId id =
                        rng() % 2 == 0
                            ? clients[i]->create_text_note("t", op)
                            : clients[i]->create_audio_note({0x01}, 900, op);
                    if (rng() % 2 == 0) {
                        clients[i]->attach_person_trigger(id, 10 + ((i + 1) % n), op);
                    }
                    sendable.push_back(id);
                    creator_of[id.str()] = i;
                    break;
                }
                case 1: {  // send a not-yet-sent note to a random recipient set
                    if (sendable.empty()) break;
                    const std::size_t pick = rng() % sendable.size();
                    const NoteId id = sendable[pick];
                    const int creator = creator_of[id.str()];
                    std::set<ContactId> recipients;
                    std::set<int> devices;
                    for (int j = 0; j < n; ++j) {
                        if (j != creator && rng() % 2 == 0) {
                            recipients.insert(10 + j);
                            devices.insert(j);
                        }
                    }
                    if (recipients.empty()) {
                        recipients.insert(10 + ((creator + 1) % n));
                        devices.insert((creator + 1) % n);
                    }
                    clients[creator]->send_note(id, recipients, op);
                    addressed[id.str()] = devices;
                    sendable.erase(sendable.begin() +
                                   static_cast<std::ptrdiff_t>(pick));
                    break;
                }
                case 2:  // connectivity flaps
                    links[rng() % n]->up = rng() % 2 == 0;
                    break;
                case 3:  // spontaneous sync attempt
                    pump(static_cast<int>(rng() % n));
                    break;
                case 4: {  // edit a random note body
                    const auto notes = clients[i]->store().list_notes();
                    if (!notes.empty()) {
                        clients[i]->store().update_note_body(
                            notes[rng() % notes.size()].id, TextBody{"edit"});
                    }
                    break;
                }
                case 5: {  // save a location (syncable row churn)
                    clients[i]->store().save_outdoor_location(
                        "spot", GeoPoint{38.7, -9.15});
                    break;
                }
            }
        }

        // the schedule ends with every link up and rounds until quiescence
        for (auto& link : links) link->up = true;
        for (int round = 0; round < 20; ++round) {
            for (int i = 0; i < n; ++i) pump(i);
        }

        // convergence checks
        for (int i = 0; i < n; ++i) {
            if (clients[i]->store().has_dirty_rows()) {
                check.fail("client " + std::to_string(i) + " still dirty");
            }
        }
        if (broker.total_pending() != 0) check.fail("broker queues not drained");

        std::map<std::string, Note> broker_shared;
        for (const Note& note : broker.shared_notes()) {
            broker_shared.emplace(note.id.str(), note);
        }
        if (broker_shared.size() != addressed.size()) {
            check.fail("broker has " + std::to_string(broker_shared.size()) +
                       " shared notes, clients created " +
                       std::to_string(addressed.size()));
        }
        for (const auto& [key, recipients] : addressed) {
            const auto it = broker_shared.find(key);
            if (it == broker_shared.end()) {
                check.fail("note " + key + " missing at broker");
                continue;
            }
            // content equality with the creator's copy
            const Note creator_note =
                clients[creator_of[key]]->store().get_note(NoteId::parse(key));
            if (note_to_json(it->second) != note_to_json(creator_note)) {
                check.fail("note " + key + " diverged at broker");
            }
            for (int j : recipients) {
                std::size_t copies = 0;
                for (const ReceivedNote& r : clients[j]->store().list_received_notes()) {
                    if (r.id.str() == key) ++copies;
                }
                if (copies != 1) {
                    check.fail("note " + key + " delivered " +
                               std::to_string(copies) + "x to device " +
                               std::to_string(j));
                }
            }
        }
        // no unaddressed deliveries
        for (int j = 0; j < n; ++j) {
            for (const ReceivedNote& r : clients[j]->store().list_received_notes()) {
                const auto it = addressed.find(r.id.str());
                if (it == addressed.end() || !it->second.contains(j)) {
                    check.fail("device " + std::to_string(j) +
                               " received unaddressed note " + r.id.str());
                }
            }
        }
        ++schedules;
    }
    report(6, "sync-convergence", check.ok,
           check.ok ? std::to_string(schedules) + " randomized partition schedules"
                    : check.why);
}

// --- 7. block invariant ------------------------------------------------------------

void criterion_block_invariant() {
    Check check;
    std::mt19937_64 rng(107);
    std::size_t traces = 0;
    for (int trial = 0; trial < 200 && check.ok; ++trial) {
        Broker broker;
        ClientEngine blocker(ClientStore::in_memory(dev(1)), {});
        ClientEngine observer(ClientStore::in_memory(dev(2)), {});
        FlakyLink blocker_link(broker), observer_link(broker);
        blocker.sync_with(blocker_link, 0, nullptr);
        observer.sync_with(observer_link, 0, nullptr);

        TimestampMs t = 1'000;
        const auto scan_observer = [&](bool sees_blocker) {
            const auto events =
                sees_blocker ? observer.on_scan(see(t, {dev(1)}), GeoPoint{}, nullptr)
                             : observer.on_scan(see(t, {}), GeoPoint{}, nullptr);
            t += 30'000;
            return events;
        };

        const int pre = static_cast<int>(rng() % 6);
        for (int s = 0; s < pre; ++s) scan_observer(rng() % 2 == 0);

        blocker.associate_contact(5, "observer", dev(2), t);
        blocker.block_contact(5, t);
        blocker.sync_with(blocker_link, t, nullptr);

        // the notice may sit queued for a while (eventual semantics)
        const int limbo = static_cast<int>(rng() % 5);
        for (int s = 0; s < limbo; ++s) scan_observer(rng() % 2 == 0);

        observer.sync_with(observer_link, t, nullptr);  // BlockNotice applies here
        const TimestampMs applied_at = t;

        const int post = 3 + static_cast<int>(rng() % 8);
        for (int s = 0; s < post; ++s) scan_observer(true);

        for (const PresenceEvent& e : observer.store().detections()) {
            if (e.device == dev(1) && e.at > applied_at) {
                check.fail("event for the blocker at " + std::to_string(e.at) +
                           " after application at " + std::to_string(applied_at));
            }
        }
        if (!observer.store().blocked_by().contains(dev(1))) {
            check.fail("block notice never reached the observer");
        }
        ++traces;
    }
    report(7, "block-invariant", check.ok,
           check.ok ? std::to_string(traces) + " randomized block traces" : check.why);
}

// --- 8. dedup properties ---------------------------------------------------------------

void criterion_dedup() {
    Check check;
    std::mt19937_64 rng(108);

    // per-note: firings happen exactly at false->true edges of the condition
    for (int trial = 0; trial < 300 && check.ok; ++trial) {
        TriggerEvaluator eval;
        CompiledTriggers triggers;
        triggers.person_category = true;
        triggers.person_devices.insert(dev(1));
        const EvalNote note{"o|x", NoteId{dev(1), 1}, triggers, false};

        bool prev = false;
        TimestampMs t = 0;
        const int steps = 30 + static_cast<int>(rng() % 60);
        for (int s = 0; s < steps; ++s) {
            const bool present = rng() % 2 == 0;
            TriggerContext ctx;
            ctx.now = t;
            if (present) ctx.open_sessions.emplace(dev(1), 7);
            const auto fired = eval.evaluate({note}, ctx);
            const bool expect_fire = present && !prev;
            if (fired.size() != (expect_fire ? 1u : 0u)) {
                check.fail("firing did not match the condition edge");
            }
            prev = present;
            t += 30'000;
        }
    }

    // per-person: one PersonNearby per presence session
    for (int trial = 0; trial < 200 && check.ok; ++trial) {
        ClientEngine engine(ClientStore::in_memory(dev(9)), {});
        TimestampMs t = 0;
        const int steps = 40 + static_cast<int>(rng() % 80);
        for (int s = 0; s < steps; ++s) {
            const bool visible = rng() % 2 == 0;
            engine.on_scan(visible ? see(t, {dev(1)}) : see(t, {}), GeoPoint{},
                           nullptr);
            t += 30'000;
        }
        std::size_t person_notifications = 0;
        for (const Notification& n : engine.store().notifications()) {
            if (std::holds_alternative<PersonNearby>(n.kind)) ++person_notifications;
        }
        if (person_notifications != engine.sessions().size()) {
            check.fail("nearby notifications " + std::to_string(person_notifications) +
                       " != sessions " + std::to_string(engine.sessions().size()));
        }
    }
    report(8, "dedup-properties", check.ok,
           check.ok ? "500 randomized traces (note edges + per-session nearby)"
                    : check.why);
}

// --- 9. determinism -------------------------------------------------------------------

void criterion_determinism(const std::filesystem::path& scenarios_dir) {
    Check check;
    const auto scenario_path = scenarios_dir / "3_8_2_6_conjunction.scn";
    if (!std::filesystem::exists(scenario_path)) {
        check.fail("missing scenario " + scenario_path.string());
        report(9, "determinism", check.ok, check.why);
        return;
    }
    const Scenario scenario = load_scenario(scenario_path);
    const auto base = std::filesystem::temp_directory_path() / "nearnote_acceptance";
    std::filesystem::remove_all(base);
    const auto dir_a = base / "run_a";
    const auto dir_b = base / "run_b";
    ScenarioOverrides overrides;
    overrides.seed = 42;
    run_scenario(scenario, overrides, dir_a);
    run_scenario(scenario, overrides, dir_b);

    std::vector<std::string> names_a, names_b;
    for (const auto& e : std::filesystem::directory_iterator(dir_a)) {
        names_a.push_back(e.path().filename().string());
    }
    for (const auto& e : std::filesystem::directory_iterator(dir_b)) {
        names_b.push_back(e.path().filename().string());
    }
    std::sort(names_a.begin(), names_a.end());
    std::sort(names_b.begin(), names_b.end());
    if (names_a != names_b || names_a.empty()) check.fail("trace listings differ");
    std::size_t bytes = 0;
    for (const std::string& name : names_a) {
        auto slurp = [](const std::filesystem::path& p) {
            std::ifstream in(p, std::ios::binary);
            return std::string((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
        };
        const std::string a = slurp(dir_a / name);
        const std::string b = slurp(dir_b / name);
        if (a != b) check.fail("trace file differs: " + name);
        bytes += a.size();
    }
    std::filesystem::remove_all(base);
    report(9, "determinism", check.ok,
           check.ok ? std::to_string(names_a.size()) + " trace files, " +
                          std::to_string(bytes) + " bytes byte-identical"
                    : check.why);
}

// --- 10. end-to-end log fidelity ----------------------------------------------------------

void criterion_log_fidelity(const std::filesystem::path& scenarios_dir) {
    Check check;
    std::size_t devices = 0, sessions = 0;
    for (const char* name :
         {"3_8_2_6_conjunction.scn", "3_8_2_2_contact_note.scn"}) {
        const auto path = scenarios_dir / name;
        if (!std::filesystem::exists(path)) {
            check.fail("missing scenario " + path.string());
            continue;
        }
        ScenarioOverrides overrides;
        overrides.seed = 1;
        const ScenarioOutcome outcome = run_scenario(load_scenario(path), overrides);
        for (const auto& [alias, engine_sessions] : outcome.sessions_by_alias) {
            const std::string& log_text = outcome.detections_by_alias.at(alias);
            const ParsedLog parsed = parse_log(log_text);
            if (!parsed.issues.empty()) {
                check.fail(alias + ": exported log has malformed lines");
                continue;
            }
            const ReconstructionResult rec = reconstruct_sessions(parsed.lines);
            if (!(rec.sessions == engine_sessions)) {
                check.fail(alias + ": reconstructed " +
                           std::to_string(rec.sessions.size()) +
                           " sessions, engine kept " +
                           std::to_string(engine_sessions.size()));
            }
            ++devices;
            sessions += engine_sessions.size();
        }
    }
    report(10, "log-fidelity", check.ok,
           check.ok ? std::to_string(devices) + " device logs, " +
                          std::to_string(sessions) + " sessions recovered exactly"
                    : check.why);
}

}  // namespace

int main(int argc, char** argv) {
    const std::filesystem::path scenarios_dir = argc > 1 ? argv[1] : "scenarios";
    const auto started = std::chrono::steady_clock::now();

    criterion_scenarios(scenarios_dir);
    criterion_feedback();
    criterion_log_grammar();
    criterion_hysteresis();
    criterion_geofence_oracle();
    criterion_convergence();
    criterion_block_invariant();
    criterion_dedup();
    criterion_determinism(scenarios_dir);
    criterion_log_fidelity(scenarios_dir);

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
            .count();
    std::printf("%s — 10 criteria, %.2fs\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
                seconds);
    return g_failures == 0 ? 0 : 1;
}
