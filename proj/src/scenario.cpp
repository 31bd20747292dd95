#include "nearnote/scenario.hpp"

#include <charconv>
#include <fstream>

#include "nearnote/errors.hpp"
#include "nearnote/json_codec.hpp"

#include <nlohmann/json.hpp>

namespace nearnote {

namespace {

std::vector<std::string> tokenize(const std::string& line, std::size_t lineno) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            continue;
        }
        if (c == '#') break;
        if (c == '"') {
            std::string tok;
            ++i;
            while (i < line.size() && line[i] != '"') {
                tok.push_back(line[i]);
                ++i;
            }
            if (i >= line.size()) {
                throw ScriptError(lineno, "unterminated string");
            }
            ++i;  // closing quote
            tokens.push_back(std::move(tok));
            continue;
        }
        std::string tok;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' &&
               line[i] != '#' && line[i] != '\r') {
            tok.push_back(line[i]);
            ++i;
        }
        tokens.push_back(std::move(tok));
    }
    return tokens;
}

TimestampMs need_datetime(const std::vector<std::string>& tok, std::size_t i,
                          std::size_t lineno) {
    if (i + 1 >= tok.size()) {
        throw ScriptError(lineno, "expected date and time");
    }
    const auto t = parse_datetime(tok[i], tok[i + 1]);
    if (!t) {
        throw ScriptError(lineno, "bad date/time '" + tok[i] + " " + tok[i + 1] + "'");
    }
    return *t;
}

double need_double(const std::string& tok, std::size_t lineno) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
        throw ScriptError(lineno, "bad number '" + tok + "'");
    }
    return v;
}

std::int64_t need_int(const std::string& tok, std::size_t lineno) {
    std::int64_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
        throw ScriptError(lineno, "bad integer '" + tok + "'");
    }
    return v;
}

std::optional<std::int64_t> try_int(const std::string& tok) {
    std::int64_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
        return std::nullopt;
    }
    return v;
}

// "90s", "1500ms", "2m", "1h"
TimestampMs parse_duration(const std::string& tok, std::size_t lineno) {
    std::size_t unit_start = tok.size();
    while (unit_start > 0 &&
           !(tok[unit_start - 1] >= '0' && tok[unit_start - 1] <= '9')) {
        --unit_start;
    }
    const std::string number = tok.substr(0, unit_start);
    const std::string unit = tok.substr(unit_start);
    const std::int64_t n = need_int(number, lineno);
    if (unit == "ms") return n;
    if (unit == "s" || unit.empty()) return n * 1'000;
    if (unit == "m") return n * 60'000;
    if (unit == "h") return n * 3'600'000;
    throw ScriptError(lineno, "bad duration unit '" + unit + "'");
}

bool need_on_off(const std::string& tok, std::size_t lineno) {
    if (tok == "on") return true;
    if (tok == "off") return false;
    throw ScriptError(lineno, "expected 'on' or 'off', got '" + tok + "'");
}

const std::set<std::string> kStepVerbs = {
    "move",       "advance",        "associate",  "note",      "attach-person",
    "detach-person", "attach-location", "detach-location", "window", "carrier",
    "send",       "save-location",  "location-indoor", "ignore", "unignore",
    "block",      "unblock",        "silent",     "invisible", "advertise",
    "link",       "expect-near"};

const std::set<std::string> kExpectVerbs = {"expect", "expect-none", "expect-count"};

}  // namespace

Scenario parse_scenario(const std::string& text) {
    Scenario scenario;
    std::set<std::string> actor_aliases;
    std::set<std::string> note_aliases;
    std::set<std::string> location_aliases;
    bool steps_started = false;

    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string line =
            std::string(text.substr(pos, nl == std::string::npos ? text.size() - pos
                                                                 : nl - pos));
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++lineno;

        auto tok = tokenize(line, lineno);
        if (tok.empty()) continue;

        // setup statements
        if (tok[0] == "name") {
            if (tok.size() != 2) throw ScriptError(lineno, "name takes one token");
            scenario.name = tok[1];
            continue;
        }
        if (tok[0] == "config") {
            if (tok.size() != 3) throw ScriptError(lineno, "config takes key value");
            const std::string& key = tok[1];
            if (key == "radio_range_m") {
                scenario.config.radio_range_m = need_double(tok[2], lineno);
            } else if (key == "scan_period_s") {
                scenario.config.scan_period_ms = need_int(tok[2], lineno) * 1'000;
            } else if (key == "scan_period_ms") {
                scenario.config.scan_period_ms = need_int(tok[2], lineno);
            } else if (key == "exit_after_missed") {
                scenario.config.exit_after_missed =
                    static_cast<int>(need_int(tok[2], lineno));
            } else if (key == "geofence_radius_m") {
                scenario.config.geofence_radius_m = need_double(tok[2], lineno);
            } else if (key == "text_note_pause_ms") {
                scenario.config.text_note_pause_ms = need_int(tok[2], lineno);
            } else if (key == "gps_jitter_max_m") {
                scenario.config.gps_jitter_max_m = need_double(tok[2], lineno);
            } else if (key == "seed") {
                scenario.config.seed =
                    static_cast<std::uint64_t>(need_int(tok[2], lineno));
            } else {
                throw ScriptError(lineno, "unknown config key '" + key + "'");
            }
            continue;
        }
        if (tok[0] == "clock") {
            scenario.start_clock = need_datetime(tok, 1, lineno);
            continue;
        }
        if (tok[0] == "device" || tok[0] == "peer" || tok[0] == "beacon") {
            if (tok.size() != 5) {
                throw ScriptError(lineno, tok[0] + " takes: alias mac lat lon");
            }
            if (steps_started) {
                throw ScriptError(lineno, "actor declarations must precede steps");
            }
            if (!actor_aliases.insert(tok[1]).second) {
                throw ScriptError(lineno, "duplicate actor alias '" + tok[1] + "'");
            }
            Scenario::Actor actor;
            actor.alias = tok[1];
            const auto id = DeviceId::try_parse(tok[2]);
            if (!id) throw ScriptError(lineno, "bad device id '" + tok[2] + "'");
            actor.device = *id;
            actor.pos = GeoPoint::checked(need_double(tok[3], lineno),
                                          need_double(tok[4], lineno));
            actor.engine = tok[0] == "device";
            scenario.actors.push_back(std::move(actor));
            continue;
        }

        // steps and expectations
        ScenarioStep step;
        step.lineno = lineno;
        std::size_t i = 0;
        if (tok[0] == "at") {
            step.at = need_datetime(tok, 1, lineno);
            i = 3;
            if (i >= tok.size()) throw ScriptError(lineno, "expected a step after 'at'");
        }
        step.verb = tok[i];
        step.args.assign(tok.begin() + static_cast<std::ptrdiff_t>(i) + 1, tok.end());

        if (kExpectVerbs.contains(step.verb)) {
            if (step.at) {
                throw ScriptError(lineno, "expectations do not take an 'at' prefix");
            }
            scenario.expectations.push_back(std::move(step));
            continue;
        }
        if (!kStepVerbs.contains(step.verb)) {
            throw ScriptError(lineno, "unknown statement '" + step.verb + "'");
        }
        steps_started = true;

        // structural checks that do not need run-time state
        const auto& a = step.args;
        auto need_args = [&](std::size_t n, const char* usage) {
            if (a.size() != n) throw ScriptError(lineno, std::string("usage: ") + usage);
        };
        if (step.verb == "move") {
            need_args(3, "move <alias> <lat> <lon>");
            need_double(a[1], lineno);
            need_double(a[2], lineno);
        } else if (step.verb == "advance") {
            if (!step.at) throw ScriptError(lineno, "advance needs an 'at' prefix");
            need_args(0, "at <date> <time> advance");
        } else if (step.verb == "associate") {
            need_args(4, "associate <owner> <peer> <contact_id> \"<name>\"");
            need_int(a[2], lineno);
        } else if (step.verb == "note") {
            if (a.size() == 4 && a[2] == "text") {
            } else if (a.size() == 4 && a[2] == "audio") {
                need_int(a[3], lineno);
            } else {
                throw ScriptError(
                    lineno, "usage: note <owner> <alias> text \"...\" | audio <ms>");
            }
            if (!note_aliases.insert(a[1]).second) {
                throw ScriptError(lineno, "duplicate note alias '" + a[1] + "'");
            }
        } else if (step.verb == "attach-person" || step.verb == "detach-person" ||
                   step.verb == "carrier") {
            need_args(3, "attach-person <owner> <note> <peer-or-contact>");
            if (!note_aliases.contains(a[1])) {
                throw ScriptError(lineno, "unknown note alias '" + a[1] + "'");
            }
        } else if (step.verb == "attach-location" || step.verb == "detach-location") {
            need_args(3, "attach-location <owner> <note> <location>");
            if (!note_aliases.contains(a[1])) {
                throw ScriptError(lineno, "unknown note alias '" + a[1] + "'");
            }
            if (!location_aliases.contains(a[2])) {
                throw ScriptError(lineno, "unknown location alias '" + a[2] + "'");
            }
        } else if (step.verb == "window") {
            need_args(6, "window <owner> <note> <d1> <t1> <d2> <t2>");
            need_datetime(a, 2, lineno);
            need_datetime(a, 4, lineno);
        } else if (step.verb == "send") {
            if (a.size() < 3) {
                throw ScriptError(lineno, "usage: send <owner> <note> <recipient>...");
            }
            if (!note_aliases.contains(a[1])) {
                throw ScriptError(lineno, "unknown note alias '" + a[1] + "'");
            }
        } else if (step.verb == "save-location") {
            need_args(3, "save-location <owner> <alias> \"<label>\"");
            if (!location_aliases.insert(a[1]).second) {
                throw ScriptError(lineno, "duplicate location alias '" + a[1] + "'");
            }
        } else if (step.verb == "location-indoor") {
            need_args(4, "location-indoor <owner> <alias> \"<label>\" <beacon>");
            if (!location_aliases.insert(a[1]).second) {
                throw ScriptError(lineno, "duplicate location alias '" + a[1] + "'");
            }
        } else if (step.verb == "ignore") {
            need_args(5, "ignore <owner> <who> until <date> <time>");
            if (a[2] != "until") throw ScriptError(lineno, "expected 'until'");
            need_datetime(a, 3, lineno);
        } else if (step.verb == "unignore" || step.verb == "block" ||
                   step.verb == "unblock") {
            need_args(2, "block <owner> <who>");
        } else if (step.verb == "silent" || step.verb == "invisible" ||
                   step.verb == "advertise") {
            need_args(2, "silent <alias> on|off");
            need_on_off(a[1], lineno);
        } else if (step.verb == "link") {
            need_args(2, "link <owner> up|down");
            if (a[1] != "up" && a[1] != "down") {
                throw ScriptError(lineno, "expected 'up' or 'down'");
            }
        } else if (step.verb == "expect-near") {
            need_args(2, "expect-near <owner> <count>");
            need_int(a[1], lineno);
        }
        scenario.steps.push_back(std::move(step));
    }

    // structural validation of expectations
    for (const ScenarioStep& e : scenario.expectations) {
        const auto& a = e.args;
        if (e.verb == "expect") {
            if (a.size() != 8 || (a[1] != "fired" && a[1] != "nearby") ||
                a[3] != "at" || a[6] != "tol") {
                throw ScriptError(
                    e.lineno,
                    "usage: expect <dev> fired|nearby <ref> at <d> <t> tol <dur>");
            }
            need_datetime(a, 4, e.lineno);
            parse_duration(a[7], e.lineno);
        } else if (e.verb == "expect-none") {
            if (a.size() != 9 || (a[1] != "fired" && a[1] != "nearby") ||
                a[3] != "from" || a[6] != "to") {
                throw ScriptError(
                    e.lineno,
                    "usage: expect-none <dev> fired|nearby <ref> from <d> <t> to <d> "
                    "<t>");
            }
            need_datetime(a, 4, e.lineno);
            need_datetime(a, 7, e.lineno);
        } else if (e.verb == "expect-count") {
            if (a.size() != 4 || (a[1] != "fired" && a[1] != "nearby")) {
                throw ScriptError(e.lineno,
                                  "usage: expect-count <dev> fired|nearby <ref> <n>");
            }
            need_int(a[3], e.lineno);
        }
    }
    return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in.good()) {
        throw Error("cannot read scenario file: " + path.string());
    }
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_scenario(text);
}

namespace {

struct RunState {
    Simulation* sim = nullptr;
    std::map<std::string, Scenario::Actor> actors_by_alias;
    std::map<std::string, NoteId> notes;  // alias -> id
    std::map<std::string, std::pair<DeviceId, LocationId>> locations;
    std::vector<ScenarioCheck> checks;

    const Scenario::Actor& actor(const std::string& alias, std::size_t lineno) const {
        const auto it = actors_by_alias.find(alias);
        if (it == actors_by_alias.end()) {
            throw ScriptError(lineno, "unknown actor '" + alias + "'");
        }
        return it->second;
    }
    ClientEngine& engine(const std::string& alias, std::size_t lineno) {
        const Scenario::Actor& a = actor(alias, lineno);
        if (!a.engine) {
            throw ScriptError(lineno, "'" + alias + "' has no engine (peer/beacon)");
        }
        return sim->client(a.device);
    }
    ContactId contact_of(const std::string& owner, const std::string& who,
                         std::size_t lineno) {
        if (auto n = try_int(who)) return *n;
        const Scenario::Actor& peer = actor(who, lineno);
        ClientEngine& eng = engine(owner, lineno);
        const auto assoc = eng.store().association_by_device(peer.device);
        if (!assoc) {
            throw ScriptError(lineno, "'" + owner + "' has no association for '" +
                                          who + "'");
        }
        return assoc->contact_id;
    }
    NoteId note(const std::string& alias, std::size_t lineno) const {
        const auto it = notes.find(alias);
        if (it == notes.end()) {
            throw ScriptError(lineno, "unknown note alias '" + alias + "'");
        }
        return it->second;
    }
};

std::string step_label(const ScenarioStep& step) {
    std::string label = step.verb;
    for (const std::string& a : step.args) {
        label.push_back(' ');
        label += a.find(' ') == std::string::npos ? a : "\"" + a + "\"";
    }
    return label;
}

void execute_step(RunState& st, const ScenarioStep& step) {
    Simulation& sim = *st.sim;
    const TimestampMs now = sim.world().clock();
    const auto& a = step.args;

    if (step.verb == "move") {
        const auto& actor = st.actor(a[0], step.lineno);
        const GeoPoint pos = GeoPoint::checked(need_double(a[1], step.lineno),
                                               need_double(a[2], step.lineno));
        sim.world().move_device(actor.device, pos);
        if (actor.engine) sim.client(actor.device).set_position(pos);
    } else if (step.verb == "advance") {
        // the 'at' prefix already advanced the clock
    } else if (step.verb == "associate") {
        const auto& peer = st.actor(a[1], step.lineno);
        ClientEngine& eng = st.engine(a[0], step.lineno);
        eng.associate_contact(need_int(a[2], step.lineno), a[3], peer.device, now);
        sim.pump_sync(eng.device());
    } else if (step.verb == "note") {
        ClientEngine& eng = st.engine(a[0], step.lineno);
        NoteId id = a[2] == "text"
                        ? eng.create_text_note(a[3], now)
                        : eng.create_audio_note({0xA0, 0xD1, 0x0F},
                                                need_int(a[3], step.lineno), now);
        st.notes.emplace(a[1], std::move(id));
        sim.pump_sync(eng.device());
    } else if (step.verb == "attach-person") {
        ClientEngine& eng = st.engine(a[0], step.lineno);
        eng.attach_person_trigger(st.note(a[1], step.lineno),
                                  st.contact_of(a[0], a[2], step.lineno), now);
        sim.pump_sync(eng.device());
    } else if (step.verb == "detach-person") {
        ClientEngine& eng = st.engine(a[0], step.lineno);
        eng.detach_person_trigger(st.note(a[1], step.lineno),
                                  st.contact_of(a[0], a[2], step.lineno), now);
        sim.pump_sync(eng.device());
    } else if (step.verb == "attach-location") {
        ClientEngine& eng = st.engine(a[0], step.lineno);
        const auto it = st.locations.find(a[2]);
        if (it == st.locations.end() || !(it->second.first == eng.device())) {
            throw ScriptError(step.lineno,
                              "location '" + a[2] + "' does not belong to " + a[0]);
        }
        eng.attach_location_trigger(st.note(a[1], step.lineno), it->second.second, now);
        sim.pump_sync(eng.device());
    } else if (step.verb == "detach-location") {
        ClientEngine& eng = st.engine(a[0], step.lineno);
        const auto it = st.locations.find(a[2]);
        if (it == st.locations.end()) {
            throw ScriptError(step.lineno, "unknown location '" + a[2] + "'");
        }
        eng.detach_location_trigger(st.note(a[1], step.lineno), it->second.second, now);
        sim.pump_sync(eng.device());
    } else if (step.verb == "window") {
        ClientEngine& eng = st.engine(a[0], step.lineno);
        const TimeWindow window{need_datetime(a, 2, step.lineno),
                                need_datetime(a, 4, step.lineno)};
        eng.set_note_window(st.note(a[1], step.lineno), window, now);
        sim.pump_sync(eng.device());
    } else if (step.verb == "carrier") {
        ClientEngine& eng = st.engine(a[0], step.lineno);
        eng.set_note_carrier(st.note(a[1], step.lineno),
                             st.contact_of(a[0], a[2], step.lineno), now);
        sim.pump_sync(eng.device());
    } else if (step.verb == "send") {
        ClientEngine& eng = st.engine(a[0], step.lineno);
        std::set<ContactId> recipients;
        for (std::size_t r = 2; r < a.size(); ++r) {
            recipients.insert(st.contact_of(a[0], a[r], step.lineno));
        }
        eng.send_note(st.note(a[1], step.lineno), recipients, now);
        sim.pump_sync(eng.device());
    } else if (step.verb == "save-location") {
        ClientEngine& eng = st.engine(a[0], step.lineno);
        eng.set_position(sim.world().position(eng.device()));
        const LocationDef def = eng.save_current_location(a[2], now);
        st.locations.emplace(a[1], std::make_pair(eng.device(), def.location_id));
        sim.pump_sync(eng.device());
    } else if (step.verb == "location-indoor") {
        ClientEngine& eng = st.engine(a[0], step.lineno);
        DeviceId beacon = [&] {
            if (auto id = DeviceId::try_parse(a[3])) return *id;
            return st.actor(a[3], step.lineno).device;
        }();
        const LocationDef def = eng.store().save_indoor_location(a[2], beacon);
        eng.record_action("locations", GestureCommand::LongPress, now);
        st.locations.emplace(a[1], std::make_pair(eng.device(), def.location_id));
        sim.pump_sync(eng.device());
    } else if (step.verb == "ignore") {
        ClientEngine& eng = st.engine(a[0], step.lineno);
        eng.ignore_contact(st.contact_of(a[0], a[1], step.lineno),
                           need_datetime(a, 3, step.lineno), now);
        sim.pump_sync(eng.device());
    } else if (step.verb == "unignore") {
        ClientEngine& eng = st.engine(a[0], step.lineno);
        eng.unignore_contact(st.contact_of(a[0], a[1], step.lineno), now);
        sim.pump_sync(eng.device());
    } else if (step.verb == "block") {
        ClientEngine& eng = st.engine(a[0], step.lineno);
        eng.block_contact(st.contact_of(a[0], a[1], step.lineno), now);
        sim.pump_sync(eng.device());
    } else if (step.verb == "unblock") {
        ClientEngine& eng = st.engine(a[0], step.lineno);
        eng.unblock_contact(st.contact_of(a[0], a[1], step.lineno), now);
        sim.pump_sync(eng.device());
    } else if (step.verb == "silent") {
        ClientEngine& eng = st.engine(a[0], step.lineno);
        eng.set_silent(need_on_off(a[1], step.lineno), now);
    } else if (step.verb == "invisible") {
        const auto& actor = st.actor(a[0], step.lineno);
        const bool on = need_on_off(a[1], step.lineno);
        if (actor.engine) sim.client(actor.device).set_invisible(on, now);
        sim.world().set_advertising(actor.device, !on);
    } else if (step.verb == "advertise") {
        const auto& actor = st.actor(a[0], step.lineno);
        sim.world().set_advertising(actor.device, need_on_off(a[1], step.lineno));
    } else if (step.verb == "link") {
        const auto& actor = st.actor(a[0], step.lineno);
        sim.world().set_link(actor.device, a[1] == "up");
        if (a[1] == "up" && actor.engine) {
            sim.pump_sync(actor.device);  // reconnect triggers the upload
        }
    } else if (step.verb == "expect-near") {
        ClientEngine& eng = st.engine(a[0], step.lineno);
        const auto near = eng.people_near();
        const auto want = static_cast<std::size_t>(need_int(a[1], step.lineno));
        ScenarioCheck check;
        check.label = step_label(step) + " @ " + render_datetime(now);
        check.passed = near.size() == want;
        if (!check.passed) {
            check.detail = "saw " + std::to_string(near.size()) + " devices";
        }
        st.checks.push_back(std::move(check));
    } else {
        throw ScriptError(step.lineno, "unhandled step '" + step.verb + "'");
    }
}

void evaluate_expectation(RunState& st, const ScenarioStep& e,
                          const std::vector<Simulation::NotificationRecord>& records) {
    const auto& a = e.args;
    const Scenario::Actor& device = st.actor(a[0], e.lineno);

    auto matches = [&](const Simulation::NotificationRecord& record) {
        if (!(record.device == device.device)) return false;
        if (a[1] == "fired") {
            const auto* fired = std::get_if<NoteFired>(&record.notification.kind);
            return fired != nullptr && fired->note == st.note(a[2], e.lineno);
        }
        const auto* person = std::get_if<PersonNearby>(&record.notification.kind);
        return person != nullptr && person->device == st.actor(a[2], e.lineno).device;
    };

    ScenarioCheck check;
    check.label = step_label(e);

    if (e.verb == "expect") {
        const TimestampMs want = need_datetime(a, 4, e.lineno);
        const TimestampMs tol = parse_duration(a[7], e.lineno);
        check.passed = false;
        for (const auto& record : records) {
            if (!matches(record)) continue;
            const TimestampMs delta = record.notification.at - want;
            if (delta >= -tol && delta <= tol) {
                check.passed = true;
                check.detail = "at " + render_datetime(record.notification.at);
                break;
            }
        }
        if (!check.passed) check.detail = "no matching notification in window";
    } else if (e.verb == "expect-none") {
        const TimestampMs from = need_datetime(a, 4, e.lineno);
        const TimestampMs to = need_datetime(a, 7, e.lineno);
        check.passed = true;
        for (const auto& record : records) {
            if (!matches(record)) continue;
            if (record.notification.at >= from && record.notification.at <= to) {
                check.passed = false;
                check.detail = "found one at " + render_datetime(record.notification.at);
                break;
            }
        }
    } else {  // expect-count
        const auto want = static_cast<std::size_t>(need_int(a[3], e.lineno));
        std::size_t count = 0;
        for (const auto& record : records) {
            if (matches(record)) ++count;
        }
        check.passed = count == want;
        check.detail = "counted " + std::to_string(count);
    }
    st.checks.push_back(std::move(check));
}

void write_trace(const std::filesystem::path& dir, const Scenario& scenario,
                 Simulation& sim, const RunState& st,
                 const std::vector<ScenarioCheck>& checks) {
    std::filesystem::create_directories(dir);
    auto write_file = [&](const std::string& name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::trunc | std::ios::binary);
        out << content;
        if (!out.good()) throw Error("cannot write trace file " + name);
    };

    std::string notifications;
    for (const auto& record : sim.notifications()) {
        notifications += render_datetime(record.notification.at);
        notifications.push_back('\t');
        notifications += sim.world().device_name(record.device);
        notifications.push_back('\t');
        notifications += notification_kind_label(record.notification.kind);
        notifications.push_back('\n');
    }
    write_file("notifications.log", notifications);

    std::string feedback;
    for (const auto& record : sim.feedback()) {
        feedback += render_datetime(record.at);
        feedback.push_back('\t');
        feedback += sim.world().device_name(record.device);
        feedback.push_back('\t');
        feedback += record.pattern.str();
        feedback.push_back('\n');
    }
    write_file("feedback.log", feedback);

    for (const Scenario::Actor& actor : scenario.actors) {
        if (!actor.engine) continue;
        ClientEngine& engine = sim.client(actor.device);
        write_file("detections_" + actor.alias + ".log",
                   engine.store().export_detections());
        write_file("history_" + actor.alias + ".txt", engine.store().export_history());
        write_file("store_" + actor.alias + ".json",
                   engine.store().snapshot().dump(2) + "\n");
    }
    write_file("broker.json", sim.broker().snapshot().dump(2) + "\n");

    std::string result;
    std::size_t passed = 0;
    for (const auto& check : checks) {
        result += check.passed ? "[PASS] " : "[FAIL] ";
        result += check.label;
        if (!check.detail.empty()) {
            result += " — ";
            result += check.detail;
        }
        result.push_back('\n');
        if (check.passed) ++passed;
    }
    result += "passed " + std::to_string(passed) + "/" +
              std::to_string(checks.size()) + "\n";
    write_file("result.txt", result);
}

}  // namespace

ScenarioOutcome run_scenario(const Scenario& scenario,
                             const ScenarioOverrides& overrides,
                             const std::optional<std::filesystem::path>& trace_dir) {
    SimConfig cfg = overrides.config.value_or(scenario.config);
    if (overrides.seed) cfg.seed = *overrides.seed;

    Simulation sim(cfg);
    sim.world().set_clock(scenario.start_clock);

    RunState st;
    st.sim = &sim;
    for (const Scenario::Actor& actor : scenario.actors) {
        if (actor.engine) {
            sim.add_client(actor.device, actor.alias, actor.pos);
        } else {
            sim.add_peer(actor.device, actor.alias, actor.pos);
        }
        st.actors_by_alias.emplace(actor.alias, actor);
    }

    for (const ScenarioStep& step : scenario.steps) {
        if (step.at) {
            if (*step.at < sim.world().clock()) {
                throw ScriptError(step.lineno, "step time regresses");
            }
            sim.advance_to(*step.at);
        }
        execute_step(st, step);
    }

    for (const ScenarioStep& e : scenario.expectations) {
        evaluate_expectation(st, e, sim.notifications());
    }

    if (trace_dir) {
        write_trace(*trace_dir, scenario, sim, st, st.checks);
    }

    ScenarioOutcome outcome;
    outcome.checks = std::move(st.checks);
    outcome.notifications = sim.notifications();
    outcome.feedback = sim.feedback();
    for (const Scenario::Actor& actor : scenario.actors) {
        if (!actor.engine) continue;
        ClientEngine& engine = sim.client(actor.device);
        outcome.sessions_by_alias.emplace(actor.alias, engine.sessions());
        outcome.detections_by_alias.emplace(actor.alias,
                                            engine.store().export_detections());
    }
    return outcome;
}

}  // namespace nearnote
