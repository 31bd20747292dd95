// nearnote — operator entry point.
//
//   nearnote run <scenario.scn> [--seed N] [--config FILE] [--trace-dir DIR]
//   nearnote analyze <detections.log> [--scan-period SECONDS]
//   nearnote broker --listen HOST:PORT [--state FILE]
//   nearnote device --data-dir DIR [--now "DD/MM/YYYY HH:MM:SS.mmm"]
//            [--broker URL] <subcommand> ...
//
// Output is line-oriented and stable for scripting; exit codes: 0 success,
// 1 failed expectation / malformed input reported, 2 usage or file error.

#include <CLI11.hpp>
#include <httplib.h>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>

#include "nearnote/client.hpp"
#include "nearnote/errors.hpp"
#include "nearnote/json_codec.hpp"
#include "nearnote/logfmt.hpp"
#include "nearnote/scenario.hpp"

using namespace nearnote;
using nlohmann::json;

namespace {

TimestampMs now_or(const std::string& now_flag) {
    if (!now_flag.empty()) {
        const auto t = parse_datetime(now_flag);
        if (!t) throw Error("bad --now value '" + now_flag + "'");
        return *t;
    }
    return SystemClock().now();
}

SimConfig config_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw Error("cannot read config file " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error("unparseable config file " + path);
    SimConfig cfg;
    if (j.contains("radio_range_m")) cfg.radio_range_m = j["radio_range_m"];
    if (j.contains("scan_period_ms")) cfg.scan_period_ms = j["scan_period_ms"];
    if (j.contains("scan_period_s")) {
        cfg.scan_period_ms = j["scan_period_s"].get<std::int64_t>() * 1'000;
    }
    if (j.contains("exit_after_missed")) cfg.exit_after_missed = j["exit_after_missed"];
    if (j.contains("geofence_radius_m")) cfg.geofence_radius_m = j["geofence_radius_m"];
    if (j.contains("text_note_pause_ms")) {
        cfg.text_note_pause_ms = j["text_note_pause_ms"];
    }
    if (j.contains("gps_jitter_max_m")) cfg.gps_jitter_max_m = j["gps_jitter_max_m"];
    if (j.contains("seed")) cfg.seed = j["seed"];
    return cfg;
}

// --- run ---------------------------------------------------------------------

int cmd_run(const std::string& scenario_path, std::optional<std::uint64_t> seed,
            const std::string& config_path, const std::string& trace_dir) {
    if (!std::filesystem::exists(scenario_path)) {
        std::cerr << "scenario file not found: " << scenario_path << "\n";
        return 2;
    }
    Scenario scenario = load_scenario(scenario_path);
    ScenarioOverrides overrides;
    overrides.seed = seed;
    if (!config_path.empty()) overrides.config = config_from_file(config_path);

    std::optional<std::filesystem::path> trace;
    if (!trace_dir.empty()) trace = trace_dir;

    const ScenarioOutcome outcome = run_scenario(scenario, overrides, trace);
    std::size_t passed = 0;
    for (const ScenarioCheck& check : outcome.checks) {
        std::cout << (check.passed ? "[PASS] " : "[FAIL] ") << check.label;
        if (!check.detail.empty()) std::cout << " — " << check.detail;
        std::cout << "\n";
        if (check.passed) ++passed;
    }
    std::cout << "passed " << passed << "/" << outcome.checks.size() << "\n";
    return outcome.all_passed() ? 0 : 1;
}

// --- analyze ------------------------------------------------------------------

int cmd_analyze(const std::string& log_path, std::int64_t scan_period_s) {
    std::ifstream in(log_path);
    if (!in.good()) {
        std::cerr << "cannot read log file: " << log_path << "\n";
        return 2;
    }
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    const ParsedLog parsed = parse_log(text);
    const ReconstructionResult rec =
        reconstruct_sessions(parsed.lines, scan_period_s * 1'000);

    std::size_t open_sessions = 0;
    for (const auto& s : rec.sessions) {
        if (!s.exited_at) ++open_sessions;
    }
    std::cout << "lines: " << rec.stats.total_lines << "\n";
    std::cout << "devices: " << rec.stats.distinct_devices << "\n";
    std::cout << "sessions: " << rec.sessions.size() << " (open: " << open_sessions
              << ")\n";
    std::cout << "max_simultaneous: " << rec.stats.max_simultaneous << "\n";
    std::cout << "flap_candidates: " << rec.stats.flap_candidates.size() << "\n";
    for (const FlapCandidate& flap : rec.stats.flap_candidates) {
        std::cout << "  flap " << flap.device.str() << " gap " << flap.gap_ms / 1000.0
                  << "s at " << render_datetime(flap.reentered_at) << "\n";
    }
    std::cout << "detections_by_hour:\n";
    for (const auto& [hour, count] : rec.stats.detections_per_hour) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "%02d", hour);
        std::cout << "  " << buf << ": " << count << "\n";
    }
    for (const std::string& warning : rec.warnings) {
        std::cout << "warning: " << warning << "\n";
    }
    if (!parsed.issues.empty()) {
        for (const LineIssue& issue : parsed.issues) {
            std::cerr << "malformed line " << issue.lineno << ": " << issue.reason
                      << "\n";
        }
        return 1;
    }
    return 0;
}

// --- broker service --------------------------------------------------------------

std::atomic<httplib::Server*> g_server{nullptr};

void handle_signal(int) {
    if (auto* server = g_server.load()) server->stop();
}

int cmd_broker(const std::string& listen, const std::string& state_path) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) {
        std::cerr << "--listen expects HOST:PORT\n";
        return 2;
    }
    const std::string host = listen.substr(0, colon);
    const int port = std::stoi(listen.substr(colon + 1));

    Broker broker;
    if (!state_path.empty() && std::filesystem::exists(state_path)) {
        std::ifstream in(state_path);
        json snap = json::parse(in, nullptr, false);
        if (snap.is_discarded()) {
            std::cerr << "unreadable broker state: " << state_path << "\n";
            return 2;
        }
        broker.restore(snap);
    }
    auto persist = [&] {
        if (state_path.empty()) return;
        const std::string tmp = state_path + ".tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            out << broker.snapshot().dump(2) << "\n";
        }
        std::filesystem::rename(tmp, state_path);
    };

    httplib::Server server;
    server.Post("/register", [&](const httplib::Request& req, httplib::Response& res) {
        try {
            const json body = json::parse(req.body);
            const DeviceId device = DeviceId::parse(body.at("device").get<std::string>());
            const std::string reg_id =
                broker.register_device(device, SystemClock().now());
            persist();
            res.set_content(json{{"v", kWireVersion}, {"reg_id", reg_id}}.dump(),
                            "application/json");
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(e.what(), "text/plain");
        }
    });
    server.Post("/ingest", [&](const httplib::Request& req, httplib::Response& res) {
        try {
            const IngestAck ack = broker.ingest(decode_envelope(req.body));
            persist();
            res.set_content(encode_ack(ack), "application/json");
        } catch (const UnknownSender& e) {
            res.status = 403;
            res.set_content(e.what(), "text/plain");
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(e.what(), "text/plain");
        }
    });
    server.Post("/deliver", [&](const httplib::Request& req, httplib::Response& res) {
        try {
            const json body = json::parse(req.body);
            const DeviceId device = DeviceId::parse(body.at("device").get<std::string>());
            json messages = json::array();
            for (const PushMessage& m : broker.deliver(device)) {
                messages.push_back(encode_push(m));
            }
            res.set_content(json{{"v", kWireVersion}, {"messages", messages}}.dump(),
                            "application/json");
        } catch (const UnknownDevice& e) {
            res.status = 404;
            res.set_content(e.what(), "text/plain");
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(e.what(), "text/plain");
        }
    });
    server.Post("/ack", [&](const httplib::Request& req, httplib::Response& res) {
        try {
            const json body = json::parse(req.body);
            const DeviceId device = DeviceId::parse(body.at("device").get<std::string>());
            broker.ack_delivered(device,
                                 body.at("msg_ids").get<std::vector<std::uint64_t>>());
            persist();
            res.set_content(json{{"v", kWireVersion}, {"ok", true}}.dump(),
                            "application/json");
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(e.what(), "text/plain");
        }
    });
    server.Get("/health", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(json{{"v", kWireVersion}, {"ok", true}}.dump(),
                        "application/json");
    });

    g_server.store(&server);
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    std::cout << "broker listening on " << host << ":" << port << "\n";
    if (!server.listen(host, port)) {
        std::cerr << "cannot listen on " << listen << "\n";
        return 2;
    }
    persist();
    return 0;
}

// --- device tool -------------------------------------------------------------------

class HttpBrokerLink final : public BrokerLink {
public:
    explicit HttpBrokerLink(const std::string& base_url) : client_(base_url) {
        client_.set_connection_timeout(2, 0);
    }

    std::string register_device(const DeviceId& device) override {
        const auto res = client_.Post(
            "/register", json{{"v", kWireVersion}, {"device", device.str()}}.dump(),
            "application/json");
        if (!res || res->status != 200) throw LinkDown("broker unreachable");
        return json::parse(res->body).at("reg_id").get<std::string>();
    }
    IngestAck ingest(const SyncEnvelope& envelope) override {
        const auto res =
            client_.Post("/ingest", encode_envelope(envelope), "application/json");
        if (!res || res->status != 200) throw LinkDown("broker unreachable");
        return decode_ack(res->body);
    }
    std::vector<PushMessage> deliver(const DeviceId& device) override {
        const auto res = client_.Post(
            "/deliver", json{{"v", kWireVersion}, {"device", device.str()}}.dump(),
            "application/json");
        if (!res || res->status != 200) throw LinkDown("broker unreachable");
        const json doc = json::parse(res->body);
        std::vector<PushMessage> out;
        for (const auto& m : doc.at("messages")) {
            out.push_back(decode_push(m.get<std::string>()));
        }
        return out;
    }
    void ack_delivered(const DeviceId& device,
                       const std::vector<std::uint64_t>& msg_ids) override {
        const auto res = client_.Post(
            "/ack",
            json{{"v", kWireVersion}, {"device", device.str()}, {"msg_ids", msg_ids}}
                .dump(),
            "application/json");
        if (!res || res->status != 200) throw LinkDown("broker unreachable");
    }

private:
    httplib::Client client_;
};

struct OpenSession {
    TimestampMs entered_at;
    bool known;
    std::optional<ContactId> contact;
    std::optional<std::string> name;
};

// Open sessions replayed from the detection history; the history already
// reflects privacy filtering at record time.
std::map<DeviceId, OpenSession> open_sessions(const ClientStore& store) {
    std::map<DeviceId, OpenSession> open;
    for (const PresenceEvent& event : store.detections()) {
        if (event.kind == PresenceDirection::Entered) {
            open.insert_or_assign(event.device,
                                  OpenSession{event.at, event.known, event.contact,
                                              event.advertised_name});
        } else {
            open.erase(event.device);
        }
    }
    return open;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"presence-triggered notes: simulator, log analyzer, broker, device"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a scenario script");
    std::string scenario_path, run_config, trace_dir;
    std::optional<std::uint64_t> seed;
    run->add_option("scenario", scenario_path, "scenario file")->required();
    run->add_option("--seed", seed, "override RNG seed");
    run->add_option("--config", run_config, "JSON config file");
    run->add_option("--trace-dir", trace_dir, "write full trace artifacts here");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "analyze a detection log");
    std::string log_path;
    std::int64_t scan_period_s = 30;
    analyze->add_option("log", log_path, "detection log file")->required();
    analyze->add_option("--scan-period", scan_period_s,
                        "scan period in seconds (flap threshold)");

    // broker
    auto* broker_cmd = app.add_subcommand("broker", "serve the push broker over HTTP");
    std::string listen = "127.0.0.1:7742";
    std::string state_path;
    broker_cmd->add_option("--listen", listen, "HOST:PORT to bind");
    broker_cmd->add_option("--state", state_path, "state snapshot file");

    // device
    auto* device_cmd = app.add_subcommand("device", "operate one device store");
    std::string data_dir, device_mac, broker_url, now_flag;
    device_cmd->add_option("--data-dir", data_dir, "store directory")->required();
    device_cmd->add_option("--device", device_mac, "device id (required on first use)");
    device_cmd->add_option("--broker", broker_url, "broker base URL, e.g. http://127.0.0.1:7742");
    device_cmd->add_option("--now", now_flag, "wall clock override DD/MM/YYYY HH:MM:SS.mmm");
    device_cmd->require_subcommand(1);

    auto* dc_create = device_cmd->add_subcommand("create-note", "create a note");
    std::string note_text;
    std::int64_t audio_ms = 0;
    dc_create->add_option("--text", note_text, "text body");
    dc_create->add_option("--audio-ms", audio_ms, "audio body duration");

    auto* dc_attach = device_cmd->add_subcommand("attach", "attach a trigger to a note");
    std::string attach_note, window_from, window_to;
    std::optional<ContactId> attach_person, attach_carrier;
    std::optional<LocationId> attach_location;
    dc_attach->add_option("--note", attach_note, "note id")->required();
    dc_attach->add_option("--person", attach_person, "contact id");
    dc_attach->add_option("--location", attach_location, "location id");
    dc_attach->add_option("--window-from", window_from, "DD/MM/YYYY HH:MM:SS.mmm");
    dc_attach->add_option("--window-to", window_to, "DD/MM/YYYY HH:MM:SS.mmm");
    dc_attach->add_option("--carrier", attach_carrier, "carrier contact id");

    auto* dc_send = device_cmd->add_subcommand("send", "address a note to recipients");
    std::string send_note;
    std::vector<ContactId> send_to;
    dc_send->add_option("--note", send_note, "note id")->required();
    dc_send->add_option("--to", send_to, "recipient contact ids")->required();

    auto* dc_near = device_cmd->add_subcommand("near", "list people currently near");
    auto* dc_notifications =
        device_cmd->add_subcommand("notifications", "list notification history");
    bool ack_all = false;
    dc_notifications->add_flag("--ack-all", ack_all, "acknowledge everything");

    auto* dc_ignore = device_cmd->add_subcommand("ignore", "ignore a contact for a while");
    ContactId ignore_contact = 0;
    std::string ignore_until;
    dc_ignore->add_option("--contact", ignore_contact)->required();
    dc_ignore->add_option("--until", ignore_until, "DD/MM/YYYY HH:MM:SS.mmm")->required();

    auto* dc_block = device_cmd->add_subcommand("block", "block a contact");
    auto* dc_unblock = device_cmd->add_subcommand("unblock", "unblock a contact");
    ContactId block_contact = 0, unblock_contact = 0;
    dc_block->add_option("--contact", block_contact)->required();
    dc_unblock->add_option("--contact", unblock_contact)->required();

    auto* dc_silence = device_cmd->add_subcommand("silence", "toggle silent mode");
    std::string silence_mode;
    dc_silence->add_option("mode", silence_mode, "on|off")->required();

    auto* dc_save = device_cmd->add_subcommand("save-location", "save an outdoor location");
    std::string save_label;
    double save_lat = 0.0, save_lon = 0.0;
    dc_save->add_option("--label", save_label)->required();
    dc_save->add_option("--lat", save_lat)->required();
    dc_save->add_option("--lon", save_lon)->required();

    auto* dc_assoc = device_cmd->add_subcommand("associate", "associate contact with device");
    ContactId assoc_contact = 0;
    std::string assoc_name, assoc_device;
    dc_assoc->add_option("--contact", assoc_contact)->required();
    dc_assoc->add_option("--name", assoc_name);
    dc_assoc->add_option("--device", assoc_device)->required();

    auto* dc_notes = device_cmd->add_subcommand("notes", "list notes");
    auto* dc_locations = device_cmd->add_subcommand("locations", "list locations");
    auto* dc_sync = device_cmd->add_subcommand("sync", "sync with the broker now");
    auto* dc_export = device_cmd->add_subcommand("export-history", "print history export");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cmd_run(scenario_path, seed, run_config, trace_dir);
        }
        if (analyze->parsed()) {
            return cmd_analyze(log_path, scan_period_s);
        }
        if (broker_cmd->parsed()) {
            return cmd_broker(listen, state_path);
        }

        // device
        const TimestampMs now = now_or(now_flag);
        DeviceId owner;
        if (auto existing = ClientStore::probe_owner(data_dir)) {
            owner = *existing;
            if (!device_mac.empty() && !(DeviceId::parse(device_mac) == owner)) {
                std::cerr << "store belongs to " << owner.str() << "\n";
                return 2;
            }
        } else if (!device_mac.empty()) {
            owner = DeviceId::parse(device_mac);
        } else {
            std::cerr << "fresh data dir: pass --device MAC to create the store\n";
            return 2;
        }
        ClientEngine engine(ClientStore::open(data_dir, owner), {});
        ClientStore& store = engine.store();

        auto sync_if_possible = [&]() -> bool {
            if (broker_url.empty()) return false;
            HttpBrokerLink link(broker_url);
            try {
                engine.sync_with(link, now, nullptr);
                return true;
            } catch (const LinkDown&) {
                return false;
            }
        };

        if (dc_create->parsed()) {
            NoteId id = audio_ms > 0
                            ? engine.create_audio_note({}, audio_ms, now)
                            : engine.create_text_note(note_text, now);
            sync_if_possible();
            std::cout << id.str() << "\n";
        } else if (dc_attach->parsed()) {
            const NoteId id = NoteId::parse(attach_note);
            if (attach_person) engine.attach_person_trigger(id, *attach_person, now);
            if (attach_location) {
                engine.attach_location_trigger(id, *attach_location, now);
            }
            if (!window_from.empty() || !window_to.empty()) {
                const auto from = parse_datetime(window_from);
                const auto to = parse_datetime(window_to);
                if (!from || !to) throw Error("bad --window-from/--window-to");
                engine.set_note_window(id, TimeWindow{*from, *to}, now);
            }
            if (attach_carrier) engine.set_note_carrier(id, attach_carrier, now);
            sync_if_possible();
            std::cout << "ok\n";
        } else if (dc_send->parsed()) {
            const NoteId id = NoteId::parse(send_note);
            engine.send_note(id, {send_to.begin(), send_to.end()}, now);
            const bool delivered = sync_if_possible();
            std::cout << (delivered ? "sent\n" : "queued\n");
        } else if (dc_near->parsed()) {
            engine.record_action("people_near", GestureCommand::SwipeDown, now);
            const PrivacyState privacy = store.privacy();
            for (const auto& [device, session] : open_sessions(store)) {
                if (session.contact && privacy.is_ignored(*session.contact, now)) {
                    continue;
                }
                std::cout << device.str() << "\t"
                          << (session.known ? "known" : "unknown") << "\t"
                          << (session.contact ? std::to_string(*session.contact) : "-")
                          << "\t" << render_datetime(session.entered_at) << "\n";
            }
        } else if (dc_notifications->parsed()) {
            engine.record_action("notifications", GestureCommand::SwipeDown, now);
            for (const Notification& n : store.notifications()) {
                std::cout << render_datetime(n.at) << "\t"
                          << (n.acknowledged ? "ack" : "new") << "\t"
                          << notification_kind_label(n.kind) << "\n";
            }
            if (ack_all) store.acknowledge_all_notifications();
        } else if (dc_ignore->parsed()) {
            const auto until = parse_datetime(ignore_until);
            if (!until) throw Error("bad --until value");
            engine.ignore_contact(ignore_contact, *until, now);
            std::cout << "ok\n";
        } else if (dc_block->parsed()) {
            engine.block_contact(block_contact, now);
            sync_if_possible();
            std::cout << "ok\n";
        } else if (dc_unblock->parsed()) {
            engine.unblock_contact(unblock_contact, now);
            sync_if_possible();
            std::cout << "ok\n";
        } else if (dc_silence->parsed()) {
            if (silence_mode != "on" && silence_mode != "off") {
                throw Error("silence takes on|off");
            }
            engine.set_silent(silence_mode == "on", now);
            std::cout << "ok\n";
        } else if (dc_save->parsed()) {
            engine.set_position(GeoPoint::checked(save_lat, save_lon));
            const LocationDef def = engine.save_current_location(save_label, now);
            sync_if_possible();
            std::cout << def.location_id << "\n";
        } else if (dc_assoc->parsed()) {
            engine.associate_contact(assoc_contact, assoc_name,
                                     DeviceId::parse(assoc_device), now);
            sync_if_possible();
            std::cout << "ok\n";
        } else if (dc_notes->parsed()) {
            for (const Note& note : store.list_notes()) {
                const char* kind = note.is_audio() ? "audio" : "text";
                std::cout << note.id.str() << "\t" << kind << "\t"
                          << (note.recipients.empty() ? "own" : "shared") << "\n";
            }
            for (const ReceivedNote& note : store.list_received_notes()) {
                std::cout << note.id.str() << "\t"
                          << (note.is_audio() ? "audio" : "text") << "\treceived from "
                          << note.sender.str() << "\n";
            }
        } else if (dc_locations->parsed()) {
            for (const LocationDef& def : store.list_locations()) {
                std::cout << def.location_id << "\t"
                          << (def.kind == LocationKind::Indoor ? "indoor" : "outdoor")
                          << "\t" << def.label << "\n";
            }
        } else if (dc_sync->parsed()) {
            if (broker_url.empty()) throw Error("sync needs --broker URL");
            HttpBrokerLink link(broker_url);
            const SyncOutcome outcome = engine.sync_with(link, now, nullptr);
            std::cout << "uploaded " << outcome.rows_uploaded << " rows, applied "
                      << outcome.pushes_applied << " pushes\n";
        } else if (dc_export->parsed()) {
            std::cout << store.export_history();
        }
        return 0;
    } catch (const LinkDown& e) {
        std::cerr << "link down: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
