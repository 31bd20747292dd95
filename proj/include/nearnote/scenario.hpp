#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nearnote/simkit.hpp"

namespace nearnote {

// Scenario scripts are line-oriented text: '#' comments, one statement per
// line, double-quoted strings for labels and note text. Setup statements
// (config/clock/device/peer/beacon) precede time-ordered steps; `expect*`
// statements are assertions over the run, not effects. The full grammar is
// documented in the repository README.
struct ScenarioStep {
    std::size_t lineno = 0;
    std::optional<TimestampMs> at;   // advance the clock here first
    std::string verb;
    std::vector<std::string> args;   // quoted strings already unescaped
};

struct Scenario {
    std::string name;
    SimConfig config;
    TimestampMs start_clock = 0;

    struct Actor {
        std::string alias;
        DeviceId device;
        GeoPoint pos;
        bool engine = false;  // devices get engines; peers/beacons only advertise
    };
    std::vector<Actor> actors;

    std::vector<ScenarioStep> steps;         // executed in order
    std::vector<ScenarioStep> expectations;  // checked against the trace
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

struct ScenarioCheck {
    std::string label;
    bool passed = false;
    std::string detail;
};

struct ScenarioOutcome {
    std::vector<ScenarioCheck> checks;
    std::vector<Simulation::NotificationRecord> notifications;
    std::vector<Simulation::FeedbackRecord> feedback;
    // final engine state per device alias, for post-run analysis
    std::map<std::string, std::vector<PresenceSession>> sessions_by_alias;
    std::map<std::string, std::string> detections_by_alias;  // exported log text

    bool all_passed() const {
        for (const auto& c : checks) {
            if (!c.passed) return false;
        }
        return true;
    }
};

struct ScenarioOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<SimConfig> config;  // replaces the script's config block
};

// Runs the scenario deterministically. When trace_dir is set, the complete
// run artifacts are written there: notifications.log, feedback.log, one
// detections_<alias>.log / history_<alias>.txt / store_<alias>.json per
// engine device, broker.json and result.txt. Identical (script, config,
// seed) inputs produce byte-identical trace directories.
ScenarioOutcome run_scenario(const Scenario& scenario,
                             const ScenarioOverrides& overrides = {},
                             const std::optional<std::filesystem::path>& trace_dir =
                                 std::nullopt);

}  // namespace nearnote
