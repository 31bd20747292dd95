#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nearnote/model.hpp"

namespace nearnote {

// Everything trigger evaluation may look at, derived solely from presence
// state and the clock. open_sessions maps each near device to its contact
// (if associated); nearby_beacons is the set of near device ids, any of
// which may tag an indoor location.
struct TriggerContext {
    TimestampMs now = 0;
    std::map<DeviceId, std::optional<ContactId>> open_sessions;
    GeoPoint observer_pos;
    std::set<DeviceId> nearby_beacons;
};

// A note's triggers resolved to radio-level values. Category flags stay set
// even when resolution failed for every reference, so an unresolvable
// category blocks firing instead of weakening the conjunction.
struct CompiledTriggers {
    bool person_category = false;
    std::set<DeviceId> person_devices;
    bool location_category = false;
    std::vector<LocationDef> locations;
    std::optional<TimeWindow> window;

    bool manual_only() const {
        return !person_category && !location_category && !window.has_value();
    }
};

CompiledTriggers compile_triggers(const Note& note,
                                  const std::map<ContactId, DeviceId>& contact_devices,
                                  const std::map<LocationId, LocationDef>& locations);
CompiledTriggers compile_triggers(const ReceivedNote& note);

// One note prepared for evaluation. Keys distinguish own notes from
// received copies ("o|..." / "r|...") since a creator may be among the
// recipients of its own note.
struct EvalNote {
    std::string key;
    NoteId id;
    CompiledTriggers triggers;
    bool audio = false;
};

EvalNote eval_note(const Note& note,
                   const std::map<ContactId, DeviceId>& contact_devices,
                   const std::map<LocationId, LocationDef>& locations);
EvalNote eval_note(const ReceivedNote& note);

struct FiringRecord {
    std::string note_key;
    NoteId note;
    TimestampMs fired_at = 0;
    std::set<std::string> satisfying_session_keys;
};

// Condition evaluator with rising-edge dedup: a note fires exactly when its
// combined condition turns from false to true, so consecutive firings of
// one note are always separated by an interval where the condition was
// false. Pure function of (notes, context) plus the retained edge state.
class TriggerEvaluator {
public:
    explicit TriggerEvaluator(double geofence_radius_m = 100.0)
        : radius_m_(geofence_radius_m) {}

    // True iff every present category is satisfied at ctx.now; fills
    // satisfying with the device ids (persons and beacons) that satisfied,
    // plus "outdoor"/"window" markers.
    bool satisfied(const CompiledTriggers& triggers, const TriggerContext& ctx,
                   std::set<std::string>* satisfying = nullptr) const;

    std::vector<Notification> evaluate(const std::vector<EvalNote>& notes,
                                       const TriggerContext& ctx);

    const std::vector<FiringRecord>& history() const { return history_; }
    double geofence_radius_m() const { return radius_m_; }

private:
    double radius_m_;
    std::map<std::string, bool> last_satisfied_;
    std::vector<FiringRecord> history_;
};

}  // namespace nearnote
