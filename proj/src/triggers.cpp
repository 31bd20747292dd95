#include "nearnote/triggers.hpp"

namespace nearnote {

CompiledTriggers compile_triggers(const Note& note,
                                  const std::map<ContactId, DeviceId>& contact_devices,
                                  const std::map<LocationId, LocationDef>& locations) {
    CompiledTriggers out;
    out.person_category = !note.person_triggers.empty();
    for (ContactId contact : note.person_triggers) {
        if (auto it = contact_devices.find(contact); it != contact_devices.end()) {
            out.person_devices.insert(it->second);
        }
    }
    out.location_category = !note.location_triggers.empty();
    for (LocationId id : note.location_triggers) {
        if (auto it = locations.find(id); it != locations.end()) {
            out.locations.push_back(it->second);
        }
    }
    out.window = note.time_window;
    return out;
}

CompiledTriggers compile_triggers(const ReceivedNote& note) {
    CompiledTriggers out;
    out.person_category = note.person_category;
    out.person_devices = note.trigger_devices;
    out.location_category = note.location_category;
    out.locations = note.trigger_locations;
    out.window = note.time_window;
    return out;
}

EvalNote eval_note(const Note& note,
                   const std::map<ContactId, DeviceId>& contact_devices,
                   const std::map<LocationId, LocationDef>& locations) {
    return EvalNote{"o|" + note.id.str(), note.id,
                    compile_triggers(note, contact_devices, locations),
                    note.is_audio()};
}

EvalNote eval_note(const ReceivedNote& note) {
    return EvalNote{"r|" + note.id.str(), note.id, compile_triggers(note),
                    note.is_audio()};
}

bool TriggerEvaluator::satisfied(const CompiledTriggers& triggers,
                                 const TriggerContext& ctx,
                                 std::set<std::string>* satisfying) const {
    if (triggers.manual_only()) {
        return false;
    }
    std::set<std::string> keys;

    if (triggers.person_category) {
        bool any = false;
        for (const DeviceId& device : triggers.person_devices) {
            if (ctx.open_sessions.contains(device)) {
                any = true;
                keys.insert(device.str());
            }
        }
        if (!any) return false;
    }
    if (triggers.location_category) {
        bool any = false;
        for (const LocationDef& loc : triggers.locations) {
            if (loc.kind == LocationKind::Indoor) {
                if (loc.beacon && ctx.nearby_beacons.contains(*loc.beacon)) {
                    any = true;
                    keys.insert(loc.beacon->str());
                }
            } else if (loc.point &&
                       geo_distance(ctx.observer_pos, *loc.point) <= radius_m_) {
                any = true;
                keys.insert("outdoor");
            }
        }
        if (!any) return false;
    }
    if (triggers.window) {
        if (!(triggers.window->start <= ctx.now && ctx.now < triggers.window->end)) {
            return false;
        }
        keys.insert("window");
    }
    if (satisfying != nullptr) {
        *satisfying = std::move(keys);
    }
    return true;
}

std::vector<Notification> TriggerEvaluator::evaluate(const std::vector<EvalNote>& notes,
                                                     const TriggerContext& ctx) {
    std::vector<Notification> fired;
    for (const EvalNote& note : notes) {
        std::set<std::string> satisfying;
        const bool sat = satisfied(note.triggers, ctx, &satisfying);
        auto& last = last_satisfied_[note.key];
        if (sat && !last) {
            fired.push_back(Notification{NoteFired{note.id}, ctx.now, false});
            history_.push_back(
                FiringRecord{note.key, note.id, ctx.now, std::move(satisfying)});
        }
        last = sat;
    }
    return fired;
}

}  // namespace nearnote
