#include "nearnote/presence.hpp"

#include <algorithm>

#include "nearnote/errors.hpp"

namespace nearnote {

const ContactAssociation* PresenceFilter::find(const DeviceId& device) const {
    if (associations == nullptr) return nullptr;
    const auto it = associations->find(device);
    return it == associations->end() ? nullptr : &it->second;
}

bool PresenceFilter::suppresses(const DeviceId& device, TimestampMs now) const {
    if (blocked_by != nullptr && blocked_by->contains(device)) {
        return true;
    }
    if (privacy != nullptr) {
        if (const auto* assoc = find(device);
            assoc != nullptr && privacy->is_ignored(assoc->contact_id, now)) {
            return true;
        }
    }
    return false;
}

PresenceEngine::PresenceEngine(PresenceConfig cfg) : cfg_(cfg) {}

std::vector<PresenceEvent> PresenceEngine::process_scan(const ScanResult& scan,
                                                        const PresenceFilter& filter,
                                                        const GeoPoint& observer_pos) {
    if (last_scan_ && scan.at < *last_scan_) {
        throw OutOfOrderScan("scan at " + std::to_string(scan.at) +
                             " precedes previous scan at " +
                             std::to_string(*last_scan_));
    }
    last_scan_ = scan.at;

    std::vector<PresenceEvent> events;

    // Pass 1: devices visible in this scan.
    for (const auto& [device, name] : scan.visible) {
        if (filter.suppresses(device, scan.at)) {
            continue;
        }
        const ContactAssociation* assoc = filter.find(device);
        const bool known = assoc != nullptr;
        const std::optional<ContactId> contact =
            known ? std::optional<ContactId>(assoc->contact_id) : std::nullopt;

        if (auto it = open_.find(device); it != open_.end()) {
            it->second.missed = 0;
            it->second.known = known;
            it->second.contact = contact;
            if (name) it->second.advertised_name = name;
            continue;
        }
        Tracked tracked;
        tracked.entered_at = scan.at;
        tracked.known = known;
        tracked.entered_known = known;
        tracked.contact = contact;
        tracked.advertised_name = name;
        open_.emplace(device, tracked);
        events.push_back(PresenceEvent{PresenceDirection::Entered, device, known,
                                       contact, scan.at, observer_pos, name});
    }

    // Pass 2: tracked devices missing from this scan (or newly suppressed).
    for (auto it = open_.begin(); it != open_.end();) {
        const bool seen = scan.visible.contains(it->first) &&
                          !filter.suppresses(it->first, scan.at);
        if (seen) {
            ++it;
            continue;
        }
        ++it->second.missed;
        if (it->second.missed < cfg_.exit_after_missed) {
            ++it;
            continue;
        }
        events.push_back(PresenceEvent{PresenceDirection::Exited, it->first,
                                       it->second.known, it->second.contact, scan.at,
                                       observer_pos, it->second.advertised_name});
        closed_.push_back(PresenceSession{it->first, it->second.entered_at, scan.at,
                                          it->second.entered_known});
        it = open_.erase(it);
    }
    return events;
}

std::vector<PresenceEvent> PresenceEngine::enforce_filter(const PresenceFilter& filter,
                                                          TimestampMs at,
                                                          const GeoPoint& observer_pos) {
    std::vector<PresenceEvent> events;
    for (auto it = open_.begin(); it != open_.end();) {
        if (!filter.suppresses(it->first, at)) {
            ++it;
            continue;
        }
        events.push_back(PresenceEvent{PresenceDirection::Exited, it->first,
                                       it->second.known, it->second.contact, at,
                                       observer_pos, it->second.advertised_name});
        closed_.push_back(PresenceSession{it->first, it->second.entered_at, at,
                                          it->second.entered_known});
        it = open_.erase(it);
    }
    return events;
}

std::vector<NearbyEntry> PresenceEngine::current_people_near() const {
    std::vector<NearbyEntry> out;
    out.reserve(open_.size());
    for (const auto& [device, tracked] : open_) {
        out.push_back(NearbyEntry{device, tracked.known, tracked.contact,
                                  tracked.entered_at, tracked.advertised_name});
    }
    return out;
}

std::map<DeviceId, std::optional<ContactId>> PresenceEngine::open_session_contacts()
    const {
    std::map<DeviceId, std::optional<ContactId>> out;
    for (const auto& [device, tracked] : open_) {
        out.emplace(device, tracked.contact);
    }
    return out;
}

std::vector<PresenceSession> PresenceEngine::sessions() const {
    std::vector<PresenceSession> all = closed_;
    for (const auto& [device, tracked] : open_) {
        all.push_back(PresenceSession{device, tracked.entered_at, std::nullopt,
                                      tracked.entered_known});
    }
    std::sort(all.begin(), all.end(), [](const PresenceSession& a,
                                         const PresenceSession& b) {
        if (a.entered_at != b.entered_at) return a.entered_at < b.entered_at;
        return a.device < b.device;
    });
    return all;
}

PrivacyState set_ignore(PrivacyState state, ContactId contact, TimestampMs until) {
    state.ignored[contact] = until;
    return state;
}

PrivacyState clear_ignore(PrivacyState state, ContactId contact) {
    state.ignored.erase(contact);
    return state;
}

PrivacyState set_block(PrivacyState state, ContactId contact) {
    state.blocked.insert(contact);
    return state;
}

PrivacyState clear_block(PrivacyState state, ContactId contact) {
    state.blocked.erase(contact);
    return state;
}

PrivacyState set_invisible(PrivacyState state, bool on) {
    state.invisible = on;
    return state;
}

PrivacyState set_silent(PrivacyState state, bool on) {
    state.silent = on;
    return state;
}

}  // namespace nearnote
