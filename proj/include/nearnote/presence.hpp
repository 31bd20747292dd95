#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nearnote/model.hpp"

namespace nearnote {

// One radio sweep: everything visible at `at`. Device ids are unique within
// a scan by construction of the map.
struct ScanResult {
    TimestampMs at = 0;
    std::map<DeviceId, std::optional<std::string>> visible;  // id -> advertised name
};

// Interval during which a remote device is considered near. Sessions for
// one device never overlap; exited_at is empty while the session is open.
// `known` reflects the association state at entry time, matching what the
// Entrou log line recorded.
struct PresenceSession {
    DeviceId device;
    TimestampMs entered_at = 0;
    std::optional<TimestampMs> exited_at;
    bool known = false;

    bool operator==(const PresenceSession&) const = default;
};

enum class PresenceDirection { Entered, Exited };

struct PresenceEvent {
    PresenceDirection kind = PresenceDirection::Entered;
    DeviceId device;
    bool known = false;
    std::optional<ContactId> contact;
    TimestampMs at = 0;
    GeoPoint coord;  // observer's position at event time, recorded for the log
    std::optional<std::string> advertised_name;

    bool operator==(const PresenceEvent&) const = default;
};

// What the scan filter needs to decide whether a device may produce events:
// the observer's own privacy switches, the association table, and the set of
// devices whose owners blocked this observer (maintained via push notices).
struct PresenceFilter {
    const PrivacyState* privacy = nullptr;
    const std::map<DeviceId, ContactAssociation>* associations = nullptr;
    const std::set<DeviceId>* blocked_by = nullptr;

    bool suppresses(const DeviceId& device, TimestampMs now) const;
    const ContactAssociation* find(const DeviceId& device) const;
};

struct PresenceConfig {
    // Exit hysteresis K: consecutive missed scans before a device is
    // declared gone. Filters radio flapping.
    int exit_after_missed = 2;
};

struct NearbyEntry {
    DeviceId device;
    bool known = false;
    std::optional<ContactId> contact;
    TimestampMs since = 0;
    std::optional<std::string> advertised_name;

    bool operator==(const NearbyEntry&) const = default;
};

// Debounced enter/exit state machine over periodic scans. Single-writer:
// one logical thread feeds scans; snapshots are plain values.
class PresenceEngine {
public:
    explicit PresenceEngine(PresenceConfig cfg = {});

    // Emits Entered for newly visible devices and Exited for devices absent
    // from K consecutive scans. Scans must arrive in nondecreasing time
    // order; a regressing timestamp throws OutOfOrderScan.
    std::vector<PresenceEvent> process_scan(const ScanResult& scan,
                                            const PresenceFilter& filter,
                                            const GeoPoint& observer_pos);

    // Closes any open session the filter now covers (the owner was just
    // ignored, or a block notice arrived). The closing Exited events are
    // emitted here, at application time; afterwards the device is mute
    // until the filter uncovers it again.
    std::vector<PresenceEvent> enforce_filter(const PresenceFilter& filter,
                                              TimestampMs at,
                                              const GeoPoint& observer_pos);

    // Devices with an open session, in device order.
    std::vector<NearbyEntry> current_people_near() const;

    // Devices with an open session, as a device -> contact mapping (the
    // trigger context view).
    std::map<DeviceId, std::optional<ContactId>> open_session_contacts() const;

    // Closed and open sessions, ordered by (entered_at, device).
    std::vector<PresenceSession> sessions() const;

    std::optional<TimestampMs> last_scan_at() const { return last_scan_; }

private:
    struct Tracked {
        TimestampMs entered_at = 0;
        int missed = 0;
        bool known = false;          // tracks association changes live
        bool entered_known = false;  // frozen at entry; what the session records
        std::optional<ContactId> contact;
        std::optional<std::string> advertised_name;
    };

    PresenceConfig cfg_;
    std::map<DeviceId, Tracked> open_;
    std::vector<PresenceSession> closed_;
    std::optional<TimestampMs> last_scan_;
};

// Pure privacy-state transitions; enforcement against the engine and the
// dirty-flagging of block changes happen in the client layer.
PrivacyState set_ignore(PrivacyState state, ContactId contact, TimestampMs until);
PrivacyState clear_ignore(PrivacyState state, ContactId contact);
PrivacyState set_block(PrivacyState state, ContactId contact);
PrivacyState clear_block(PrivacyState state, ContactId contact);
PrivacyState set_invisible(PrivacyState state, bool on);
PrivacyState set_silent(PrivacyState state, bool on);

}  // namespace nearnote
