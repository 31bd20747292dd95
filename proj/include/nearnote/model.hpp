#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "nearnote/geo.hpp"
#include "nearnote/ids.hpp"
#include "nearnote/time.hpp"

namespace nearnote {

using ContactId = std::int64_t;
using LocationId = std::int64_t;

// Row of the contact/MAC association table. contact_id is the opaque
// phone-book row id; display names are allowed to be empty.
struct ContactAssociation {
    ContactId contact_id = 0;
    std::string display_name;
    DeviceId device;

    auto operator<=>(const ContactAssociation&) const = default;
};

enum class LocationKind { Indoor, Outdoor };

// Indoor locations are tagged by a stationary beacon device; outdoor ones
// by a saved GPS coordinate. Exactly one of the two is present.
struct LocationDef {
    LocationId location_id = 0;
    LocationKind kind = LocationKind::Outdoor;
    std::optional<DeviceId> beacon;  // Indoor only
    std::optional<GeoPoint> point;   // Outdoor only
    std::string label;

    static LocationDef indoor(LocationId id, DeviceId beacon, std::string label);
    static LocationDef outdoor(LocationId id, GeoPoint point, std::string label);
    bool valid() const;

    auto operator<=>(const LocationDef&) const = default;
};

struct TextBody {
    std::string text;
    auto operator<=>(const TextBody&) const = default;
};

// Audio notes are opaque recorded blobs; no codec handling.
struct AudioBody {
    std::vector<std::uint8_t> payload;
    std::int64_t duration_ms = 0;
    auto operator<=>(const AudioBody&) const = default;
};

using NoteBody = std::variant<TextBody, AudioBody>;

struct TimeWindow {
    TimestampMs start = 0;
    TimestampMs end = 0;  // exclusive: active while start <= now < end
    auto operator<=>(const TimeWindow&) const = default;
};

// A note plus its trigger and recipient sets. Triggers are conjunctive
// across categories (person AND location AND time when present) and
// disjunctive within a category. A note with no triggers at all is
// manual-view only and never fires. A note with recipients fires only on
// the recipients' devices; one without fires on the creator's.
struct Note {
    NoteId id;
    NoteBody body;
    TimestampMs created_at = 0;
    std::set<ContactId> person_triggers;
    std::set<LocationId> location_triggers;
    std::optional<TimeWindow> time_window;
    std::set<ContactId> recipients;
    std::optional<ContactId> carrier;  // must appear in person_triggers

    bool has_triggers() const {
        return !person_triggers.empty() || !location_triggers.empty() ||
               time_window.has_value();
    }
    bool is_audio() const { return std::holds_alternative<AudioBody>(body); }

    bool operator==(const Note&) const = default;
};

// A note as it arrives on a recipient's device. Trigger references are
// resolved to self-contained values by the broker, since the sender's
// contact and location ids mean nothing on the receiving store. The
// category flags record which trigger categories the original note had: a
// category whose references could not all be resolved stays present but
// unsatisfiable instead of silently weakening the condition.
struct ReceivedNote {
    NoteId id;
    DeviceId sender;
    NoteBody body;
    TimestampMs created_at = 0;
    bool person_category = false;
    bool location_category = false;
    std::set<DeviceId> trigger_devices;
    std::vector<LocationDef> trigger_locations;
    std::optional<TimeWindow> time_window;
    TimestampMs received_at = 0;

    bool has_triggers() const {
        return person_category || location_category || time_window.has_value();
    }
    bool is_audio() const { return std::holds_alternative<AudioBody>(body); }

    bool operator==(const ReceivedNote&) const = default;
};

struct PersonNearby {
    DeviceId device;
    auto operator<=>(const PersonNearby&) const = default;
};

struct NoteFired {
    NoteId note;
    auto operator<=>(const NoteFired&) const = default;
};

using NotificationKind = std::variant<PersonNearby, NoteFired>;

// One fired event. History is append-only; acknowledging marks the record
// but never removes it.
struct Notification {
    NotificationKind kind;
    TimestampMs at = 0;
    bool acknowledged = false;

    bool operator==(const Notification&) const = default;
};

std::string notification_kind_label(const NotificationKind& kind);

// Per-device privacy switches. `blocked` and `ignored` hold contact ids;
// blocking is enforced at the blocked party's device after broker
// propagation, ignoring is local and expires.
struct PrivacyState {
    std::set<ContactId> blocked;
    std::map<ContactId, TimestampMs> ignored;  // contact -> expiry (exclusive)
    bool invisible = false;
    bool silent = false;

    bool is_ignored(ContactId contact, TimestampMs now) const {
        const auto it = ignored.find(contact);
        return it != ignored.end() && now < it->second;
    }

    bool operator==(const PrivacyState&) const = default;
};

}  // namespace nearnote
