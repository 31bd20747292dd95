#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nearnote/feedback.hpp"
#include "nearnote/store.hpp"
#include "nearnote/sync.hpp"
#include "nearnote/triggers.hpp"

namespace nearnote {

struct ClientConfig {
    PresenceConfig presence{};
    FeedbackConfig feedback{};
    double geofence_radius_m = 100.0;
};

// One device's full client: store, presence automaton, trigger evaluator,
// notification dispatch and sync. The scan pipeline is
//   radio scan -> presence events -> detection history
//   -> PersonNearby notifications (once per session)
//   -> trigger evaluation over own unshared notes and received notes
//   -> NoteFired notifications -> vibration feedback (unless silent).
class ClientEngine {
public:
    ClientEngine(std::unique_ptr<ClientStore> store, ClientConfig cfg = {});

    const DeviceId& device() const { return store_->owner(); }
    ClientStore& store() { return *store_; }
    const ClientStore& store() const { return *store_; }
    const ClientConfig& config() const { return cfg_; }

    void set_position(const GeoPoint& pos) { position_ = pos; }
    const GeoPoint& position() const { return position_; }

    // --- scan pipeline -------------------------------------------------------
    std::vector<Notification> on_scan(const ScanResult& scan, const GeoPoint& pos,
                                      FeedbackSink* sink);

    // --- user operations -------------------------------------------------------
    NoteId create_text_note(const std::string& text, TimestampMs now);
    NoteId create_audio_note(std::vector<std::uint8_t> payload,
                             std::int64_t duration_ms, TimestampMs now);
    void attach_person_trigger(const NoteId& id, ContactId contact, TimestampMs now);
    void detach_person_trigger(const NoteId& id, ContactId contact, TimestampMs now);
    void attach_location_trigger(const NoteId& id, LocationId location,
                                 TimestampMs now);
    void detach_location_trigger(const NoteId& id, LocationId location,
                                 TimestampMs now);
    void set_note_window(const NoteId& id, std::optional<TimeWindow> window,
                         TimestampMs now);
    void set_note_carrier(const NoteId& id, std::optional<ContactId> carrier,
                          TimestampMs now);
    // Marks the note for delivery to the recipients (dirty rows; the actual
    // transfer happens on the next sync). Carrier notes are validated:
    // the carrier must be one of the note's person triggers and the
    // recipient set must not be empty.
    void send_note(const NoteId& id, const std::set<ContactId>& recipients,
                   TimestampMs now);
    LocationDef save_current_location(const std::string& label, TimestampMs now);
    void associate_contact(ContactId contact, const std::string& name,
                           const DeviceId& device, TimestampMs now);
    void ignore_contact(ContactId contact, TimestampMs until, TimestampMs now);
    void unignore_contact(ContactId contact, TimestampMs now);
    void block_contact(ContactId contact, TimestampMs now);
    void unblock_contact(ContactId contact, TimestampMs now);
    void set_invisible(bool on, TimestampMs now);
    void set_silent(bool on, TimestampMs now);
    void record_action(const std::string& screen, GestureCommand command,
                       TimestampMs now);

    // --- views -----------------------------------------------------------------
    std::vector<NearbyEntry> people_near() const;
    std::vector<PresenceSession> sessions() const { return presence_.sessions(); }
    const std::vector<FiringRecord>& firing_history() const {
        return evaluator_.history();
    }

    // --- sync --------------------------------------------------------------------
    // Registers if needed, uploads dirty rows, applies pending pushes.
    // Throws LinkDown untouched if the transport is unreachable; whatever
    // completed before the failure stays applied (each step is atomic).
    SyncOutcome sync_with(BrokerLink& link, TimestampMs now, FeedbackSink* sink);
    // Applies one push message; duplicates (seen msg_id) are no-ops.
    // Returns true when the message had an effect.
    bool apply_push(const PushMessage& message, TimestampMs now, FeedbackSink* sink);

private:
    PresenceFilter make_filter(const PrivacyState& privacy,
                               const std::map<DeviceId, ContactAssociation>& assoc,
                               const std::set<DeviceId>& blocked_by) const;
    std::set<DeviceId> known_beacon_devices() const;
    void dispatch(const Notification& notification, FeedbackKind kind,
                  FeedbackSink* sink);
    void enforce_privacy(TimestampMs now);

    std::unique_ptr<ClientStore> store_;
    ClientConfig cfg_;
    PresenceEngine presence_;
    TriggerEvaluator evaluator_;
    GeoPoint position_{};
};

}  // namespace nearnote
