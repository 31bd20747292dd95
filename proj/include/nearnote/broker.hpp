#pragma once

#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nearnote/wire.hpp"

namespace nearnote {

struct Registration {
    DeviceId device;
    std::string reg_id;
    TimestampMs registered_at = 0;

    bool operator==(const Registration&) const = default;
};

// Server role: device registration, note relay to recipients, block-list
// propagation, push fan-out. The broker stores and routes; it never
// evaluates triggers.
//
// Recipients are contact ids local to the sender, so routing resolves them
// through the association rows the sender has uploaded. Delivery is
// at-least-once: deliver() returns the pending queue without consuming it,
// and ack_delivered() removes what the client confirmed, so a crash between
// the two redelivers and the client dedups by msg_id.
//
// One mutex serializes all operations; that is coarser than the per-device
// minimum but safe under concurrent client sessions.
class Broker {
public:
    Broker() = default;

    // Registration returns an opaque push handle. Re-registering replaces
    // the previous handle.
    std::string register_device(const DeviceId& device, TimestampMs now);

    // Applies the envelope's rows (idempotently, by per-row version),
    // stores shared notes, queues NoteDelivery per resolvable recipient and
    // Block/UnblockNotice per block-list change. Every row is acked whether
    // it applied or was a stale duplicate.
    IngestAck ingest(const SyncEnvelope& envelope);

    // Pending messages for the device, FIFO, without consuming them.
    std::vector<PushMessage> deliver(const DeviceId& device) const;

    void ack_delivered(const DeviceId& device,
                       const std::vector<std::uint64_t>& msg_ids);

    // --- inspection ---------------------------------------------------------
    std::optional<Registration> registration(const DeviceId& device) const;
    // Notes with a nonempty recipient set, assembled with their trigger links.
    std::vector<Note> shared_notes() const;
    // All stored note rows (shared or backup), assembled.
    std::vector<Note> stored_notes() const;
    std::set<std::pair<DeviceId, DeviceId>> block_edges() const;  // (blocker, blocked)
    std::size_t pending_count(const DeviceId& device) const;
    std::size_t total_pending() const;
    std::size_t unroutable_recipients() const;

    nlohmann::json snapshot() const;
    void restore(const nlohmann::json& snap);  // replaces all state

private:
    struct SenderState {
        std::map<std::string, std::uint64_t> applied;  // "table|key" -> version
        std::map<ContactId, ContactAssociation> associations;
        std::map<LocationId, LocationDef> locations;
        std::map<std::string, Note> notes;  // base rows by note-id string
        std::map<std::string, std::pair<NoteId, ContactId>> note_people;
        std::map<std::string, std::pair<NoteId, LocationId>> note_locations;
        std::map<ContactId, DeviceId> blocked;
    };

    void enqueue(const DeviceId& device, PushMessage message);
    Note assemble(const SenderState& s, const Note& base) const;
    void route_note(const DeviceId& sender, SenderState& s, const std::string& key);

    mutable std::mutex mu_;
    std::map<DeviceId, Registration> registrations_;
    std::map<DeviceId, SenderState> senders_;
    std::map<DeviceId, std::deque<PushMessage>> pending_;
    std::set<std::pair<DeviceId, DeviceId>> block_edges_;
    std::uint64_t next_msg_id_ = 1;
    std::uint64_t next_reg_seq_ = 1;
    std::size_t unroutable_ = 0;
};

}  // namespace nearnote
