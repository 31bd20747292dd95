#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nearnote/presence.hpp"
#include "nearnote/wire.hpp"

namespace nearnote {

enum class GestureCommand { SwipeUp, SwipeDown, SwipeLeft, SwipeRight, DoubleTap,
                            LongPress };

const char* gesture_name(GestureCommand g);
std::optional<GestureCommand> gesture_from_name(std::string_view name);

// One row of the usage-history table: every command the user made, on
// which screen, drawn from the six-gesture vocabulary.
struct ActionRecord {
    TimestampMs at = 0;
    std::string screen;
    GestureCommand command = GestureCommand::DoubleTap;

    bool operator==(const ActionRecord&) const = default;
};

// Local per-device persistence.
//
// Functional tables: associations ("ListaMACs"), notes, note_people,
// note_locations, locations, received_notes, blocked, ignored. History
// tables: detections and actions (append-only, never synced), plus the
// notification history. Every mutation of a syncable row bumps its version
// counter and sets its dirty flag; the sync client drains dirty rows into
// envelopes and clears flags per acknowledged (key, version), so an edit
// racing an upload stays dirty.
//
// Persistence is a snapshot file plus an append-only journal of operations.
// A mutation is journaled before it is applied, and a torn trailing journal
// line is discarded on open, so any single operation either fully applies
// or leaves the store unchanged. Writes are serialized by the store;
// reads return value snapshots.
class ClientStore {
public:
    // File-backed store under data_dir (created if missing).
    static std::unique_ptr<ClientStore> open(const std::filesystem::path& data_dir,
                                             const DeviceId& owner);
    // Memory-only store; used by the simulator and by tests.
    static std::unique_ptr<ClientStore> in_memory(const DeviceId& owner);
    // Owner of an existing on-disk store, if the directory holds one.
    static std::optional<DeviceId> probe_owner(const std::filesystem::path& data_dir);

    ~ClientStore();
    ClientStore(const ClientStore&) = delete;
    ClientStore& operator=(const ClientStore&) = delete;

    const DeviceId& owner() const { return owner_; }

    // Rewrites the snapshot and truncates the journal.
    void compact();

    // --- associations -----------------------------------------------------
    void insert_association(const ContactAssociation& a);
    void update_association(const ContactAssociation& a);
    void delete_association(ContactId contact);
    std::optional<ContactAssociation> get_association(ContactId contact) const;
    std::optional<ContactAssociation> association_by_device(const DeviceId& d) const;
    std::vector<ContactAssociation> list_associations() const;
    std::map<DeviceId, ContactAssociation> association_index() const;

    // --- notes --------------------------------------------------------------
    NoteId create_note(NoteBody body, TimestampMs created_at);
    Note get_note(const NoteId& id) const;  // assembled with trigger links
    std::vector<Note> list_notes() const;
    void update_note_body(const NoteId& id, NoteBody body);
    void delete_note(const NoteId& id);  // cascades to trigger links
    void attach_person(const NoteId& id, ContactId contact);
    void detach_person(const NoteId& id, ContactId contact);
    void attach_location(const NoteId& id, LocationId location);
    void detach_location(const NoteId& id, LocationId location);
    void set_time_window(const NoteId& id, std::optional<TimeWindow> window);
    void set_carrier(const NoteId& id, std::optional<ContactId> carrier);
    void set_recipients(const NoteId& id, std::set<ContactId> recipients);

    // --- locations ----------------------------------------------------------
    LocationDef save_outdoor_location(const std::string& label, GeoPoint point);
    LocationDef save_indoor_location(const std::string& label, const DeviceId& beacon);
    std::optional<LocationDef> get_location(LocationId id) const;
    std::vector<LocationDef> list_locations() const;
    void delete_location(LocationId id);

    // --- received notes -----------------------------------------------------
    // Upsert keyed by note id; re-delivery of the same note replaces the
    // payload but keeps the first received_at, so effects stay exactly-once.
    void upsert_received_note(ReceivedNote note);
    std::optional<ReceivedNote> get_received_note(const NoteId& id) const;
    std::vector<ReceivedNote> list_received_notes() const;

    // --- privacy tables -----------------------------------------------------
    void insert_blocked(ContactId contact, const DeviceId& device);
    void delete_blocked(ContactId contact);
    std::vector<std::pair<ContactId, DeviceId>> list_blocked() const;
    void set_ignored(ContactId contact, TimestampMs until);
    void clear_ignored(ContactId contact);
    std::map<ContactId, TimestampMs> list_ignored() const;
    void set_invisible_flag(bool on);
    void set_silent_flag(bool on);
    PrivacyState privacy() const;  // assembled from tables + flags

    // --- history (append-only, exempt from sync) ------------------------------
    void append_detection(const PresenceEvent& event);
    void append_action(const ActionRecord& record);
    const std::vector<PresenceEvent>& detections() const { return detections_; }
    const std::vector<ActionRecord>& actions() const { return actions_; }

    void append_notification(const Notification& n);
    const std::vector<Notification>& notifications() const { return notifications_; }
    void acknowledge_all_notifications();

    // --- history export -------------------------------------------------------
    std::string export_detections() const;  // detection-log grammar
    std::string export_actions() const;     // one free-form record per line
    std::string export_history() const;     // detections then actions

    // --- sync ------------------------------------------------------------------
    SyncEnvelope dirty_rows(TimestampMs now) const;
    void clear_dirty(const std::vector<RowAck>& acked);
    bool has_dirty_rows() const;

    std::optional<std::string> registration_id() const;
    void set_registration_id(const std::string& reg_id);

    std::set<DeviceId> blocked_by() const;
    void add_blocked_by(const DeviceId& device);
    void remove_blocked_by(const DeviceId& device);

    bool seen_push(std::uint64_t msg_id) const;
    void mark_push_seen(std::uint64_t msg_id);

    // Full deterministic dump, used for trace artifacts and the snapshot.
    nlohmann::json snapshot() const;

private:
    struct RowMeta {
        std::uint64_t version = 0;
        bool dirty = false;
        bool deleted = false;
    };
    template <typename T>
    struct Stored {
        T row;
        RowMeta meta;
    };

    explicit ClientStore(DeviceId owner);

    // validate -> journal -> apply
    void commit(nlohmann::json op);
    void apply(const nlohmann::json& op);
    void load_snapshot(const nlohmann::json& snap);
    void replay_journal();
    void journal_append(const std::string& line);
    void bump(const std::string& table, const std::string& key, RowMeta& meta);

    const Note* find_note(const NoteId& id) const;
    Note assemble(const Note& base) const;

    DeviceId owner_;
    std::filesystem::path dir_;
    std::FILE* journal_ = nullptr;

    // tables; values of deleted rows are tombstones kept for sync
    std::map<ContactId, Stored<ContactAssociation>> associations_;
    std::map<std::string, Stored<Note>> notes_;  // base rows, links separate
    std::map<std::string, Stored<std::pair<NoteId, ContactId>>> note_people_;
    std::map<std::string, Stored<std::pair<NoteId, LocationId>>> note_locations_;
    std::map<LocationId, Stored<LocationDef>> locations_;
    std::map<std::string, ReceivedNote> received_notes_;
    std::map<ContactId, Stored<DeviceId>> blocked_;
    std::map<ContactId, TimestampMs> ignored_;

    std::vector<PresenceEvent> detections_;
    std::vector<ActionRecord> actions_;
    std::vector<Notification> notifications_;

    // meta
    std::uint64_t next_note_seq_ = 1;
    LocationId next_location_id_ = 1;
    bool invisible_ = false;
    bool silent_ = false;
    std::optional<std::string> registration_id_;
    std::set<DeviceId> blocked_by_;
    std::set<std::uint64_t> seen_push_ids_;
};

}  // namespace nearnote
