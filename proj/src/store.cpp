#include "nearnote/store.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "nearnote/errors.hpp"
#include "nearnote/json_codec.hpp"
#include "nearnote/logfmt.hpp"

namespace nearnote {

using nlohmann::json;

namespace {

constexpr const char* kSnapshotFile = "store.snapshot.json";
constexpr const char* kJournalFile = "store.journal.jsonl";

const char* kGestureNames[] = {"SwipeUp",   "SwipeDown", "SwipeLeft",
                               "SwipeRight", "DoubleTap", "LongPress"};

std::string link_key(const NoteId& note, std::int64_t other) {
    return note.str() + "|" + std::to_string(other);
}

json window_json(const std::optional<TimeWindow>& w) {
    if (!w) return nullptr;
    return json{{"start", w->start}, {"end", w->end}};
}

std::optional<TimeWindow> window_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return TimeWindow{j.at("start").get<TimestampMs>(), j.at("end").get<TimestampMs>()};
}

}  // namespace

const char* gesture_name(GestureCommand g) {
    return kGestureNames[static_cast<int>(g)];
}

std::optional<GestureCommand> gesture_from_name(std::string_view name) {
    for (int i = 0; i < 6; ++i) {
        if (name == kGestureNames[i]) return static_cast<GestureCommand>(i);
    }
    return std::nullopt;
}

ClientStore::ClientStore(DeviceId owner) : owner_(std::move(owner)) {}

ClientStore::~ClientStore() {
    if (journal_ != nullptr) {
        std::fclose(journal_);
    }
}

std::unique_ptr<ClientStore> ClientStore::open(const std::filesystem::path& data_dir,
                                               const DeviceId& owner) {
    std::filesystem::create_directories(data_dir);
    auto store = std::unique_ptr<ClientStore>(new ClientStore(owner));
    store->dir_ = data_dir;

    const auto snap_path = data_dir / kSnapshotFile;
    if (std::filesystem::exists(snap_path)) {
        std::ifstream in(snap_path);
        json snap = json::parse(in, nullptr, false);
        if (snap.is_discarded()) {
            throw StoreError("unreadable snapshot: " + snap_path.string());
        }
        store->load_snapshot(snap);
    }
    store->replay_journal();

    store->journal_ = std::fopen((data_dir / kJournalFile).string().c_str(), "ab");
    if (store->journal_ == nullptr) {
        throw StoreError("cannot open journal for append under " + data_dir.string());
    }
    if (!std::filesystem::exists(snap_path)) {
        store->compact();  // a fresh directory gets its identity on disk
    }
    return store;
}

std::optional<DeviceId> ClientStore::probe_owner(
    const std::filesystem::path& data_dir) {
    const auto snap_path = data_dir / kSnapshotFile;
    if (!std::filesystem::exists(snap_path)) return std::nullopt;
    std::ifstream in(snap_path);
    json snap = json::parse(in, nullptr, false);
    if (snap.is_discarded() || !snap.contains("owner")) return std::nullopt;
    return DeviceId::try_parse(snap.at("owner").get<std::string>());
}

std::unique_ptr<ClientStore> ClientStore::in_memory(const DeviceId& owner) {
    return std::unique_ptr<ClientStore>(new ClientStore(owner));
}

void ClientStore::replay_journal() {
    if (dir_.empty()) return;
    const auto path = dir_ / kJournalFile;
    std::ifstream in(path);
    if (!in.good()) return;
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
        json op = json::parse(lines[i], nullptr, false);
        if (op.is_discarded()) {
            if (i + 1 == lines.size()) {
                // torn trailing write from a crash; the operation never applied
                break;
            }
            throw StoreError("corrupt journal line " + std::to_string(i + 1) + " in " +
                             path.string());
        }
        apply(op);
    }
}

void ClientStore::journal_append(const std::string& line) {
    if (journal_ == nullptr) return;
    if (std::fwrite(line.data(), 1, line.size(), journal_) != line.size() ||
        std::fputc('\n', journal_) == EOF || std::fflush(journal_) != 0) {
        throw StoreError("journal write failed");
    }
}

void ClientStore::commit(json op) {
    journal_append(op.dump());
    apply(op);
}

void ClientStore::compact() {
    if (dir_.empty()) return;
    const auto tmp = dir_ / (std::string(kSnapshotFile) + ".tmp");
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << snapshot().dump(2) << '\n';
        if (!out.good()) throw StoreError("snapshot write failed");
    }
    std::filesystem::rename(tmp, dir_ / kSnapshotFile);
    if (journal_ != nullptr) std::fclose(journal_);
    journal_ = std::fopen((dir_ / kJournalFile).string().c_str(), "wb");
    if (journal_ == nullptr) throw StoreError("cannot truncate journal");
}

void ClientStore::bump(const std::string&, const std::string&, RowMeta& meta) {
    ++meta.version;
    meta.dirty = true;
}

// --- associations -----------------------------------------------------------

void ClientStore::insert_association(const ContactAssociation& a) {
    if (auto it = associations_.find(a.contact_id);
        it != associations_.end() && !it->second.meta.deleted) {
        throw IntegrityViolation("contact " + std::to_string(a.contact_id) +
                                 " already associated");
    }
    if (auto existing = association_by_device(a.device)) {
        throw IntegrityViolation("device " + a.device.str() +
                                 " already associated with contact " +
                                 std::to_string(existing->contact_id));
    }
    commit(json{{"op", "insert_association"}, {"row", association_to_json(a)}});
}

void ClientStore::update_association(const ContactAssociation& a) {
    const auto it = associations_.find(a.contact_id);
    if (it == associations_.end() || it->second.meta.deleted) {
        throw NotFound("no association for contact " + std::to_string(a.contact_id));
    }
    if (auto other = association_by_device(a.device);
        other && other->contact_id != a.contact_id) {
        throw IntegrityViolation("device " + a.device.str() +
                                 " already associated with contact " +
                                 std::to_string(other->contact_id));
    }
    commit(json{{"op", "update_association"}, {"row", association_to_json(a)}});
}

void ClientStore::delete_association(ContactId contact) {
    const auto it = associations_.find(contact);
    if (it == associations_.end() || it->second.meta.deleted) {
        throw NotFound("no association for contact " + std::to_string(contact));
    }
    commit(json{{"op", "delete_association"}, {"contact", contact}});
}

std::optional<ContactAssociation> ClientStore::get_association(ContactId contact) const {
    const auto it = associations_.find(contact);
    if (it == associations_.end() || it->second.meta.deleted) return std::nullopt;
    return it->second.row;
}

std::optional<ContactAssociation> ClientStore::association_by_device(
    const DeviceId& d) const {
    for (const auto& [contact, stored] : associations_) {
        if (!stored.meta.deleted && stored.row.device == d) return stored.row;
    }
    return std::nullopt;
}

std::vector<ContactAssociation> ClientStore::list_associations() const {
    std::vector<ContactAssociation> out;
    for (const auto& [contact, stored] : associations_) {
        if (!stored.meta.deleted) out.push_back(stored.row);
    }
    return out;
}

std::map<DeviceId, ContactAssociation> ClientStore::association_index() const {
    std::map<DeviceId, ContactAssociation> out;
    for (const auto& [contact, stored] : associations_) {
        if (!stored.meta.deleted) out.emplace(stored.row.device, stored.row);
    }
    return out;
}

// --- notes --------------------------------------------------------------------

const Note* ClientStore::find_note(const NoteId& id) const {
    const auto it = notes_.find(id.str());
    if (it == notes_.end() || it->second.meta.deleted) return nullptr;
    return &it->second.row;
}

Note ClientStore::assemble(const Note& base) const {
    Note full = base;
    for (const auto& [key, stored] : note_people_) {
        if (!stored.meta.deleted && stored.row.first == base.id) {
            full.person_triggers.insert(stored.row.second);
        }
    }
    for (const auto& [key, stored] : note_locations_) {
        if (!stored.meta.deleted && stored.row.first == base.id) {
            full.location_triggers.insert(stored.row.second);
        }
    }
    return full;
}

NoteId ClientStore::create_note(NoteBody body, TimestampMs created_at) {
    Note note{NoteId{owner_, next_note_seq_}, std::move(body), created_at,
              {},   {},        std::nullopt,
              {},   std::nullopt};
    commit(json{{"op", "create_note"}, {"row", note_to_json(note)}});
    return note.id;
}

Note ClientStore::get_note(const NoteId& id) const {
    const Note* base = find_note(id);
    if (base == nullptr) throw NotFound("no note " + id.str());
    return assemble(*base);
}

std::vector<Note> ClientStore::list_notes() const {
    std::vector<Note> out;
    for (const auto& [key, stored] : notes_) {
        if (!stored.meta.deleted) out.push_back(assemble(stored.row));
    }
    return out;
}

void ClientStore::update_note_body(const NoteId& id, NoteBody body) {
    if (find_note(id) == nullptr) throw NotFound("no note " + id.str());
    commit(json{{"op", "update_note_body"},
                {"id", id.str()},
                {"body", body_to_json(body)}});
}

void ClientStore::delete_note(const NoteId& id) {
    if (find_note(id) == nullptr) throw NotFound("no note " + id.str());
    commit(json{{"op", "delete_note"}, {"id", id.str()}});
}

void ClientStore::attach_person(const NoteId& id, ContactId contact) {
    if (find_note(id) == nullptr) throw NotFound("no note " + id.str());
    if (!get_association(contact)) {
        throw UnknownContact("no contact " + std::to_string(contact));
    }
    commit(json{{"op", "attach_person"}, {"id", id.str()}, {"contact", contact}});
}

void ClientStore::detach_person(const NoteId& id, ContactId contact) {
    const Note* base = find_note(id);
    if (base == nullptr) throw NotFound("no note " + id.str());
    const auto it = note_people_.find(link_key(id, contact));
    if (it == note_people_.end() || it->second.meta.deleted) {
        throw NotFound("contact " + std::to_string(contact) + " not attached to " +
                       id.str());
    }
    commit(json{{"op", "detach_person"}, {"id", id.str()}, {"contact", contact}});
}

void ClientStore::attach_location(const NoteId& id, LocationId location) {
    if (find_note(id) == nullptr) throw NotFound("no note " + id.str());
    if (!get_location(location)) {
        throw UnknownLocation("no location " + std::to_string(location));
    }
    commit(json{{"op", "attach_location"}, {"id", id.str()}, {"location", location}});
}

void ClientStore::detach_location(const NoteId& id, LocationId location) {
    if (find_note(id) == nullptr) throw NotFound("no note " + id.str());
    const auto it = note_locations_.find(link_key(id, location));
    if (it == note_locations_.end() || it->second.meta.deleted) {
        throw NotFound("location " + std::to_string(location) + " not attached to " +
                       id.str());
    }
    commit(json{{"op", "detach_location"}, {"id", id.str()}, {"location", location}});
}

void ClientStore::set_time_window(const NoteId& id, std::optional<TimeWindow> window) {
    if (find_note(id) == nullptr) throw NotFound("no note " + id.str());
    commit(json{{"op", "set_time_window"}, {"id", id.str()},
                {"window", window_json(window)}});
}

void ClientStore::set_carrier(const NoteId& id, std::optional<ContactId> carrier) {
    const Note* base = find_note(id);
    if (base == nullptr) throw NotFound("no note " + id.str());
    if (carrier) {
        const Note full = assemble(*base);
        if (!full.person_triggers.contains(*carrier)) {
            throw MissingCarrierTrigger("carrier " + std::to_string(*carrier) +
                                        " is not a person trigger of " + id.str());
        }
    }
    commit(json{{"op", "set_carrier"}, {"id", id.str()},
                {"carrier", carrier ? json(*carrier) : json(nullptr)}});
}

void ClientStore::set_recipients(const NoteId& id, std::set<ContactId> recipients) {
    if (find_note(id) == nullptr) throw NotFound("no note " + id.str());
    for (ContactId r : recipients) {
        if (!get_association(r)) {
            throw UnknownContact("recipient contact " + std::to_string(r) +
                                 " has no association");
        }
    }
    commit(json{{"op", "set_recipients"}, {"id", id.str()},
                {"recipients", recipients}});
}

// --- locations ------------------------------------------------------------------

LocationDef ClientStore::save_outdoor_location(const std::string& label,
                                               GeoPoint point) {
    const LocationDef def = LocationDef::outdoor(next_location_id_, point, label);
    commit(json{{"op", "save_location"}, {"row", location_to_json(def)}});
    return def;
}

LocationDef ClientStore::save_indoor_location(const std::string& label,
                                              const DeviceId& beacon) {
    const LocationDef def = LocationDef::indoor(next_location_id_, beacon, label);
    commit(json{{"op", "save_location"}, {"row", location_to_json(def)}});
    return def;
}

std::optional<LocationDef> ClientStore::get_location(LocationId id) const {
    const auto it = locations_.find(id);
    if (it == locations_.end() || it->second.meta.deleted) return std::nullopt;
    return it->second.row;
}

std::vector<LocationDef> ClientStore::list_locations() const {
    std::vector<LocationDef> out;
    for (const auto& [id, stored] : locations_) {
        if (!stored.meta.deleted) out.push_back(stored.row);
    }
    return out;
}

void ClientStore::delete_location(LocationId id) {
    if (!get_location(id)) throw NotFound("no location " + std::to_string(id));
    commit(json{{"op", "delete_location"}, {"id", id}});
}

// --- received notes ----------------------------------------------------------------

void ClientStore::upsert_received_note(ReceivedNote note) {
    commit(json{{"op", "upsert_received"}, {"row", received_note_to_json(note)}});
}

std::optional<ReceivedNote> ClientStore::get_received_note(const NoteId& id) const {
    const auto it = received_notes_.find(id.str());
    if (it == received_notes_.end()) return std::nullopt;
    return it->second;
}

std::vector<ReceivedNote> ClientStore::list_received_notes() const {
    std::vector<ReceivedNote> out;
    for (const auto& [key, note] : received_notes_) out.push_back(note);
    return out;
}

// --- privacy tables ----------------------------------------------------------------

void ClientStore::insert_blocked(ContactId contact, const DeviceId& device) {
    if (auto it = blocked_.find(contact);
        it != blocked_.end() && !it->second.meta.deleted && it->second.row == device) {
        return;  // already blocked; keep idempotent
    }
    commit(json{{"op", "insert_blocked"}, {"contact", contact},
                {"device", device.str()}});
}

void ClientStore::delete_blocked(ContactId contact) {
    const auto it = blocked_.find(contact);
    if (it == blocked_.end() || it->second.meta.deleted) {
        throw NotFound("contact " + std::to_string(contact) + " is not blocked");
    }
    commit(json{{"op", "delete_blocked"}, {"contact", contact}});
}

std::vector<std::pair<ContactId, DeviceId>> ClientStore::list_blocked() const {
    std::vector<std::pair<ContactId, DeviceId>> out;
    for (const auto& [contact, stored] : blocked_) {
        if (!stored.meta.deleted) out.emplace_back(contact, stored.row);
    }
    return out;
}

void ClientStore::set_ignored(ContactId contact, TimestampMs until) {
    commit(json{{"op", "set_ignored"}, {"contact", contact}, {"until", until}});
}

void ClientStore::clear_ignored(ContactId contact) {
    commit(json{{"op", "clear_ignored"}, {"contact", contact}});
}

std::map<ContactId, TimestampMs> ClientStore::list_ignored() const {
    return ignored_;
}

void ClientStore::set_invisible_flag(bool on) {
    commit(json{{"op", "set_invisible"}, {"on", on}});
}

void ClientStore::set_silent_flag(bool on) {
    commit(json{{"op", "set_silent"}, {"on", on}});
}

PrivacyState ClientStore::privacy() const {
    PrivacyState p;
    for (const auto& [contact, stored] : blocked_) {
        if (!stored.meta.deleted) p.blocked.insert(contact);
    }
    p.ignored = ignored_;
    p.invisible = invisible_;
    p.silent = silent_;
    return p;
}

// --- history ---------------------------------------------------------------------

void ClientStore::append_detection(const PresenceEvent& event) {
    commit(json{{"op", "append_detection"}, {"event", presence_event_to_json(event)}});
}

void ClientStore::append_action(const ActionRecord& record) {
    commit(json{{"op", "append_action"},
                {"at", record.at},
                {"screen", record.screen},
                {"command", gesture_name(record.command)}});
}

void ClientStore::append_notification(const Notification& n) {
    commit(json{{"op", "append_notification"}, {"n", notification_to_json(n)}});
}

void ClientStore::acknowledge_all_notifications() {
    commit(json{{"op", "ack_all_notifications"}});
}

std::string ClientStore::export_detections() const {
    std::string out;
    for (const PresenceEvent& event : detections_) {
        out += render_log_line(log_line_from_event(event));
        out.push_back('\n');
    }
    return out;
}

std::string ClientStore::export_actions() const {
    std::string out;
    for (const ActionRecord& a : actions_) {
        out += "Acao ";
        out += a.screen;
        out.push_back(' ');
        out += gesture_name(a.command);
        out += "\tTime: ";
        out += render_datetime(a.at);
        out.push_back('\n');
    }
    return out;
}

std::string ClientStore::export_history() const {
    return export_detections() + export_actions();
}

// --- sync -----------------------------------------------------------------------

SyncEnvelope ClientStore::dirty_rows(TimestampMs now) const {
    SyncEnvelope envelope{owner_, {}, now};
    auto add = [&](const char* table, const std::string& key, const RowMeta& meta,
                   json payload) {
        if (!meta.dirty) return;
        envelope.rows.push_back(RowChange{table, key, meta.version, meta.deleted,
                                          meta.deleted ? json(nullptr)
                                                       : std::move(payload)});
    };
    for (const auto& [contact, stored] : associations_) {
        add("associations", std::to_string(contact), stored.meta,
            association_to_json(stored.row));
    }
    for (const auto& [id, stored] : locations_) {
        add("locations", std::to_string(id), stored.meta,
            location_to_json(stored.row));
    }
    for (const auto& [key, stored] : notes_) {
        add("notes", key, stored.meta, note_to_json(stored.row));
    }
    for (const auto& [key, stored] : note_people_) {
        add("note_people", key, stored.meta,
            json{{"note_id", stored.row.first.str()},
                 {"contact_id", stored.row.second}});
    }
    for (const auto& [key, stored] : note_locations_) {
        add("note_locations", key, stored.meta,
            json{{"note_id", stored.row.first.str()},
                 {"location_id", stored.row.second}});
    }
    for (const auto& [contact, stored] : blocked_) {
        add("blocked", std::to_string(contact), stored.meta,
            json{{"contact_id", contact}, {"device", stored.row.str()}});
    }
    std::sort(envelope.rows.begin(), envelope.rows.end(),
              [](const RowChange& a, const RowChange& b) {
                  const int ra = sync_table_rank(a.table);
                  const int rb = sync_table_rank(b.table);
                  if (ra != rb) return ra < rb;
                  return a.key < b.key;
              });
    return envelope;
}

bool ClientStore::has_dirty_rows() const {
    const auto any_dirty = [](const auto& table) {
        for (const auto& [key, stored] : table) {
            if (stored.meta.dirty) return true;
        }
        return false;
    };
    return any_dirty(associations_) || any_dirty(locations_) || any_dirty(notes_) ||
           any_dirty(note_people_) || any_dirty(note_locations_) || any_dirty(blocked_);
}

void ClientStore::clear_dirty(const std::vector<RowAck>& acked) {
    if (acked.empty()) return;
    json rows = json::array();
    for (const auto& a : acked) {
        rows.push_back(json{{"table", a.table}, {"key", a.key}, {"version", a.version}});
    }
    commit(json{{"op", "clear_dirty"}, {"acked", rows}});
}

std::optional<std::string> ClientStore::registration_id() const {
    return registration_id_;
}

void ClientStore::set_registration_id(const std::string& reg_id) {
    commit(json{{"op", "set_registration"}, {"reg_id", reg_id}});
}

std::set<DeviceId> ClientStore::blocked_by() const {
    return blocked_by_;
}

void ClientStore::add_blocked_by(const DeviceId& device) {
    commit(json{{"op", "add_blocked_by"}, {"device", device.str()}});
}

void ClientStore::remove_blocked_by(const DeviceId& device) {
    commit(json{{"op", "remove_blocked_by"}, {"device", device.str()}});
}

bool ClientStore::seen_push(std::uint64_t msg_id) const {
    return seen_push_ids_.contains(msg_id);
}

void ClientStore::mark_push_seen(std::uint64_t msg_id) {
    commit(json{{"op", "mark_push_seen"}, {"msg_id", msg_id}});
}

// --- apply ------------------------------------------------------------------------

void ClientStore::apply(const json& op) {
    const auto name = op.at("op").get<std::string>();

    if (name == "insert_association" || name == "update_association") {
        ContactAssociation a = association_from_json(op.at("row"));
        auto it = associations_.find(a.contact_id);
        if (it == associations_.end()) {
            Stored<ContactAssociation> stored{a, {}};
            bump("associations", std::to_string(a.contact_id), stored.meta);
            associations_.emplace(a.contact_id, std::move(stored));
        } else {
            it->second.row = a;
            it->second.meta.deleted = false;
            bump("associations", std::to_string(a.contact_id), it->second.meta);
        }
    } else if (name == "delete_association") {
        auto& stored = associations_.at(op.at("contact").get<ContactId>());
        stored.meta.deleted = true;
        bump("associations", "", stored.meta);
    } else if (name == "create_note") {
        Note note = note_from_json(op.at("row"));
        const std::string key = note.id.str();
        Stored<Note> stored{std::move(note), {}};
        bump("notes", key, stored.meta);
        if (stored.row.id.creator == owner_) {
            next_note_seq_ = std::max(next_note_seq_, stored.row.id.seq + 1);
        }
        notes_.insert_or_assign(key, std::move(stored));
    } else if (name == "update_note_body") {
        auto& stored = notes_.at(op.at("id").get<std::string>());
        stored.row.body = body_from_json(op.at("body"));
        bump("notes", "", stored.meta);
    } else if (name == "delete_note") {
        const auto key = op.at("id").get<std::string>();
        auto& stored = notes_.at(key);
        stored.meta.deleted = true;
        bump("notes", key, stored.meta);
        for (auto& [lk, link] : note_people_) {
            if (!link.meta.deleted && link.row.first.str() == key) {
                link.meta.deleted = true;
                bump("note_people", lk, link.meta);
            }
        }
        for (auto& [lk, link] : note_locations_) {
            if (!link.meta.deleted && link.row.first.str() == key) {
                link.meta.deleted = true;
                bump("note_locations", lk, link.meta);
            }
        }
    } else if (name == "attach_person") {
        const NoteId id = NoteId::parse(op.at("id").get<std::string>());
        const ContactId contact = op.at("contact").get<ContactId>();
        const std::string key = link_key(id, contact);
        auto it = note_people_.find(key);
        if (it == note_people_.end()) {
            Stored<std::pair<NoteId, ContactId>> stored{{id, contact}, {}};
            bump("note_people", key, stored.meta);
            note_people_.emplace(key, std::move(stored));
        } else {
            it->second.meta.deleted = false;
            bump("note_people", key, it->second.meta);
        }
    } else if (name == "detach_person") {
        const NoteId id = NoteId::parse(op.at("id").get<std::string>());
        const ContactId contact = op.at("contact").get<ContactId>();
        auto& stored = note_people_.at(link_key(id, contact));
        stored.meta.deleted = true;
        bump("note_people", "", stored.meta);
        // Detaching the carrier's person trigger clears the carrier too,
        // keeping the carrier-in-triggers invariant.
        auto& note = notes_.at(id.str());
        if (note.row.carrier && *note.row.carrier == contact) {
            note.row.carrier.reset();
            bump("notes", "", note.meta);
        }
    } else if (name == "attach_location") {
        const NoteId id = NoteId::parse(op.at("id").get<std::string>());
        const LocationId location = op.at("location").get<LocationId>();
        const std::string key = link_key(id, location);
        auto it = note_locations_.find(key);
        if (it == note_locations_.end()) {
            Stored<std::pair<NoteId, LocationId>> stored{{id, location}, {}};
            bump("note_locations", key, stored.meta);
            note_locations_.emplace(key, std::move(stored));
        } else {
            it->second.meta.deleted = false;
            bump("note_locations", key, it->second.meta);
        }
    } else if (name == "detach_location") {
        const NoteId id = NoteId::parse(op.at("id").get<std::string>());
        const LocationId location = op.at("location").get<LocationId>();
        auto& stored = note_locations_.at(link_key(id, location));
        stored.meta.deleted = true;
        bump("note_locations", "", stored.meta);
    } else if (name == "set_time_window") {
        auto& stored = notes_.at(op.at("id").get<std::string>());
        stored.row.time_window = window_from(op.at("window"));
        bump("notes", "", stored.meta);
    } else if (name == "set_carrier") {
        auto& stored = notes_.at(op.at("id").get<std::string>());
        if (op.at("carrier").is_null()) {
            stored.row.carrier.reset();
        } else {
            stored.row.carrier = op.at("carrier").get<ContactId>();
        }
        bump("notes", "", stored.meta);
    } else if (name == "set_recipients") {
        auto& stored = notes_.at(op.at("id").get<std::string>());
        stored.row.recipients = op.at("recipients").get<std::set<ContactId>>();
        bump("notes", "", stored.meta);
    } else if (name == "save_location") {
        LocationDef def = location_from_json(op.at("row"));
        next_location_id_ = std::max(next_location_id_, def.location_id + 1);
        Stored<LocationDef> stored{std::move(def), {}};
        bump("locations", "", stored.meta);
        locations_.insert_or_assign(stored.row.location_id, std::move(stored));
    } else if (name == "delete_location") {
        auto& stored = locations_.at(op.at("id").get<LocationId>());
        stored.meta.deleted = true;
        bump("locations", "", stored.meta);
    } else if (name == "upsert_received") {
        ReceivedNote note = received_note_from_json(op.at("row"));
        const std::string key = note.id.str();
        if (auto it = received_notes_.find(key); it != received_notes_.end()) {
            note.received_at = it->second.received_at;  // first receipt wins
        }
        received_notes_.insert_or_assign(key, std::move(note));
    } else if (name == "insert_blocked") {
        const ContactId contact = op.at("contact").get<ContactId>();
        DeviceId device = DeviceId::parse(op.at("device").get<std::string>());
        auto it = blocked_.find(contact);
        if (it == blocked_.end()) {
            Stored<DeviceId> stored{std::move(device), {}};
            bump("blocked", "", stored.meta);
            blocked_.emplace(contact, std::move(stored));
        } else {
            it->second.row = std::move(device);
            it->second.meta.deleted = false;
            bump("blocked", "", it->second.meta);
        }
    } else if (name == "delete_blocked") {
        auto& stored = blocked_.at(op.at("contact").get<ContactId>());
        stored.meta.deleted = true;
        bump("blocked", "", stored.meta);
    } else if (name == "set_ignored") {
        ignored_[op.at("contact").get<ContactId>()] = op.at("until").get<TimestampMs>();
    } else if (name == "clear_ignored") {
        ignored_.erase(op.at("contact").get<ContactId>());
    } else if (name == "set_invisible") {
        invisible_ = op.at("on").get<bool>();
    } else if (name == "set_silent") {
        silent_ = op.at("on").get<bool>();
    } else if (name == "append_detection") {
        detections_.push_back(presence_event_from_json(op.at("event")));
    } else if (name == "append_action") {
        actions_.push_back(ActionRecord{
            op.at("at").get<TimestampMs>(), op.at("screen").get<std::string>(),
            *gesture_from_name(op.at("command").get<std::string>())});
    } else if (name == "append_notification") {
        notifications_.push_back(notification_from_json(op.at("n")));
    } else if (name == "ack_all_notifications") {
        for (auto& n : notifications_) n.acknowledged = true;
    } else if (name == "clear_dirty") {
        for (const auto& a : op.at("acked")) {
            const auto table = a.at("table").get<std::string>();
            const auto key = a.at("key").get<std::string>();
            const auto version = a.at("version").get<std::uint64_t>();
            auto clear = [&](auto& map, const auto& mapped_key) {
                auto it = map.find(mapped_key);
                if (it != map.end() && it->second.meta.version == version) {
                    it->second.meta.dirty = false;
                }
            };
            if (table == "associations") {
                clear(associations_, static_cast<ContactId>(std::stoll(key)));
            } else if (table == "locations") {
                clear(locations_, static_cast<LocationId>(std::stoll(key)));
            } else if (table == "notes") {
                clear(notes_, key);
            } else if (table == "note_people") {
                clear(note_people_, key);
            } else if (table == "note_locations") {
                clear(note_locations_, key);
            } else if (table == "blocked") {
                clear(blocked_, static_cast<ContactId>(std::stoll(key)));
            }
        }
    } else if (name == "set_registration") {
        registration_id_ = op.at("reg_id").get<std::string>();
    } else if (name == "add_blocked_by") {
        blocked_by_.insert(DeviceId::parse(op.at("device").get<std::string>()));
    } else if (name == "remove_blocked_by") {
        blocked_by_.erase(DeviceId::parse(op.at("device").get<std::string>()));
    } else if (name == "mark_push_seen") {
        seen_push_ids_.insert(op.at("msg_id").get<std::uint64_t>());
    } else {
        throw StoreError("unknown journal op: " + name);
    }
}

// --- snapshot ----------------------------------------------------------------------

nlohmann::json ClientStore::snapshot() const {
    auto meta_json = [](const RowMeta& m) {
        return json{{"version", m.version}, {"dirty", m.dirty}, {"deleted", m.deleted}};
    };

    json snap{{"v", 1}, {"owner", owner_.str()}};

    json meta{{"next_note_seq", next_note_seq_},
              {"next_location_id", next_location_id_},
              {"invisible", invisible_},
              {"silent", silent_},
              {"seen_push", seen_push_ids_}};
    if (registration_id_) meta["registration_id"] = *registration_id_;
    json blocked_by = json::array();
    for (const auto& d : blocked_by_) blocked_by.push_back(d.str());
    meta["blocked_by"] = blocked_by;
    snap["meta"] = std::move(meta);

    json associations = json::array();
    for (const auto& [contact, stored] : associations_) {
        associations.push_back(json{{"row", association_to_json(stored.row)},
                                    {"meta", meta_json(stored.meta)}});
    }
    snap["associations"] = std::move(associations);

    json notes = json::array();
    for (const auto& [key, stored] : notes_) {
        notes.push_back(
            json{{"row", note_to_json(stored.row)}, {"meta", meta_json(stored.meta)}});
    }
    snap["notes"] = std::move(notes);

    json note_people = json::array();
    for (const auto& [key, stored] : note_people_) {
        note_people.push_back(json{{"note_id", stored.row.first.str()},
                                   {"contact_id", stored.row.second},
                                   {"meta", meta_json(stored.meta)}});
    }
    snap["note_people"] = std::move(note_people);

    json note_locations = json::array();
    for (const auto& [key, stored] : note_locations_) {
        note_locations.push_back(json{{"note_id", stored.row.first.str()},
                                      {"location_id", stored.row.second},
                                      {"meta", meta_json(stored.meta)}});
    }
    snap["note_locations"] = std::move(note_locations);

    json locations = json::array();
    for (const auto& [id, stored] : locations_) {
        locations.push_back(json{{"row", location_to_json(stored.row)},
                                 {"meta", meta_json(stored.meta)}});
    }
    snap["locations"] = std::move(locations);

    json received = json::array();
    for (const auto& [key, note] : received_notes_) {
        received.push_back(received_note_to_json(note));
    }
    snap["received_notes"] = std::move(received);

    json blocked = json::array();
    for (const auto& [contact, stored] : blocked_) {
        blocked.push_back(json{{"contact_id", contact},
                               {"device", stored.row.str()},
                               {"meta", meta_json(stored.meta)}});
    }
    snap["blocked"] = std::move(blocked);

    snap["ignored"] = json::object();
    for (const auto& [contact, until] : ignored_) {
        snap["ignored"][std::to_string(contact)] = until;
    }

    json detections = json::array();
    for (const auto& event : detections_) {
        detections.push_back(presence_event_to_json(event));
    }
    snap["detections"] = std::move(detections);

    json actions = json::array();
    for (const auto& a : actions_) {
        actions.push_back(json{{"at", a.at},
                               {"screen", a.screen},
                               {"command", gesture_name(a.command)}});
    }
    snap["actions"] = std::move(actions);

    json notifications = json::array();
    for (const auto& n : notifications_) {
        notifications.push_back(notification_to_json(n));
    }
    snap["notifications"] = std::move(notifications);

    return snap;
}

void ClientStore::load_snapshot(const json& snap) {
    const auto owner = DeviceId::parse(snap.at("owner").get<std::string>());
    if (owner != owner_) {
        throw StoreError("store belongs to " + owner.str() + ", opened as " +
                         owner_.str());
    }

    const json& meta = snap.at("meta");
    next_note_seq_ = meta.at("next_note_seq").get<std::uint64_t>();
    next_location_id_ = meta.at("next_location_id").get<LocationId>();
    invisible_ = meta.at("invisible").get<bool>();
    silent_ = meta.at("silent").get<bool>();
    if (meta.contains("registration_id")) {
        registration_id_ = meta.at("registration_id").get<std::string>();
    }
    for (const auto& d : meta.at("blocked_by")) {
        blocked_by_.insert(DeviceId::parse(d.get<std::string>()));
    }
    seen_push_ids_ = meta.at("seen_push").get<std::set<std::uint64_t>>();

    auto meta_from = [](const json& j) {
        return RowMeta{j.at("version").get<std::uint64_t>(), j.at("dirty").get<bool>(),
                       j.at("deleted").get<bool>()};
    };

    for (const auto& entry : snap.at("associations")) {
        ContactAssociation a = association_from_json(entry.at("row"));
        associations_.emplace(a.contact_id,
                              Stored<ContactAssociation>{a, meta_from(entry.at("meta"))});
    }
    for (const auto& entry : snap.at("notes")) {
        Note n = note_from_json(entry.at("row"));
        const std::string key = n.id.str();
        notes_.emplace(key, Stored<Note>{std::move(n), meta_from(entry.at("meta"))});
    }
    for (const auto& entry : snap.at("note_people")) {
        const NoteId id = NoteId::parse(entry.at("note_id").get<std::string>());
        const ContactId contact = entry.at("contact_id").get<ContactId>();
        note_people_.emplace(link_key(id, contact),
                             Stored<std::pair<NoteId, ContactId>>{
                                 {id, contact}, meta_from(entry.at("meta"))});
    }
    for (const auto& entry : snap.at("note_locations")) {
        const NoteId id = NoteId::parse(entry.at("note_id").get<std::string>());
        const LocationId location = entry.at("location_id").get<LocationId>();
        note_locations_.emplace(link_key(id, location),
                                Stored<std::pair<NoteId, LocationId>>{
                                    {id, location}, meta_from(entry.at("meta"))});
    }
    for (const auto& entry : snap.at("locations")) {
        LocationDef def = location_from_json(entry.at("row"));
        locations_.emplace(def.location_id,
                           Stored<LocationDef>{def, meta_from(entry.at("meta"))});
    }
    for (const auto& entry : snap.at("received_notes")) {
        ReceivedNote note = received_note_from_json(entry);
        const std::string key = note.id.str();
        received_notes_.emplace(key, std::move(note));
    }
    for (const auto& entry : snap.at("blocked")) {
        blocked_.emplace(entry.at("contact_id").get<ContactId>(),
                         Stored<DeviceId>{
                             DeviceId::parse(entry.at("device").get<std::string>()),
                             meta_from(entry.at("meta"))});
    }
    for (const auto& [key, until] : snap.at("ignored").items()) {
        ignored_[std::stoll(key)] = until.get<TimestampMs>();
    }
    for (const auto& entry : snap.at("detections")) {
        detections_.push_back(presence_event_from_json(entry));
    }
    for (const auto& entry : snap.at("actions")) {
        actions_.push_back(ActionRecord{
            entry.at("at").get<TimestampMs>(), entry.at("screen").get<std::string>(),
            *gesture_from_name(entry.at("command").get<std::string>())});
    }
    for (const auto& entry : snap.at("notifications")) {
        notifications_.push_back(notification_from_json(entry));
    }
}

}  // namespace nearnote
