#include "nearnote/broker.hpp"

#include <algorithm>

#include "nearnote/errors.hpp"
#include "nearnote/json_codec.hpp"

namespace nearnote {

using nlohmann::json;

std::string Broker::register_device(const DeviceId& device, TimestampMs now) {
    std::lock_guard lock(mu_);
    const std::string reg_id =
        "reg-" + std::to_string(next_reg_seq_++) + "-" +
        std::to_string(fnv1a64(device.str()) & 0xFFFFFF);
    registrations_.insert_or_assign(device, Registration{device, reg_id, now});
    return reg_id;
}

void Broker::enqueue(const DeviceId& device, PushMessage message) {
    pending_[device].push_back(std::move(message));
}

Note Broker::assemble(const SenderState& s, const Note& base) const {
    Note full = base;
    for (const auto& [key, link] : s.note_people) {
        if (link.first == base.id) full.person_triggers.insert(link.second);
    }
    for (const auto& [key, link] : s.note_locations) {
        if (link.first == base.id) full.location_triggers.insert(link.second);
    }
    return full;
}

void Broker::route_note(const DeviceId& sender, SenderState& s,
                        const std::string& key) {
    const auto it = s.notes.find(key);
    if (it == s.notes.end()) return;
    const Note note = assemble(s, it->second);
    if (note.recipients.empty()) return;

    ReceivedNote received;
    received.id = note.id;
    received.sender = sender;
    received.body = note.body;
    received.created_at = note.created_at;
    received.person_category = !note.person_triggers.empty();
    received.location_category = !note.location_triggers.empty();
    received.time_window = note.time_window;
    for (ContactId person : note.person_triggers) {
        if (auto a = s.associations.find(person); a != s.associations.end()) {
            received.trigger_devices.insert(a->second.device);
        }
    }
    for (LocationId loc : note.location_triggers) {
        if (auto l = s.locations.find(loc); l != s.locations.end()) {
            received.trigger_locations.push_back(l->second);
        }
    }

    for (ContactId recipient : note.recipients) {
        const auto a = s.associations.find(recipient);
        if (a == s.associations.end()) {
            ++unroutable_;
            continue;
        }
        enqueue(a->second.device, PushMessage{next_msg_id_++, NoteDelivery{received}});
    }
}

IngestAck Broker::ingest(const SyncEnvelope& envelope) {
    std::lock_guard lock(mu_);
    if (!registrations_.contains(envelope.sender)) {
        throw UnknownSender("device " + envelope.sender.str() + " is not registered");
    }
    SenderState& s = senders_[envelope.sender];

    std::vector<RowChange> rows = envelope.rows;
    std::sort(rows.begin(), rows.end(), [](const RowChange& a, const RowChange& b) {
        const int ra = sync_table_rank(a.table);
        const int rb = sync_table_rank(b.table);
        if (ra != rb) return ra < rb;
        if (a.key != b.key) return a.key < b.key;
        return a.version < b.version;
    });

    IngestAck ack;
    std::set<std::string> touched_notes;

    for (const RowChange& row : rows) {
        if (sync_table_rank(row.table) < 0) {
            continue;  // not a syncable table; ignore rather than ack
        }
        ack.acked.push_back(RowAck{row.table, row.key, row.version});

        const std::string vkey = row.table + "|" + row.key;
        if (auto it = s.applied.find(vkey);
            it != s.applied.end() && row.version <= it->second) {
            continue;  // stale duplicate: acked without effect
        }
        s.applied[vkey] = row.version;

        if (row.table == "associations") {
            const ContactId contact = std::stoll(row.key);
            if (row.deleted) {
                s.associations.erase(contact);
            } else {
                s.associations.insert_or_assign(contact,
                                                association_from_json(row.payload));
            }
        } else if (row.table == "locations") {
            const LocationId id = std::stoll(row.key);
            if (row.deleted) {
                s.locations.erase(id);
            } else {
                s.locations.insert_or_assign(id, location_from_json(row.payload));
            }
        } else if (row.table == "notes") {
            if (row.deleted) {
                s.notes.erase(row.key);
            } else {
                s.notes.insert_or_assign(row.key, note_from_json(row.payload));
                touched_notes.insert(row.key);
            }
        } else if (row.table == "note_people") {
            if (row.deleted) {
                if (auto it = s.note_people.find(row.key); it != s.note_people.end()) {
                    touched_notes.insert(it->second.first.str());
                    s.note_people.erase(it);
                }
            } else {
                const NoteId id =
                    NoteId::parse(row.payload.at("note_id").get<std::string>());
                s.note_people.insert_or_assign(
                    row.key,
                    std::make_pair(id, row.payload.at("contact_id").get<ContactId>()));
                touched_notes.insert(id.str());
            }
        } else if (row.table == "note_locations") {
            if (row.deleted) {
                if (auto it = s.note_locations.find(row.key);
                    it != s.note_locations.end()) {
                    touched_notes.insert(it->second.first.str());
                    s.note_locations.erase(it);
                }
            } else {
                const NoteId id =
                    NoteId::parse(row.payload.at("note_id").get<std::string>());
                s.note_locations.insert_or_assign(
                    row.key, std::make_pair(
                                 id, row.payload.at("location_id").get<LocationId>()));
                touched_notes.insert(id.str());
            }
        } else if (row.table == "blocked") {
            const ContactId contact = std::stoll(row.key);
            if (row.deleted) {
                if (auto it = s.blocked.find(contact); it != s.blocked.end()) {
                    block_edges_.erase({envelope.sender, it->second});
                    enqueue(it->second, PushMessage{next_msg_id_++,
                                                    UnblockNotice{envelope.sender}});
                    s.blocked.erase(it);
                }
            } else {
                const DeviceId device =
                    DeviceId::parse(row.payload.at("device").get<std::string>());
                if (auto it = s.blocked.find(contact);
                    it != s.blocked.end() && !(it->second == device)) {
                    // the contact's device changed; release the stale edge
                    block_edges_.erase({envelope.sender, it->second});
                    enqueue(it->second, PushMessage{next_msg_id_++,
                                                    UnblockNotice{envelope.sender}});
                }
                s.blocked.insert_or_assign(contact, device);
                block_edges_.insert({envelope.sender, device});
                enqueue(device,
                        PushMessage{next_msg_id_++, BlockNotice{envelope.sender}});
            }
        }
    }

    for (const std::string& key : touched_notes) {
        route_note(envelope.sender, s, key);
    }
    return ack;
}

std::vector<PushMessage> Broker::deliver(const DeviceId& device) const {
    std::lock_guard lock(mu_);
    if (!registrations_.contains(device)) {
        throw UnknownDevice("device " + device.str() + " is not registered");
    }
    const auto it = pending_.find(device);
    if (it == pending_.end()) return {};
    return {it->second.begin(), it->second.end()};
}

void Broker::ack_delivered(const DeviceId& device,
                           const std::vector<std::uint64_t>& msg_ids) {
    std::lock_guard lock(mu_);
    const auto it = pending_.find(device);
    if (it == pending_.end()) return;
    const std::set<std::uint64_t> ids(msg_ids.begin(), msg_ids.end());
    auto& queue = it->second;
    for (auto q = queue.begin(); q != queue.end();) {
        q = ids.contains(q->msg_id) ? queue.erase(q) : std::next(q);
    }
}

std::optional<Registration> Broker::registration(const DeviceId& device) const {
    std::lock_guard lock(mu_);
    const auto it = registrations_.find(device);
    if (it == registrations_.end()) return std::nullopt;
    return it->second;
}

std::vector<Note> Broker::shared_notes() const {
    std::lock_guard lock(mu_);
    std::vector<Note> out;
    for (const auto& [sender, s] : senders_) {
        for (const auto& [key, base] : s.notes) {
            Note full = assemble(s, base);
            if (!full.recipients.empty()) out.push_back(std::move(full));
        }
    }
    return out;
}

std::vector<Note> Broker::stored_notes() const {
    std::lock_guard lock(mu_);
    std::vector<Note> out;
    for (const auto& [sender, s] : senders_) {
        for (const auto& [key, base] : s.notes) out.push_back(assemble(s, base));
    }
    return out;
}

std::set<std::pair<DeviceId, DeviceId>> Broker::block_edges() const {
    std::lock_guard lock(mu_);
    return block_edges_;
}

std::size_t Broker::pending_count(const DeviceId& device) const {
    std::lock_guard lock(mu_);
    const auto it = pending_.find(device);
    return it == pending_.end() ? 0 : it->second.size();
}

std::size_t Broker::total_pending() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& [device, queue] : pending_) n += queue.size();
    return n;
}

std::size_t Broker::unroutable_recipients() const {
    std::lock_guard lock(mu_);
    return unroutable_;
}

json Broker::snapshot() const {
    std::lock_guard lock(mu_);
    json snap{{"v", kWireVersion},
              {"next_msg_id", next_msg_id_},
              {"next_reg_seq", next_reg_seq_},
              {"unroutable", unroutable_}};

    json regs = json::array();
    for (const auto& [device, reg] : registrations_) {
        regs.push_back(json{{"device", device.str()},
                            {"reg_id", reg.reg_id},
                            {"registered_at", reg.registered_at}});
    }
    snap["registrations"] = std::move(regs);

    json senders = json::object();
    for (const auto& [device, s] : senders_) {
        json js{{"applied", s.applied}};
        json assoc = json::object();
        for (const auto& [contact, a] : s.associations) {
            assoc[std::to_string(contact)] = association_to_json(a);
        }
        js["associations"] = std::move(assoc);
        json locs = json::object();
        for (const auto& [id, l] : s.locations) {
            locs[std::to_string(id)] = location_to_json(l);
        }
        js["locations"] = std::move(locs);
        json notes = json::object();
        for (const auto& [key, n] : s.notes) notes[key] = note_to_json(n);
        js["notes"] = std::move(notes);
        json people = json::object();
        for (const auto& [key, link] : s.note_people) {
            people[key] = json{{"note_id", link.first.str()},
                               {"contact_id", link.second}};
        }
        js["note_people"] = std::move(people);
        json nlocs = json::object();
        for (const auto& [key, link] : s.note_locations) {
            nlocs[key] = json{{"note_id", link.first.str()},
                              {"location_id", link.second}};
        }
        js["note_locations"] = std::move(nlocs);
        json blocked = json::object();
        for (const auto& [contact, d] : s.blocked) {
            blocked[std::to_string(contact)] = d.str();
        }
        js["blocked"] = std::move(blocked);
        senders[device.str()] = std::move(js);
    }
    snap["senders"] = std::move(senders);

    json pending = json::object();
    for (const auto& [device, queue] : pending_) {
        json msgs = json::array();
        for (const auto& m : queue) msgs.push_back(encode_push(m));
        pending[device.str()] = std::move(msgs);
    }
    snap["pending"] = std::move(pending);

    json edges = json::array();
    for (const auto& [blocker, blocked] : block_edges_) {
        edges.push_back(json{{"blocker", blocker.str()}, {"blocked", blocked.str()}});
    }
    snap["block_edges"] = std::move(edges);
    return snap;
}

void Broker::restore(const json& snap) {
    std::lock_guard lock(mu_);
    Broker& b = *this;
    b.registrations_.clear();
    b.senders_.clear();
    b.pending_.clear();
    b.block_edges_.clear();
    b.next_msg_id_ = snap.at("next_msg_id").get<std::uint64_t>();
    b.next_reg_seq_ = snap.at("next_reg_seq").get<std::uint64_t>();
    b.unroutable_ = snap.at("unroutable").get<std::size_t>();
    for (const auto& reg : snap.at("registrations")) {
        DeviceId device = DeviceId::parse(reg.at("device").get<std::string>());
        b.registrations_.emplace(
            device, Registration{device, reg.at("reg_id").get<std::string>(),
                                 reg.at("registered_at").get<TimestampMs>()});
    }
    for (const auto& [mac, js] : snap.at("senders").items()) {
        SenderState s;
        s.applied = js.at("applied").get<std::map<std::string, std::uint64_t>>();
        for (const auto& [contact, a] : js.at("associations").items()) {
            s.associations.emplace(std::stoll(contact), association_from_json(a));
        }
        for (const auto& [id, l] : js.at("locations").items()) {
            s.locations.emplace(std::stoll(id), location_from_json(l));
        }
        for (const auto& [key, n] : js.at("notes").items()) {
            s.notes.emplace(key, note_from_json(n));
        }
        for (const auto& [key, link] : js.at("note_people").items()) {
            s.note_people.emplace(
                key, std::make_pair(NoteId::parse(link.at("note_id").get<std::string>()),
                                    link.at("contact_id").get<ContactId>()));
        }
        for (const auto& [key, link] : js.at("note_locations").items()) {
            s.note_locations.emplace(
                key, std::make_pair(NoteId::parse(link.at("note_id").get<std::string>()),
                                    link.at("location_id").get<LocationId>()));
        }
        for (const auto& [contact, d] : js.at("blocked").items()) {
            s.blocked.emplace(std::stoll(contact),
                              DeviceId::parse(d.get<std::string>()));
        }
        b.senders_.emplace(DeviceId::parse(mac), std::move(s));
    }
    for (const auto& [mac, msgs] : snap.at("pending").items()) {
        auto& queue = b.pending_[DeviceId::parse(mac)];
        for (const auto& m : msgs) queue.push_back(decode_push(m.get<std::string>()));
    }
    for (const auto& edge : snap.at("block_edges")) {
        b.block_edges_.insert({DeviceId::parse(edge.at("blocker").get<std::string>()),
                               DeviceId::parse(edge.at("blocked").get<std::string>())});
    }
}

}  // namespace nearnote
