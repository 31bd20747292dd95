#include "nearnote/client.hpp"

#include "nearnote/errors.hpp"

namespace nearnote {

ClientEngine::ClientEngine(std::unique_ptr<ClientStore> store, ClientConfig cfg)
    : store_(std::move(store)),
      cfg_(cfg),
      presence_(cfg.presence),
      evaluator_(cfg.geofence_radius_m) {}

PresenceFilter ClientEngine::make_filter(
    const PrivacyState& privacy, const std::map<DeviceId, ContactAssociation>& assoc,
    const std::set<DeviceId>& blocked_by) const {
    return PresenceFilter{&privacy, &assoc, &blocked_by};
}

std::set<DeviceId> ClientEngine::known_beacon_devices() const {
    std::set<DeviceId> beacons;
    for (const LocationDef& loc : store_->list_locations()) {
        if (loc.kind == LocationKind::Indoor && loc.beacon) {
            beacons.insert(*loc.beacon);
        }
    }
    for (const ReceivedNote& note : store_->list_received_notes()) {
        for (const LocationDef& loc : note.trigger_locations) {
            if (loc.kind == LocationKind::Indoor && loc.beacon) {
                beacons.insert(*loc.beacon);
            }
        }
    }
    return beacons;
}

void ClientEngine::dispatch(const Notification& notification, FeedbackKind kind,
                            FeedbackSink* sink) {
    store_->append_notification(notification);
    emit_feedback(notification, kind, store_->privacy(), cfg_.feedback, sink);
}

std::vector<Notification> ClientEngine::on_scan(const ScanResult& scan,
                                                const GeoPoint& pos,
                                                FeedbackSink* sink) {
    position_ = pos;
    const PrivacyState privacy = store_->privacy();
    const auto assoc = store_->association_index();
    const auto blocked_by = store_->blocked_by();
    const PresenceFilter filter = make_filter(privacy, assoc, blocked_by);

    const std::vector<PresenceEvent> events = presence_.process_scan(scan, filter, pos);
    for (const PresenceEvent& event : events) {
        store_->append_detection(event);
    }

    std::vector<Notification> out;
    const std::set<DeviceId> beacons = known_beacon_devices();
    for (const PresenceEvent& event : events) {
        if (event.kind != PresenceDirection::Entered) continue;
        if (beacons.contains(event.device)) continue;  // location tags, not people
        Notification n{PersonNearby{event.device}, event.at, false};
        dispatch(n, FeedbackKind::PersonNearby, sink);
        out.push_back(n);
    }

    // Trigger evaluation over the context this scan produced.
    TriggerContext ctx;
    ctx.now = scan.at;
    ctx.open_sessions = presence_.open_session_contacts();
    ctx.observer_pos = pos;
    for (const auto& [device, contact] : ctx.open_sessions) {
        ctx.nearby_beacons.insert(device);
    }

    std::map<ContactId, DeviceId> contact_devices;
    for (const auto& [device, a] : assoc) {
        contact_devices.emplace(a.contact_id, device);
    }
    std::map<LocationId, LocationDef> locations;
    for (const LocationDef& loc : store_->list_locations()) {
        locations.emplace(loc.location_id, loc);
    }

    std::vector<EvalNote> notes;
    std::map<std::string, bool> audio_by_key;
    for (const Note& note : store_->list_notes()) {
        if (!note.recipients.empty()) continue;  // fires on recipients only
        notes.push_back(eval_note(note, contact_devices, locations));
    }
    for (const ReceivedNote& note : store_->list_received_notes()) {
        notes.push_back(eval_note(note));
    }
    for (const EvalNote& n : notes) audio_by_key[n.id.str()] = n.audio;

    for (const Notification& n : evaluator_.evaluate(notes, ctx)) {
        const auto& fired = std::get<NoteFired>(n.kind);
        const bool audio = audio_by_key[fired.note.str()];
        dispatch(n, audio ? FeedbackKind::AudioNoteFired : FeedbackKind::TextNoteFired,
                 sink);
        out.push_back(n);
    }
    return out;
}

NoteId ClientEngine::create_text_note(const std::string& text, TimestampMs now) {
    const NoteId id = store_->create_note(TextBody{text}, now);
    record_action("create_note", GestureCommand::DoubleTap, now);
    return id;
}

NoteId ClientEngine::create_audio_note(std::vector<std::uint8_t> payload,
                                       std::int64_t duration_ms, TimestampMs now) {
    const NoteId id =
        store_->create_note(AudioBody{std::move(payload), duration_ms}, now);
    record_action("create_note", GestureCommand::LongPress, now);
    return id;
}

void ClientEngine::attach_person_trigger(const NoteId& id, ContactId contact,
                                         TimestampMs now) {
    store_->attach_person(id, contact);
    record_action("note_menu", GestureCommand::SwipeRight, now);
}

void ClientEngine::detach_person_trigger(const NoteId& id, ContactId contact,
                                         TimestampMs now) {
    store_->detach_person(id, contact);
    record_action("note_menu", GestureCommand::SwipeLeft, now);
}

void ClientEngine::attach_location_trigger(const NoteId& id, LocationId location,
                                           TimestampMs now) {
    store_->attach_location(id, location);
    record_action("note_menu", GestureCommand::SwipeRight, now);
}

void ClientEngine::detach_location_trigger(const NoteId& id, LocationId location,
                                           TimestampMs now) {
    store_->detach_location(id, location);
    record_action("note_menu", GestureCommand::SwipeLeft, now);
}

void ClientEngine::set_note_window(const NoteId& id, std::optional<TimeWindow> window,
                                   TimestampMs now) {
    store_->set_time_window(id, window);
    record_action("note_menu", GestureCommand::SwipeRight, now);
}

void ClientEngine::set_note_carrier(const NoteId& id, std::optional<ContactId> carrier,
                                    TimestampMs now) {
    store_->set_carrier(id, carrier);
    record_action("note_menu", GestureCommand::SwipeRight, now);
}

void ClientEngine::send_note(const NoteId& id, const std::set<ContactId>& recipients,
                             TimestampMs now) {
    const Note note = store_->get_note(id);
    if (note.carrier) {
        if (!note.person_triggers.contains(*note.carrier)) {
            throw MissingCarrierTrigger("carrier " + std::to_string(*note.carrier) +
                                        " is not a person trigger of " + id.str());
        }
        if (recipients.empty()) {
            throw MissingCarrierTrigger(
                "carrier note " + id.str() + " needs at least one recipient");
        }
    }
    store_->set_recipients(id, recipients);
    record_action("send_note", GestureCommand::DoubleTap, now);
}

LocationDef ClientEngine::save_current_location(const std::string& label,
                                                TimestampMs now) {
    const LocationDef def = store_->save_outdoor_location(label, position_);
    record_action("locations", GestureCommand::LongPress, now);
    return def;
}

void ClientEngine::associate_contact(ContactId contact, const std::string& name,
                                     const DeviceId& device, TimestampMs now) {
    store_->insert_association(ContactAssociation{contact, name, device});
    record_action("contacts", GestureCommand::DoubleTap, now);
}

void ClientEngine::enforce_privacy(TimestampMs now) {
    const PrivacyState privacy = store_->privacy();
    const auto assoc = store_->association_index();
    const auto blocked_by = store_->blocked_by();
    const PresenceFilter filter = make_filter(privacy, assoc, blocked_by);
    for (const PresenceEvent& event :
         presence_.enforce_filter(filter, now, position_)) {
        store_->append_detection(event);
    }
}

void ClientEngine::ignore_contact(ContactId contact, TimestampMs until,
                                  TimestampMs now) {
    if (!store_->get_association(contact)) {
        throw UnknownContact("no contact " + std::to_string(contact));
    }
    store_->set_ignored(contact, until);
    enforce_privacy(now);
    record_action("privacy", GestureCommand::LongPress, now);
}

void ClientEngine::unignore_contact(ContactId contact, TimestampMs now) {
    store_->clear_ignored(contact);
    record_action("privacy", GestureCommand::LongPress, now);
}

void ClientEngine::block_contact(ContactId contact, TimestampMs now) {
    const auto assoc = store_->get_association(contact);
    if (!assoc) {
        throw UnknownContact("no contact " + std::to_string(contact));
    }
    // Blocking protects me from being detected by them; it does not stop
    // me from seeing them, so no local presence enforcement here.
    store_->insert_blocked(contact, assoc->device);
    record_action("privacy", GestureCommand::LongPress, now);
}

void ClientEngine::unblock_contact(ContactId contact, TimestampMs now) {
    store_->delete_blocked(contact);
    record_action("privacy", GestureCommand::LongPress, now);
}

void ClientEngine::set_invisible(bool on, TimestampMs now) {
    store_->set_invisible_flag(on);
    record_action("settings", GestureCommand::LongPress, now);
}

void ClientEngine::set_silent(bool on, TimestampMs now) {
    store_->set_silent_flag(on);
    record_action("settings", GestureCommand::DoubleTap, now);
}

void ClientEngine::record_action(const std::string& screen, GestureCommand command,
                                 TimestampMs now) {
    store_->append_action(ActionRecord{now, screen, command});
}

std::vector<NearbyEntry> ClientEngine::people_near() const {
    return presence_.current_people_near();
}

SyncOutcome ClientEngine::sync_with(BrokerLink& link, TimestampMs now,
                                    FeedbackSink* sink) {
    SyncOutcome outcome;
    if (!store_->registration_id()) {
        const std::string reg_id = link.register_device(device());
        store_->set_registration_id(reg_id);
        outcome.registered = true;
    }
    if (store_->has_dirty_rows()) {
        const SyncEnvelope envelope = store_->dirty_rows(now);
        const IngestAck ack = link.ingest(envelope);
        store_->clear_dirty(ack.acked);
        outcome.rows_uploaded = envelope.rows.size();
    }
    const std::vector<PushMessage> messages = link.deliver(device());
    if (!messages.empty()) {
        std::vector<std::uint64_t> ids;
        for (const PushMessage& message : messages) {
            if (apply_push(message, now, sink)) {
                ++outcome.pushes_applied;
            } else {
                ++outcome.pushes_duplicate;
            }
            ids.push_back(message.msg_id);
        }
        link.ack_delivered(device(), ids);
    }
    return outcome;
}

bool ClientEngine::apply_push(const PushMessage& message, TimestampMs now,
                              FeedbackSink* sink) {
    (void)sink;
    if (store_->seen_push(message.msg_id)) {
        return false;
    }
    if (const auto* delivery = std::get_if<NoteDelivery>(&message.body)) {
        ReceivedNote note = delivery->note;
        note.received_at = now;
        store_->upsert_received_note(std::move(note));
    } else if (const auto* block = std::get_if<BlockNotice>(&message.body)) {
        store_->add_blocked_by(block->blocker);
        enforce_privacy(now);
    } else if (const auto* unblock = std::get_if<UnblockNotice>(&message.body)) {
        store_->remove_blocked_by(unblock->blocker);
    }
    store_->mark_push_seen(message.msg_id);
    return true;
}

}  // namespace nearnote
