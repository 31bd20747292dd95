#pragma once

#include <nlohmann/json_fwd.hpp>

#include "nearnote/logfmt.hpp"
#include "nearnote/model.hpp"
#include "nearnote/presence.hpp"

// Explicit JSON codecs for the domain types. Hand-rolled rather than ADL
// because several types are not default-constructible. Encodings are
// canonical: object keys serialize in sorted order, byte payloads as
// lowercase hex, doubles as shortest round-trip decimal.

namespace nearnote {

nlohmann::json geo_to_json(const GeoPoint& p);
GeoPoint geo_from_json(const nlohmann::json& j);

nlohmann::json association_to_json(const ContactAssociation& a);
ContactAssociation association_from_json(const nlohmann::json& j);

nlohmann::json location_to_json(const LocationDef& l);
LocationDef location_from_json(const nlohmann::json& j);

nlohmann::json body_to_json(const NoteBody& b);
NoteBody body_from_json(const nlohmann::json& j);

nlohmann::json note_to_json(const Note& n);
Note note_from_json(const nlohmann::json& j);

nlohmann::json received_note_to_json(const ReceivedNote& n);
ReceivedNote received_note_from_json(const nlohmann::json& j);

nlohmann::json notification_to_json(const Notification& n);
Notification notification_from_json(const nlohmann::json& j);

nlohmann::json presence_event_to_json(const PresenceEvent& e);
PresenceEvent presence_event_from_json(const nlohmann::json& j);

std::string hex_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> hex_decode(std::string_view text);

}  // namespace nearnote
