#include "nearnote/json_codec.hpp"

#include <nlohmann/json.hpp>

#include "nearnote/errors.hpp"

namespace nearnote {

using nlohmann::json;

std::string hex_encode(const std::vector<std::uint8_t>& bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

std::vector<std::uint8_t> hex_decode(std::string_view text) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (text.size() % 2 != 0) {
        throw Error("hex payload has odd length");
    }
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 2);
    for (std::size_t i = 0; i < text.size(); i += 2) {
        const int hi = nibble(text[i]);
        const int lo = nibble(text[i + 1]);
        if (hi < 0 || lo < 0) throw Error("bad hex digit in payload");
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

json geo_to_json(const GeoPoint& p) {
    return json{{"lat", p.lat}, {"lon", p.lon}};
}

GeoPoint geo_from_json(const json& j) {
    return GeoPoint::checked(j.at("lat").get<double>(), j.at("lon").get<double>());
}

json association_to_json(const ContactAssociation& a) {
    return json{{"contact_id", a.contact_id},
                {"device", a.device.str()},
                {"display_name", a.display_name}};
}

ContactAssociation association_from_json(const json& j) {
    return ContactAssociation{j.at("contact_id").get<ContactId>(),
                              j.at("display_name").get<std::string>(),
                              DeviceId::parse(j.at("device").get<std::string>())};
}

json location_to_json(const LocationDef& l) {
    json j{{"location_id", l.location_id},
           {"kind", l.kind == LocationKind::Indoor ? "indoor" : "outdoor"},
           {"label", l.label}};
    if (l.beacon) j["beacon"] = l.beacon->str();
    if (l.point) j["point"] = geo_to_json(*l.point);
    return j;
}

LocationDef location_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "indoor") {
        return LocationDef::indoor(j.at("location_id").get<LocationId>(),
                                   DeviceId::parse(j.at("beacon").get<std::string>()),
                                   j.at("label").get<std::string>());
    }
    return LocationDef::outdoor(j.at("location_id").get<LocationId>(),
                                geo_from_json(j.at("point")),
                                j.at("label").get<std::string>());
}

json body_to_json(const NoteBody& b) {
    if (const auto* text = std::get_if<TextBody>(&b)) {
        return json{{"type", "text"}, {"text", text->text}};
    }
    const auto& audio = std::get<AudioBody>(b);
    return json{{"type", "audio"},
                {"payload", hex_encode(audio.payload)},
                {"duration_ms", audio.duration_ms}};
}

NoteBody body_from_json(const json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "text") {
        return TextBody{j.at("text").get<std::string>()};
    }
    if (type == "audio") {
        return AudioBody{hex_decode(j.at("payload").get<std::string>()),
                         j.at("duration_ms").get<std::int64_t>()};
    }
    throw Error("unknown note body type: " + type);
}

namespace {

json window_to_json(const TimeWindow& w) {
    return json{{"start", w.start}, {"end", w.end}};
}

TimeWindow window_from_json(const json& j) {
    return TimeWindow{j.at("start").get<TimestampMs>(), j.at("end").get<TimestampMs>()};
}

}  // namespace

json note_to_json(const Note& n) {
    json j{{"id", n.id.str()},
           {"body", body_to_json(n.body)},
           {"created_at", n.created_at},
           {"person_triggers", n.person_triggers},
           {"location_triggers", n.location_triggers},
           {"recipients", n.recipients}};
    if (n.time_window) j["time_window"] = window_to_json(*n.time_window);
    if (n.carrier) j["carrier"] = *n.carrier;
    return j;
}

Note note_from_json(const json& j) {
    Note n{NoteId::parse(j.at("id").get<std::string>()),
           body_from_json(j.at("body")),
           j.at("created_at").get<TimestampMs>(),
           j.at("person_triggers").get<std::set<ContactId>>(),
           j.at("location_triggers").get<std::set<LocationId>>(),
           std::nullopt,
           j.at("recipients").get<std::set<ContactId>>(),
           std::nullopt};
    if (j.contains("time_window")) n.time_window = window_from_json(j.at("time_window"));
    if (j.contains("carrier")) n.carrier = j.at("carrier").get<ContactId>();
    return n;
}

json received_note_to_json(const ReceivedNote& n) {
    json devices = json::array();
    for (const auto& d : n.trigger_devices) devices.push_back(d.str());
    json locations = json::array();
    for (const auto& l : n.trigger_locations) locations.push_back(location_to_json(l));
    json j{{"id", n.id.str()},
           {"sender", n.sender.str()},
           {"body", body_to_json(n.body)},
           {"created_at", n.created_at},
           {"person_category", n.person_category},
           {"location_category", n.location_category},
           {"trigger_devices", devices},
           {"trigger_locations", locations},
           {"received_at", n.received_at}};
    if (n.time_window) j["time_window"] = window_to_json(*n.time_window);
    return j;
}

ReceivedNote received_note_from_json(const json& j) {
    std::set<DeviceId> devices;
    for (const auto& d : j.at("trigger_devices")) {
        devices.insert(DeviceId::parse(d.get<std::string>()));
    }
    std::vector<LocationDef> locations;
    for (const auto& l : j.at("trigger_locations")) {
        locations.push_back(location_from_json(l));
    }
    ReceivedNote n{NoteId::parse(j.at("id").get<std::string>()),
                   DeviceId::parse(j.at("sender").get<std::string>()),
                   body_from_json(j.at("body")),
                   j.at("created_at").get<TimestampMs>(),
                   j.at("person_category").get<bool>(),
                   j.at("location_category").get<bool>(),
                   std::move(devices),
                   std::move(locations),
                   std::nullopt,
                   j.at("received_at").get<TimestampMs>()};
    if (j.contains("time_window")) n.time_window = window_from_json(j.at("time_window"));
    return n;
}

json notification_to_json(const Notification& n) {
    json j{{"at", n.at}, {"acknowledged", n.acknowledged}};
    if (const auto* person = std::get_if<PersonNearby>(&n.kind)) {
        j["kind"] = "person_nearby";
        j["device"] = person->device.str();
    } else {
        j["kind"] = "note_fired";
        j["note"] = std::get<NoteFired>(n.kind).note.str();
    }
    return j;
}

Notification notification_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    NotificationKind k = kind == "person_nearby"
                             ? NotificationKind(PersonNearby{DeviceId::parse(
                                   j.at("device").get<std::string>())})
                             : NotificationKind(NoteFired{NoteId::parse(
                                   j.at("note").get<std::string>())});
    return Notification{std::move(k), j.at("at").get<TimestampMs>(),
                        j.at("acknowledged").get<bool>()};
}

json presence_event_to_json(const PresenceEvent& e) {
    json j{{"kind", e.kind == PresenceDirection::Entered ? "entered" : "exited"},
           {"device", e.device.str()},
           {"known", e.known},
           {"at", e.at},
           {"coord", geo_to_json(e.coord)}};
    if (e.contact) j["contact"] = *e.contact;
    if (e.advertised_name) j["name"] = *e.advertised_name;
    return j;
}

PresenceEvent presence_event_from_json(const json& j) {
    PresenceEvent e{j.at("kind").get<std::string>() == "entered"
                        ? PresenceDirection::Entered
                        : PresenceDirection::Exited,
                    DeviceId::parse(j.at("device").get<std::string>()),
                    j.at("known").get<bool>(),
                    std::nullopt,
                    j.at("at").get<TimestampMs>(),
                    geo_from_json(j.at("coord")),
                    std::nullopt};
    if (j.contains("contact")) e.contact = j.at("contact").get<ContactId>();
    if (j.contains("name")) e.advertised_name = j.at("name").get<std::string>();
    return e;
}

}  // namespace nearnote
