#include "nearnote/model.hpp"

namespace nearnote {

LocationDef LocationDef::indoor(LocationId id, DeviceId beacon, std::string label) {
    LocationDef def;
    def.location_id = id;
    def.kind = LocationKind::Indoor;
    def.beacon = std::move(beacon);
    def.label = std::move(label);
    return def;
}

LocationDef LocationDef::outdoor(LocationId id, GeoPoint point, std::string label) {
    LocationDef def;
    def.location_id = id;
    def.kind = LocationKind::Outdoor;
    def.point = point;
    def.label = std::move(label);
    return def;
}

bool LocationDef::valid() const {
    if (kind == LocationKind::Indoor) {
        return beacon.has_value() && !point.has_value();
    }
    return point.has_value() && !beacon.has_value();
}

std::string notification_kind_label(const NotificationKind& kind) {
    if (const auto* person = std::get_if<PersonNearby>(&kind)) {
        return "person-nearby " + person->device.str();
    }
    return "note-fired " + std::get<NoteFired>(kind).note.str();
}

}  // namespace nearnote
