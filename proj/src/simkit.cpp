#include "nearnote/simkit.hpp"

#include <algorithm>
#include <cmath>

#include "nearnote/errors.hpp"

namespace nearnote {

ClientConfig SimConfig::client_config() const {
    ClientConfig cfg;
    cfg.presence.exit_after_missed = exit_after_missed;
    cfg.feedback.text_note_pause_ms = text_note_pause_ms;
    cfg.geofence_radius_m = geofence_radius_m;
    return cfg;
}

// --- World ---------------------------------------------------------------------

const World::DeviceState& World::get(const DeviceId& id) const {
    const auto it = devices_.find(id);
    if (it == devices_.end()) {
        throw UnknownDevice("no such device in world: " + id.str());
    }
    return it->second;
}

void World::add_device(const DeviceId& id, const GeoPoint& pos, std::string name,
                       bool advertising) {
    if (devices_.contains(id)) {
        throw IntegrityViolation("device already in world: " + id.str());
    }
    devices_.emplace(id, DeviceState{pos, advertising, std::move(name), true});
}

World::DeviceState& World::get_mut(const DeviceId& id) {
    return const_cast<DeviceState&>(get(id));
}

void World::move_device(const DeviceId& id, const GeoPoint& pos) {
    get_mut(id).pos = pos;
}

void World::set_advertising(const DeviceId& id, bool on) {
    get_mut(id).advertising = on;
}

bool World::advertising(const DeviceId& id) const {
    return get(id).advertising;
}

GeoPoint World::position(const DeviceId& id) const {
    return get(id).pos;
}

const std::string& World::device_name(const DeviceId& id) const {
    return get(id).name;
}

void World::set_link(const DeviceId& id, bool up) {
    get_mut(id).link = up;
}

bool World::link_up(const DeviceId& id) const {
    return get(id).link;
}

ScanResult World::radio_scan(const DeviceId& observer, double range_m,
                             TimestampMs at) const {
    const GeoPoint where = get(observer).pos;
    ScanResult scan;
    scan.at = at;
    for (const auto& [id, state] : devices_) {
        if (id == observer || !state.advertising) continue;
        if (geo_distance(where, state.pos) > range_m) continue;
        scan.visible.emplace(id, state.name.empty()
                                     ? std::nullopt
                                     : std::optional<std::string>(state.name));
    }
    return scan;
}

// --- SimLink --------------------------------------------------------------------

void SimLink::check_link() const {
    if (!world_.link_up(device_)) {
        throw LinkDown("link down for " + device_.str());
    }
}

std::string SimLink::register_device(const DeviceId& device) {
    check_link();
    return broker_.register_device(device, world_.clock());
}

IngestAck SimLink::ingest(const SyncEnvelope& envelope) {
    check_link();
    return broker_.ingest(envelope);
}

std::vector<PushMessage> SimLink::deliver(const DeviceId& device) {
    check_link();
    return broker_.deliver(device);
}

void SimLink::ack_delivered(const DeviceId& device,
                            const std::vector<std::uint64_t>& msg_ids) {
    check_link();
    broker_.ack_delivered(device, msg_ids);
}

// --- Simulation -----------------------------------------------------------------

Simulation::Simulation(SimConfig cfg) : cfg_(cfg) {}

ClientEngine& Simulation::add_client(const DeviceId& id, const std::string& name,
                                     const GeoPoint& pos) {
    world_.add_device(id, pos, name);
    ClientSlot slot;
    slot.engine = std::make_unique<ClientEngine>(ClientStore::in_memory(id),
                                                 cfg_.client_config());
    slot.engine->set_position(pos);
    slot.sink = std::make_unique<TraceSink>(*this, id);
    // Seed-derived phase offset avoids lockstep scanning across devices.
    const std::uint64_t phase =
        fnv1a64(id.str() + "#" + std::to_string(cfg_.seed)) %
        static_cast<std::uint64_t>(cfg_.scan_period_ms);
    slot.next_scan_at = world_.clock() + static_cast<TimestampMs>(phase);
    slot.jitter_rng.seed(cfg_.seed ^ fnv1a64(id.str()));
    client_order_.push_back(id);
    auto [it, inserted] = clients_.emplace(id, std::move(slot));
    return *it->second.engine;
}

void Simulation::add_peer(const DeviceId& id, const std::string& name,
                          const GeoPoint& pos) {
    world_.add_device(id, pos, name);
}

ClientEngine& Simulation::client(const DeviceId& id) {
    const auto it = clients_.find(id);
    if (it == clients_.end()) {
        throw UnknownDevice("no client engine for " + id.str());
    }
    return *it->second.engine;
}

GeoPoint Simulation::observed_position(const DeviceId& id, ClientSlot& slot) const {
    const GeoPoint exact = world_.position(id);
    if (cfg_.gps_jitter_max_m <= 0.0) return exact;
    // Zero-mean uniform jitter, bounded by gps_jitter_max_m, deterministic
    // per device and draw order.
    std::uniform_real_distribution<double> dist(-cfg_.gps_jitter_max_m,
                                                cfg_.gps_jitter_max_m);
    const double north_m = dist(slot.jitter_rng);
    const double east_m = dist(slot.jitter_rng);
    const double lat = exact.lat + north_m / 111'194.9;
    const double meters_per_lon_deg =
        111'194.9 * std::max(0.01, std::cos(exact.lat * 3.14159265358979 / 180.0));
    const double lon = exact.lon + east_m / meters_per_lon_deg;
    return GeoPoint::clamped(lat, lon);
}

void Simulation::device_tick(const DeviceId& id, ClientSlot& slot, TimestampMs at) {
    const ScanResult scan = world_.radio_scan(id, cfg_.radio_range_m, at);
    const GeoPoint pos = observed_position(id, slot);
    for (const Notification& n : slot.engine->on_scan(scan, pos, slot.sink.get())) {
        notifications_.push_back(NotificationRecord{id, n});
    }
    pump_sync(id);
}

void Simulation::advance_to(TimestampMs t) {
    if (t < world_.clock()) {
        throw Error("cannot advance simulation backwards");
    }
    while (true) {
        // earliest due scan tick, ties broken by client creation order
        const DeviceId* next = nullptr;
        TimestampMs next_at = 0;
        for (const DeviceId& id : client_order_) {
            const ClientSlot& slot = clients_.at(id);
            if (slot.next_scan_at > t) continue;
            if (next == nullptr || slot.next_scan_at < next_at) {
                next = &id;
                next_at = slot.next_scan_at;
            }
        }
        if (next == nullptr) break;
        ClientSlot& slot = clients_.at(*next);
        world_.set_clock(next_at);
        device_tick(*next, slot, next_at);
        slot.next_scan_at += cfg_.scan_period_ms;
    }
    world_.set_clock(t);
}

void Simulation::pump_sync(const DeviceId& id) {
    ClientSlot& slot = clients_.at(id);
    SimLink link(world_, broker_, id);
    try {
        slot.engine->sync_with(link, world_.clock(), slot.sink.get());
    } catch (const LinkDown&) {
        // offline; dirty rows wait for connectivity
    }
}

std::size_t Simulation::pump_until_quiescent(std::size_t max_rounds) {
    for (std::size_t round = 1; round <= max_rounds; ++round) {
        bool moved = false;
        for (const DeviceId& id : client_order_) {
            ClientSlot& slot = clients_.at(id);
            SimLink link(world_, broker_, id);
            try {
                const SyncOutcome outcome =
                    slot.engine->sync_with(link, world_.clock(), slot.sink.get());
                if (outcome.registered || outcome.rows_uploaded > 0 ||
                    outcome.pushes_applied > 0 || outcome.pushes_duplicate > 0) {
                    moved = true;
                }
            } catch (const LinkDown&) {
            }
        }
        if (!moved) return round;
    }
    return max_rounds;
}

}  // namespace nearnote
