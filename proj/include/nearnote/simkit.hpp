#pragma once

#include <deque>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "nearnote/broker.hpp"
#include "nearnote/client.hpp"

namespace nearnote {

struct SimConfig {
    double radio_range_m = 10.0;
    std::int64_t scan_period_ms = 30'000;
    int exit_after_missed = 2;
    double geofence_radius_m = 100.0;
    std::int64_t text_note_pause_ms = 100;
    double gps_jitter_max_m = 0.0;
    std::uint64_t seed = 1;

    ClientConfig client_config() const;
};

// Virtual devices with positions, boolean advertising, and per-device
// links to the broker. Advancing the clock never moves devices; all
// randomness flows from the configured seed.
class World {
public:
    void add_device(const DeviceId& id, const GeoPoint& pos, std::string name,
                    bool advertising = true);
    bool has_device(const DeviceId& id) const { return devices_.contains(id); }
    void move_device(const DeviceId& id, const GeoPoint& pos);
    void set_advertising(const DeviceId& id, bool on);
    bool advertising(const DeviceId& id) const;
    GeoPoint position(const DeviceId& id) const;
    const std::string& device_name(const DeviceId& id) const;

    void set_link(const DeviceId& id, bool up);
    bool link_up(const DeviceId& id) const;

    TimestampMs clock() const { return clock_; }
    void set_clock(TimestampMs t) { clock_ = t; }

    // Advertising devices within range of the observer, excluding the
    // observer itself. Names are advertised when nonempty.
    ScanResult radio_scan(const DeviceId& observer, double range_m,
                          TimestampMs at) const;

private:
    struct DeviceState {
        GeoPoint pos;
        bool advertising = true;
        std::string name;
        bool link = true;
    };
    const DeviceState& get(const DeviceId& id) const;
    DeviceState& get_mut(const DeviceId& id);

    std::map<DeviceId, DeviceState> devices_;
    TimestampMs clock_ = 0;
};

// Broker transport through the simulated world: every call checks the
// device's link and throws LinkDown when it is down.
class SimLink final : public BrokerLink {
public:
    SimLink(World& world, Broker& broker, DeviceId device)
        : world_(world), broker_(broker), device_(std::move(device)) {}

    std::string register_device(const DeviceId& device) override;
    IngestAck ingest(const SyncEnvelope& envelope) override;
    std::vector<PushMessage> deliver(const DeviceId& device) override;
    void ack_delivered(const DeviceId& device,
                       const std::vector<std::uint64_t>& msg_ids) override;

private:
    void check_link() const;
    World& world_;
    Broker& broker_;
    DeviceId device_;
};

// Single-threaded discrete-event loop driving engine-backed clients
// through scan ticks and sync pumps. Each client scans every
// scan_period_ms with a seed-derived phase offset, so devices never tick
// in artificial lockstep. The trace (notifications, feedback emissions)
// is a pure function of (setup, steps, config, seed).
class Simulation {
public:
    explicit Simulation(SimConfig cfg);

    World& world() { return world_; }
    Broker& broker() { return broker_; }
    const SimConfig& config() const { return cfg_; }

    ClientEngine& add_client(const DeviceId& id, const std::string& name,
                             const GeoPoint& pos);
    void add_peer(const DeviceId& id, const std::string& name, const GeoPoint& pos);
    bool is_client(const DeviceId& id) const { return clients_.contains(id); }
    ClientEngine& client(const DeviceId& id);
    const std::vector<DeviceId>& client_order() const { return client_order_; }

    // Runs every scan tick due at or before t, in deterministic order, and
    // leaves the world clock at t.
    void advance_to(TimestampMs t);

    // One sync attempt for the device; silently a no-op while its link is
    // down (offline-first: the dirty flags wait for connectivity).
    void pump_sync(const DeviceId& id);

    // Sync rounds across all clients until nothing moves anymore. Returns
    // the number of rounds run.
    std::size_t pump_until_quiescent(std::size_t max_rounds = 64);

    struct NotificationRecord {
        DeviceId device;
        Notification notification;
    };
    struct FeedbackRecord {
        DeviceId device;
        TimestampMs at;
        VibePattern pattern;
    };
    const std::vector<NotificationRecord>& notifications() const {
        return notifications_;
    }
    const std::vector<FeedbackRecord>& feedback() const { return feedback_; }

private:
    class TraceSink final : public FeedbackSink {
    public:
        TraceSink(Simulation& sim, DeviceId device)
            : sim_(sim), device_(std::move(device)) {}
        void vibrate(TimestampMs at, const VibePattern& pattern) override {
            sim_.feedback_.push_back(FeedbackRecord{device_, at, pattern});
        }

    private:
        Simulation& sim_;
        DeviceId device_;
    };

    struct ClientSlot {
        std::unique_ptr<ClientEngine> engine;
        std::unique_ptr<TraceSink> sink;
        TimestampMs next_scan_at = 0;
        std::mt19937_64 jitter_rng;
    };

    void device_tick(const DeviceId& id, ClientSlot& slot, TimestampMs at);
    GeoPoint observed_position(const DeviceId& id, ClientSlot& slot) const;

    SimConfig cfg_;
    World world_;
    Broker broker_;
    std::vector<DeviceId> client_order_;
    std::map<DeviceId, ClientSlot> clients_;
    std::vector<NotificationRecord> notifications_;
    std::vector<FeedbackRecord> feedback_;
};

}  // namespace nearnote
