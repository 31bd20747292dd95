#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nearnote/wire.hpp"

namespace nearnote {

// Transport handle to the broker. Implementations throw LinkDown when the
// link is unreachable; callers must be left with their state untouched in
// that case. The in-process simulator and the HTTP client both implement
// this.
class BrokerLink {
public:
    virtual ~BrokerLink() = default;
    virtual std::string register_device(const DeviceId& device) = 0;
    virtual IngestAck ingest(const SyncEnvelope& envelope) = 0;
    virtual std::vector<PushMessage> deliver(const DeviceId& device) = 0;
    virtual void ack_delivered(const DeviceId& device,
                               const std::vector<std::uint64_t>& msg_ids) = 0;
};

struct SyncOutcome {
    bool registered = false;      // a registration was performed this round
    std::size_t rows_uploaded = 0;
    std::size_t pushes_applied = 0;
    std::size_t pushes_duplicate = 0;
};

}  // namespace nearnote
