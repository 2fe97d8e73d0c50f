/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <variant>

#include "guardsim/core/time.hpp"

namespace guardsim::netsim {

struct LinkParams {
    double bandwidth_bps = 1000.0;
    SimTime propagation_delay = SimTime::from_ms(10);
    std::size_t queue_capacity = 8;
};

struct Delivered {
    SimTime at;
};
struct Dropped {};
using TransmitResult = std::variant<Delivered, Dropped>;

/// Unidirectional FIFO link with tail-drop. Frames in the system (queued or
/// being serialized) count against queue_capacity.
class Link {
public:
    explicit Link(LinkParams p = {}) : params_(p) {}

    TransmitResult transmit(std::size_t frame_bytes, SimTime now);

    /// Serialization time of a frame, rounded up to whole milliseconds.
    SimTime serialization_time(std::size_t frame_bytes) const;

    /// Time at which the last accepted frame finishes serializing.
    SimTime busy_until() const { return last_departure_; }
    std::size_t queue_length(SimTime now);

    const LinkParams& params() const { return params_; }
    std::uint64_t sent() const { return sent_; }
    std::uint64_t delivered() const { return delivered_; }
    std::uint64_t dropped() const { return dropped_; }
    std::uint64_t bytes_delivered() const { return bytes_delivered_; }

private:
    void purge(SimTime now);

    LinkParams params_;
    std::deque<SimTime> departures_;
    SimTime last_departure_;
    std::uint64_t sent_ = 0;
    std::uint64_t delivered_ = 0;
    std::uint64_t dropped_ = 0;
    std::uint64_t bytes_delivered_ = 0;
};

} // namespace guardsim::netsim
