/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/netsim/link.hpp"

#include <algorithm>
#include <cmath>

namespace guardsim::netsim {

SimTime Link::serialization_time(std::size_t frame_bytes) const
{
    double ms = static_cast<double>(frame_bytes) * 8.0 * 1000.0 / params_.bandwidth_bps;
    // Guard against representation noise such as 999.9999999 for exact values.
    auto whole = static_cast<std::int64_t>(std::ceil(ms - 1e-9));
    return SimTime::from_ms(whole);
}

void Link::purge(SimTime now)
{
    while (!departures_.empty() && departures_.front() <= now)
        departures_.pop_front();
}

std::size_t Link::queue_length(SimTime now)
{
    purge(now);
    return departures_.size();
}

TransmitResult Link::transmit(std::size_t frame_bytes, SimTime now)
{
    ++sent_;
    purge(now);
    if (departures_.size() >= params_.queue_capacity || params_.bandwidth_bps <= 0.0) {
        ++dropped_;
        return Dropped{};
    }
    SimTime start = std::max(now, last_departure_);
    SimTime departure = start + serialization_time(frame_bytes);
    departures_.push_back(departure);
    last_departure_ = departure;
    ++delivered_;
    bytes_delivered_ += frame_bytes;
    return Delivered{departure + params_.propagation_delay};
}

} // namespace guardsim::netsim
