/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <optional>

#include "guardsim/guard/throttle.hpp"
#include "guardsim/netsim/world.hpp"

namespace guardsim::actors {

/// Gateway that forwards at the UDP level. With a bucket, every frame
/// entering the local network needs a token, whoever sent it: the router
/// cannot tell CoAP clients apart.
class Router : public netsim::Node {
public:
    Router(Address a, std::string name, std::optional<guard::BucketSpec> inbound = std::nullopt)
        : Node(a, std::move(name))
    {
        if (inbound)
            bucket_.emplace(*inbound);
    }

    void on_frame(netsim::World& w, netsim::Frame f) override;

    std::uint64_t dropped() const { return dropped_; }

private:
    std::optional<guard::TokenBucket> bucket_;
    std::uint64_t dropped_ = 0;
};

} // namespace guardsim::actors
