/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "guardsim/ace/token.hpp"
#include "guardsim/netsim/world.hpp"

namespace guardsim::actors {

/// Authorization server on the Internet. POST /token issues tokens; the
/// channel counts as pre-secured.
class AsNode : public netsim::Node {
public:
    AsNode(Address a, std::uint64_t seed) : Node(a, "AS"), rng_(seed) {}
    void on_frame(netsim::World& w, netsim::Frame f) override;

    ace::AsRegistry& registry() { return as_; }
    /// Addresses that asked for a token, in order.
    const std::vector<Address>& requesters() const { return requesters_; }

private:
    ace::AsRegistry as_;
    Rng rng_;
    std::vector<Address> requesters_;
};

} // namespace guardsim::actors
