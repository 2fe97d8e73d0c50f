/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <map>
#include <string>

#include "guardsim/core/expected.hpp"
#include "guardsim/guard/setup.hpp"
#include "guardsim/netsim/world.hpp"

namespace guardsim::actors {

struct NotFound {};

/// Name -> last registered entry.
class Rendezvous {
public:
    void register_entry(const guard::RendezvousEntry& e) { entries_[e.name] = e; }
    Expected<guard::RendezvousEntry, NotFound> lookup(const std::string& name) const;

private:
    std::map<std::string, guard::RendezvousEntry> entries_;
};

/// Rendezvous service reachable over CoAP: POST /rd registers an entry, GET
/// /rd with the name as body looks it up.
class RendezvousNode : public netsim::Node {
public:
    RendezvousNode(Address a) : Node(a, "RD") {}
    void on_frame(netsim::World& w, netsim::Frame f) override;
    const Rendezvous& directory() const { return rd_; }

private:
    Rendezvous rd_;
};

} // namespace guardsim::actors
