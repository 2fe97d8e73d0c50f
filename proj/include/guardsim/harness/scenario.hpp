/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <memory>
#include <vector>

#include "guardsim/actors/as_node.hpp"
#include "guardsim/actors/attackers.hpp"
#include "guardsim/actors/client.hpp"
#include "guardsim/actors/rendezvous.hpp"
#include "guardsim/actors/router.hpp"
#include "guardsim/actors/server.hpp"
#include "guardsim/guard/nodes.hpp"
#include "guardsim/harness/config.hpp"
#include "guardsim/harness/report.hpp"

namespace guardsim::harness {

/// Fixed addresses of the reference topology.
namespace addr {
inline constexpr Address rd{1};
inline constexpr Address as{2};
inline constexpr Address client_gateway{10};
inline constexpr Address server_gateway{20};
inline constexpr Address server{21};
inline constexpr Address attacker{500};
inline constexpr std::uint32_t first_client = 1000;
} // namespace addr

/// A wired world plus handles to the nodes reports and probes look at.
/// Node pointers are owned by `world`; those that do not apply to the
/// scenario are null.
struct ScenarioWorld {
    explicit ScenarioWorld(const ScenarioConfig& c);

    ScenarioConfig config;
    netsim::World world;
    actors::Metrics metrics;

    actors::RendezvousNode* rd = nullptr;
    actors::AsNode* as = nullptr;
    actors::ServerNode* server = nullptr;
    actors::Router* server_router = nullptr;
    actors::Router* client_router = nullptr;
    guard::ServerGuardNode* server_guard = nullptr;
    guard::ClientGuardNode* client_guard = nullptr;
    std::vector<actors::ClientNode*> clients;
    actors::FloodAttacker* flood = nullptr;
    actors::Impersonator* impersonator = nullptr;
    std::unique_ptr<actors::OnPathAttacker> on_path;

    /// Runs to duration + drain.
    void run();
    SimTime end() const { return config.duration + config.drain; }
};

/// Wires nodes, links and attacker for the configured scenario.
Expected<std::unique_ptr<ScenarioWorld>, ConfigError> build_scenario(const ScenarioConfig& config,
                                                                    bool verbose_trace = false);

/// Derives the report of a finished run.
ScenarioReport summarize(const ScenarioWorld& sw);

/// Builds, runs and summarizes one configuration. Throws on ConfigError
/// wrapped as std::invalid_argument.
ScenarioReport run_scenario(const ScenarioConfig& config);

} // namespace guardsim::harness
