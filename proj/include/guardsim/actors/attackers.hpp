/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "guardsim/actors/client.hpp"
#include "guardsim/netsim/world.hpp"

namespace guardsim::actors {

enum class AttackKind { BlindFlood, DistributedFlood, Impersonator, OnPath };

const char* to_string(AttackKind k);
std::optional<AttackKind> attack_kind_from(const std::string& s);

struct AttackerModel {
    AttackKind kind = AttackKind::BlindFlood;
    double rate = 20.0;  ///< msgs/s in total; OnPath: corruption bursts per second
    std::uint32_t n_sources = 1;
    SimTime start = SimTime::from_seconds(300);
    SimTime stop = SimTime::from_seconds(1800);
    /// Impersonator: knows the victim's kid instead of guessing it.
    bool knows_kid = false;
    /// OnPath: frames corrupted per burst.
    std::uint32_t burst = 3;
};

/// First spoofed source address; nothing answers there.
inline constexpr std::uint32_t spoofed_base = 0x40000000;

/// Where flood traffic goes: the published entry point and the server's own
/// address (which differ once a guard proxies for the server).
struct FloodTargets {
    Address entry;
    Address server;
    std::optional<std::string> uri_host;  ///< set when entry is a reverse proxy
};

/// Handshake-triggering message-1 frames at a Poisson rate from spoofed
/// sources: one for a blind flood, n_sources for a distributed one.
class FloodAttacker : public netsim::Node {
public:
    FloodAttacker(Address a, AttackerModel model, FloodTargets targets, std::uint64_t seed);

    void start(netsim::World& w) override;
    void on_frame(netsim::World&, netsim::Frame) override {}

    std::uint64_t sent() const { return sent_; }

private:
    void fire(netsim::World& w);

    AttackerModel model_;
    FloodTargets targets_;
    Rng rng_;
    std::vector<std::uint16_t> mids_;  ///< per spoofed source, sequential like a real stack
    std::uint64_t sent_ = 0;
};

/// Supplies the legitimate client currently worth impersonating.
using VictimProvider = std::function<std::optional<VictimView>()>;

/// OSCORE-shaped requests from the victim's address: replays of pivs the
/// victim already used (under fresh tokens) and implausibly large pivs. The
/// attacker holds no key material.
class Impersonator : public netsim::Node {
public:
    Impersonator(Address a, AttackerModel model, FloodTargets targets, VictimProvider victim, std::uint64_t seed);

    void start(netsim::World& w) override;
    void on_frame(netsim::World&, netsim::Frame) override {}

    std::uint64_t sent() const { return sent_; }

private:
    void fire(netsim::World& w);

    AttackerModel model_;
    FloodTargets targets_;
    VictimProvider victim_;
    Rng rng_;
    std::uint64_t sent_ = 0;
};

/// Which frames an on-path attacker rewrites.
enum class OnPathTarget {
    /// End-to-end protected responses to one client.
    ClientResponses,
    /// Protected guard-to-guard tunnel frames.
    TunnelFrames,
};

/// Sits on the link between the server-side and client-side routers. Every
/// 1/rate seconds it replaces the payload of the next `burst` matching frames
/// with random bytes of the same size.
class OnPathAttacker {
public:
    OnPathAttacker(AttackerModel model, OnPathTarget target, Address from, Address to, std::uint64_t seed);

    void install(netsim::World& w);
    std::uint64_t corrupted() const { return corrupted_; }

private:
    void tap(netsim::World& w, netsim::Frame& f);

    AttackerModel model_;
    OnPathTarget target_;
    Address from_, to_;
    Rng rng_;
    std::uint32_t armed_ = 0;
    std::optional<Address> victim_;
    std::uint64_t corrupted_ = 0;
};

} // namespace guardsim::actors
