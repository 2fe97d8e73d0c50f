/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>

#include "guardsim/core/time.hpp"

namespace guardsim::guard {

enum class GuardMode { Exemptions, FullGuard };

const char* to_string(GuardMode m);

enum class PriorityClass { Blocked, NonProxy, UnknownViaProxy, ReachabilityVerified, AllowListed, Tunnel };

const char* to_string(PriorityClass c);

/// Scheduling rank, larger is served first. Tunnel and AllowListed share the
/// top rank.
int rank(PriorityClass c);

inline bool bypasses_throttle(PriorityClass c) { return c == PriorityClass::AllowListed || c == PriorityClass::Tunnel; }

struct BucketSpec {
    double rate = 0.0;   ///< tokens per second
    double burst = 1.0;  ///< capacity
};

struct ClassBuckets {
    BucketSpec per_source;
    BucketSpec aggregate;
};

struct GuardPolicy {
    GuardMode mode = GuardMode::Exemptions;
    ClassBuckets unknown{{0.2, 1.0}, {2.0, 2.0}};
    ClassBuckets non_proxy{{0.05, 1.0}, {0.5, 1.0}};
    ClassBuckets verified{{1.0, 2.0}, {5.0, 5.0}};
    std::uint32_t jump_threshold = 128;
    std::uint32_t seq_window = 64;
    SimTime echo_max_age = SimTime::from_seconds(40);
    SimTime allowlist_idle_expiry = SimTime::from_seconds(600);
    /// Consecutive tunnel authentication failures before renegotiating.
    std::uint32_t tunnel_failures_before_renegotiate = 3;
    /// Frames waiting for the constrained downlink, per priority rank.
    std::size_t downlink_queue_limit = 16;
    /// How long a finished exchange's response is kept for duplicates.
    SimTime response_cache_lifetime = SimTime::from_seconds(120);
};

} // namespace guardsim::guard
