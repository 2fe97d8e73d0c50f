/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <map>

#include "guardsim/core/address.hpp"
#include "guardsim/core/time.hpp"
#include "guardsim/guard/policy.hpp"

namespace guardsim::guard {

/// Continuous-refill token bucket, starting full.
class TokenBucket {
public:
    explicit TokenBucket(BucketSpec spec = {}) : spec_(spec), tokens_(spec.burst) {}

    /// Refills up to `now` and reports the available tokens.
    double available(SimTime now);
    /// Refill sums accumulate rounding error; a whole token may read 0.999...
    bool has_token(SimTime now) { return available(now) >= 1.0 - 1e-9; }
    void take() { tokens_ -= 1.0; }

    const BucketSpec& spec() const { return spec_; }

private:
    BucketSpec spec_;
    double tokens_;
    SimTime last_;
};

enum class Admission { Admit, Drop };

/// Two-level throttle: a message passes iff both its source's bucket and its
/// class's aggregate bucket hold a token.
class ThrottlePolicy {
public:
    explicit ThrottlePolicy(const GuardPolicy& p);
    ThrottlePolicy(ClassBuckets unknown, ClassBuckets non_proxy, ClassBuckets verified);

    /// Precondition: cls is UnknownViaProxy, NonProxy or ReachabilityVerified.
    Admission admit(PriorityClass cls, Address source, SimTime now);

private:
    struct Level {
        ClassBuckets spec;
        TokenBucket aggregate;
        std::map<Address, TokenBucket> per_source;
    };
    Level& level(PriorityClass cls);

    Level unknown_;
    Level non_proxy_;
    Level verified_;
};

} // namespace guardsim::guard
