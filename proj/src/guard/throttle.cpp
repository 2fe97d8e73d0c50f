/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/guard/throttle.hpp"

#include <algorithm>
#include <stdexcept>

namespace guardsim::guard {

double TokenBucket::available(SimTime now)
{
    if (now > last_) {
        tokens_ = std::min(spec_.burst, tokens_ + spec_.rate * (now - last_).seconds());
        last_ = now;
    }
    return tokens_;
}

ThrottlePolicy::ThrottlePolicy(const GuardPolicy& p) : ThrottlePolicy(p.unknown, p.non_proxy, p.verified) {}

ThrottlePolicy::ThrottlePolicy(ClassBuckets unknown, ClassBuckets non_proxy, ClassBuckets verified)
    : unknown_{unknown, TokenBucket(unknown.aggregate), {}},
      non_proxy_{non_proxy, TokenBucket(non_proxy.aggregate), {}},
      verified_{verified, TokenBucket(verified.aggregate), {}}
{
}

ThrottlePolicy::Level& ThrottlePolicy::level(PriorityClass cls)
{
    switch (cls) {
    case PriorityClass::UnknownViaProxy: return unknown_;
    case PriorityClass::NonProxy: return non_proxy_;
    case PriorityClass::ReachabilityVerified: return verified_;
    default: throw std::invalid_argument(std::string("no throttle for class ") + to_string(cls));
    }
}

Admission ThrottlePolicy::admit(PriorityClass cls, Address source, SimTime now)
{
    Level& l = level(cls);
    auto it = l.per_source.try_emplace(source, l.spec.per_source).first;
    TokenBucket& own = it->second;
    if (!own.has_token(now) || !l.aggregate.has_token(now))
        return Admission::Drop;
    own.take();
    l.aggregate.take();
    return Admission::Admit;
}

} // namespace guardsim::guard
