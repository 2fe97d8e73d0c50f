/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/guard/policy.hpp"

namespace guardsim::guard {

const char* to_string(GuardMode m)
{
    return m == GuardMode::Exemptions ? "exemptions" : "fullguard";
}

const char* to_string(PriorityClass c)
{
    switch (c) {
    case PriorityClass::Blocked: return "Blocked";
    case PriorityClass::NonProxy: return "NonProxy";
    case PriorityClass::UnknownViaProxy: return "UnknownViaProxy";
    case PriorityClass::ReachabilityVerified: return "ReachabilityVerified";
    case PriorityClass::AllowListed: return "AllowListed";
    case PriorityClass::Tunnel: return "Tunnel";
    }
    return "?";
}

int rank(PriorityClass c)
{
    switch (c) {
    case PriorityClass::Blocked: return 0;
    case PriorityClass::NonProxy: return 1;
    case PriorityClass::UnknownViaProxy: return 2;
    case PriorityClass::ReachabilityVerified: return 3;
    case PriorityClass::AllowListed:
    case PriorityClass::Tunnel: return 4;
    }
    return 0;
}

} // namespace guardsim::guard
