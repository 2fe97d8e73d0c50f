/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/guard/seq_tracker.hpp"

namespace guardsim::guard {

const char* to_string(SeqVerdict v)
{
    switch (v) {
    case SeqVerdict::Plausible: return "Plausible";
    case SeqVerdict::ImplausibleJump: return "ImplausibleJump";
    case SeqVerdict::Conflict: return "Conflict";
    case SeqVerdict::KnownMobile: return "KnownMobile";
    }
    return "?";
}

SeqVerdict SeqTracker::check(const Bytes& kid, std::uint32_t piv, const Bytes& token, Address source) const
{
    auto it = contexts_.find(kid);
    if (it == contexts_.end())
        return SeqVerdict::Plausible;
    const Context& c = it->second;
    if (c.highest >= window_ && piv <= c.highest - window_)
        return SeqVerdict::Conflict;
    if (auto seen = c.seen.find(piv); seen != c.seen.end())
        return seen->second == token ? SeqVerdict::Plausible : SeqVerdict::Conflict;
    if (piv > c.highest && piv - c.highest > jump_threshold_)
        return SeqVerdict::ImplausibleJump;
    if (!c.sources.count(source))
        return SeqVerdict::KnownMobile;
    return SeqVerdict::Plausible;
}

void SeqTracker::record(const Bytes& kid, std::uint32_t piv, const Bytes& token, Address source)
{
    auto [it, fresh] = contexts_.try_emplace(kid);
    Context& c = it->second;
    if (fresh || piv > c.highest)
        c.highest = piv;
    if (c.highest >= window_ && piv <= c.highest - window_)
        return;
    c.seen.try_emplace(piv, token);
    c.sources.insert(source);
    if (c.highest >= window_) {
        auto keep_from = c.highest - window_ + 1;
        c.seen.erase(c.seen.begin(), c.seen.lower_bound(keep_from));
    }
}

std::optional<std::uint32_t> SeqTracker::highest(const Bytes& kid) const
{
    auto it = contexts_.find(kid);
    if (it == contexts_.end())
        return std::nullopt;
    return it->second.highest;
}

std::size_t SeqTracker::remembered(const Bytes& kid) const
{
    auto it = contexts_.find(kid);
    return it == contexts_.end() ? 0 : it->second.seen.size();
}

SeqVerdict seq_check(SeqTracker& tracker, const Bytes& kid, std::uint32_t piv, const Bytes& token, Address source)
{
    SeqVerdict v = tracker.check(kid, piv, token, source);
    if (v == SeqVerdict::Plausible || v == SeqVerdict::KnownMobile)
        tracker.record(kid, piv, token, source);
    return v;
}

} // namespace guardsim::guard
