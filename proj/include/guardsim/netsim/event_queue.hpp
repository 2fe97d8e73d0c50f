/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "guardsim/core/time.hpp"

namespace guardsim::netsim {

class SchedulingInPast : public std::logic_error {
public:
    SchedulingInPast() : std::logic_error("event scheduled before the current simulated time") {}
};

using EventId = std::uint64_t;

/// Timestamp-ordered queue with a virtual clock. Equal timestamps dequeue in
/// insertion order.
template <class Event>
class EventQueue {
public:
    SimTime now() const { return now_; }
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

    EventId schedule(SimTime at, Event event)
    {
        if (at < now_)
            throw SchedulingInPast();
        EventId id = next_id_++;
        heap_.push(Entry{at, id, std::move(event)});
        return id;
    }

    std::optional<SimTime> next_time() const
    {
        if (heap_.empty())
            return std::nullopt;
        return heap_.top().at;
    }

    /// Removes the earliest event and advances the clock to its timestamp.
    std::pair<SimTime, Event> pop()
    {
        Entry e = std::move(const_cast<Entry&>(heap_.top()));
        heap_.pop();
        now_ = e.at;
        return {e.at, std::move(e.event)};
    }

    /// Moves the clock forward without an event (never backwards).
    void advance_to(SimTime t)
    {
        if (t > now_)
            now_ = t;
    }

private:
    struct Entry {
        SimTime at;
        EventId id;
        Event event;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const
        {
            if (a.at != b.at)
                return a.at > b.at;
            return a.id > b.id;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    SimTime now_;
    EventId next_id_ = 0;
};

} // namespace guardsim::netsim
