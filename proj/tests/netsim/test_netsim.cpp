/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "doctest.h"

#include <string>
#include <vector>

#include "guardsim/netsim/event_queue.hpp"
#include "guardsim/netsim/link.hpp"
#include "guardsim/netsim/world.hpp"

using namespace guardsim;
using namespace guardsim::netsim;
using namespace guardsim::literals;

TEST_CASE("event queue ordering")
{
    EventQueue<char> q;
    q.schedule(1_s, 'A');
    q.schedule(1_s, 'B');
    q.schedule(500_ms, 'C');
    CHECK(q.pop().second == 'C');
    CHECK(q.pop().second == 'A');
    CHECK(q.pop().second == 'B');
    CHECK(q.now() == 1_s);

    q.advance_to(3_s);
    q.schedule(5_s, 'D');
    CHECK(q.pop().first == 5_s);
    CHECK_THROWS_AS(q.schedule(2_s, 'E'), SchedulingInPast);
}

TEST_CASE("link serialization")
{
    Link l({1000.0, 0_ms, 8});
    auto r = l.transmit(125, 0_s);
    REQUIRE(std::holds_alternative<Delivered>(r));
    CHECK(std::get<Delivered>(r).at == 1_s);
    auto r2 = l.transmit(125, 0_s);
    CHECK(std::get<Delivered>(r2).at == 2_s);

    Link small({1000.0, 0_ms, 4});
    int delivered = 0, dropped = 0;
    for (int i = 0; i < 6; ++i)
        (std::holds_alternative<Delivered>(small.transmit(10, 0_s)) ? delivered : dropped)++;
    CHECK(delivered == 4);
    CHECK(dropped == 2);
    CHECK(small.sent() == small.delivered() + small.dropped());
}

TEST_CASE("link bandwidth bound")
{
    // Random arrivals; bytes departing in any window never exceed the rate plus one frame.
    Rng rng(5);
    LinkParams p{1000.0, 10_ms, 6};
    Link l(p);
    std::vector<std::pair<std::int64_t, std::size_t>> departures;
    SimTime t;
    for (int i = 0; i < 2000; ++i) {
        t += SimTime::from_ms(static_cast<std::int64_t>(rng.uniform(400)));
        std::size_t size = 10 + rng.uniform(120);
        auto r = l.transmit(size, t);
        if (auto* d = std::get_if<Delivered>(&r))
            departures.emplace_back((d->at - p.propagation_delay).ms(), size);
    }
    CHECK(l.sent() == l.delivered() + l.dropped());
    for (std::size_t i = 0; i < departures.size(); i += 37) {
        for (std::int64_t w : {1000, 5000, 30000}) {
            std::size_t bytes = 0;
            for (auto& [at, size] : departures)
                if (at > departures[i].first && at <= departures[i].first + w)
                    bytes += size;
            CHECK(bytes <= static_cast<std::size_t>(p.bandwidth_bps * w / 8000.0) + 130);
        }
    }
}

TEST_CASE("energy budget")
{
    EnergyBudget b;
    for (int i = 0; i < 49999; ++i)
        b.drain(EnergyEvent::edhoc());
    CHECK_FALSE(b.exhausted());
    b.drain(EnergyEvent::edhoc());
    CHECK(b.remaining() == 0.0);
    CHECK(b.exhausted());

    EnergyBudget z;
    z.drain(EnergyEvent::rx_bytes(0));
    CHECK(z.remaining() == z.costs().budget);

    EnergyCosts c;
    c.budget = 10;
    c.edhoc = 25;
    EnergyBudget f(c);
    CHECK(f.drain(EnergyEvent::edhoc()) == 10.0);
    CHECK(f.remaining() == 0.0);
    CHECK(f.exhausted());
}

namespace {

struct Sink : Node {
    using Node::Node;
    std::vector<SimTime> got;
    void on_frame(World& w, Frame) override { got.push_back(w.now()); }
};

} // namespace

TEST_CASE("world run")
{
    SUBCASE("empty")
    {
        World w;
        w.run_until(3_s);
        CHECK(w.trace().empty());
        CHECK(w.now() == 3_s);
    }
    SUBCASE("one message over a one-second link")
    {
        World w({1, {}, true});
        auto& a = w.add_node<Sink>(Address{1}, "A");
        auto& b = w.add_node<Sink>(Address{2}, "B");
        w.add_link(a.address(), b.address(), {1000.0, 0_ms, 4});
        coap::SimMessage m;
        m.src = a.address();
        m.dst = b.address();
        m.payload_len = coap::payload_for_size(m, 125);
        w.send(a.address(), {m});
        w.run_until(2_s);
        REQUIRE(w.trace().size() == 2);
        CHECK(w.trace().events()[0].kind == "send");
        CHECK(w.trace().events()[0].t == 0_s);
        CHECK(w.trace().events()[1].kind == "recv");
        CHECK(w.trace().events()[1].t == 1_s);
        CHECK(b.got.size() == 1);
    }
    SUBCASE("future events stay queued")
    {
        World w;
        bool fired = false;
        w.schedule(5_s, [&] { fired = true; });
        w.run_until(3_s);
        CHECK_FALSE(fired);
        w.run_until(6_s);
        CHECK(fired);
        CHECK_THROWS_AS(w.run_until(1_s), SchedulingInPast);
    }
    SUBCASE("routing through a gateway and the internet")
    {
        World w({1, {}, true});
        auto& dev = w.add_node<Sink>(Address{1}, "dev");
        auto& gw = w.add_node<Sink>(Address{2}, "gw");
        auto& far = w.add_node<Sink>(Address{3}, "far");
        w.attach_lan(dev.address(), gw.address(), {}, {});
        w.attach_internet(gw.address());
        w.attach_internet(far.address());
        coap::SimMessage m;
        m.src = far.address();
        m.dst = dev.address();
        w.send(far.address(), {m});
        w.run_until(1_s);
        CHECK(gw.got.size() == 1);
        CHECK(w.link(far.address(), gw.address()) != nullptr);
    }
}

TEST_CASE("trace is deterministic")
{
    auto run = [] {
        World w({9, {}, true});
        auto& a = w.add_node<Sink>(Address{1}, "A");
        auto& b = w.add_node<Sink>(Address{2}, "B");
        w.add_link(a.address(), b.address(), {2000.0, 5_ms, 3});
        w.attach_energy(b.address(), {});
        for (int i = 0; i < 50; ++i) {
            auto at = SimTime::from_ms(static_cast<std::int64_t>(w.rng().uniform(10000)));
            w.schedule(at, [&w, &a, &b] {
                coap::SimMessage m;
                m.src = a.address();
                m.dst = b.address();
                m.payload_len = w.rng().uniform(60);
                w.send(a.address(), {m});
                w.drain(b.address(), EnergyEvent::msg(), false);
            });
        }
        w.run_until(20_s);
        return w.trace().to_jsonl();
    };
    auto first = run();
    CHECK(first == run());
    CHECK(first.find("\"kind\":\"energy\"") != std::string::npos);
}
