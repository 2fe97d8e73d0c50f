/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/netsim/world.hpp"

#include <stdexcept>

namespace guardsim::netsim {

World::World(WorldOptions opts) : opts_(opts), rng_(opts.seed), trace_(opts.verbose_trace) {}

World::~World() = default;

void World::insert(std::unique_ptr<Node> n)
{
    Address a = n->address();
    if (nodes_.count(a))
        throw std::invalid_argument("duplicate node address " + a.str());
    nodes_[a] = std::move(n);
    if (started_)
        queue_.schedule(now(), [this, a] {
            if (Node* late = node(a))
                late->start(*this);
        });
}

void World::attach_lan(Address device, Address gateway, LinkParams up, LinkParams down)
{
    gateways_[device] = gateway;
    add_link(device, gateway, up);
    add_link(gateway, device, down);
}

void World::add_link(Address from, Address to, LinkParams p)
{
    links_.insert_or_assign({from, to}, Link(p));
}

Node* World::node(Address a)
{
    auto it = nodes_.find(a);
    return it == nodes_.end() ? nullptr : it->second.get();
}

std::optional<Address> World::gateway_of(Address device) const
{
    auto it = gateways_.find(device);
    if (it == gateways_.end())
        return std::nullopt;
    return it->second;
}

const std::string& World::name_of(Address a) const
{
    static thread_local std::string fallback;
    auto it = nodes_.find(a);
    if (it != nodes_.end())
        return it->second->name();
    fallback = a.str();
    return fallback;
}

Link& World::ensure_internet_link(Address from, Address to)
{
    auto it = links_.find({from, to});
    if (it == links_.end())
        it = links_.emplace(std::make_pair(from, to), Link(opts_.internet)).first;
    return it->second;
}

Link* World::link(Address from, Address to)
{
    auto it = links_.find({from, to});
    return it == links_.end() ? nullptr : &it->second;
}

SimTime World::link_idle_at(Address from, Address to)
{
    Link* l = link(from, to);
    if (!l)
        return now();
    return std::max(now(), l->busy_until());
}

void World::set_link_tap(Address from, Address to, LinkTap tap) { taps_[{from, to}] = std::move(tap); }

JsonFields World::describe(const coap::SimMessage& m)
{
    JsonFields f;
    f.add("src", m.src.str());
    f.add("dst", m.dst.str());
    f.add("mtype", coap::to_string(m.type));
    f.add("code", m.code.str());
    f.add("mid", static_cast<unsigned>(m.mid));
    if (m.oscore) {
        f.add("kid", to_hex(m.oscore->kid));
        if (m.oscore->piv)
            f.add("piv", static_cast<std::uint64_t>(*m.oscore->piv));
    }
    if (m.uri_path)
        f.add("path", *m.uri_path);
    f.add("size", static_cast<std::uint64_t>(coap::message_size(m)));
    return f;
}

void World::note(std::string kind, Address node, const JsonFields& detail)
{
    if (trace_.verbose())
        trace_.record(now(), std::move(kind), name_of(node), detail);
}

void World::send(Address from, Frame frame)
{
    Address dst = frame.msg.dst;
    if (links_.count({from, dst})) {
        send_via(from, dst, std::move(frame));
        return;
    }
    if (auto gw = gateway_of(from)) {
        send_via(from, *gw, std::move(frame));
        return;
    }
    if (auto gw = gateway_of(dst); gw && on_internet(from)) {
        ensure_internet_link(from, *gw);
        send_via(from, *gw, std::move(frame));
        return;
    }
    if (on_internet(dst) && on_internet(from)) {
        ensure_internet_link(from, dst);
        send_via(from, dst, std::move(frame));
        return;
    }
    if (trace_.verbose()) {
        JsonFields d;
        d.add_raw("msg", describe(frame.msg).str());
        d.add("reason", "unroutable");
        d.add("attack", frame.attack);
        trace_.record(now(), "drop", name_of(from), d);
    }
}

void World::send_via(Address from, Address next_hop, Frame frame)
{
    auto it = links_.find({from, next_hop});
    if (it == links_.end())
        throw std::logic_error("no link " + from.str() + " -> " + next_hop.str());
    if (frame.id == 0)
        frame.id = next_frame_id();

    if (auto tap = taps_.find({from, next_hop}); tap != taps_.end())
        tap->second(*this, frame);

    std::size_t size = coap::message_size(frame.msg);
    auto result = it->second.transmit(size, now());

    if (trace_.verbose()) {
        JsonFields d;
        d.add_raw("msg", describe(frame.msg).str());
        d.add("hop", name_of(next_hop));
        d.add("frame", frame.id);
        d.add("attack", frame.attack);
        trace_.record(now(), "send", name_of(from), d);
    }

    if (std::holds_alternative<Dropped>(result)) {
        if (trace_.verbose()) {
            JsonFields d;
            d.add_raw("msg", describe(frame.msg).str());
            d.add("hop", name_of(next_hop));
            d.add("frame", frame.id);
            d.add("reason", "queue_full");
            d.add("attack", frame.attack);
            trace_.record(now(), "drop", name_of(from), d);
        }
        return;
    }
    SimTime at = std::get<Delivered>(result).at;
    queue_.schedule(at, [this, next_hop, from, f = std::move(frame)]() mutable {
        if (trace_.verbose()) {
            JsonFields d;
            d.add_raw("msg", describe(f.msg).str());
            d.add("from", name_of(from));
            d.add("frame", f.id);
            d.add("attack", f.attack);
            trace_.record(now(), "recv", name_of(next_hop), d);
        }
        f.last_hop = from;
        deliver(next_hop, std::move(f));
    });
}

void World::deliver(Address to, Frame frame)
{
    if (Node* n = node(to))
        n->on_frame(*this, std::move(frame));
}

void World::schedule(SimTime at, std::function<void()> fn) { queue_.schedule(at, std::move(fn)); }

void World::attach_energy(Address a, const EnergyCosts& costs) { energy_.insert_or_assign(a, EnergyBudget(costs)); }

EnergyBudget* World::energy(Address a)
{
    auto it = energy_.find(a);
    return it == energy_.end() ? nullptr : &it->second;
}

bool World::drain(Address a, const EnergyEvent& e, bool attack)
{
    EnergyBudget* b = energy(a);
    if (!b || b->exhausted())
        return false;
    double taken = b->drain(e);
    JsonFields d;
    d.add("cause", to_string(e.cause));
    d.add("amount", taken);
    d.add("remaining", b->remaining());
    d.add("attack", attack);
    if (b->exhausted())
        d.add("exhausted", true);
    trace_.record(now(), "energy", name_of(a), d);
    return true;
}

void World::run_until(SimTime t_end)
{
    if (t_end < now())
        throw SchedulingInPast();
    if (!started_) {
        started_ = true;
        for (auto& [addr, n] : nodes_)
            n->start(*this);
    }
    while (auto t = queue_.next_time()) {
        if (*t > t_end)
            break;
        auto [at, fn] = queue_.pop();
        (void)at;
        ++processed_;
        fn();
    }
    queue_.advance_to(t_end);
}

} // namespace guardsim::netsim
