/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "doctest.h"

#include <algorithm>
#include <map>
#include <tuple>

#include "guardsim/ace/ace_oscore.hpp"
#include "guardsim/coap/codec.hpp"
#include "guardsim/guard/dispatch.hpp"
#include "guardsim/guard/setup.hpp"
#include "seq_oracle.hpp"

using namespace guardsim;
using namespace guardsim::guard;
using namespace guardsim::literals;
using coap::SimMessage;

namespace {

constexpr Address proxy{20};
constexpr Address server{21};
constexpr Address client{1000};

SimMessage via_proxy(Address src, std::uint16_t mid, Bytes token = {0x01})
{
    SimMessage m;
    m.src = src;
    m.dst = proxy;
    m.mid = mid;
    m.token = std::move(token);
    m.code = coap::codes::Post;
    m.uri_host = "S";
    m.uri_path = "/edhoc";
    return m;
}

SimMessage oscore_req(Address src, std::uint16_t mid, Bytes kid, std::uint32_t piv, Bytes token)
{
    auto m = via_proxy(src, mid, std::move(token));
    m.uri_path.reset();
    m.oscore = coap::OscoreOption{std::move(kid), piv};
    return m;
}

template <class T>
bool holds(const std::vector<GuardAction>& a)
{
    return a.size() == 1 && std::holds_alternative<T>(a.front());
}

GuardState exemptions_guard(GuardPolicy p = {})
{
    p.mode = GuardMode::Exemptions;
    GuardState g(proxy, p, 7);
    g.origins["S"] = Origin{server, "S"};
    return g;
}

/// Independent token-bucket simulation in exact integer arithmetic: tokens are
/// counted in thousandths, time in milliseconds, rates in whole msgs/s.
struct BucketOracle {
    std::int64_t rate, burst;
    std::int64_t milli;
    std::int64_t last = 0;
    BucketOracle(std::int64_t r, std::int64_t b) : rate(r), burst(b), milli(b * 1000) {}
    void refill(std::int64_t t)
    {
        milli = std::min(burst * 1000, milli + rate * (t - last));
        last = t;
    }
};

std::vector<bool> oracle_admit(std::int64_t src_rate, std::int64_t src_burst, std::int64_t agg_rate,
                               std::int64_t agg_burst, const std::vector<std::pair<std::int64_t, int>>& arrivals)
{
    BucketOracle agg(agg_rate, agg_burst);
    std::map<int, BucketOracle> per;
    std::vector<bool> out;
    for (auto [t, s] : arrivals) {
        auto& own = per.try_emplace(s, src_rate, src_burst).first->second;
        own.refill(t);
        agg.refill(t);
        bool ok = own.milli >= 1000 && agg.milli >= 1000;
        if (ok) {
            own.milli -= 1000;
            agg.milli -= 1000;
        }
        out.push_back(ok);
    }
    return out;
}

int count_admits(ThrottlePolicy& t, PriorityClass cls, const std::vector<std::pair<std::int64_t, int>>& arrivals,
                 std::vector<bool>* trail = nullptr)
{
    int n = 0;
    for (auto [ms, s] : arrivals) {
        bool ok = t.admit(cls, Address{static_cast<std::uint32_t>(s)}, SimTime::from_ms(ms)) == Admission::Admit;
        n += ok;
        if (trail)
            trail->push_back(ok);
    }
    return n;
}

} // namespace

TEST_CASE("priority order")
{
    CHECK(rank(PriorityClass::Tunnel) == rank(PriorityClass::AllowListed));
    CHECK(rank(PriorityClass::AllowListed) > rank(PriorityClass::ReachabilityVerified));
    CHECK(rank(PriorityClass::ReachabilityVerified) > rank(PriorityClass::UnknownViaProxy));
    CHECK(rank(PriorityClass::UnknownViaProxy) > rank(PriorityClass::NonProxy));
    CHECK(rank(PriorityClass::NonProxy) > rank(PriorityClass::Blocked));
}

TEST_CASE("classify")
{
    FlowTable flows;
    auto m = via_proxy(client, 1);
    CHECK(classify(flows, m, GuardMode::Exemptions, proxy) == PriorityClass::UnknownViaProxy);

    auto direct = m;
    direct.dst = server;
    CHECK(classify(flows, direct, GuardMode::Exemptions, proxy) == PriorityClass::NonProxy);

    CHECK(classify(flows, m, GuardMode::FullGuard, proxy) == PriorityClass::Blocked);
    CHECK(classify(flows, m, GuardMode::FullGuard, proxy, true) == PriorityClass::Tunnel);

    flows.get_or_create(flow_key_of(m), 0_s).cls = PriorityClass::AllowListed;
    CHECK(classify(flows, m, GuardMode::Exemptions, proxy) == PriorityClass::AllowListed);
}

TEST_CASE("throttle examples")
{
    SUBCASE("rate 0 drops everything")
    {
        ThrottlePolicy t({{0, 0}, {0, 0}}, {{0, 0}, {0, 0}}, {{0, 0}, {0, 0}});
        CHECK(count_admits(t, PriorityClass::UnknownViaProxy, {{0, 1}, {1000, 1}, {5000, 2}}) == 0);
    }
    SUBCASE("rate 1, burst 2: five at once admits two")
    {
        ThrottlePolicy t({{1, 2}, {100, 100}}, {}, {});
        std::vector<std::pair<std::int64_t, int>> five(5, {0, 1});
        CHECK(count_admits(t, PriorityClass::UnknownViaProxy, five) == 2);
    }
    SUBCASE("ten sources against aggregate 3/s admits exactly three")
    {
        ThrottlePolicy t({{1, 1}, {3, 3}}, {}, {});
        std::vector<std::pair<std::int64_t, int>> ten;
        for (int s = 0; s < 10; ++s)
            ten.push_back({0, 100 + s});
        CHECK(count_admits(t, PriorityClass::UnknownViaProxy, ten) == 3);
        auto expected = oracle_admit(1, 1, 3, 3, ten);
        CHECK(std::count(expected.begin(), expected.end(), true) == 3);
    }
    SUBCASE("exempt classes have no buckets")
    {
        ThrottlePolicy t{GuardPolicy{}};
        CHECK_THROWS(t.admit(PriorityClass::AllowListed, client, 0_s));
        CHECK_THROWS(t.admit(PriorityClass::Tunnel, client, 0_s));
        CHECK_THROWS(t.admit(PriorityClass::Blocked, client, 0_s));
    }
}

TEST_CASE("throttle agrees with the integer bucket oracle")
{
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        std::int64_t sr = 1 + rng.uniform(3), sb = 1 + rng.uniform(3);
        std::int64_t ar = 1 + rng.uniform(6), ab = 1 + rng.uniform(6);
        std::vector<std::pair<std::int64_t, int>> arrivals;
        std::int64_t t = 0;
        for (int i = 0; i < 60; ++i) {
            t += rng.uniform(700);
            arrivals.push_back({t, static_cast<int>(rng.uniform(4))});
        }
        ThrottlePolicy policy({{double(sr), double(sb)}, {double(ar), double(ab)}}, {}, {});
        std::vector<bool> got;
        count_admits(policy, PriorityClass::UnknownViaProxy, arrivals, &got);
        REQUIRE(got == oracle_admit(sr, sb, ar, ab, arrivals));
    }
}

TEST_CASE("echo challenge and verification")
{
    Rng rng(5);
    FlowTable flows;
    auto a = via_proxy(client, 1);
    auto b = via_proxy(Address{1001}, 1);
    auto& fa = flows.get_or_create(flow_key_of(a), 0_s);
    auto& fb = flows.get_or_create(flow_key_of(b), 0_s);
    auto ca = issue_echo_challenge(fa, a, 0_s, rng);
    auto cb = issue_echo_challenge(fb, b, 0_s, rng);
    CHECK(ca.code == coap::codes::Unauthorized);
    REQUIRE(ca.echo);
    CHECK(ca.echo->size() == 8);
    CHECK(*ca.echo != *cb.echo);

    auto reply = a;
    reply.echo = ca.echo;
    CHECK(verify_echo(fa, reply, 30_s, 40_s) == EchoResult::Verified);
    CHECK(fa.cls == PriorityClass::ReachabilityVerified);
    CHECK(fa.reachable_since == 0_s);
    CHECK_FALSE(fa.echo);

    auto late = b;
    late.echo = cb.echo;
    CHECK(verify_echo(fb, late, 41_s, 40_s) == EchoResult::Stale);
    CHECK(fb.cls == PriorityClass::UnknownViaProxy);
    CHECK_FALSE(fb.echo);

    auto fc_msg = via_proxy(Address{1002}, 1);
    auto& fc = flows.get_or_create(flow_key_of(fc_msg), 0_s);
    issue_echo_challenge(fc, fc_msg, 0_s, rng);
    fc_msg.echo = Bytes(8, 0xee);
    CHECK(verify_echo(fc, fc_msg, 1_s, 40_s) == EchoResult::Mismatch);
    CHECK(fc.cls == PriorityClass::UnknownViaProxy);
}

TEST_CASE("observe_exchange")
{
    FlowTable flows;
    SeqTracker tracker;
    RequestMeta meta{client, Bytes{0x07}, 3, Bytes{0xaa}, false};

    auto plain_error = SimMessage{};
    plain_error.code = coap::codes::Unauthorized;
    CHECK_FALSE(observe_exchange(flows, tracker, meta, plain_error, 1_s));
    CHECK(classify(flows, oscore_req(client, 1, {0x07}, 3, {0xaa}), GuardMode::Exemptions, proxy) ==
          PriorityClass::UnknownViaProxy);

    auto ok = SimMessage{};
    ok.code = coap::codes::Changed;
    ok.oscore = coap::OscoreOption{};

    auto token_post = meta;
    token_post.token_post = true;
    CHECK_FALSE(observe_exchange(flows, tracker, token_post, ok, 1_s));
    CHECK(flows.size() == 0);

    CHECK(observe_exchange(flows, tracker, meta, ok, 2_s));
    const FlowRecord* f = flows.find({client, Bytes{0x07}});
    REQUIRE(f);
    CHECK(f->cls == PriorityClass::AllowListed);
    CHECK(f->tentative);
    CHECK(tracker.highest(Bytes{0x07}) == 3u);
}

TEST_CASE("seq_check examples")
{
    const Bytes kid{0x07};
    SUBCASE("jumps")
    {
        SeqTracker t(128, 64);
        t.record(kid, 10, {0x01}, client);
        CHECK(seq_check(t, kid, 11, {0x02}, client) == SeqVerdict::Plausible);
        CHECK(seq_check(t, kid, 10000, {0x03}, client) == SeqVerdict::ImplausibleJump);
        CHECK(t.highest(kid) == 11u);
    }
    SUBCASE("piv under another token")
    {
        SeqTracker t;
        t.record(kid, 7, {0x71}, client);
        CHECK(seq_check(t, kid, 7, {0x72}, client) == SeqVerdict::Conflict);
        CHECK(seq_check(t, kid, 7, {0x71}, client) == SeqVerdict::Plausible);
    }
    SUBCASE("known context from a new address")
    {
        SeqTracker t;
        t.record(kid, 20, {0x01}, client);
        CHECK(seq_check(t, kid, 21, {0x02}, Address{4242}) == SeqVerdict::KnownMobile);
        CHECK(seq_check(t, kid, 22, {0x03}, Address{4242}) == SeqVerdict::Plausible);
    }
}

TEST_CASE("tracker window holds at most W immutable entries")
{
    Rng rng(3);
    const Bytes kid{0x01};
    for (std::uint32_t w : {4u, 16u, 64u}) {
        SeqTracker t(128, w);
        std::map<std::uint32_t, Bytes> first;
        std::uint32_t hi = 0;
        for (int i = 0; i < 2000; ++i) {
            std::uint32_t piv = static_cast<std::uint32_t>(rng.uniform(hi + 20));
            Bytes tok{static_cast<std::uint8_t>(rng.uniform(4))};
            auto v = seq_check(t, kid, piv, tok, client);
            hi = *t.highest(kid);
            REQUIRE(t.remembered(kid) <= w);
            if (v == SeqVerdict::Plausible)
                first.try_emplace(piv, tok);
            // A piv still remembered answers only to its first token.
            if (piv + w > hi && first.count(piv))
                REQUIRE(t.check(kid, piv, first[piv], client) == SeqVerdict::Plausible);
        }
    }
}

TEST_CASE("seq_check agrees with the full-history oracle")
{
    Rng rng(17);
    std::size_t disagreements = 0, jumps = 0, conflicts = 0, mobile = 0;
    for (auto [jump, window] : {std::pair{128u, 64u}, std::pair{16u, 8u}, std::pair{4u, 32u}}) {
        SeqTracker t(jump, window);
        testing::SeqOracle o(jump, window);
        for (const auto& e : testing::random_seq_stream(rng, 10000, jump, window)) {
            auto got = seq_check(t, e.kid, e.piv, e.token, e.source);
            auto want = o.check_and_record(e.kid, e.piv, e.token, e.source);
            disagreements += got != want;
            jumps += want == SeqVerdict::ImplausibleJump;
            conflicts += want == SeqVerdict::Conflict;
            mobile += want == SeqVerdict::KnownMobile;
        }
    }
    CHECK(disagreements == 0);
    // The stream reaches every verdict often enough to mean something.
    CHECK(jumps > 100);
    CHECK(conflicts > 100);
    CHECK(mobile > 100);
}

TEST_CASE("dispatch: unknown source is challenged, not forwarded")
{
    auto g = exemptions_guard();
    auto first = guard_dispatch(g, via_proxy(client, 1), 0_s);
    REQUIRE(holds<SendChallenge>(first));
    auto ch = std::get<SendChallenge>(first.front()).msg;

    SUBCASE("duplicate gets the same challenge")
    {
        auto dup = guard_dispatch(g, via_proxy(client, 1), 100_ms);
        REQUIRE(holds<ForwardToClient>(dup));
        CHECK(std::get<ForwardToClient>(dup.front()).msg == ch);
    }
    SUBCASE("second request while pending is dropped")
    {
        auto again = guard_dispatch(g, via_proxy(client, 2), 10_s);
        CHECK(holds<Drop>(again));
    }
    SUBCASE("echo reply is forwarded")
    {
        auto reply = via_proxy(client, 3);
        reply.echo = ch.echo;
        auto fwd = guard_dispatch(g, reply, 1_s);
        REQUIRE(holds<ForwardToServer>(fwd));
        auto& f = std::get<ForwardToServer>(fwd.front());
        CHECK(f.cls == PriorityClass::ReachabilityVerified);
        CHECK(f.msg.dst == server);
        CHECK(f.msg.src == proxy);
        // A new security context from the same address starts verified.
        CHECK(classify(g.flows, oscore_req(client, 4, {0x05}, 0, {0x09}), GuardMode::Exemptions, proxy) ==
              PriorityClass::ReachabilityVerified);
    }
}

TEST_CASE("dispatch: flood source with an empty bucket is dropped")
{
    auto g = exemptions_guard();
    const Address flood{500};
    int challenges = 0, drops = 0;
    for (std::uint16_t i = 0; i < 50; ++i) {
        auto a = guard_dispatch(g, via_proxy(flood, i + 1), SimTime::from_ms(i * 50));
        challenges += holds<SendChallenge>(a);
        drops += holds<Drop>(a);
    }
    CHECK(challenges == 1);
    CHECK(drops == 49);
}

TEST_CASE("dispatch: allow-listed request passes under attack")
{
    auto g = exemptions_guard();
    const Bytes kid{0x07};
    g.flows.get_or_create({client, kid}, 0_s).cls = PriorityClass::AllowListed;
    g.tracker.record(kid, 5, {0x55}, client);

    // Exhaust every bucket with a distributed flood.
    for (std::uint16_t i = 0; i < 200; ++i)
        guard_dispatch(g, via_proxy(Address{600u + i}, 1), 1_s);

    auto a = guard_dispatch(g, oscore_req(client, 9, kid, 6, {0x56}), 1_s);
    REQUIRE(holds<ForwardToServer>(a));
    CHECK(std::get<ForwardToServer>(a.front()).cls == PriorityClass::AllowListed);
}

TEST_CASE("dispatch: direct traffic is NonProxy")
{
    auto g = exemptions_guard();
    auto m = via_proxy(client, 1);
    m.dst = server;
    auto a = guard_dispatch(g, m, 0_s);
    REQUIRE(holds<ForwardToServer>(a));
    auto& f = std::get<ForwardToServer>(a.front());
    CHECK(f.cls == PriorityClass::NonProxy);
    CHECK_FALSE(f.proxied);
    CHECK(f.msg == m);
}

TEST_CASE("dispatch: relayed protected response promotes the flow")
{
    auto g = exemptions_guard();
    const Bytes kid{0x07};
    g.flows.mark_reachable(client, 0_s, 0_s);
    auto a = guard_dispatch(g, oscore_req(client, 1, kid, 0, {0x33}), 1_s);
    REQUIRE(holds<ForwardToServer>(a));
    auto fwd = std::get<ForwardToServer>(a.front());

    auto resp = coap::make_response(fwd.msg, coap::codes::Changed);
    resp.oscore = coap::OscoreOption{};
    auto r = guard_relay_response(g, fwd, resp, 2_s);
    REQUIRE(r.reply);
    CHECK(r.reply->dst == client);
    CHECK(r.reply->token == Bytes{0x33});
    CHECK(r.reply->mid == 1);
    REQUIRE(r.promoted);
    CHECK(classify(g.flows, oscore_req(client, 2, kid, 1, {0x34}), GuardMode::Exemptions, proxy) ==
          PriorityClass::AllowListed);

    auto dup = guard_dispatch(g, oscore_req(client, 1, kid, 0, {0x33}), 3_s);
    REQUIRE(holds<ForwardToClient>(dup));
    CHECK(std::get<ForwardToClient>(dup.front()).msg == *r.reply);
}

TEST_CASE("dispatch: sequence conflicts and jumps leave the legitimate flow alone")
{
    auto g = exemptions_guard();
    const Bytes kid{0x07};
    g.flows.get_or_create({client, kid}, 0_s).cls = PriorityClass::AllowListed;
    g.tracker.record(kid, 7, {0x71}, client);

    CHECK(holds<Drop>(guard_dispatch(g, oscore_req(client, 50, kid, 7, {0x72}), 1_s)));
    auto jump = guard_dispatch(g, oscore_req(client, 51, kid, 9000, {0x73}), 1_s);
    REQUIRE(holds<SendChallenge>(jump));
    CHECK(g.flows.find({client, kid})->cls == PriorityClass::AllowListed);
    CHECK_FALSE(g.flows.find({client, kid})->echo);
    CHECK(g.tracker.highest(kid) == 7u);

    // Whoever answers the jump challenge is reachable and may pass.
    auto back = oscore_req(client, 52, kid, 9000, {0x73});
    back.echo = std::get<SendChallenge>(jump.front()).msg.echo;
    CHECK(holds<ForwardToServer>(guard_dispatch(g, back, 2_s)));
}

TEST_CASE("property: guessed-kid traffic never evicts an allow-listed flow")
{
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        auto g = exemptions_guard();
        const Bytes kid{static_cast<std::uint8_t>(rng.uniform(256))};
        g.flows.get_or_create({client, kid}, 0_s).cls = PriorityClass::AllowListed;
        for (std::uint32_t p = 0; p < 40; ++p)
            g.tracker.record(kid, p, {static_cast<std::uint8_t>(p)}, client);
        const auto before_hi = g.tracker.highest(kid);
        const auto before_n = g.tracker.remembered(kid);

        for (int i = 0; i < 500; ++i) {
            Bytes guess{static_cast<std::uint8_t>(rng.uniform(256))};
            std::uint32_t piv = rng.uniform(2) ? static_cast<std::uint32_t>(rng.uniform(40))
                                               : 40 + 1000 + static_cast<std::uint32_t>(rng.uniform(100000));
            Address src = rng.uniform(2) ? client : Address{static_cast<std::uint32_t>(500 + rng.uniform(50))};
            Bytes token = rng.bytes(2);
            auto m = oscore_req(src, static_cast<std::uint16_t>(1000 + i), guess, piv, token);
            if (rng.uniform(4) == 0)
                m.echo = rng.bytes(8);
            guard_dispatch(g, m, SimTime::from_ms(i * 20));
            REQUIRE(g.flows.find({client, kid})->cls == PriorityClass::AllowListed);
            REQUIRE(g.tracker.highest(kid) == before_hi);
            REQUIRE(g.tracker.remembered(kid) == before_n);
        }
    }
}

TEST_CASE("property: no allow-listing without an observed protected response")
{
    Rng rng(11);
    auto g = exemptions_guard();
    for (int i = 0; i < 3000; ++i) {
        Address src{static_cast<std::uint32_t>(1000 + rng.uniform(20))};
        SimMessage m = rng.uniform(2) ? oscore_req(src, static_cast<std::uint16_t>(i), {0x01},
                                                   static_cast<std::uint32_t>(rng.uniform(300)), rng.bytes(2))
                                      : via_proxy(src, static_cast<std::uint16_t>(i), rng.bytes(2));
        if (rng.uniform(3) == 0)
            m.echo = rng.bytes(8);
        auto acts = guard_dispatch(g, m, SimTime::from_ms(i * 37));
        // Answer challenges like a reachable client would.
        for (auto& a : acts)
            if (auto* c = std::get_if<SendChallenge>(&a)) {
                auto back = m;
                back.mid = static_cast<std::uint16_t>(m.mid + 40000);
                back.echo = c->msg.echo;
                guard_dispatch(g, back, SimTime::from_ms(i * 37 + 5));
            }
    }
    for (const auto& [key, flow] : g.flows.flows())
        REQUIRE(flow.cls != PriorityClass::AllowListed);
}

TEST_CASE("property: throttled classes obey the aggregate bound")
{
    GuardPolicy p;
    auto g = exemptions_guard(p);
    Rng rng(8);
    std::vector<SimTime> unknown_out;
    SimTime t;
    for (int i = 0; i < 20000; ++i) {
        t += SimTime::from_ms(static_cast<std::int64_t>(rng.uniform(20)));
        auto m = via_proxy(Address{static_cast<std::uint32_t>(500 + rng.uniform(300))},
                           static_cast<std::uint16_t>(i));
        for (auto& a : guard_dispatch(g, m, t))
            if (std::holds_alternative<SendChallenge>(a) || std::holds_alternative<ForwardToServer>(a))
                unknown_out.push_back(t);
    }
    // Over every window [a, b]: count <= burst + rate * (b - a).
    for (std::size_t i = 0; i < unknown_out.size(); i += 7)
        for (std::size_t j = i; j < unknown_out.size(); j += 13) {
            double span = (unknown_out[j] - unknown_out[i]).seconds();
            REQUIRE(double(j - i + 1) <= p.unknown.aggregate.burst + p.unknown.aggregate.rate * span + 1e-9);
        }
    CHECK(unknown_out.size() > 10);
}

namespace {

struct TunnelFixture {
    Rng rng{77};
    ace::AsRegistry as;
    Key as_key{};
    GuardState sgp{proxy, [] {
                       GuardPolicy p;
                       p.mode = GuardMode::FullGuard;
                       return p;
                   }(),
                   5};
    const Address cgp{10};

    TunnelFixture()
    {
        as_key.fill(0x42);
        as.add_audience("S", as_key);
        as.add_subject("client", {"S"});
        as.add_subject("cgp");
        sgp.origins["S"] = Origin{server, "S"};
    }

    void accept(const Key& k) { sgp.accepted_as.push_back({"S", k, sgp.key_id}); }

    SimMessage authz_info(const Bytes& body, std::uint16_t mid)
    {
        SimMessage m;
        m.src = cgp;
        m.dst = proxy;
        m.mid = mid;
        m.token = {0x10};
        m.code = coap::codes::Post;
        m.uri_path = paths::authz_info;
        m.set_body(body);
        return m;
    }

    /// Steps 7 and 8; returns the client guard's context on success.
    std::optional<sec::SecurityContext> establish(std::vector<GuardAction>* out = nullptr)
    {
        auto issued = as.issue_token({"client", "S", ace::GuardBindings{"cgp", "sgp"}}, 0_s, rng);
        REQUIRE(issued);
        ace::AceClientExchange ex(issued->token, issued->pop_key, {0x0c}, rng);
        auto acts = guard_dispatch(sgp, authz_info(ex.request_body(), 1), 1_s);
        if (out)
            *out = acts;
        REQUIRE(holds<TunnelHandshake>(acts));
        auto& h = std::get<TunnelHandshake>(acts.front());
        if (!h.accepted)
            return std::nullopt;
        return ex.finish(h.reply.body);
    }
};

SimMessage inner_request(Bytes token)
{
    SimMessage m;
    m.src = Address{10};
    m.type = coap::MessageType::Con;
    m.token = std::move(token);
    m.code = coap::codes::Post;
    m.uri_host = "S";
    m.oscore = coap::OscoreOption{{0x02}, 4};
    m.set_body(Bytes{1, 2, 3}, 40);
    return m;
}

} // namespace

TEST_CASE("tunnel: happy path forwards unwrapped request and wraps the answer")
{
    TunnelFixture f;
    f.accept(f.as_key);
    auto ctx = f.establish();
    REQUIRE(ctx);

    auto inner = inner_request({0xa1, 0xa2});
    auto outer = wrap_tunnel_request(*ctx, inner, f.cgp, proxy);
    REQUIRE(outer);
    outer->mid = 7;
    outer->token = {0xbb};
    auto acts = guard_dispatch(f.sgp, *outer, 2_s);
    REQUIRE(holds<ForwardToServer>(acts));
    auto fwd = std::get<ForwardToServer>(acts.front());
    CHECK(fwd.cls == PriorityClass::Tunnel);
    CHECK(fwd.msg.dst == server);
    CHECK(fwd.msg.oscore == inner.oscore);
    CHECK(fwd.msg.body == inner.body);

    auto resp = coap::make_response(fwd.msg, coap::codes::Changed);
    resp.oscore = coap::OscoreOption{};
    auto r = guard_relay_response(f.sgp, fwd, resp, 3_s);
    REQUIRE(r.reply);
    CHECK(r.reply->dst == f.cgp);
    CHECK(r.reply->token == Bytes{0xbb});
    auto opened = unwrap_tunnel_response(*ctx, *r.reply, sec::binding_of(*outer));
    REQUIRE(opened);
    CHECK(opened->token == inner.token);
    CHECK(opened->code == coap::codes::Changed);

    SUBCASE("re-sent inner request is answered from the cache")
    {
        auto again = wrap_tunnel_request(*ctx, inner, f.cgp, proxy);
        again->mid = 8;
        again->token = {0xbc};
        auto a2 = guard_dispatch(f.sgp, *again, 4_s);
        REQUIRE(holds<ForwardToClient>(a2));
        auto re = unwrap_tunnel_response(*ctx, std::get<ForwardToClient>(a2.front()).msg, sec::binding_of(*again));
        REQUIRE(re);
        CHECK(re->token == inner.token);
    }
}

TEST_CASE("tunnel: guard accepting another AS key refuses the token")
{
    TunnelFixture f;
    Key other{};
    other.fill(0x13);
    f.accept(other);
    std::vector<GuardAction> acts;
    CHECK_FALSE(f.establish(&acts));
    auto& h = std::get<TunnelHandshake>(acts.front());
    CHECK(h.reply.code == coap::codes::Unauthorized);
    CHECK(h.detail == "BadTag");
    CHECK(f.sgp.tunnels.empty());

    // Without a tunnel, a request addressed to the server is blocked.
    auto direct = inner_request({0x01});
    direct.dst = server;
    CHECK(holds<Block>(guard_dispatch(f.sgp, direct, 2_s)));
}

TEST_CASE("tunnel: token for another guard is refused")
{
    TunnelFixture f;
    f.accept(f.as_key);
    auto issued = f.as.issue_token({"client", "S", ace::GuardBindings{"cgp", "elsewhere"}}, 0_s, f.rng);
    ace::AceClientExchange ex(issued->token, issued->pop_key, {0x0c}, f.rng);
    auto acts = guard_dispatch(f.sgp, f.authz_info(ex.request_body(), 1), 1_s);
    CHECK_FALSE(std::get<TunnelHandshake>(acts.front()).accepted);
}

TEST_CASE("tunnel: injected garbage is rejected at the guard")
{
    TunnelFixture f;
    f.accept(f.as_key);
    auto ctx = f.establish();
    REQUIRE(ctx);
    auto outer = wrap_tunnel_request(*ctx, inner_request({0x01}), f.cgp, proxy);
    Rng rng(1);
    for (std::uint16_t i = 0; i < 50; ++i) {
        auto bad = *outer;
        bad.mid = 100 + i;
        bad.body = rng.bytes(bad.body.size());
        bad.oscore->piv = 1000 + i;
        auto acts = guard_dispatch(f.sgp, bad, 2_s);
        for (auto& a : acts)
            REQUIRE_FALSE(std::holds_alternative<ForwardToServer>(a));
    }
    CHECK(f.sgp.counters["tunnel_AuthError"] == 50);
}
