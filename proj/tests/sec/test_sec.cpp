/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "guardsim/coap/codec.hpp"
#include "guardsim/sec/aead.hpp"
#include "guardsim/sec/edhoc.hpp"
#include "guardsim/sec/fnv.hpp"
#include "guardsim/sec/oscore.hpp"
#include "guardsim/sec/replay_window.hpp"
#include "replay_oracle.hpp"

using namespace guardsim;
using namespace guardsim::sec;

namespace {

Key key_from(std::initializer_list<int> v)
{
    Key k{};
    std::size_t i = 0;
    for (int x : v)
        k[i++] = static_cast<std::uint8_t>(x);
    return k;
}

coap::SimMessage sample_request()
{
    coap::SimMessage m;
    m.src = Address{1};
    m.dst = Address{2};
    m.token = {0x11, 0x22};
    m.code = coap::codes::Get;
    m.uri_path = "temperature";
    m.set_body(to_bytes("q"), 12);
    return m;
}

std::pair<SecurityContext, SecurityContext> context_pair(std::uint8_t seed = 1)
{
    Key master{};
    master.fill(seed);
    return {SecurityContext::derive(master, {0x05}, {0x09}), SecurityContext::derive(master, {0x09}, {0x05})};
}

} // namespace

// Values produced by tests/oracles/aead_vectors.py, an independent FNV-1a implementation.
TEST_CASE("aead reference vectors")
{
    CHECK(fnv1a64(to_bytes("a")) == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64(to_bytes("")) == 0xcbf29ce484222325ULL);

    Key zero{};
    Bytes nonce0{0x00};
    CHECK(to_hex(aead_seal(zero, nonce0, {}, to_bytes("A"))) == "9577e8b4b1c7b70e3a");

    Key k = key_from({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15});
    Bytes nonce{1, 2, 3};
    CHECK(to_hex(aead_seal(k, nonce, to_bytes("hdr"), to_bytes("hello world, 16+"))) ==
          "1db8727adef14f1407b1793a91e000e35cf76030f442bc73");
}

TEST_CASE("aead round trip and tamper detection")
{
    Rng rng(3);
    Key k{};
    for (auto& b : k)
        b = static_cast<std::uint8_t>(rng.next_u64());

    CHECK(aead_seal(k, {}, {}, {}).size() == ToyAead::tag_bytes);

    for (int i = 0; i < 200; ++i) {
        Bytes pt = rng.bytes(rng.uniform(40));
        Bytes nonce = rng.bytes(1 + rng.uniform(12));
        Bytes aad = rng.bytes(rng.uniform(10));
        Bytes ct = aead_seal(k, nonce, aad, pt);
        auto back = aead_open(k, nonce, aad, ct);
        REQUIRE(back);
        CHECK(*back == pt);

        Bytes flipped = ct;
        auto bit = rng.uniform(flipped.size() * 8);
        flipped[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        CHECK_FALSE(aead_open(k, nonce, aad, flipped));

        Key other = k;
        other[rng.uniform(16)] ^= 0x40;
        CHECK_FALSE(aead_open(other, nonce, aad, ct));

        Bytes nonce2 = nonce;
        nonce2[0] ^= 1;
        CHECK_FALSE(aead_open(k, nonce2, aad, ct));

        Bytes aad2 = aad;
        aad2.push_back(0);
        CHECK_FALSE(aead_open(k, nonce, aad2, ct));
    }
    CHECK_FALSE(aead_open(k, {}, {}, Bytes(5, 0)));
}

TEST_CASE("replay window basics")
{
    ReplayWindow w(32);
    CHECK(w.check(0) == ReplayVerdict::Accept);
    CHECK(w.check(0) == ReplayVerdict::Reject);
    CHECK(w.check(100) == ReplayVerdict::Accept);
    CHECK(w.check(100) == ReplayVerdict::Reject);
    CHECK_THROWS(ReplayWindow(0));
    CHECK_THROWS(ReplayWindow(65));
}

TEST_CASE("replay window W=32 at highest 100 against the set oracle")
{
    for (std::uint64_t seq = 0; seq <= 200; ++seq) {
        ReplayWindow w(32);
        testing::ReplaySetOracle o{32};
        w.check(100);
        o.accept(100);
        bool expected = o.accept(seq);
        CHECK(expected == (w.check(seq) == ReplayVerdict::Accept));
    }
    ReplayWindow w(32);
    w.check(100);
    CHECK_FALSE(w.would_accept(68));
    CHECK(w.would_accept(69));
}

TEST_CASE("replay window matches the set oracle on random streams")
{
    Rng rng(11);
    for (int round = 0; round < 200; ++round) {
        unsigned W = 1 + static_cast<unsigned>(rng.uniform(64));
        std::uint64_t span = 1 + rng.uniform(10000);
        ReplayWindow w(W);
        testing::ReplaySetOracle o{W};
        std::uint64_t base = 0;
        for (int i = 0; i < 1000; ++i) {
            // Mostly near the top so the window edge is exercised.
            std::uint64_t seq = rng.uniform(3) == 0 ? rng.uniform(span) : base + rng.uniform(2 * W + 2);
            if (rng.uniform(4) == 0)
                base += rng.uniform(W + 1);
            REQUIRE(o.accept(seq) == (w.check(seq) == ReplayVerdict::Accept));
        }
    }
}

TEST_CASE("oscore protect exposes kid and piv only")
{
    auto [client, server] = context_pair();
    client.sender_seq = 7;
    auto m = sample_request();
    auto p1 = oscore_protect(client, m);
    auto p2 = oscore_protect(client, m);
    REQUIRE(p1);
    REQUIRE(p2);
    CHECK(p1->oscore->kid == Bytes{0x05});
    CHECK(p1->oscore->piv == 7u);
    CHECK(p2->oscore->piv == 8u);
    CHECK(p1->code == coap::codes::Post);
    CHECK_FALSE(p1->uri_path);
    CHECK(p1->token == m.token);
    // Plaintext is not visible in the body.
    auto plain = coap::encode(m);
    CHECK(std::search(p1->body.begin(), p1->body.end(), plain.begin(), plain.end()) == p1->body.end());

    auto got = oscore_unprotect(server, *p1);
    REQUIRE(got);
    CHECK(got->inner.code == coap::codes::Get);
    CHECK(got->inner.uri_path == "temperature");
    CHECK(got->inner.body == m.body);
    CHECK(got->inner.payload_len == m.payload_len);
    CHECK(got->binding.piv == 7u);
}

TEST_CASE("oscore sequence exhaustion")
{
    auto [client, server] = context_pair();
    client.sender_seq = max_sequence_number - 1;
    CHECK(oscore_protect(client, sample_request()));
    auto r = oscore_protect(client, sample_request());
    REQUIRE_FALSE(r);
    CHECK(r.error() == OscoreError::SeqExhausted);
}

TEST_CASE("oscore replay and wrong key")
{
    auto [client, server] = context_pair();
    auto p = oscore_protect(client, sample_request());
    REQUIRE(p);
    CHECK(oscore_unprotect(server, *p));
    auto again = oscore_unprotect(server, *p);
    REQUIRE_FALSE(again);
    CHECK(again.error() == OscoreError::ReplayError);

    // Attacker guessed the kid but holds another key.
    auto [mallory, unused] = context_pair(99);
    (void)unused;
    mallory.sender_seq = 50;
    auto forged = oscore_protect(mallory, sample_request());
    auto r = oscore_unprotect(server, *forged);
    REQUIRE_FALSE(r);
    CHECK(r.error() == OscoreError::AuthError);
    // A failed check does not consume the sequence number.
    client.sender_seq = 50;
    CHECK(oscore_unprotect(server, *oscore_protect(client, sample_request())));

    auto unknown = *p;
    unknown.oscore->kid = {0x77};
    CHECK(oscore_unprotect(server, unknown).error() == OscoreError::UnknownKid);
    auto plain = sample_request();
    CHECK(oscore_unprotect(server, plain).error() == OscoreError::NotProtected);
}

TEST_CASE("response binding cross-pairing")
{
    auto [client, server] = context_pair();
    std::vector<RequestBinding> requests;
    std::vector<coap::SimMessage> responses;
    for (int i = 0; i < 2; ++i) {
        auto p = oscore_protect(client, sample_request());
        auto in = oscore_unprotect(server, *p);
        REQUIRE(in);
        requests.push_back(in->binding);
        auto resp = coap::make_response(in->inner, coap::codes::Content);
        resp.set_body(to_bytes("21.5"));
        responses.push_back(oscore_protect_response(server, resp, in->binding));
    }
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t q = 0; q < 2; ++q) {
            auto got = oscore_unprotect_response(client, responses[r], requests[q]);
            CHECK(got.has_value() == (r == q));
            if (got)
                CHECK(got->code == coap::codes::Content);
            else
                CHECK(got.error() == OscoreError::AuthError);
        }
    CHECK(responses[0].code == coap::codes::Changed);
    CHECK(responses[0].oscore->kid.empty());
}

TEST_CASE("unprotect under a different context fails")
{
    Rng rng(8);
    for (int i = 0; i < 50; ++i) {
        auto [a, b] = context_pair(static_cast<std::uint8_t>(i));
        auto [c, d] = context_pair(static_cast<std::uint8_t>(i + 100));
        (void)b;
        (void)c;
        auto p = oscore_protect(a, sample_request());
        d.recipient_id = a.sender_id;
        auto r = oscore_unprotect(d, *p);
        REQUIRE_FALSE(r);
        CHECK(r.error() == OscoreError::AuthError);
    }
}

TEST_CASE("oscore_unprotect matches the set oracle on all short permutations")
{
    // Every ordering of an 8-value subset; the acceptance suite covers the
    // full 0..15 space.
    auto [client, server0] = context_pair();
    std::vector<coap::SimMessage> by_seq;
    for (int s = 0; s < 16; ++s)
        by_seq.push_back(*oscore_protect(client, sample_request()));

    std::size_t checked = 0;
    for (unsigned W : {4u, 32u}) {
        for (int offset = 0; offset < 16; offset += 8) {
            std::vector<int> vals(8);
            std::iota(vals.begin(), vals.end(), 0);
            for (auto& v : vals)
                v = (v * 2 + offset) % 16;
            std::sort(vals.begin(), vals.end());
            do {
                auto server = server0;
                server.replay_window = ReplayWindow(W);
                testing::ReplaySetOracle o{W};
                for (int v : vals) {
                    bool want = o.accept(static_cast<std::uint64_t>(v));
                    auto got = oscore_unprotect(server, by_seq[static_cast<std::size_t>(v)]);
                    REQUIRE(got.has_value() == want);
                    if (!want)
                        REQUIRE(got.error() == OscoreError::ReplayError);
                    ++checked;
                }
            } while (std::next_permutation(vals.begin(), vals.end()));
        }
    }
    CHECK(checked == 2 * 2 * 40320 * 8);
}

TEST_CASE("edhoc handshake")
{
    Rng rng(21);
    auto r = edhoc_run(rng, {0x2a});
    REQUIRE(r);
    auto& [init, resp] = *r;
    CHECK(init.master_key == resp.master_key);
    CHECK(init.sender_id == resp.recipient_id);
    CHECK(init.recipient_id == resp.sender_id);
    CHECK(init.sender_id == Bytes{0x2a});

    auto p = oscore_protect(init, sample_request());
    auto in = oscore_unprotect(resp, *p);
    REQUIRE(in);
    auto rsp = oscore_protect_response(resp, coap::make_response(in->inner, coap::codes::Content), in->binding);
    CHECK(oscore_unprotect_response(init, rsp, binding_of(*p)));
}

TEST_CASE("edhoc state machine")
{
    Rng rng(4);
    auto i = EdhocSession::initiator(rng);
    auto r = EdhocSession::responder(rng);
    CHECK(i.step() == 0);
    CHECK(r.message1().error() == EdhocError::WrongState);
    auto m1 = i.message1();
    CHECK(i.message1().error() == EdhocError::WrongState);
    CHECK(r.handle_message1(Bytes(3, 0), 1).error() == EdhocError::Malformed);
    auto m2 = r.handle_message1(*m1, 77);
    REQUIRE(m2);
    CHECK(r.handle() == 77u);
    Bytes bad = *m2;
    bad.back() ^= 1;
    auto i2 = i;
    CHECK(i2.handle_message2(bad).error() == EdhocError::AuthFailed);
    auto m3 = i.handle_message2(*m2);
    REQUIRE(m3);
    CHECK(EdhocSession::handle_of_message3(*m3) == 77u);
    CHECK_FALSE(r.derived_context());
    auto done = r.handle_message3(*m3, {3});
    REQUIRE(done);
    CHECK(r.step() == 3);
    CHECK(r.derived_context());
    CHECK(i.handle_completion(*done));
    CHECK(i.step() == 3);
    CHECK(i.derived_context()->master_key == r.derived_context()->master_key);
}

TEST_CASE("edhoc runs drain the responder budget")
{
    Rng rng(1);
    netsim::EnergyBudget budget;
    int completed = 0;
    while (!budget.exhausted()) {
        REQUIRE(edhoc_run(rng, {1}, &budget));
        ++completed;
    }
    CHECK(completed == 50000);
    CHECK(budget.remaining() == 0.0);
}
