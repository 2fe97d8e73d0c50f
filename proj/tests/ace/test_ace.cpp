/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "doctest.h"

#include "guardsim/ace/ace_oscore.hpp"
#include "guardsim/ace/token.hpp"

using namespace guardsim;
using namespace guardsim::ace;
using namespace guardsim::literals;

namespace {

struct Fixture {
    Rng rng{17};
    AsRegistry as;
    Key s_key{};
    Key t_key{};

    Fixture()
    {
        s_key.fill(0x5a);
        t_key.fill(0x77);
        as.add_audience("S", s_key);
        as.add_audience("T", t_key);
        as.add_subject("client", {"S"});
        as.add_subject("cgp");
    }

    Verifier at_s() const { return {"S", s_key, std::nullopt}; }
};

coap::SimMessage request()
{
    coap::SimMessage m;
    m.code = coap::codes::Get;
    m.uri_path = "r";
    return m;
}

} // namespace

TEST_CASE("issue and verify")
{
    Fixture f;
    auto issued = f.as.issue_token({"client", "S", std::nullopt}, 10_s, f.rng);
    REQUIRE(issued);
    CHECK(issued->token.expiry == 3610_s);
    auto claims = verify_token(issued->token, f.at_s(), 20_s);
    REQUIRE(claims);
    CHECK(claims->subject_key_id == "client");
    CHECK(claims->pop_key == issued->pop_key);

    CHECK(f.as.issue_token({"nobody", "S", std::nullopt}, 0_s, f.rng).error() == Denied::UnknownSubject);
    CHECK(f.as.issue_token({"client", "T", std::nullopt}, 0_s, f.rng).error() == Denied::UnauthorizedAudience);
}

TEST_CASE("token verification failures")
{
    Fixture f;
    auto token = f.as.issue_token({"client", "S", std::nullopt}, 0_s, f.rng)->token;

    SUBCASE("one bit changed")
    {
        for (int bit = 0; bit < 64; ++bit) {
            auto t = token;
            t.tag ^= std::uint64_t{1} << bit;
            CHECK(verify_token(t, f.at_s(), 1_s).error() == InvalidToken::BadTag);
        }
        auto t = token;
        t.scope[0] ^= 1;
        CHECK(verify_token(t, f.at_s(), 1_s).error() == InvalidToken::BadTag);
        t = token;
        t.sealed_pop_key[3] ^= 0x10;
        CHECK(verify_token(t, f.at_s(), 1_s).error() == InvalidToken::BadTag);
    }
    SUBCASE("wrong audience")
    {
        Verifier at_t{"T", f.t_key, std::nullopt};
        CHECK(verify_token(token, at_t, 1_s).error() == InvalidToken::WrongAudience);
    }
    SUBCASE("expiry boundary is exclusive")
    {
        CHECK(verify_token(token, f.at_s(), token.expiry - 1_ms));
        CHECK(verify_token(token, f.at_s(), token.expiry).error() == InvalidToken::Expired);
    }
    SUBCASE("forged token")
    {
        Key guess{};
        guess.fill(0x01);
        AsRegistry rogue;
        rogue.add_audience("S", guess);
        rogue.add_subject("client", {"S"});
        auto forged = rogue.issue_token({"client", "S", std::nullopt}, 0_s, f.rng)->token;
        CHECK(verify_token(forged, f.at_s(), 1_s).error() == InvalidToken::BadTag);
    }
}

TEST_CASE("serialization round trip")
{
    Fixture f;
    auto token = f.as.issue_token({"client", "S", GuardBindings{"cgp", "sgp"}}, 5_s, f.rng)->token;
    auto back = AccessToken::parse(token.serialize());
    REQUIRE(back);
    CHECK(*back == token);
    CHECK_FALSE(AccessToken::parse(Bytes{1, 2, 3}));
}

TEST_CASE("guard bindings move the subject to the client guard")
{
    Fixture f;
    CHECK_FALSE(f.as.is_authorized("cgp", "S"));
    auto issued = f.as.issue_token({"client", "S", GuardBindings{"cgp", "sgp"}}, 0_s, f.rng);
    REQUIRE(issued);
    CHECK(issued->token.subject_key_id == "cgp");
    CHECK(f.as.is_authorized("cgp", "S"));

    // The guard can now obtain its own tunnel token.
    auto tunnel = f.as.issue_token({"cgp", "S", GuardBindings{"cgp", "sgp"}}, 1_s, f.rng);
    REQUIRE(tunnel);

    Verifier sgp{"S", f.s_key, "sgp"};
    Verifier other_guard{"S", f.s_key, "sgp2"};
    CHECK(verify_token(tunnel->token, sgp, 2_s));
    CHECK(verify_token(tunnel->token, other_guard, 2_s).error() == InvalidToken::WrongAudience);

    // Unknown client guard.
    CHECK(f.as.issue_token({"client", "S", GuardBindings{"ghost", "sgp"}}, 0_s, f.rng).error() ==
          Denied::UnknownSubject);
}

TEST_CASE("ace-oscore exchange")
{
    Fixture f;
    auto issued = f.as.issue_token({"client", "S", std::nullopt}, 0_s, f.rng);

    SUBCASE("honest client")
    {
        auto pair = ace_oscore_exchange(issued->token, issued->pop_key, f.at_s(), 1_s, f.rng);
        REQUIRE(pair);
        auto& [c, s] = *pair;
        CHECK(c.master_key == s.master_key);
        CHECK(c.sender_id == s.recipient_id);
        auto p = sec::oscore_protect(c, request());
        CHECK(sec::oscore_unprotect(s, *p));
    }
    SUBCASE("replayed token without the bound key")
    {
        Key wrong{};
        auto pair = ace_oscore_exchange(issued->token, wrong, f.at_s(), 1_s, f.rng);
        REQUIRE(pair);
        auto& [c, s] = *pair;
        auto p = sec::oscore_protect(c, request());
        auto r = sec::oscore_unprotect(s, *p);
        REQUIRE_FALSE(r);
        CHECK(r.error() == sec::OscoreError::AuthError);
    }
    SUBCASE("expired token")
    {
        auto r = ace_oscore_exchange(issued->token, issued->pop_key, f.at_s(), 3600_s, f.rng);
        REQUIRE_FALSE(r);
        CHECK(r.error() == Rejected::Expired);
    }
    SUBCASE("malformed request")
    {
        CHECK(ace_server_accept(Bytes{0xff}, f.at_s(), {2}, 0_s, f.rng).error() == Rejected::Malformed);
    }
}
