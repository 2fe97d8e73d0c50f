/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/sec/edhoc.hpp"

#include "guardsim/sec/fnv.hpp"

namespace guardsim::sec {

namespace {

constexpr std::uint64_t group_prime = (std::uint64_t{1} << 61) - 1;
constexpr std::uint64_t generator = 37;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b)
{
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % group_prime);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp)
{
    std::uint64_t r = 1;
    base %= group_prime;
    while (exp) {
        if (exp & 1)
            r = mulmod(r, base);
        base = mulmod(base, base);
        exp >>= 1;
    }
    return r;
}

std::uint64_t mac(const Key& master, std::string_view label, std::uint32_t handle)
{
    return Fnv1a64{}.update(master).update(label).update_be(handle, 4).digest();
}

} // namespace

const char* to_string(EdhocError e)
{
    switch (e) {
    case EdhocError::Malformed: return "Malformed";
    case EdhocError::AuthFailed: return "AuthFailed";
    case EdhocError::WrongState: return "WrongState";
    case EdhocError::HandshakeTimeout: return "HandshakeTimeout";
    }
    return "?";
}

EdhocSession::EdhocSession(EdhocRole role, std::uint64_t secret, std::uint8_t c_i)
    : role_(role), ephemeral_secret_(secret), own_public_(powmod(generator, secret)), c_i_(c_i)
{
}

EdhocSession EdhocSession::initiator(Rng& rng)
{
    std::uint64_t secret = 2 + rng.uniform(group_prime - 3);
    auto c_i = static_cast<std::uint8_t>(rng.uniform(256));
    return EdhocSession(EdhocRole::Initiator, secret, c_i);
}

EdhocSession EdhocSession::responder(Rng& rng)
{
    std::uint64_t secret = 2 + rng.uniform(group_prime - 3);
    return EdhocSession(EdhocRole::Responder, secret, 0);
}

void EdhocSession::derive_master()
{
    std::uint64_t shared = powmod(peer_public_, ephemeral_secret_);
    std::uint64_t g_x = role_ == EdhocRole::Initiator ? own_public_ : peer_public_;
    std::uint64_t g_y = role_ == EdhocRole::Initiator ? peer_public_ : own_public_;
    Bytes material;
    append_be(material, shared, 8);
    append_be(material, g_x, 8);
    append_be(material, g_y, 8);
    master_ = fnv_mix_key("edhoc-prk", material);
}

Expected<Bytes, EdhocError> EdhocSession::message1()
{
    if (role_ != EdhocRole::Initiator || step_ != 0)
        return unexpected(EdhocError::WrongState);
    Bytes out;
    out.push_back(c_i_);
    append_be(out, own_public_, 8);
    step_ = 1;
    return out;
}

Expected<Bytes, EdhocError> EdhocSession::handle_message1(ByteView body, std::uint32_t handle)
{
    if (role_ != EdhocRole::Responder || step_ != 0)
        return unexpected(EdhocError::WrongState);
    if (body.size() != 9)
        return unexpected(EdhocError::Malformed);
    c_i_ = body[0];
    peer_public_ = read_be(body.subspan(1, 8));
    if (peer_public_ < 2 || peer_public_ >= group_prime)
        return unexpected(EdhocError::Malformed);
    handle_ = handle;
    derive_master();
    Bytes out;
    append_be(out, handle_, 4);
    append_be(out, own_public_, 8);
    append_be(out, mac(master_, "mac2", handle_), 8);
    step_ = 2;
    return out;
}

Expected<Bytes, EdhocError> EdhocSession::handle_message2(ByteView body)
{
    if (role_ != EdhocRole::Initiator || step_ != 1)
        return unexpected(EdhocError::WrongState);
    if (body.size() != 20)
        return unexpected(EdhocError::Malformed);
    handle_ = static_cast<std::uint32_t>(read_be(body.subspan(0, 4)));
    peer_public_ = read_be(body.subspan(4, 8));
    if (peer_public_ < 2 || peer_public_ >= group_prime)
        return unexpected(EdhocError::Malformed);
    derive_master();
    if (read_be(body.subspan(12, 8)) != mac(master_, "mac2", handle_))
        return unexpected(EdhocError::AuthFailed);
    Bytes out;
    append_be(out, handle_, 4);
    append_be(out, mac(master_, "mac3", handle_), 8);
    step_ = 2;
    return out;
}

std::uint32_t EdhocSession::handle_of_message3(ByteView body)
{
    if (body.size() < 4)
        return 0;
    return static_cast<std::uint32_t>(read_be(body.subspan(0, 4)));
}

Expected<Bytes, EdhocError> EdhocSession::handle_message3(ByteView body, Bytes c_r)
{
    if (role_ != EdhocRole::Responder || step_ != 2)
        return unexpected(EdhocError::WrongState);
    if (body.size() != 12 || handle_of_message3(body) != handle_)
        return unexpected(EdhocError::Malformed);
    if (read_be(body.subspan(4, 8)) != mac(master_, "mac3", handle_))
        return unexpected(EdhocError::AuthFailed);
    // Responder sends with the initiator's id and receives on C_R.
    context_ = SecurityContext::derive(master_, Bytes{c_i_}, c_r);
    step_ = 3;
    return c_r;
}

Expected<Bytes, EdhocError> EdhocSession::handle_completion(ByteView body)
{
    if (role_ != EdhocRole::Initiator || step_ != 2)
        return unexpected(EdhocError::WrongState);
    if (body.empty() || body.size() > 2)
        return unexpected(EdhocError::Malformed);
    Bytes c_r(body.begin(), body.end());
    context_ = SecurityContext::derive(master_, c_r, Bytes{c_i_});
    step_ = 3;
    return c_r;
}

Expected<std::pair<SecurityContext, SecurityContext>, EdhocError> edhoc_run(Rng& rng, Bytes c_r,
                                                                           netsim::EnergyBudget* budget)
{
    auto init = EdhocSession::initiator(rng);
    auto resp = EdhocSession::responder(rng);
    double fraction = budget ? budget->costs().edhoc_abort_fraction : 0.0;

    auto m1 = init.message1();
    if (!m1)
        return unexpected(m1.error());
    auto m2 = resp.handle_message1(*m1, static_cast<std::uint32_t>(rng.next_u64()));
    if (!m2)
        return unexpected(m2.error());
    if (budget)
        budget->drain(netsim::EnergyEvent::edhoc(fraction));
    auto m3 = init.handle_message2(*m2);
    if (!m3)
        return unexpected(m3.error());
    auto done = resp.handle_message3(*m3, std::move(c_r));
    if (!done)
        return unexpected(done.error());
    if (budget)
        budget->drain(netsim::EnergyEvent::edhoc(1.0 - fraction));
    auto fin = init.handle_completion(*done);
    if (!fin)
        return unexpected(fin.error());
    return std::make_pair(*init.derived_context(), *resp.derived_context());
}

} // namespace guardsim::sec
