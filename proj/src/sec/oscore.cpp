/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/sec/oscore.hpp"

#include "guardsim/coap/codec.hpp"
#include "guardsim/sec/fnv.hpp"

namespace guardsim::sec {

const char* to_string(OscoreError e)
{
    switch (e) {
    case OscoreError::SeqExhausted: return "SeqExhausted";
    case OscoreError::ReplayError: return "ReplayError";
    case OscoreError::AuthError: return "AuthError";
    case OscoreError::UnknownKid: return "UnknownKid";
    case OscoreError::NotProtected: return "NotProtected";
    case OscoreError::Malformed: return "Malformed";
    }
    return "?";
}

namespace {

Key direction_key(const Key& master, const Bytes& id)
{
    Bytes material(master.begin(), master.end());
    material.push_back(static_cast<std::uint8_t>(id.size()));
    append(material, id);
    return fnv_mix_key("oscore-key", material);
}

Bytes nonce_for(const Bytes& kid, std::uint32_t piv)
{
    Bytes n;
    n.push_back(static_cast<std::uint8_t>(kid.size()));
    append(n, kid);
    append_be(n, piv, 5);
    return n;
}

Bytes aad_for(std::string_view label, const RequestBinding& b)
{
    Bytes a(label.begin(), label.end());
    a.push_back(static_cast<std::uint8_t>(b.kid.size()));
    append(a, b.kid);
    append_be(a, b.piv, 4);
    return a;
}

/// The sealed part of a message: code, Uri-Path and payload.
Bytes inner_plaintext(const coap::SimMessage& inner)
{
    coap::SimMessage sealed;
    sealed.code = inner.code;
    sealed.uri_path = inner.uri_path;
    sealed.payload_len = inner.payload_len;
    sealed.body = inner.body;
    return coap::encode(sealed);
}

std::size_t modeled_plaintext_len(const coap::SimMessage& inner)
{
    std::size_t n = 2 + inner.payload_len;
    if (inner.uri_path)
        n += 2 + inner.uri_path->size();
    return n;
}

coap::SimMessage outer_of(const coap::SimMessage& inner, coap::Code outer_code)
{
    coap::SimMessage outer;
    outer.src = inner.src;
    outer.dst = inner.dst;
    outer.type = inner.type;
    outer.mid = inner.mid;
    outer.token = inner.token;
    outer.code = outer_code;
    outer.proxy_uri = inner.proxy_uri;
    outer.uri_host = inner.uri_host;
    outer.echo = inner.echo;
    return outer;
}

Expected<coap::SimMessage, OscoreError> rebuild(const coap::SimMessage& outer, const Bytes& plaintext)
{
    auto sealed = coap::decode(plaintext);
    if (!sealed)
        return unexpected(OscoreError::Malformed);
    coap::SimMessage inner = outer;
    inner.oscore.reset();
    inner.code = sealed->code;
    inner.uri_path = sealed->uri_path;
    inner.payload_len = sealed->payload_len;
    inner.body = sealed->body;
    return inner;
}

} // namespace

SecurityContext SecurityContext::derive(const Key& master, Bytes sender_id, Bytes recipient_id, unsigned window)
{
    SecurityContext c;
    c.master_key = master;
    c.sender_id = std::move(sender_id);
    c.recipient_id = std::move(recipient_id);
    c.replay_window = ReplayWindow(window);
    c.sender_key = direction_key(master, c.sender_id);
    c.recipient_key = direction_key(master, c.recipient_id);
    return c;
}

Expected<coap::SimMessage, OscoreError> oscore_protect(SecurityContext& ctx, const coap::SimMessage& inner,
                                                       const Aead& aead)
{
    if (ctx.sender_seq >= max_sequence_number)
        return unexpected(OscoreError::SeqExhausted);
    RequestBinding b{ctx.sender_id, ctx.sender_seq++};

    coap::SimMessage outer = outer_of(inner, coap::codes::Post);
    outer.oscore = coap::OscoreOption{b.kid, b.piv};
    Bytes ct = aead.seal(ctx.sender_key, nonce_for(b.kid, b.piv), aad_for("req", b), inner_plaintext(inner));
    outer.set_body(std::move(ct), modeled_plaintext_len(inner) + aead.tag_size());
    return outer;
}

coap::SimMessage oscore_protect_response(const SecurityContext& ctx, const coap::SimMessage& inner,
                                         const RequestBinding& request, const Aead& aead)
{
    coap::SimMessage outer = outer_of(inner, coap::codes::Changed);
    outer.oscore = coap::OscoreOption{{}, std::nullopt};
    Bytes ct = aead.seal(ctx.sender_key, nonce_for(request.kid, request.piv), aad_for("rsp", request),
                         inner_plaintext(inner));
    outer.set_body(std::move(ct), modeled_plaintext_len(inner) + aead.tag_size());
    return outer;
}

RequestBinding binding_of(const coap::SimMessage& m)
{
    RequestBinding b;
    if (m.oscore) {
        b.kid = m.oscore->kid;
        b.piv = m.oscore->piv.value_or(0);
    }
    return b;
}

Expected<UnprotectedRequest, OscoreError> oscore_unprotect(SecurityContext& ctx, const coap::SimMessage& msg,
                                                           const Aead& aead)
{
    if (!msg.oscore || !msg.oscore->piv)
        return unexpected(OscoreError::NotProtected);
    if (msg.oscore->kid != ctx.recipient_id)
        return unexpected(OscoreError::UnknownKid);
    RequestBinding b = binding_of(msg);
    if (!ctx.replay_window.would_accept(b.piv))
        return unexpected(OscoreError::ReplayError);
    auto pt = aead.open(ctx.recipient_key, nonce_for(b.kid, b.piv), aad_for("req", b), msg.body);
    if (!pt)
        return unexpected(OscoreError::AuthError);
    auto inner = rebuild(msg, *pt);
    if (!inner)
        return unexpected(inner.error());
    ctx.replay_window.mark(b.piv);
    return UnprotectedRequest{std::move(inner).value(), std::move(b)};
}

Expected<coap::SimMessage, OscoreError> oscore_unprotect_response(const SecurityContext& ctx,
                                                                  const coap::SimMessage& msg,
                                                                  const RequestBinding& request, const Aead& aead)
{
    if (!msg.oscore)
        return unexpected(OscoreError::NotProtected);
    auto pt = aead.open(ctx.recipient_key, nonce_for(request.kid, request.piv), aad_for("rsp", request), msg.body);
    if (!pt)
        return unexpected(OscoreError::AuthError);
    return rebuild(msg, *pt);
}

} // namespace guardsim::sec
