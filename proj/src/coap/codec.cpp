/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/coap/codec.hpp"

namespace guardsim::coap {

namespace {

enum Tag : std::uint8_t {
    TagProxyUri = 1,
    TagUriHost = 2,
    TagUriPath = 3,
    TagEcho = 4,
    TagOscore = 5,
};

void put_blob(Bytes& out, ByteView b)
{
    append_be(out, b.size(), 2);
    append(out, b);
}

void put_string(Bytes& out, const std::string& s)
{
    put_blob(out, ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

class Reader {
public:
    explicit Reader(ByteView d) : d_(d) {}

    bool take(std::size_t n, ByteView& out)
    {
        if (pos_ + n > d_.size())
            return false;
        out = d_.subspan(pos_, n);
        pos_ += n;
        return true;
    }
    bool u(int width, std::uint64_t& v)
    {
        ByteView b;
        if (!take(static_cast<std::size_t>(width), b))
            return false;
        v = read_be(b);
        return true;
    }
    bool blob(Bytes& out)
    {
        std::uint64_t n = 0;
        ByteView b;
        if (!u(2, n) || !take(n, b))
            return false;
        out.assign(b.begin(), b.end());
        return true;
    }
    bool string(std::string& out)
    {
        Bytes b;
        if (!blob(b))
            return false;
        out.assign(b.begin(), b.end());
        return true;
    }
    bool done() const { return pos_ == d_.size(); }

private:
    ByteView d_;
    std::size_t pos_ = 0;
};

} // namespace

Bytes encode(const SimMessage& m)
{
    Bytes out;
    append_be(out, m.src.value, 4);
    append_be(out, m.dst.value, 4);
    out.push_back(static_cast<std::uint8_t>(m.type));
    append_be(out, m.mid, 2);
    out.push_back(m.code.cls);
    out.push_back(m.code.detail);
    put_blob(out, m.token);
    if (m.proxy_uri) {
        out.push_back(TagProxyUri);
        put_string(out, *m.proxy_uri);
    }
    if (m.uri_host) {
        out.push_back(TagUriHost);
        put_string(out, *m.uri_host);
    }
    if (m.uri_path) {
        out.push_back(TagUriPath);
        put_string(out, *m.uri_path);
    }
    if (m.echo) {
        out.push_back(TagEcho);
        put_blob(out, *m.echo);
    }
    if (m.oscore) {
        out.push_back(TagOscore);
        put_blob(out, m.oscore->kid);
        out.push_back(m.oscore->piv ? 1 : 0);
        append_be(out, m.oscore->piv.value_or(0), 4);
    }
    out.push_back(0);
    append_be(out, m.payload_len, 4);
    put_blob(out, m.body);
    return out;
}

Expected<SimMessage, DecodeError> decode(ByteView data)
{
    Reader r(data);
    SimMessage m;
    std::uint64_t v = 0;
    auto truncated = unexpected(DecodeError::Truncated);

    if (!r.u(4, v))
        return truncated;
    m.src.value = static_cast<std::uint32_t>(v);
    if (!r.u(4, v))
        return truncated;
    m.dst.value = static_cast<std::uint32_t>(v);
    if (!r.u(1, v))
        return truncated;
    if (v > 3)
        return unexpected(DecodeError::BadField);
    m.type = static_cast<MessageType>(v);
    if (!r.u(2, v))
        return truncated;
    m.mid = static_cast<std::uint16_t>(v);
    if (!r.u(1, v))
        return truncated;
    m.code.cls = static_cast<std::uint8_t>(v);
    if (!r.u(1, v))
        return truncated;
    m.code.detail = static_cast<std::uint8_t>(v);
    if (!r.blob(m.token))
        return truncated;

    for (;;) {
        if (!r.u(1, v))
            return truncated;
        if (v == 0)
            break;
        std::string s;
        switch (v) {
        case TagProxyUri:
            if (!r.string(s))
                return truncated;
            m.proxy_uri = s;
            break;
        case TagUriHost:
            if (!r.string(s))
                return truncated;
            m.uri_host = s;
            break;
        case TagUriPath:
            if (!r.string(s))
                return truncated;
            m.uri_path = s;
            break;
        case TagEcho: {
            Bytes e;
            if (!r.blob(e))
                return truncated;
            m.echo = std::move(e);
            break;
        }
        case TagOscore: {
            OscoreOption o;
            std::uint64_t has = 0, piv = 0;
            if (!r.blob(o.kid) || !r.u(1, has) || !r.u(4, piv))
                return truncated;
            if (has)
                o.piv = static_cast<std::uint32_t>(piv);
            m.oscore = std::move(o);
            break;
        }
        default:
            return unexpected(DecodeError::BadField);
        }
    }
    if (!r.u(4, v))
        return truncated;
    m.payload_len = v;
    if (!r.blob(m.body))
        return truncated;
    if (!r.done() || m.body.size() > m.payload_len)
        return unexpected(DecodeError::BadField);
    return m;
}

} // namespace guardsim::coap
