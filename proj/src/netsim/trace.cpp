/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/netsim/trace.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace guardsim::netsim {

std::string json_quote(std::string_view s)
{
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    return out + "\"";
}

void JsonFields::key(std::string_view k)
{
    if (!body_.empty())
        body_ += ",";
    body_ += json_quote(k);
    body_ += ":";
}

JsonFields& JsonFields::add(std::string_view k, std::string_view value)
{
    key(k);
    body_ += json_quote(value);
    return *this;
}

JsonFields& JsonFields::add(std::string_view k, std::int64_t value)
{
    key(k);
    body_ += std::to_string(value);
    return *this;
}

JsonFields& JsonFields::add(std::string_view k, std::uint64_t value)
{
    key(k);
    body_ += std::to_string(value);
    return *this;
}

JsonFields& JsonFields::add(std::string_view k, double value)
{
    key(k);
    if (!std::isfinite(value)) {
        body_ += "null";
        return *this;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    body_ += buf;
    return *this;
}

JsonFields& JsonFields::add(std::string_view k, bool value)
{
    key(k);
    body_ += value ? "true" : "false";
    return *this;
}

JsonFields& JsonFields::add_raw(std::string_view k, std::string_view json)
{
    key(k);
    body_ += json;
    return *this;
}

std::string TraceEvent::to_json_line() const
{
    std::string s = "{\"t\":" + std::to_string(t.ms());
    s += ",\"kind\":" + json_quote(kind);
    s += ",\"node\":" + json_quote(node);
    s += ",\"detail\":" + detail + "}";
    return s;
}

void Trace::record(SimTime t, std::string kind, std::string node, const JsonFields& detail)
{
    events_.push_back(TraceEvent{t, std::move(kind), std::move(node), detail.str()});
}

void Trace::write_jsonl(std::ostream& out) const
{
    for (const auto& e : events_)
        out << e.to_json_line() << '\n';
}

std::string Trace::to_jsonl() const
{
    std::ostringstream os;
    write_jsonl(os);
    return os.str();
}

std::size_t Trace::count(std::string_view kind) const
{
    std::size_t n = 0;
    for (const auto& e : events_)
        if (e.kind == kind)
            ++n;
    return n;
}

} // namespace guardsim::netsim
