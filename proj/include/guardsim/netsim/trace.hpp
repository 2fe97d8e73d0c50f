/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "guardsim/core/time.hpp"

namespace guardsim::netsim {

/// Builds one JSON object incrementally. Keys keep insertion order so the
/// serialized trace is byte-stable.
class JsonFields {
public:
    JsonFields& add(std::string_view key, std::string_view value);
    JsonFields& add(std::string_view key, const char* value) { return add(key, std::string_view(value)); }
    JsonFields& add(std::string_view key, const std::string& value) { return add(key, std::string_view(value)); }
    JsonFields& add(std::string_view key, std::int64_t value);
    JsonFields& add(std::string_view key, std::uint64_t value);
    JsonFields& add(std::string_view key, int value) { return add(key, static_cast<std::int64_t>(value)); }
    JsonFields& add(std::string_view key, unsigned value) { return add(key, static_cast<std::uint64_t>(value)); }
    JsonFields& add(std::string_view key, double value);
    JsonFields& add(std::string_view key, bool value);
    JsonFields& add_raw(std::string_view key, std::string_view json);

    std::string str() const { return "{" + body_ + "}"; }

private:
    void key(std::string_view k);
    std::string body_;
};

std::string json_quote(std::string_view s);

struct TraceEvent {
    SimTime t;
    std::string kind;
    std::string node;
    std::string detail;  ///< serialized JSON object

    std::string to_json_line() const;
};

/// Append-only event log. Per-frame events are recorded only when verbose;
/// protocol and energy events are always kept since reports derive from them.
class Trace {
public:
    explicit Trace(bool verbose = false) : verbose_(verbose) {}

    bool verbose() const { return verbose_; }
    void set_verbose(bool v) { verbose_ = v; }

    void record(SimTime t, std::string kind, std::string node, const JsonFields& detail);

    const std::vector<TraceEvent>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }
    bool empty() const { return events_.empty(); }

    void write_jsonl(std::ostream& out) const;
    std::string to_jsonl() const;

    std::size_t count(std::string_view kind) const;

private:
    bool verbose_;
    std::vector<TraceEvent> events_;
};

} // namespace guardsim::netsim
