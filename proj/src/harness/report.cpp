/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/harness/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace guardsim::harness {

using nlohmann::json;

const char* to_string(Behavior b)
{
    switch (b) {
    case Behavior::Good: return "good";
    case Behavior::Throttled: return "throttled";
    case Behavior::Losses: return "losses";
    }
    return "?";
}

std::optional<Behavior> behavior_from(const std::string& s)
{
    for (auto b : {Behavior::Good, Behavior::Throttled, Behavior::Losses})
        if (s == to_string(b))
            return b;
    return std::nullopt;
}

const char* to_string(ResourceLabel r)
{
    switch (r) {
    case ResourceLabel::High: return "high";
    case ResourceLabel::Low: return "low";
    case ResourceLabel::LowOrNone: return "low or none";
    }
    return "?";
}

std::optional<ResourceLabel> resource_label_from(const std::string& s)
{
    for (auto r : {ResourceLabel::High, ResourceLabel::Low, ResourceLabel::LowOrNone})
        if (s == to_string(r))
            return r;
    return std::nullopt;
}

std::string label_of(const std::optional<Behavior>& b) { return b ? to_string(*b) : "n/a"; }

PhaseMetrics collect_phase(const std::vector<actors::Interaction>& interactions, actors::Phase phase, SimTime from,
                           SimTime to)
{
    PhaseMetrics m;
    for (const auto& i : interactions) {
        if (i.phase != phase || i.started < from || i.started >= to)
            continue;
        ++m.n_started;
        m.n_retransmissions += i.retransmissions;
        switch (i.result) {
        case actors::InteractionResult::Completed:
            ++m.n_completed;
            if (i.retransmissions > 0)
                ++m.n_completed_retransmitted;
            m.completion_latencies_s.push_back(i.latency().seconds());
            break;
        case actors::InteractionResult::TimedOut: ++m.n_timed_out; break;
        case actors::InteractionResult::Failed: ++m.n_failed; break;
        }
    }
    return m;
}

Expected<Behavior, NoInteractions> classify_behavior(const PhaseMetrics& m, const coap::BackoffParams& backoff,
                                                     const Classification& t)
{
    if (m.n_started == 0)
        return unexpected(NoInteractions{});
    const double lost = static_cast<double>(m.n_started - m.n_completed) / static_cast<double>(m.n_started);
    if (lost > t.loss_fraction)
        return Behavior::Losses;
    if (m.n_completed > 0) {
        const double retx =
            static_cast<double>(m.n_completed_retransmitted) / static_cast<double>(m.n_completed);
        if (retx > t.retransmit_fraction)
            return Behavior::Throttled;
        std::vector<double> l = m.completion_latencies_s;
        std::sort(l.begin(), l.end());
        const std::size_t n = l.size();
        const double median = n % 2 ? l[n / 2] : (l[n / 2 - 1] + l[n / 2]) / 2.0;
        if (median > backoff.base_timeout.seconds())
            return Behavior::Throttled;
    }
    return Behavior::Good;
}

EnergySummary energy_report(const netsim::Trace& trace, double edhoc_cost)
{
    EnergySummary s;
    for (const auto& e : trace.events()) {
        if (e.kind != "energy")
            continue;
        const auto d = json::parse(e.detail);
        const double amount = d.at("amount").get<double>();
        s.total_drained += amount;
        if (d.at("attack").get<bool>())
            s.attack_attributable += amount;
    }
    s.projected_exchanges_lost = edhoc_cost > 0 ? s.attack_attributable / edhoc_cost : 0.0;
    return s;
}

ResourceLabel resource_label(double attack_attributable, SimTime attack_active, double budget, double high_per_day)
{
    if (attack_attributable <= 0)
        return ResourceLabel::LowOrNone;
    if (attack_active.ms() <= 0 || budget <= 0)
        return ResourceLabel::High;
    const double per_day = attack_attributable / attack_active.seconds() * 86400.0;
    return per_day > high_per_day * budget ? ResourceLabel::High : ResourceLabel::Low;
}

namespace {

json phase_json(const PhaseMetrics& m)
{
    return {{"n_started", m.n_started},
            {"n_completed", m.n_completed},
            {"n_timed_out", m.n_timed_out},
            {"n_failed", m.n_failed},
            {"n_retransmissions", m.n_retransmissions},
            {"n_completed_retransmitted", m.n_completed_retransmitted},
            {"completion_latencies_s", m.completion_latencies_s}};
}

PhaseMetrics phase_from(const json& j)
{
    PhaseMetrics m;
    m.n_started = j.at("n_started").get<std::uint64_t>();
    m.n_completed = j.at("n_completed").get<std::uint64_t>();
    m.n_timed_out = j.at("n_timed_out").get<std::uint64_t>();
    m.n_failed = j.at("n_failed").get<std::uint64_t>();
    m.n_retransmissions = j.at("n_retransmissions").get<std::uint64_t>();
    m.n_completed_retransmitted = j.at("n_completed_retransmitted").get<std::uint64_t>();
    m.completion_latencies_s = j.at("completion_latencies_s").get<std::vector<double>>();
    return m;
}

json behavior_json(const std::optional<Behavior>& b) { return b ? json(to_string(*b)) : json(nullptr); }

std::optional<Behavior> behavior_of(const json& j)
{
    if (j.is_null())
        return std::nullopt;
    auto b = behavior_from(j.get<std::string>());
    if (!b)
        throw std::runtime_error("unknown behavior " + j.dump());
    return b;
}

} // namespace

json to_json(const ScenarioReport& r)
{
    json j;
    j["name"] = r.name;
    j["scenario"] = to_string(r.scenario);
    j["attack"] = r.attack ? json(actors::to_string(*r.attack)) : json(nullptr);
    j["seed"] = r.seed;
    j["duration_s"] = r.duration_s;
    j["setup"] = phase_json(r.setup);
    j["steady"] = phase_json(r.steady);
    j["energy"] = {{"total_drained", r.energy.total_drained},
                   {"attack_attributable", r.energy.attack_attributable},
                   {"projected_exchanges_lost", r.energy.projected_exchanges_lost}};
    j["setup_behavior"] = behavior_json(r.setup_behavior);
    j["steady_behavior"] = behavior_json(r.steady_behavior);
    j["resource_label"] = to_string(r.resource);
    j["rekeys"] = r.rekeys;
    j["tunnel_renegotiations"] = r.tunnel_renegotiations;
    j["events"] = r.events;
    j["error"] = r.error ? json(*r.error) : json(nullptr);
    return j;
}

Expected<ScenarioReport, std::string> report_from_json(const json& j)
{
    try {
        ScenarioReport r;
        r.name = j.at("name").get<std::string>();
        auto s = scenario_from(j.at("scenario").get<std::string>());
        if (!s)
            return unexpected(std::string("unknown scenario"));
        r.scenario = *s;
        if (!j.at("attack").is_null()) {
            auto k = actors::attack_kind_from(j.at("attack").get<std::string>());
            if (!k)
                return unexpected(std::string("unknown attack"));
            r.attack = k;
        }
        r.seed = j.at("seed").get<std::uint64_t>();
        r.duration_s = j.at("duration_s").get<double>();
        r.setup = phase_from(j.at("setup"));
        r.steady = phase_from(j.at("steady"));
        const auto& e = j.at("energy");
        r.energy.total_drained = e.at("total_drained").get<double>();
        r.energy.attack_attributable = e.at("attack_attributable").get<double>();
        r.energy.projected_exchanges_lost = e.at("projected_exchanges_lost").get<double>();
        r.setup_behavior = behavior_of(j.at("setup_behavior"));
        r.steady_behavior = behavior_of(j.at("steady_behavior"));
        auto res = resource_label_from(j.at("resource_label").get<std::string>());
        if (!res)
            return unexpected(std::string("unknown resource label"));
        r.resource = *res;
        r.rekeys = j.at("rekeys").get<std::uint64_t>();
        r.tunnel_renegotiations = j.at("tunnel_renegotiations").get<std::uint64_t>();
        r.events = j.at("events").get<std::uint64_t>();
        if (!j.at("error").is_null())
            r.error = j.at("error").get<std::string>();
        return r;
    } catch (const std::exception& ex) {
        return unexpected(std::string(ex.what()));
    }
}

namespace {

std::string fmt(double v, const char* f = "%.6g")
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double median_of(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

} // namespace

namespace {
std::string csv_quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}
} // namespace

std::string to_csv(const std::vector<ScenarioReport>& reports)
{
    std::ostringstream o;
    o << "name,scenario,attack,seed,phase,n_started,n_completed,n_timed_out,n_failed,n_retransmissions,"
         "n_completed_retransmitted,median_latency_s,behavior,energy_total,energy_attack,resource_label,rekeys,"
         "tunnel_renegotiations,error\n";
    for (const auto& r : reports) {
        for (int p = 0; p < 2; ++p) {
            const PhaseMetrics& m = p == 0 ? r.setup : r.steady;
            o << r.name << ',' << to_string(r.scenario) << ',' << (r.attack ? actors::to_string(*r.attack) : "none")
              << ',' << r.seed << ',' << (p == 0 ? "setup" : "steady") << ',' << m.n_started << ','
              << m.n_completed << ',' << m.n_timed_out << ',' << m.n_failed << ',' << m.n_retransmissions << ','
              << m.n_completed_retransmitted << ',' << fmt(median_of(m.completion_latencies_s)) << ','
              << label_of(p == 0 ? r.setup_behavior : r.steady_behavior) << ','
              << fmt(r.energy.total_drained, "%.17g") << ',' << fmt(r.energy.attack_attributable, "%.17g") << ','
              << to_string(r.resource) << ',' << r.rekeys << ',' << r.tunnel_renegotiations << ','
              << (r.error ? csv_quote(*r.error) : "") << '\n';
        }
    }
    return o.str();
}

std::string to_markdown(const ScenarioReport& r)
{
    std::ostringstream o;
    o << "## " << r.name << "\n\n";
    if (r.error) {
        o << "Errored: " << *r.error << "\n";
        return o.str();
    }
    o << "| | setup | steady |\n|---|---|---|\n";
    o << "| behavior | " << label_of(r.setup_behavior) << " | " << label_of(r.steady_behavior) << " |\n";
    o << "| started | " << r.setup.n_started << " | " << r.steady.n_started << " |\n";
    o << "| completed | " << r.setup.n_completed << " | " << r.steady.n_completed << " |\n";
    o << "| timed out | " << r.setup.n_timed_out << " | " << r.steady.n_timed_out << " |\n";
    o << "| failed | " << r.setup.n_failed << " | " << r.steady.n_failed << " |\n";
    o << "| retransmissions | " << r.setup.n_retransmissions << " | " << r.steady.n_retransmissions << " |\n";
    o << "| median latency (s) | " << fmt(median_of(r.setup.completion_latencies_s)) << " | "
      << fmt(median_of(r.steady.completion_latencies_s)) << " |\n\n";
    o << "Device energy drained: " << fmt(r.energy.total_drained) << " (attack: " << fmt(r.energy.attack_attributable)
      << ", about " << fmt(r.energy.projected_exchanges_lost, "%.0f") << " key exchanges). Resource label: "
      << to_string(r.resource) << ".\n";
    o << "Client rekeys: " << r.rekeys << ". Tunnel renegotiations: " << r.tunnel_renegotiations << ".\n";
    return o.str();
}

} // namespace guardsim::harness
