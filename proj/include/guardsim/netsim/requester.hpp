/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>

#include "guardsim/coap/tx_state.hpp"
#include "guardsim/netsim/world.hpp"

namespace guardsim::netsim {

/// Result of one confirmable exchange.
struct ExchangeOutcome {
    std::optional<coap::SimMessage> response;  ///< empty on timeout
    bool response_attack = false;              ///< the response frame was attacker-made or modified
    std::uint32_t retransmissions = 0;
    SimTime started;
    SimTime finished;

    bool timed_out() const { return !response.has_value(); }
    SimTime latency() const { return finished - started; }
};

/// Client side of CoAP confirmable exchanges for one node: assigns mids and
/// tokens, retransmits with exponential back-off and matches responses by
/// token.
class Requester {
public:
    using Callback = std::function<void(World&, const ExchangeOutcome&)>;
    using Sender = std::function<void(World&, Frame)>;

    Requester(Address self, coap::BackoffParams backoff, std::uint64_t seed, std::size_t token_len = 2);

    /// Sends `msg` (src, mid and token are filled in) and returns its token.
    Bytes request(World& w, coap::SimMessage msg, bool attack, Callback done, Sender send = {});

    /// Routes a received frame. Returns true if it answered an outstanding
    /// exchange (the callback has run).
    bool on_response(World& w, const Frame& frame);

    /// Replaces the message of an outstanding exchange and sends it at once,
    /// restarting the back-off (e.g. after an Echo challenge). Counts as a
    /// retransmission.
    bool resend(World& w, const Bytes& token, coap::SimMessage replacement);

    /// Forgets an exchange without running its callback.
    void cancel(const Bytes& token) { pending_.erase(token); }

    bool pending(const Bytes& token) const { return pending_.count(token) > 0; }
    const coap::SimMessage* message(const Bytes& token) const;
    std::size_t outstanding() const { return pending_.size(); }

    std::uint16_t next_mid() { return mid_++; }
    Bytes next_token();

private:
    struct Exchange {
        coap::SimMessage msg;
        coap::TxState tx;
        bool attack = false;
        Callback done;
        Sender send;
        std::uint32_t retransmissions = 0;
        SimTime started;
        std::uint64_t generation = 0;
    };

    void transmit(World& w, Exchange& ex);
    void arm(World& w, const Bytes& token, Exchange& ex);
    void on_timer(World& w, const Bytes& token, std::uint64_t generation);

    Address self_;
    coap::BackoffParams backoff_;
    std::size_t token_len_;
    std::uint16_t mid_;
    std::uint64_t token_counter_;
    std::uint64_t generation_ = 0;
    std::map<Bytes, Exchange> pending_;
};

} // namespace guardsim::netsim
