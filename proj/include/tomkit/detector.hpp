#pragma once

#include "tomkit/command.hpp"
#include "tomkit/error.hpp"
#include "tomkit/message.hpp"
#include "tomkit/timeout.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

/// Eventually-perfect failure detector expressed with cyclic time-outs.
///
/// Both periodic tasks become time-outs whose alarms post a message to the
/// owning process: one heartbeat time-out (REPEAT_TASK1) and one watch per
/// peer (REPEAT_TASK2, class id = peer). Heartbeats from q renew q's watch,
/// so a REPEAT_TASK2 for q means q stayed silent for a full delta[q]. A late
/// heartbeat from a suspected q restores trust and widens delta[q] by one.
namespace tomkit::detector {

using ProcessId = NodeId;

inline constexpr std::string_view i_am_alive = "I_AM_ALIVE";
inline constexpr std::string_view repeat_task1 = "REPEAT_TASK1";
inline constexpr std::string_view repeat_task2 = "REPEAT_TASK2";

enum class Output : std::uint8_t { trust, suspect };

enum class MessageType { i_am_alive, repeat_task1, repeat_task2 };

struct DetectorMessage {
    MessageType type;
    ProcessId sender = 0;
    ProcessId id = 0; // REPEAT_TASK2: the process being checked
};

inline std::optional<DetectorMessage> parse(const Message& m)
{
    if (m.type == i_am_alive)
        return DetectorMessage{MessageType::i_am_alive, m.from.node, m.from.node};
    if (m.type == repeat_task1)
        return DetectorMessage{MessageType::repeat_task1, m.from.node, 0};
    if (m.type == repeat_task2)
        return DetectorMessage{MessageType::repeat_task2, m.from.node, m.class_id};
    return std::nullopt;
}

struct Config {
    ProcessId self = 0;
    std::size_t nprocs = 0;
    Tick default_timeout = 100;
    // 0 means default_timeout / 2
    Tick heartbeat_period = 0;
};

struct DetectorState {
    ProcessId self = 0;
    std::size_t nprocs = 0;
    Tick default_timeout = 0;
    std::vector<Output> output;
    std::vector<Tick> delta;
    Timeout t_task1;
    std::vector<Timeout> t_task2; // index q; the entry for self is never inserted
};

struct TransitionRecord {
    ProcessId q = 0;
    Output from = Output::trust;
    Output to = Output::trust;
    Tick delta = 0;
};

struct Step {
    DetectorState state;
    std::vector<Message> broadcasts;
    std::vector<TomCommand> tom;
    std::vector<TransitionRecord> transitions;
};

struct Init {
    DetectorState state;
    std::vector<TomCommand> tom;
};

inline constexpr std::string_view to_string(Output o) { return o == Output::trust ? "trust" : "suspect"; }

inline Init initial_state(const Config& cfg)
{
    if (cfg.nprocs < 2)
        throw TomError(Errc::no_peers, "a detector needs at least two processes");
    if (cfg.self >= cfg.nprocs)
        throw TomError(Errc::unknown_sender, "self outside the process set");
    if (cfg.default_timeout < 1)
        throw TomError(Errc::zero_deadline, "default timeout");

    const Endpoint me{cfg.self, Port::main};
    const Tick period = cfg.heartbeat_period ? cfg.heartbeat_period : std::max<Tick>(1, cfg.default_timeout / 2);

    Init out;
    auto& s = out.state;
    s.self = cfg.self;
    s.nprocs = cfg.nprocs;
    s.default_timeout = cfg.default_timeout;
    s.output.assign(cfg.nprocs, Output::trust);
    s.delta.assign(cfg.nprocs, cfg.default_timeout);

    s.t_task1 = declare({cfg.self, 0}, Cyclic::yes, Enabled::yes, period,
                        ActionDescriptor{std::string(repeat_task1), me, false});
    out.tom.push_back(TomCommand::insert(s.t_task1));

    s.t_task2.resize(cfg.nprocs);
    for (ProcessId q = 0; q < cfg.nprocs; ++q) {
        if (q == cfg.self)
            continue;
        s.t_task2[q] = declare({q, 0}, Cyclic::yes, Enabled::yes, s.delta[q],
                               ActionDescriptor{std::string(repeat_task2), me, false});
        out.tom.push_back(TomCommand::insert(s.t_task2[q]));
    }
    return out;
}

/// Builds the state and submits its time-outs to `tom`.
inline DetectorState detector_init(const Config& cfg, TomHandle& tom)
{
    auto init = initial_state(cfg);
    submit_all(tom, init.tom);
    return std::move(init.state);
}

/// Pure transition: state and message in, next state and effects out.
inline Step detector_step(const DetectorState& s, const DetectorMessage& m)
{
    Step out{s, {}, {}, {}};
    auto& n = out.state;

    switch (m.type) {
    case MessageType::repeat_task1: {
        Message hb;
        hb.type = std::string(i_am_alive);
        hb.from = Endpoint{s.self, Port::main};
        out.broadcasts.push_back(std::move(hb));
        break;
    }
    case MessageType::repeat_task2: {
        const ProcessId q = m.id;
        if (q >= s.nprocs)
            throw TomError(Errc::unknown_sender, "REPEAT_TASK2 for " + std::to_string(q));
        if (q != s.self && n.output[q] == Output::trust) {
            n.output[q] = Output::suspect;
            out.transitions.push_back({q, Output::trust, Output::suspect, n.delta[q]});
        }
        break;
    }
    case MessageType::i_am_alive: {
        const ProcessId q = m.sender;
        if (q >= s.nprocs)
            throw TomError(Errc::unknown_sender, "heartbeat from " + std::to_string(q));
        if (q == s.self)
            break;
        if (n.output[q] == Output::suspect) {
            n.output[q] = Output::trust;
            n.delta[q] += 1;
            set_deadline(n.t_task2[q], n.delta[q]);
            out.transitions.push_back({q, Output::suspect, Output::trust, n.delta[q]});
        }
        out.tom.push_back(TomCommand::renew(n.t_task2[q]));
        break;
    }
    }
    return out;
}

inline std::vector<ProcessId> suspects(const DetectorState& s)
{
    std::vector<ProcessId> out;
    for (ProcessId q = 0; q < s.output.size(); ++q)
        if (s.output[q] == Output::suspect)
            out.push_back(q);
    return out;
}

} // namespace tomkit::detector
