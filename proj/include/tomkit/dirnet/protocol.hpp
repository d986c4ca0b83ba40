#pragma once

#include "tomkit/command.hpp"
#include "tomkit/error.hpp"
#include "tomkit/message.hpp"
#include "tomkit/timeout.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tomkit::dirnet {

enum class NodeRole : std::uint8_t { manager, backup, agent };

inline constexpr std::string_view to_string(NodeRole r)
{
    switch (r) {
    case NodeRole::manager: return "manager";
    case NodeRole::backup:  return "backup";
    case NodeRole::agent:   return "agent";
    }
    return "?";
}

enum class Suspicion : std::uint8_t { normal, suspect };

enum class MsgType : std::uint8_t {
    ia_set_alarm,
    ia_clr_alarm,
    teif,
    mia,
    taia,
    mia_a_alarm,
    taia_a_alarm,
    teif_a_alarm,
    taia_b_alarm,
    mia_b_alarm,
    teif_b_alarm,
    wakeup,
    inject_fault_timeout,
    node_crashed,
};

inline constexpr std::array<std::pair<MsgType, std::string_view>, 14> msg_names{{
    {MsgType::ia_set_alarm, "m_IA_SET_ALARM"},
    {MsgType::ia_clr_alarm, "m_IA_CLR_ALARM"},
    {MsgType::teif, "m_TEIF"},
    {MsgType::mia, "m_MIA"},
    {MsgType::taia, "m_TAIA"},
    {MsgType::mia_a_alarm, "m_MIA_A_ALARM"},
    {MsgType::taia_a_alarm, "m_TAIA_A_ALARM"},
    {MsgType::teif_a_alarm, "m_TEIF_A_ALARM"},
    {MsgType::taia_b_alarm, "m_TAIA_B_ALARM"},
    {MsgType::mia_b_alarm, "m_MIA_B_ALARM"},
    {MsgType::teif_b_alarm, "m_TEIF_B_ALARM"},
    {MsgType::wakeup, "WAKEUP"},
    {MsgType::inject_fault_timeout, "INJECT_FAULT_TIMEOUT"},
    {MsgType::node_crashed, "NODE_CRASHED"},
}};

inline constexpr std::string_view to_string(MsgType t)
{
    for (const auto& [k, v] : msg_names)
        if (k == t)
            return v;
    return "?";
}

inline std::optional<MsgType> msg_type_from(std::string_view s)
{
    for (const auto& [k, v] : msg_names)
        if (v == s)
            return k;
    return std::nullopt;
}

/// `subject` is the node a message is about (the i, j or mid qualifier). On
/// the wire it travels in the instance id, which is also where per-node
/// time-outs put it when their alarm fires.
struct DirnetMessage {
    MsgType type;
    NodeId sender = 0;
    NodeId subject = 0;
};

inline std::optional<DirnetMessage> decode(const Message& m)
{
    auto t = msg_type_from(m.type);
    if (!t)
        return std::nullopt;
    return DirnetMessage{*t, m.from.node, m.instance_id};
}

inline Message encode(MsgType t, Endpoint from, Endpoint to, NodeId subject)
{
    Message m;
    m.type = std::string(to_string(t));
    m.from = from;
    m.to = to;
    m.instance_id = subject;
    return m;
}

/// Time-out classes; the instance id distinguishes the per-node members.
enum class TimerClass : std::uint32_t {
    ia_set = 1,
    ia_clr,
    mia_a,
    taia_a,
    teif_a,
    taia_b,
    mia_b,
    teif_b,
    inject_fault,
};

constexpr TimeoutId timer_id(TimerClass c, std::uint32_t instance = 0)
{
    return TimeoutId{static_cast<std::uint32_t>(c), instance};
}

/// Deadlines in ticks. Watch windows are kept above twice the matching
/// heartbeat period.
struct Deadlines {
    Tick ia_set = 50;
    Tick ia_clr = 120;
    Tick mia_a = 100;
    Tick taia_a = 250;
    Tick teif_a = 300;
    Tick taia_b = 100;
    Tick mia_b = 250;
    Tick teif_b = 300;
};

namespace timers {

inline Timeout make(TimerClass c, std::uint32_t instance, Cyclic cyc, Tick d, MsgType msg, Endpoint to,
                    bool carries_instance)
{
    return declare(timer_id(c, instance), cyc, Enabled::yes, d,
                   ActionDescriptor{std::string(to_string(msg)), to, carries_instance});
}

inline Timeout ia_set(NodeId n, const Deadlines& d)
{
    return make(TimerClass::ia_set, 0, Cyclic::yes, d.ia_set, MsgType::ia_set_alarm, {n, Port::main}, false);
}
inline Timeout ia_clr(NodeId n, const Deadlines& d)
{
    return make(TimerClass::ia_clr, 0, Cyclic::yes, d.ia_clr, MsgType::ia_clr_alarm, {n, Port::iat}, false);
}
inline Timeout mia_a(NodeId n, const Deadlines& d)
{
    return make(TimerClass::mia_a, 0, Cyclic::yes, d.mia_a, MsgType::mia_a_alarm, {n, Port::main}, false);
}
inline Timeout taia_a(NodeId n, NodeId i, const Deadlines& d)
{
    return make(TimerClass::taia_a, i, Cyclic::yes, d.taia_a, MsgType::taia_a_alarm, {n, Port::main}, true);
}
inline Timeout teif_a(NodeId n, NodeId i, const Deadlines& d)
{
    return make(TimerClass::teif_a, i, Cyclic::no, d.teif_a, MsgType::teif_a_alarm, {n, Port::main}, true);
}
inline Timeout taia_b(NodeId n, const Deadlines& d)
{
    return make(TimerClass::taia_b, 0, Cyclic::yes, d.taia_b, MsgType::taia_b_alarm, {n, Port::main}, false);
}
inline Timeout mia_b(NodeId n, const Deadlines& d)
{
    return make(TimerClass::mia_b, 0, Cyclic::yes, d.mia_b, MsgType::mia_b_alarm, {n, Port::main}, false);
}
inline Timeout teif_b(NodeId n, const Deadlines& d)
{
    return make(TimerClass::teif_b, 0, Cyclic::no, d.teif_b, MsgType::teif_b_alarm, {n, Port::main}, false);
}
/// One-shot injection; `seq` keeps several injections on one node distinct.
inline Timeout inject_fault(NodeId n, std::uint32_t seq, Tick deadline)
{
    return make(TimerClass::inject_fault, seq, Cyclic::no, deadline, MsgType::inject_fault_timeout,
                {n, Port::main}, true);
}

} // namespace timers

/// Protocol-level record for the trace: suspect, clear, declare_crashed,
/// wakeup, elected, teif_sent. `scope` qualifies declare_crashed as
/// "process" or "node".
struct ProtocolEvent {
    std::string event;
    NodeId subject = 0;
    std::string scope;

    friend bool operator==(const ProtocolEvent&, const ProtocolEvent&) = default;
};

/// Everything a transition asks of its host. Alarm actions only ever produce
/// messages; all state changes happen in the *_step functions.
struct Effects {
    std::vector<Message> sends;
    std::vector<TomCommand> tom;
    std::vector<ProtocolEvent> events;
    bool respawn_dirx = false;
    std::optional<std::uint32_t> apply_fault; // injection instance id
};

/// The I'm-Alive flag shared by the co-located DIR-x and IAT; the only
/// shared state in the system. Written TRUE by the DIR-x, reset by the IAT.
class IafPort {
public:
    bool value() const noexcept { return flag_; }
    void set() noexcept { flag_ = true; }
    void clear() noexcept { flag_ = false; }

private:
    bool flag_ = false;
};

/// Deterministic election: the smallest live backup id.
inline NodeId elect(const std::set<NodeId>& live_backups)
{
    if (live_backups.empty())
        throw TomError(Errc::empty_candidate_set, "no live backup to elect");
    return *live_backups.begin();
}

} // namespace tomkit::dirnet
