#pragma once

#include "tomkit/dirnet/protocol.hpp"
#include "tomkit/error.hpp"
#include "tomkit/sim/network.hpp"

#include <charconv>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace tomkit::sim {

enum class Protocol { dirnet, detector };

enum class FaultKind { crash_process, crash_node, hang_dirx, drop_messages };

inline constexpr std::string_view to_string(FaultKind k)
{
    switch (k) {
    case FaultKind::crash_process: return "crash_process";
    case FaultKind::crash_node:    return "crash_node";
    case FaultKind::hang_dirx:     return "hang_dirx";
    case FaultKind::drop_messages: return "drop_messages";
    }
    return "?";
}

struct FaultSpec {
    NodeId node = 0;
    FaultKind kind = FaultKind::crash_process;
    Tick at = 0;
    std::optional<Tick> duration; // hang_dirx, drop_messages; absent = forever
};

struct Scenario {
    Protocol protocol = Protocol::dirnet;
    std::vector<dirnet::NodeRole> roles; // dirnet, indexed by node id
    std::size_t processes = 0;           // detector
    dirnet::Deadlines deadlines;
    Tick default_timeout = 100;
    Tick heartbeat = 0;
    LinkModel link;
    std::vector<FaultSpec> faults;
    Tick duration = 0;
    Tick tm_cycle = 1;
    std::size_t pool = 0;

    std::size_t node_count() const { return protocol == Protocol::dirnet ? roles.size() : processes; }

    NodeId manager() const
    {
        for (NodeId n = 0; n < roles.size(); ++n)
            if (roles[n] == dirnet::NodeRole::manager)
                return n;
        return 0;
    }

    std::vector<NodeId> backups() const
    {
        std::vector<NodeId> out;
        for (NodeId n = 0; n < roles.size(); ++n)
            if (roles[n] == dirnet::NodeRole::backup)
                out.push_back(n);
        return out;
    }
};

namespace detail {

inline std::vector<std::string> words(std::string_view line)
{
    std::vector<std::string> out;
    std::istringstream in{std::string(line)};
    for (std::string w; in >> w;)
        out.push_back(std::move(w));
    return out;
}

inline std::uint64_t number(const std::string& w, std::size_t line, std::string_view what)
{
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc{} || p != w.data() + w.size())
        throw ConfigError(line, "bad " + std::string(what) + " '" + w + "'");
    return v;
}

inline std::optional<NodeId> node_or_any(const std::string& w, std::size_t line)
{
    if (w == "*")
        return std::nullopt;
    return static_cast<NodeId>(number(w, line, "node"));
}

inline void expect(const std::vector<std::string>& w, std::size_t i, std::string_view kw, std::size_t line)
{
    if (w.size() <= i || w[i] != kw)
        throw ConfigError(line, "expected '" + std::string(kw) + "'");
}

inline Tick* deadline_slot(Scenario& s, std::string name)
{
    if (name.starts_with("d_"))
        name.erase(0, 2);
    auto& d = s.deadlines;
    if (name == "IA_SET") return &d.ia_set;
    if (name == "IA_CLR") return &d.ia_clr;
    if (name == "MIA_A") return &d.mia_a;
    if (name == "TAIA_A") return &d.taia_a;
    if (name == "TEIF_A") return &d.teif_a;
    if (name == "TAIA_B") return &d.taia_b;
    if (name == "MIA_B") return &d.mia_b;
    if (name == "TEIF_B") return &d.teif_b;
    if (name == "DEFAULT_TIMEOUT") return &s.default_timeout;
    if (name == "HEARTBEAT") return &s.heartbeat;
    return nullptr;
}

inline std::optional<FaultKind> fault_kind(std::string_view w)
{
    for (auto k : {FaultKind::crash_process, FaultKind::crash_node, FaultKind::hang_dirx, FaultKind::drop_messages})
        if (to_string(k) == w)
            return k;
    return std::nullopt;
}

} // namespace detail

/// Parses the line-oriented scenario format:
///
///     # comment
///     protocol dirnet|detector
///     node <id> role manager|backup|agent
///     processes <n>
///     deadline <NAME> <ticks>
///     link delay <ticks> jitter <ticks> seed <int>
///     drop <src|*> <dst|*> from <t0> to <t1>
///     spike <src|*> <dst|*> from <t0> to <t1> extra <ticks>
///     inject <node> <kind> at <tick> [for <ticks>]
///     tm_cycle <ticks>
///     pool <n>
///     duration <ticks>
inline Scenario parse_config(std::string_view text)
{
    using detail::expect;
    using detail::number;

    Scenario s;
    std::vector<std::pair<NodeId, std::size_t>> declared; // node, line
    std::vector<std::size_t> inject_lines;
    bool have_duration = false;
    bool have_processes = false;

    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;

        if (auto hash = raw.find('#'); hash != std::string_view::npos)
            raw = raw.substr(0, hash);
        auto w = detail::words(raw);
        if (w.empty())
            continue;
        const auto& kw = w[0];

        if (kw == "protocol") {
            if (w.size() != 2)
                throw ConfigError(lineno, "usage: protocol dirnet|detector");
            if (w[1] == "dirnet")
                s.protocol = Protocol::dirnet;
            else if (w[1] == "detector")
                s.protocol = Protocol::detector;
            else
                throw ConfigError(lineno, "unknown protocol '" + w[1] + "'");
        } else if (kw == "node") {
            if (w.size() != 4)
                throw ConfigError(lineno, "usage: node <id> role <manager|backup|agent>");
            expect(w, 2, "role", lineno);
            auto id = static_cast<NodeId>(number(w[1], lineno, "node id"));
            dirnet::NodeRole role;
            if (w[3] == "manager")
                role = dirnet::NodeRole::manager;
            else if (w[3] == "backup")
                role = dirnet::NodeRole::backup;
            else if (w[3] == "agent")
                role = dirnet::NodeRole::agent;
            else
                throw ConfigError(lineno, "unknown role '" + w[3] + "'");
            for (auto& [n, l] : declared)
                if (n == id)
                    throw ConfigError(lineno, "node " + w[1] + " declared twice");
            declared.emplace_back(id, lineno);
            if (s.roles.size() <= id)
                s.roles.resize(id + 1, dirnet::NodeRole::agent);
            s.roles[id] = role;
        } else if (kw == "processes") {
            if (w.size() != 2)
                throw ConfigError(lineno, "usage: processes <n>");
            s.processes = number(w[1], lineno, "process count");
            have_processes = true;
        } else if (kw == "deadline") {
            if (w.size() != 3)
                throw ConfigError(lineno, "usage: deadline <NAME> <ticks>");
            Tick* slot = detail::deadline_slot(s, w[1]);
            if (!slot)
                throw ConfigError(lineno, "unknown deadline '" + w[1] + "'");
            *slot = number(w[2], lineno, "deadline");
            if (*slot < 1)
                throw ConfigError(lineno, "deadline must be at least 1");
        } else if (kw == "link") {
            if (w.size() != 7)
                throw ConfigError(lineno, "usage: link delay <ticks> jitter <ticks> seed <int>");
            expect(w, 1, "delay", lineno);
            expect(w, 3, "jitter", lineno);
            expect(w, 5, "seed", lineno);
            s.link.base_delay = number(w[2], lineno, "delay");
            s.link.jitter = number(w[4], lineno, "jitter");
            s.link.seed = number(w[6], lineno, "seed");
            if (s.link.base_delay < 1)
                throw ConfigError(lineno, "link delay must be at least 1");
        } else if (kw == "drop" || kw == "spike") {
            const bool spike = kw == "spike";
            if (w.size() != (spike ? 9u : 7u))
                throw ConfigError(lineno, spike ? "usage: spike <src|*> <dst|*> from <t0> to <t1> extra <ticks>"
                                                : "usage: drop <src|*> <dst|*> from <t0> to <t1>");
            expect(w, 3, "from", lineno);
            expect(w, 5, "to", lineno);
            LinkRule r;
            r.src = detail::node_or_any(w[1], lineno);
            r.dst = detail::node_or_any(w[2], lineno);
            r.from = number(w[4], lineno, "tick");
            r.to = number(w[6], lineno, "tick");
            if (r.to < r.from)
                throw ConfigError(lineno, "empty interval");
            if (spike) {
                expect(w, 7, "extra", lineno);
                r.extra = number(w[8], lineno, "extra delay");
                s.link.spikes.push_back(r);
            } else {
                s.link.drops.push_back(r);
            }
        } else if (kw == "inject") {
            if (w.size() != 5 && w.size() != 7)
                throw ConfigError(lineno, "usage: inject <node> <kind> at <tick> [for <ticks>]");
            FaultSpec f;
            f.node = static_cast<NodeId>(number(w[1], lineno, "node"));
            auto k = detail::fault_kind(w[2]);
            if (!k)
                throw ConfigError(lineno, "unknown fault '" + w[2] + "'");
            f.kind = *k;
            expect(w, 3, "at", lineno);
            f.at = number(w[4], lineno, "tick");
            if (f.at < 1)
                throw ConfigError(lineno, "injection tick must be at least 1");
            if (w.size() == 7) {
                expect(w, 5, "for", lineno);
                if (f.kind != FaultKind::hang_dirx && f.kind != FaultKind::drop_messages)
                    throw ConfigError(lineno, "'for' applies to hang_dirx and drop_messages only");
                f.duration = number(w[6], lineno, "duration");
                if (*f.duration < 1)
                    throw ConfigError(lineno, "fault duration must be at least 1");
            }
            s.faults.push_back(f);
            inject_lines.push_back(lineno);
        } else if (kw == "tm_cycle") {
            if (w.size() != 2)
                throw ConfigError(lineno, "usage: tm_cycle <ticks>");
            s.tm_cycle = number(w[1], lineno, "tm_cycle");
            if (s.tm_cycle < 1)
                throw ConfigError(lineno, "tm_cycle must be at least 1");
        } else if (kw == "pool") {
            if (w.size() != 2)
                throw ConfigError(lineno, "usage: pool <n>");
            s.pool = number(w[1], lineno, "pool size");
        } else if (kw == "duration") {
            if (w.size() != 2)
                throw ConfigError(lineno, "usage: duration <ticks>");
            s.duration = number(w[1], lineno, "duration");
            have_duration = true;
        } else {
            throw ConfigError(lineno, "unknown directive '" + kw + "'");
        }
    }

    if (!have_duration)
        throw ConfigError(0, "missing duration");

    if (s.protocol == Protocol::dirnet) {
        if (have_processes)
            throw ConfigError(0, "'processes' belongs to the detector protocol");
        if (s.roles.empty())
            throw ConfigError(0, "no nodes declared");
        if (declared.size() != s.roles.size())
            throw ConfigError(0, "node ids must be contiguous from 0");
        std::size_t managers = 0;
        std::size_t second_manager_line = 0;
        for (auto& [n, l] : declared)
            if (s.roles[n] == dirnet::NodeRole::manager && ++managers == 2)
                second_manager_line = l;
        if (managers != 1)
            throw ConfigError(second_manager_line, "exactly one manager");
        if (s.backups().empty())
            throw ConfigError(0, "at least one backup");
    } else {
        if (!declared.empty())
            throw ConfigError(declared.front().second, "'node' belongs to the dirnet protocol");
        if (s.processes < 2)
            throw ConfigError(0, "detector needs at least two processes");
    }

    const auto n = s.node_count();
    for (std::size_t i = 0; i < s.faults.size(); ++i) {
        const auto& f = s.faults[i];
        if (f.node >= n)
            throw ConfigError(inject_lines[i], "unknown node " + std::to_string(f.node));
        if (s.protocol == Protocol::detector && f.kind == FaultKind::hang_dirx)
            throw ConfigError(inject_lines[i], "hang_dirx needs protocol dirnet");
    }
    for (const auto* rules : {&s.link.drops, &s.link.spikes})
        for (const auto& r : *rules)
            if ((r.src && *r.src >= n) || (r.dst && *r.dst >= n))
                throw ConfigError(0, "link rule names an unknown node");
    return s;
}

} // namespace tomkit::sim
