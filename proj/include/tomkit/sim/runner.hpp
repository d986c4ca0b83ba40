#pragma once

#include "tomkit/clock.hpp"
#include "tomkit/command.hpp"
#include "tomkit/detector.hpp"
#include "tomkit/dirnet/dirx.hpp"
#include "tomkit/dirnet/iat.hpp"
#include "tomkit/manager.hpp"
#include "tomkit/sim/network.hpp"
#include "tomkit/sim/scenario.hpp"
#include "tomkit/trace.hpp"

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tomkit::sim {

struct RunOptions {
    // per-cycle manager records go to RunResult::tom_trace
    bool trace_tom = false;
};

struct RunResult {
    Trace trace;
    Trace tom_trace;
    std::vector<std::string> violations;
    NetStats stats;

    bool ok() const noexcept { return violations.empty(); }
};

inline constexpr std::string_view inject_message = "INJECT_FAULT_TIMEOUT";

/// Shared tick loop. Each tick: deliver everything due, step every live
/// time-out manager once, then deliver again so alarms and zero-delay local
/// messages raised this tick are consumed this tick.
class Simulation {
public:
    virtual ~Simulation() = default;
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    Tick now() const noexcept { return clock_.now(); }
    const Scenario& scenario() const noexcept { return sc_; }
    const Network& network() const noexcept { return net_; }
    const Trace& trace() const noexcept { return trace_; }
    const Trace& tom_trace() const noexcept { return tom_trace_; }
    const std::vector<std::string>& violations() const noexcept { return violations_; }

    /// Runs every tick up to and including `end`.
    void run_until(Tick end)
    {
        while (true) {
            const Tick t = started_ ? clock_.now() + 1 : clock_.now();
            if (t > end)
                break;
            started_ = true;
            clock_.advance_to(t);
            tick(t);
        }
    }

    void run() { run_until(sc_.duration); }

    RunResult result() const
    {
        RunResult r{trace_, tom_trace_, violations_, net_.stats()};
        if (!net_.conserved())
            r.violations.push_back("conservation: sent " + std::to_string(net_.stats().sent) + " != delivered " +
                                   std::to_string(net_.stats().delivered) + " + dropped " +
                                   std::to_string(net_.stats().dropped) + " + in flight " +
                                   std::to_string(net_.in_flight()));
        return r;
    }

protected:
    Simulation(Scenario s, RunOptions opt)
        : sc_(std::move(s)), opt_(opt), net_(sc_.link, sc_.node_count())
    {}

    virtual void begin_tick(Tick) {}
    virtual void deliver(const SimEvent& ev) = 0;
    virtual void step_managers() = 0;
    virtual void end_of_tick(Tick) {}

    ManagerConfig manager_config() const
    {
        ManagerConfig c;
        c.pool_size = sc_.pool;
        c.tm_cycle = sc_.tm_cycle;
        return c;
    }

    AlarmSink sink()
    {
        return [this](Message m) { net_.send(std::move(m), clock_.now()); };
    }

    void violation(std::string what)
    {
        if (violations_.size() < 64)
            violations_.push_back("tick " + std::to_string(clock_.now()) + ": " + std::move(what));
    }

    Scenario sc_;
    RunOptions opt_;
    VirtualClock clock_;
    Network net_;
    Trace trace_;
    Trace tom_trace_;

private:
    void tick(Tick t)
    {
        begin_tick(t);
        deliver_all(t);
        step_managers();
        deliver_all(t);
        end_of_tick(t);
    }

    void deliver_all(Tick t)
    {
        while (auto ev = net_.pop_due(t)) {
            if (ev->deliver_at < ev->sent_at)
                violation("causality: delivered before sent");
            if (last_ && *ev < *last_)
                violation("causality: delivery order");
            last_ = SimEvent{ev->deliver_at, ev->seq, ev->sent_at, {}};
            deliver(*ev);
        }
    }

    std::vector<std::string> violations_;
    std::optional<SimEvent> last_;
    bool started_ = false;
};

/// Every process runs the detector on its own time-out manager.
class DetectorSim final : public Simulation {
public:
    struct Process {
        std::unique_ptr<TimeoutManager> tom;
        TomHandle detector;
        TomHandle injector;
        detector::DetectorState state;
        bool crashed = false;
        bool dropping = false;
        std::optional<Tick> drop_until;
    };

    explicit DetectorSim(Scenario s, RunOptions opt = {}) : Simulation(std::move(s), opt)
    {
        if (sc_.protocol != Protocol::detector)
            throw ConfigError(0, "not a detector scenario");
        const auto n = sc_.processes;
        procs_.resize(n);
        for (NodeId p = 0; p < n; ++p) {
            auto& pr = procs_[p];
            pr.tom = std::make_unique<TimeoutManager>(clock_, sink(), manager_config(), p);
            if (opt_.trace_tom)
                pr.tom->set_trace(&tom_trace_);
            pr.detector = pr.tom->tom_init({std::string(detector::repeat_task1), {p, Port::main}, false});
            pr.state = detector::detector_init({p, n, sc_.default_timeout, sc_.heartbeat}, pr.detector);
            pr.injector = pr.tom->tom_init({std::string(inject_message), {p, Port::main}, true});
        }
        for (std::uint32_t i = 0; i < sc_.faults.size(); ++i) {
            const auto& f = sc_.faults[i];
            procs_[f.node].injector.insert(dirnet::timers::inject_fault(f.node, i, f.at));
        }
    }

    const Process& process(NodeId p) const { return procs_.at(p); }
    std::size_t size() const noexcept { return procs_.size(); }

private:
    void begin_tick(Tick t) override
    {
        for (auto& pr : procs_)
            if (pr.dropping && pr.drop_until && *pr.drop_until <= t)
                pr.dropping = false;
    }

    void step_managers() override
    {
        for (auto& pr : procs_)
            if (!pr.crashed)
                pr.tom->step();
    }

    void deliver(const SimEvent& ev) override
    {
        const NodeId p = ev.msg.to.node;
        auto& pr = procs_[p];
        if (pr.crashed)
            return;
        if (ev.msg.type == inject_message) {
            apply_fault(p, sc_.faults.at(ev.msg.instance_id));
            return;
        }
        auto m = detector::parse(ev.msg);
        if (!m) {
            violation("process " + std::to_string(p) + " got unknown message " + ev.msg.type);
            return;
        }
        auto step = detector::detector_step(pr.state, *m);
        for (const auto& tr : step.transitions) {
            if (tr.to == Output::trust && tr.delta != pr.state.delta[tr.q] + 1)
                violation("delta of " + std::to_string(tr.q) + " did not grow by one");
            Record r;
            r["tick"] = now();
            r["process"] = p;
            r["transition"] = std::string(to_string(tr.from)) + "->" + std::string(to_string(tr.to));
            r["q"] = tr.q;
            r["delta"] = tr.delta;
            trace_.record(r);
        }
        pr.state = std::move(step.state);
        if (pr.state.output[p] != Output::trust)
            violation("process " + std::to_string(p) + " suspects itself");
        for (auto& hb : step.broadcasts) {
            if (pr.dropping) {
                for (NodeId q = 0; q < procs_.size(); ++q)
                    net_.discard(hb);
            } else {
                net_.broadcast(hb, Port::main, now());
            }
        }
        submit_all(pr.detector, step.tom);
    }

    using Output = detector::Output;

    void apply_fault(NodeId p, const FaultSpec& f)
    {
        auto& pr = procs_[p];
        Record r;
        r["tick"] = now();
        r["process"] = p;
        r["fault"] = to_string(f.kind);
        trace_.record(r);
        switch (f.kind) {
        case FaultKind::crash_process:
        case FaultKind::crash_node:
            pr.crashed = true;
            break;
        case FaultKind::drop_messages:
            pr.dropping = true;
            pr.drop_until = f.duration ? std::optional<Tick>(now() + *f.duration) : std::nullopt;
            break;
        case FaultKind::hang_dirx:
            break;
        }
    }

    std::vector<Process> procs_;
};

/// DIR net: every node runs an IAT and a DIR-x sharing one time-out manager
/// (one list each, plus a list for scripted fault injections).
class DirnetSim final : public Simulation {
public:
    enum class DirxStatus { running, hung, crashed };

    struct Node {
        std::unique_ptr<TimeoutManager> tom;
        TomHandle iat_list;
        TomHandle dirx_list;
        TomHandle injector;
        dirnet::IafPort iaf;
        dirnet::IatState iat;
        dirnet::DirxState dirx;
        DirxStatus status = DirxStatus::running;
        std::optional<Tick> hang_until;
        std::deque<dirnet::DirnetMessage> buffered;
        bool up = true;
        bool dropping = false;
        std::optional<Tick> drop_until;
        unsigned incarnation = 0;
    };

    explicit DirnetSim(Scenario s, RunOptions opt = {}) : Simulation(std::move(s), opt)
    {
        if (sc_.protocol != Protocol::dirnet)
            throw ConfigError(0, "not a dirnet scenario");
        const auto n = sc_.node_count();
        std::vector<NodeId> everyone;
        for (NodeId k = 0; k < n; ++k)
            everyone.push_back(k);

        nodes_.resize(n);
        for (NodeId k = 0; k < n; ++k) {
            auto& nd = nodes_[k];
            nd.tom = std::make_unique<TimeoutManager>(clock_, sink(), manager_config(), k);
            if (opt_.trace_tom)
                nd.tom->set_trace(&tom_trace_);
            nd.iat_list = nd.tom->tom_init({"m_IA_CLR_ALARM", {k, Port::iat}, false});
            nd.dirx_list = nd.tom->tom_init({"m_IA_SET_ALARM", {k, Port::main}, false});
            nd.injector = nd.tom->tom_init({std::string(inject_message), {k, Port::main}, true});

            auto iat = dirnet::iat_init(k, everyone, sc_.deadlines);
            nd.iat = std::move(iat.state);
            submit_all(nd.iat_list, iat.fx.tom);

            auto dx = dirnet::dirx_init(k, sc_.roles[k], sc_.manager(), sc_.backups(), sc_.deadlines);
            nd.dirx = std::move(dx.state);
            submit_all(nd.dirx_list, dx.fx.tom);
        }
        for (std::uint32_t i = 0; i < sc_.faults.size(); ++i) {
            const auto& f = sc_.faults[i];
            nodes_[f.node].injector.insert(dirnet::timers::inject_fault(f.node, i, f.at));
        }
    }

    const Node& node(NodeId k) const { return nodes_.at(k); }
    std::size_t size() const noexcept { return nodes_.size(); }

private:
    void begin_tick(Tick t) override
    {
        for (NodeId k = 0; k < nodes_.size(); ++k) {
            auto& nd = nodes_[k];
            if (nd.dropping && nd.drop_until && *nd.drop_until <= t)
                nd.dropping = false;
            if (nd.up && nd.status == DirxStatus::hung && nd.hang_until && *nd.hang_until <= t) {
                nd.status = DirxStatus::running;
                nd.hang_until.reset();
                auto backlog = std::move(nd.buffered);
                nd.buffered.clear();
                for (const auto& m : backlog)
                    if (nd.status == DirxStatus::running)
                        dirx_receive(k, m);
            }
        }
    }

    void step_managers() override
    {
        for (auto& nd : nodes_)
            if (nd.up)
                nd.tom->step();
    }

    void deliver(const SimEvent& ev) override
    {
        const NodeId k = ev.msg.to.node;
        auto& nd = nodes_[k];
        if (!nd.up)
            return;
        auto m = dirnet::decode(ev.msg);
        if (!m) {
            violation("node " + std::to_string(k) + " got unknown message " + ev.msg.type);
            return;
        }

        if (ev.msg.to.port == Port::iat) {
            auto step = dirnet::iat_step(nd.iat, nd.iaf, *m);
            nd.iat = std::move(step.state);
            apply(k, step.fx, nd.iat_list, false);
            return;
        }

        switch (nd.status) {
        case DirxStatus::running:
            dirx_receive(k, *m);
            break;
        case DirxStatus::hung:
            if (nd.hang_until)
                nd.buffered.push_back(*m);
            else if (m->type == dirnet::MsgType::inject_fault_timeout)
                apply_fault(k, sc_.faults.at(m->subject));
            break;
        case DirxStatus::crashed:
            // the injector is part of the harness, not of the dead process
            if (m->type == dirnet::MsgType::inject_fault_timeout)
                apply_fault(k, sc_.faults.at(m->subject));
            break;
        }
    }

    void dirx_receive(NodeId k, const dirnet::DirnetMessage& m)
    {
        auto& nd = nodes_[k];
        auto step = dirnet::dirx_step(nd.dirx, nd.iaf, m);
        nd.dirx = std::move(step.state);
        apply(k, step.fx, nd.dirx_list, true);
    }

    void apply(NodeId k, const dirnet::Effects& fx, TomHandle& list, bool from_dirx)
    {
        auto& nd = nodes_[k];
        for (const auto& m : fx.sends) {
            if (from_dirx && nd.dropping && m.to.node != k)
                net_.discard(m);
            else
                net_.send(m, now());
        }
        submit_all(list, fx.tom);
        for (const auto& e : fx.events)
            event(k, e.event, e.subject, e.scope);
        if (fx.respawn_dirx)
            respawn(k);
        if (fx.apply_fault)
            apply_fault(k, sc_.faults.at(*fx.apply_fault));
    }

    void respawn(NodeId k)
    {
        auto& nd = nodes_[k];
        if (nd.status == DirxStatus::running)
            return;
        if (nd.status == DirxStatus::hung)
            nd.dirx_list.close();
        const auto& old = nd.dirx;
        auto dx = dirnet::dirx_init(k, old.role, old.mid, old.backups, sc_.deadlines, old.crashed);
        nd.dirx_list = nd.tom->tom_init({"m_IA_SET_ALARM", {k, Port::main}, false});
        nd.dirx = std::move(dx.state);
        nd.status = DirxStatus::running;
        nd.hang_until.reset();
        nd.buffered.clear();
        ++nd.incarnation;
        submit_all(nd.dirx_list, dx.fx.tom);
        event(k, "respawned", k, {});
    }

    void apply_fault(NodeId k, const FaultSpec& f)
    {
        auto& nd = nodes_[k];
        Record r;
        r["tick"] = now();
        r["node"] = k;
        r["event"] = "fault_applied";
        r["subject"] = k;
        r["kind"] = to_string(f.kind);
        trace_.record(r);

        switch (f.kind) {
        case FaultKind::crash_process:
            if (nd.status != DirxStatus::crashed) {
                nd.dirx_list.close();
                nd.status = DirxStatus::crashed;
                nd.buffered.clear();
            }
            break;
        case FaultKind::crash_node:
            nd.up = false;
            nd.status = DirxStatus::crashed;
            break;
        case FaultKind::hang_dirx:
            if (nd.status == DirxStatus::running) {
                nd.status = DirxStatus::hung;
                nd.hang_until = f.duration ? std::optional<Tick>(now() + *f.duration) : std::nullopt;
            }
            break;
        case FaultKind::drop_messages:
            nd.dropping = true;
            nd.drop_until = f.duration ? std::optional<Tick>(now() + *f.duration) : std::nullopt;
            break;
        }
    }

    void end_of_tick(Tick) override
    {
        using dirnet::TimerClass;
        using dirnet::timer_id;
        for (NodeId k = 0; k < nodes_.size(); ++k) {
            const auto& nd = nodes_[k];
            if (!nd.up || nd.status != DirxStatus::running)
                continue;
            const auto l = nd.dirx_list.list_id();
            if (nd.tom->pending_requests(l) > 0)
                continue;
            const auto* list = nd.tom->list(l);
            if (!list)
                continue;
            const auto& s = nd.dirx;
            if (s.role == dirnet::NodeRole::manager) {
                for (const auto& [i, sus] : s.watch) {
                    const bool watch = list->contains(timer_id(TimerClass::taia_a, i));
                    const bool window = list->contains(timer_id(TimerClass::teif_a, i));
                    if (watch == window || window != (sus == dirnet::Suspicion::suspect))
                        violation("suspicion exclusivity: node " + std::to_string(k) + " about " +
                                  std::to_string(i));
                }
            } else if (s.role == dirnet::NodeRole::backup && !s.crashed.contains(s.mid)) {
                const bool watch = list->contains(timer_id(TimerClass::mia_b));
                const bool window = list->contains(timer_id(TimerClass::teif_b));
                if (watch == window || window != (s.manager_watch == dirnet::Suspicion::suspect))
                    violation("suspicion exclusivity: node " + std::to_string(k) + " about manager");
            }
        }
    }

    void event(NodeId k, std::string_view what, NodeId subject, std::string_view scope)
    {
        Record r;
        r["tick"] = now();
        r["node"] = k;
        r["event"] = what;
        r["subject"] = subject;
        if (!scope.empty())
            r["scope"] = scope;
        trace_.record(r);
    }

    std::vector<Node> nodes_;
};

/// Runs a scenario to its duration. Same scenario, same result.
inline RunResult run(const Scenario& s, RunOptions opt = {})
{
    if (s.protocol == Protocol::detector) {
        DetectorSim sim(s, opt);
        sim.run();
        return sim.result();
    }
    DirnetSim sim(s, opt);
    sim.run();
    return sim.result();
}

} // namespace tomkit::sim
