#include "corpus.hpp"

#include "tomkit/manager.hpp"
#include "tomkit/sim/figure.hpp"
#include "tomkit/sim/runner.hpp"
#include "tomkit/sim/scenario.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace tomkit;
using namespace tomkit::sim;
using nlohmann::json;

namespace {

// Pinned limits.
constexpr double figure_budget_s = 1.0;
constexpr std::size_t corpus_sequences = 10'000;
constexpr double corpus_budget_s = 30.0;
constexpr std::size_t cyclic_periods = 1'000;
constexpr double detector_budget_s = 10.0;
constexpr Tick detector_crash_at = 10'000;
constexpr Tick max_link_delay = 5; // base 1 + jitter 4
constexpr std::uint64_t seed_count = 10;

const std::string root = TOMKIT_SOURCE_DIR;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool cond, const std::string& why)
    {
        if (!cond && pass) {
            pass = false;
            detail = why;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string read(const std::string& path)
{
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Scenario scenario(const std::string& name) { return parse_config(read(root + "/scenarios/" + name + ".cfg")); }

std::vector<json> records(const Trace& t)
{
    std::vector<json> out;
    for (const auto& l : t.lines())
        out.push_back(json::parse(l));
    return out;
}

std::vector<json> where(const Trace& t, const std::string& key, const std::string& value)
{
    std::vector<json> out;
    for (auto& r : records(t))
        if (r.value(key, "") == value)
            out.push_back(r);
    return out;
}

std::string str(std::uint64_t v) { return std::to_string(v); }

Outcome figure_replay()
{
    Outcome o;
    const auto t0 = Clock::now();
    const auto f = replay_figure();
    const double took = seconds_since(t0);

    o.require(f.snapshots.size() == 4, "expected 4 snapshots");
    if (!o.pass)
        return o;
    const auto& c = f.snapshots[2];
    o.require(c.ids == std::vector<std::string>{"A", "B", "C"}, "order after C");
    o.require(c.running == std::vector<Tick>{330, 170, 180}, "running after C");
    const auto& d = f.snapshots[3];
    o.require(d.ids == std::vector<std::string>{"B", "D", "C"}, "order after D");
    o.require(d.running == std::vector<Tick>{500, 80, 100}, "running after D");

    std::vector<std::pair<std::string, Tick>> got;
    for (const auto& x : f.firings)
        got.emplace_back(x.id, x.tick);
    const std::vector<std::pair<std::string, Tick>> want{{"A", 330}, {"B", 500}, {"D", 580}, {"C", 680}};
    o.require(got == want, "firing order/ticks");
    o.require(took < figure_budget_s, "took " + std::to_string(took) + " s");
    if (o.pass)
        o.detail = "330/170/180, D=80 C=100, A@330 B@500 D@580 C@680";
    return o;
}

struct CorpusRun {
    corpus::Report report;
    double seconds = 0;
};

const CorpusRun& corpus_run()
{
    static const CorpusRun run = [] {
        CorpusRun r;
        const auto t0 = Clock::now();
        r.report = corpus::check_corpus(corpus_sequences);
        r.seconds = seconds_since(t0);
        return r;
    }();
    return run;
}

Outcome oracle_equivalence()
{
    Outcome o;
    const auto& r = corpus_run();
    o.require(r.report.oracle_mismatches == 0,
              str(r.report.oracle_mismatches) + " mismatches, first: " + r.report.first_failure);
    o.require(r.seconds < corpus_budget_s, "took " + std::to_string(r.seconds) + " s");
    if (o.pass)
        o.detail = str(corpus_sequences) + " sequences, " + str(r.report.ops) + " ops, " + str(r.report.fired) +
                   " expiries, " + std::to_string(r.seconds) + " s";
    return o;
}

Outcome structural_invariants()
{
    Outcome o;
    const auto& r = corpus_run().report;
    o.require(r.property_violations() == 0,
              "interval " + str(r.interval_violations) + ", start_time " + str(r.start_time_violations) +
                  ", monotone " + str(r.monotone_violations) + ", inverse " + str(r.inverse_violations) +
                  "; first: " + r.first_failure);
    if (o.pass)
        o.detail = "0 violations over " + str(r.ops) + " ops";
    return o;
}

Outcome cyclic_periodicity()
{
    Outcome o;
    for (Tick d : {1u, 7u, 250u}) {
        VirtualClock clock;
        std::vector<Tick> fired;
        TimeoutManager mgr(clock, [&](Message) { fired.push_back(clock.now()); }, ManagerConfig{.tm_cycle = 1});
        auto h = mgr.tom_init({"ALARM", {0, Port::main}, false});
        h.insert(declare({1, 0}, Cyclic::yes, Enabled::yes, d));
        for (Tick t = 0; t <= d * cyclic_periods; ++t) {
            clock.advance_to(t);
            mgr.step();
        }
        o.require(fired.size() == cyclic_periods, "d=" + str(d) + ": " + str(fired.size()) + " firings");
        for (std::size_t k = 0; k < fired.size() && o.pass; ++k)
            o.require(fired[k] == (k + 1) * d, "d=" + str(d) + ": firing " + str(k + 1) + " at " + str(fired[k]));
    }
    if (o.pass)
        o.detail = "d in {1,7,250}, " + str(cyclic_periods) + " periods each, all at k*d";
    return o;
}

Outcome detector_completeness()
{
    Outcome o;
    const auto t0 = Clock::now();
    Tick worst = 0;
    for (std::uint64_t seed = 1; seed <= seed_count && o.pass; ++seed) {
        auto s = scenario("detector_crash");
        s.link.seed = seed;
        o.require(s.link.base_delay + s.link.jitter <= max_link_delay, "link delay exceeds 5");
        o.require(s.faults.size() == 1 && s.faults[0].at == detector_crash_at, "scenario crash tick");
        const NodeId q = s.faults.at(0).node;
        const std::string tag = "seed " + str(seed) + ": ";

        DetectorSim sim(s);
        sim.run();
        o.require(sim.result().ok(), tag + "invariant violation");
        const auto trace = records(sim.trace());
        for (NodeId p = 0; p < s.processes; ++p) {
            if (p == q)
                continue;
            std::optional<Tick> suspected;
            bool reverted = false;
            for (const auto& r : trace) {
                if (r.value("process", -1) != static_cast<int>(p) || r.value("q", -1) != static_cast<int>(q))
                    continue;
                const Tick at = r["tick"];
                if (r["transition"] == "trust->suspect" && at >= detector_crash_at) {
                    const Tick bound = detector_crash_at + r["delta"].get<Tick>() + s.tm_cycle + max_link_delay;
                    o.require(at <= bound, tag + "p" + str(p) + " suspected at " + str(at) + " > " + str(bound));
                    if (!suspected)
                        suspected = at;
                    worst = std::max(worst, at - detector_crash_at);
                }
                if (r["transition"] == "suspect->trust" && suspected)
                    reverted = true;
            }
            o.require(suspected.has_value(), tag + "p" + str(p) + " never suspected");
            o.require(!reverted, tag + "p" + str(p) + " reverted");
            o.require(sim.process(p).state.output[q] == detector::Output::suspect, tag + "final output trust");
        }
    }
    const double took = seconds_since(t0);
    o.require(took < detector_budget_s, "took " + std::to_string(took) + " s");
    if (o.pass)
        o.detail = str(seed_count) + " seeds, worst latency " + str(worst) + " ticks, " + std::to_string(took) + " s";
    return o;
}

Outcome detector_adaptation()
{
    Outcome o;
    const auto s = scenario("detector_spike");
    const auto r = run(s);
    o.require(r.ok(), "invariant violation");
    const auto suspects = where(r.trace, "transition", "trust->suspect");
    const auto trusts = where(r.trace, "transition", "suspect->trust");
    o.require(suspects.size() == 1, str(suspects.size()) + " suspicions");
    o.require(trusts.size() == 1, str(trusts.size()) + " suspect->trust transitions");
    if (!o.pass)
        return o;
    const Tick before = suspects[0]["delta"];
    const Tick after = trusts[0]["delta"];
    o.require(after == before + 1, "delta " + str(before) + " -> " + str(after));
    o.require(trusts[0]["tick"].get<Tick>() > suspects[0]["tick"].get<Tick>(), "trust before suspect");
    o.require(trusts[0]["q"] == suspects[0]["q"] && trusts[0]["process"] == suspects[0]["process"], "mismatched pair");
    if (o.pass)
        o.detail = "suspect@" + str(suspects[0]["tick"].get<Tick>()) + ", trust@" +
                   str(trusts[0]["tick"].get<Tick>()) + ", delta " + str(before) + "->" + str(after) +
                   ", quiet through " + str(s.duration);
    return o;
}

enum class Side { manager, backup };

Tick verdict_bound(const Scenario& s, Side side)
{
    const auto& d = s.deadlines;
    return side == Side::manager ? d.taia_a + d.teif_a + 2 * s.tm_cycle : d.mia_b + d.teif_b + 2 * s.tm_cycle;
}

Outcome dirnet_case_analysis()
{
    Outcome o;
    std::vector<std::string> notes;

    const auto golden = [&](const std::string& name, const Scenario& s) {
        const auto a = run(s);
        const auto b = run(s);
        o.require(a.ok(), name + ": invariant violation");
        o.require(a.trace.text() == b.trace.text(), name + ": runs differ");
        o.require(a.trace.text() == read(root + "/tests/golden/" + name + ".trace"), name + ": golden differs");
        return a;
    };

    // (a) late heartbeat
    for (const std::string name : {"late_backup_heartbeat", "late_manager_heartbeat"}) {
        const auto s = scenario(name);
        const auto r = golden(name, s);
        const auto suspect = where(r.trace, "event", "suspect");
        const auto clear = where(r.trace, "event", "clear");
        o.require(!suspect.empty(), name + ": no suspicion");
        o.require(clear.size() == suspect.size(), name + ": suspicion not cleared");
        o.require(where(r.trace, "event", "declare_crashed").empty(), name + ": verdict issued");
    }

    // (b) process crash with live IAT, (c) node crash
    struct Case {
        const char* name;
        Side side;
        bool node_crash;
    };
    for (const Case c : {Case{"backup_process_crash", Side::manager, false},
                         Case{"backup_hang", Side::manager, false},
                         Case{"manager_process_crash", Side::backup, false},
                         Case{"backup_node_crash", Side::manager, true},
                         Case{"manager_node_crash", Side::backup, true}}) {
        const auto s = scenario(c.name);
        const auto r = golden(c.name, s);
        const Tick at = s.faults.at(0).at;
        const Tick limit = at + verdict_bound(s, c.side);
        const std::string n = c.name;
        Tick last = 0;
        if (c.node_crash) {
            const auto v = where(r.trace, "event", "declare_crashed");
            o.require(!v.empty(), n + ": no verdict");
            for (const auto& e : v) {
                o.require(e["scope"] == "node", n + ": wrong scope");
                last = std::max(last, e["tick"].get<Tick>());
            }
        } else {
            const auto wake = where(r.trace, "event", "wakeup");
            const auto spawn = where(r.trace, "event", "respawned");
            o.require(!wake.empty(), n + ": no WAKEUP");
            o.require(spawn.size() == 1, n + ": " + str(spawn.size()) + " respawns");
            o.require(where(r.trace, "scope", "node").empty(), n + ": node verdict for a process fault");
            for (const auto& e : wake)
                last = std::max(last, e["tick"].get<Tick>());
            for (const auto& e : spawn)
                last = std::max(last, e["tick"].get<Tick>());
        }
        o.require(last <= limit, n + ": " + str(last) + " > " + str(limit));
        notes.push_back(n + " +" + str(last - at) + "/" + str(limit - at));
    }

    if (o.pass) {
        o.detail = "late heartbeats cleared;";
        for (const auto& n : notes)
            o.detail += " " + n;
    }
    return o;
}

Outcome election_agreement()
{
    Outcome o;
    for (std::uint64_t seed = 1; seed <= seed_count && o.pass; ++seed) {
        auto s = scenario("manager_node_crash");
        s.link.jitter = max_link_delay - s.link.base_delay;
        s.link.seed = seed;
        const std::string tag = "seed " + str(seed) + ": ";
        const NodeId old = s.manager();

        DirnetSim sim(s);
        sim.run();
        o.require(sim.result().ok(), tag + "invariant violation");

        std::set<NodeId> survivors;
        for (NodeId b : s.backups())
            survivors.insert(b);
        const NodeId expected = *survivors.begin();

        std::map<NodeId, std::vector<NodeId>> votes;
        for (const auto& e : where(sim.trace(), "event", "elected"))
            votes[e["node"].get<NodeId>()].push_back(e["subject"].get<NodeId>());
        for (NodeId b : survivors) {
            o.require(votes[b] == std::vector<NodeId>{expected}, tag + "node " + str(b) + " votes differ");
            o.require(sim.node(b).dirx.mid == expected, tag + "node " + str(b) + " mid");
        }
        std::size_t managers = 0;
        for (NodeId k = 0; k < s.node_count(); ++k)
            if (k != old && sim.node(k).up && sim.node(k).dirx.role == dirnet::NodeRole::manager)
                ++managers;
        o.require(managers == 1, tag + str(managers) + " managers");
        o.require(sim.node(expected).dirx.role == dirnet::NodeRole::manager, tag + "winner not manager");
    }
    if (o.pass)
        o.detail = str(seed_count) + " seeds with jitter, all survivors elect node 1, one manager";
    return o;
}

Outcome fault_injection()
{
    Outcome o;
    RunOptions opt;
    opt.trace_tom = true;
    const auto s = scenario("injection");
    const auto r = run(s, opt);
    o.require(r.ok(), "invariant violation");

    const auto inject_class = std::to_string(static_cast<unsigned>(dirnet::TimerClass::inject_fault));
    const auto tom = records(r.tom_trace);
    const auto applied = where(r.trace, "event", "fault_applied");
    o.require(applied.size() == s.faults.size(), str(applied.size()) + " faults applied");
    for (std::uint32_t i = 0; i < s.faults.size() && o.pass; ++i) {
        const auto& f = s.faults[i];
        const std::string id = inject_class + "." + std::to_string(i);
        std::vector<Tick> fired;
        for (const auto& rec : tom)
            for (const auto& x : rec["fired"])
                if (x == id)
                    fired.push_back(rec["tick"]);
        o.require(fired == std::vector<Tick>{f.at}, "fault " + str(i) + " fired " + str(fired.size()) + " times");
        o.require(applied[i]["tick"] == f.at && applied[i]["node"] == f.node &&
                      applied[i]["kind"] == std::string(to_string(f.kind)),
                  "fault " + str(i) + " applied late or elsewhere");
    }
    if (o.pass)
        o.detail = str(s.faults.size()) + " injections, each fired once and applied on its tick";
    return o;
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"1 figure replay", figure_replay},
        {"2 oracle equivalence", oracle_equivalence},
        {"3 structural invariants", structural_invariants},
        {"4 cyclic periodicity", cyclic_periodicity},
        {"5 detector completeness", detector_completeness},
        {"6 detector adaptation", detector_adaptation},
        {"7 dirnet case analysis", dirnet_case_analysis},
        {"8 election agreement", election_agreement},
        {"9 fault injection", fault_injection},
    };

    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s  %s  (%s)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
