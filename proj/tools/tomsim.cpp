// tomsim: run DIR net / detector scenarios on the virtual-time simulator.
//
//   tomsim run <config> [--trace out] [--tom-trace out] [--seed n] [--duration n]
//   tomsim replay-figure [--trace out]
//   tomsim check <config> <golden> [--seed n] [--duration n]
//
// Exit status: 0 ok, 1 property violation or trace mismatch, 2 config error.

#include "tomkit/sim/figure.hpp"
#include "tomkit/sim/runner.hpp"
#include "tomkit/sim/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_violation = 1;
constexpr int exit_config = 2;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<tomkit::Tick> duration;
};

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw tomkit::ConfigError(0, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

tomkit::sim::Scenario load(const std::string& path, const Overrides& o)
{
    auto s = tomkit::sim::parse_config(slurp(path));
    if (o.seed)
        s.link.seed = *o.seed;
    if (o.duration)
        s.duration = *o.duration;
    return s;
}

void write_trace(const tomkit::Trace& t, const std::string& path)
{
    if (path.empty() || path == "-") {
        t.write(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    t.write(out);
}

int report(const tomkit::sim::RunResult& r)
{
    for (const auto& v : r.violations)
        std::cerr << "violation: " << v << '\n';
    std::cerr << "messages: sent " << r.stats.sent << ", delivered " << r.stats.delivered << ", dropped "
              << r.stats.dropped << '\n';
    return r.ok() ? exit_ok : exit_violation;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Time-out manager and failure-detector simulator"};
    app.require_subcommand(1);

    Overrides over;
    std::string config, golden, trace_path, tom_trace_path;

    auto* run = app.add_subcommand("run", "run a scenario and write its trace");
    run->add_option("config", config, "scenario file")->required();
    run->add_option("--trace", trace_path, "trace output (default stdout)");
    run->add_option("--tom-trace", tom_trace_path, "per-cycle time-out manager records");
    run->add_option("--seed", over.seed, "override the link seed");
    run->add_option("--duration", over.duration, "override the duration");

    auto* figure = app.add_subcommand("replay-figure", "replay the four-time-out operating scenario");
    figure->add_option("--trace", trace_path, "trace output (default stdout)");

    auto* check = app.add_subcommand("check", "run a scenario and compare with a golden trace");
    check->add_option("config", config, "scenario file")->required();
    check->add_option("golden", golden, "expected trace")->required();
    check->add_option("--trace", trace_path, "also write the produced trace");
    check->add_option("--seed", over.seed, "override the link seed");
    check->add_option("--duration", over.duration, "override the duration");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*figure) {
            auto r = tomkit::sim::replay_figure();
            write_trace(r.trace, trace_path);
            return exit_ok;
        }

        const auto scenario = load(config, over);
        tomkit::sim::RunOptions opt;
        opt.trace_tom = !tom_trace_path.empty();
        const auto result = tomkit::sim::run(scenario, opt);

        if (*run) {
            write_trace(result.trace, trace_path);
            if (opt.trace_tom)
                write_trace(result.tom_trace, tom_trace_path);
            return report(result);
        }

        if (!trace_path.empty())
            write_trace(result.trace, trace_path);
        int rc = report(result);
        const auto expected = slurp(golden);
        if (expected != result.trace.text()) {
            std::istringstream a(expected), b(result.trace.text());
            std::string la, lb;
            for (std::size_t line = 1;; ++line) {
                const bool ea = !std::getline(a, la);
                const bool eb = !std::getline(b, lb);
                if (ea && eb)
                    break;
                if (ea || eb || la != lb) {
                    std::cerr << "trace differs at line " << line << "\n  expected: " << (ea ? "<eof>" : la)
                              << "\n  actual:   " << (eb ? "<eof>" : lb) << '\n';
                    break;
                }
            }
            return exit_violation;
        }
        std::cerr << "trace matches " << golden << '\n';
        return rc;
    } catch (const tomkit::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_violation;
    }
}
