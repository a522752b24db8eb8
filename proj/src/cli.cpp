#include "qnet/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "qnet/capability.hpp"
#include "qnet/harness.hpp"
#include "qnet/oracle.hpp"

namespace qnet {

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
    f << content;
    f.flush();
    if (!f) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

struct RunArgs {
    std::string topology, scenario, out, trace;
    std::optional<std::uint64_t> seed;
};

int do_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
    Topology topo;
    Scenario sc;
    try {
        topo = parse_topology(read_file(a.topology));
    } catch (const ParseError& e) {
        err << a.topology << ": " << e.what() << '\n';
        return 1;
    }
    try {
        sc = parse_scenario(read_file(a.scenario));
    } catch (const ParseError& e) {
        err << a.scenario << ": " << e.what() << '\n';
        return 1;
    }
    if (a.seed) sc.seed = *a.seed;

    std::ostringstream trace;
    ExperimentHooks hooks;
    if (!a.trace.empty()) hooks.trace = &trace;
    std::vector<MetricsRecord> records;
    try {
        records = run_experiment(topo, sc, hooks);
    } catch (const ParseError& e) {
        err << a.scenario << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "experiment failed: " << e.what() << '\n';
        return 2;
    }
    try {
        write_file(a.out, format_metrics(records));
        if (!a.trace.empty()) write_file(a.trace, trace.str());
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return 2;
    }
    auto ok = std::count_if(records.begin(), records.end(),
                            [](const MetricsRecord& r) { return r.success(); });
    out << records.size() << " records, " << ok << " successful, written to " << a.out << '\n';
    return 0;
}

int do_validate(const std::string& path, std::ostream& out, std::ostream& err) {
    try {
        auto topo = parse_topology(read_file(path));
        out << path << ": ok, " << topo.nodes.size() << " nodes, " << topo.edges.size()
            << " edges\n";
        return 0;
    } catch (const std::exception& e) {
        err << path << ": " << e.what() << '\n';
        return 1;
    }
}

int do_oracle(std::size_t cases, std::uint64_t seed, std::ostream& out) {
    auto start = std::chrono::steady_clock::now();
    auto r = run_oracle_suite(cases, seed);
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "cases %zu\npurify fidelity    %.3e\npurify probability %.3e\n"
                  "swap fidelity      %.3e\ndecoherence        %.3e\n"
                  "max deviation %.3e (%s)\nelapsed %.3f s\n",
                  r.cases, r.purify_fidelity, r.purify_probability, r.swap_fidelity,
                  r.decoherence_fidelity, r.max_deviation(),
                  r.max_deviation() <= 1e-9 ? "within 1e-9" : "ABOVE 1e-9", secs);
    out << buf;
    return r.max_deviation() <= 1e-9 ? 0 : 2;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quantum repeater network simulator", "qnetsim"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment and write per-request metrics");
    run_cmd->add_option("--topology", run.topology, "Topology file")->required();
    run_cmd->add_option("--scenario", run.scenario, "Scenario file")->required();
    run_cmd->add_option("--out", run.out, "Metrics CSV destination")->required();
    run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
    run_cmd->add_option("--trace", run.trace, "Event trace destination");

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "Parse and validate a topology file");
    validate_cmd->add_option("--topology", validate_path, "Topology file")->required();

    auto* matrix_cmd = app.add_subcommand("matrix", "Print the repeater capability matrix");

    std::size_t cases = 128;
    std::uint64_t oracle_seed = 1;
    auto* oracle_cmd =
        app.add_subcommand("oracle", "Compare closed-form maps against the density-matrix model");
    oracle_cmd->add_option("--cases", cases, "Random input pairs")->check(CLI::PositiveNumber);
    oracle_cmd->add_option("--seed", oracle_seed, "Sampling seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n\n" << app.help();
        return 1;
    }

    if (*run_cmd) return do_run(run, out, err);
    if (*validate_cmd) return do_validate(validate_path, out, err);
    if (*matrix_cmd) {
        out << render_matrix();
        return 0;
    }
    if (*oracle_cmd) return do_oracle(cases, oracle_seed, out);
    return 1;
}

} // namespace qnet
