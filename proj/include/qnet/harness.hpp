#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qnet/netlayer.hpp"

namespace qnet {

// Line-oriented topology text. Throws ParseError with a 1-based line number.
Topology parse_topology(std::string_view text);

enum class ArrivalLaw { Fixed, Poisson };

struct RequestTemplate {
    std::string src;  // "*" picks a random end node per arrival
    std::string dst;
    ConnectionModel model = ConnectionModel::ConnectionOriented;
    RepeaterClass cls = RepeaterClass::FirstClass;
    LinkProtocol protocol = LinkProtocol::SimultaneousLink;
    double f_min = 0.25;
    double deadline = kInfinity;
    int retry_limit = 0;
    std::vector<std::string> waypoints;
    HybridMode hybrid_mode = HybridMode::Fast;
    ArrivalLaw law = ArrivalLaw::Fixed;
    std::vector<double> times{0.0};
    double rate = 0.0;                    // Poisson arrivals per second
    std::optional<std::size_t> count;     // Poisson: stop after this many arrivals
    int line = 0;
};

struct Scenario {
    std::uint64_t seed = 1;
    int trials = 1;
    double horizon = kInfinity;  // simulated seconds per trial
    std::uint64_t max_events = 50'000'000;
    std::optional<std::string> controller;
    NetworkConfig network;
    std::vector<RequestTemplate> requests;
};

Scenario parse_scenario(std::string_view text);

struct MetricsRecord {
    std::uint64_t request_id = 0;
    int trial = 0;
    ConnectionModel model = ConnectionModel::ConnectionOriented;
    RepeaterClass cls = RepeaterClass::FirstClass;
    LinkProtocol protocol = LinkProtocol::SimultaneousLink;
    FailureReason outcome = FailureReason::None;  // None means success
    double setup_latency_s = 0.0;
    std::optional<double> end_fidelity;
    int attempts_total = 0;
    int purification_rounds = 0;
    int retries = 0;
    double node_occupancy_s = 0.0;
    // Not part of the CSV.
    double issued_at = 0.0;

    bool success() const { return outcome == FailureReason::None; }
};

struct ExperimentHooks {
    std::ostream* trace = nullptr;  // receives every trial's event trace
    // Called once per trial after the network is built.
    std::function<void(int trial, Network&)> on_trial_start;
    // Called when a request terminates.
    std::function<void(int trial, const RequestOutcome&, Network&)> on_outcome;
};

std::vector<MetricsRecord> run_experiment(const Topology& topology, const Scenario& scenario,
                                          const ExperimentHooks& hooks = {});

inline constexpr std::string_view kMetricsHeader =
    "request_id,trial,model,class,link_protocol,outcome,setup_latency_s,end_fidelity,"
    "attempts_total,purification_rounds,retries,node_occupancy_s";

void emit_metrics(const std::vector<MetricsRecord>& records, std::ostream& out);
std::string format_metrics(const std::vector<MetricsRecord>& records);

std::string read_file(const std::string& path);  // throws Error(Io)

} // namespace qnet
