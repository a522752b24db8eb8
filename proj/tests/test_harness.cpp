#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "qnet/harness.hpp"

using namespace qnet;

namespace {

int parse_error_line(std::string_view text, bool topology = true) {
    try {
        if (topology) parse_topology(text);
        else parse_scenario(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return -1;
}

std::string data(const char* name) { return read_file(std::string(QNET_DATA_DIR) + "/" + name); }

std::size_t count_lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_CASE("two-node topology fills defaults") {
    auto t = parse_topology("node A role=end\nnode B role=end\nedge A B length_km=10");
    REQUIRE(t.nodes.size() == 2);
    REQUIRE(t.edges.size() == 1);
    CHECK(t.nodes[0].role == NodeRole::EndNode);
    CHECK_FALSE(t.nodes[0].repeater_class.has_value());
    CHECK(t.edges[0].length_km == 10.0);
    CHECK(t.edges[0].id == "A-B");
    CHECK(t.edges[0].p_src == EdgeSpec{}.p_src);
    CHECK(validate_topology(t).empty());
}

TEST_CASE("repeaters default to first class") {
    auto t = parse_topology("node R role=repeater\nnode S role=switch class=third");
    CHECK(t.nodes[0].repeater_class == RepeaterClass::FirstClass);
    CHECK(t.nodes[1].repeater_class == RepeaterClass::ThirdClass);
}

TEST_CASE("duplicate node is reported on its line") {
    CHECK(parse_error_line("node A role=end\nnode A role=end") == 2);
    try {
        parse_topology("node A role=end\nnode A role=end");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    }
}

TEST_CASE("negative length is rejected before endpoint lookup") {
    try {
        parse_topology("edge A B length_km=-1");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
        CHECK(std::string(e.what()).find("negative length") != std::string::npos);
    }
}

TEST_CASE("topology errors carry line numbers") {
    CHECK(parse_error_line("node A\n\n# comment\nbogus A") == 4);
    CHECK(parse_error_line("node A memories=x") == 1);
    CHECK(parse_error_line("node A role=end\nnode B t_coh=0") == 2);
    CHECK(parse_error_line("node A colour=red") == 1);
    CHECK(parse_error_line("node A\nnode B\nedge A C") == 3);
    CHECK(parse_error_line("node A\nnode B\nedge A B\nedge A B") == 4);
    CHECK(parse_error_line("node A\nedge A A") == 2);
    CHECK(parse_error_line("node A\nnode B\nedge A B p_src=1.5") == 3);
    CHECK(parse_error_line("node A\nnode B\nedge A B weight=0") == 3);
}

TEST_CASE("t_coh accepts inf and comments are stripped") {
    auto t = parse_topology("node A role=end t_coh=inf # trailing\nnode B role=end t_coh=0.5");
    CHECK(std::isinf(t.nodes[0].t_coh));
    CHECK(t.nodes[1].t_coh == 0.5);
}

TEST_CASE("nine-channel data file parses with labelled channels") {
    auto t = parse_topology(data("nine_channel.topo"));
    CHECK(t.nodes.size() == 11);
    REQUIRE(t.edges.size() == 10);
    CHECK(t.edges[0].id == "1");
    CHECK(t.edges[9].id == "10");
}

TEST_CASE("scenario grammar") {
    auto sc = parse_scenario(
        "seed=9 trials=3\n"
        "request src=A dst=B model=co class=first protocol=sl f_min=0.8 deadline=10 "
        "arrivals=poisson:0.5:4\n"
        "request src=A dst=B model=hybrid class=second waypoints=R1,R2 hybrid_mode=alternate\n"
        "physics w0=0.9 f_target=0.95 max_rounds=3\n"
        "allphotonic hep=true\n"
        "policy swap=left_to_right pipelining=false cl_timeout=0.5 ttl=8 controller=A\n");
    CHECK(sc.seed == 9);
    CHECK(sc.trials == 3);
    REQUIRE(sc.requests.size() == 2);
    const auto& r = sc.requests[0];
    CHECK(r.law == ArrivalLaw::Poisson);
    CHECK(r.rate == 0.5);
    CHECK(r.count == 4u);
    CHECK(r.f_min == 0.8);
    CHECK(r.deadline == 10.0);
    CHECK(sc.requests[1].model == ConnectionModel::Hybrid);
    CHECK(sc.requests[1].protocol == LinkProtocol::OneByOneLink);
    CHECK(sc.requests[1].waypoints == std::vector<std::string>{"R1", "R2"});
    CHECK(sc.requests[1].hybrid_mode == HybridMode::Alternate);
    CHECK(sc.network.link.physics.w0 == 0.9);
    CHECK(sc.network.link.physics.purification.max_rounds == 3);
    CHECK(sc.network.link.allphotonic.hep);
    CHECK(sc.network.link.swap_policy == SwapPolicy::LeftToRight);
    CHECK_FALSE(sc.network.link.pipelining);
    CHECK(sc.network.cl_timeout == 0.5);
    CHECK(sc.network.ttl == 8);
    CHECK(sc.controller == "A");
}

TEST_CASE("scenario errors") {
    CHECK(parse_error_line("trials=0", false) == 1);
    CHECK(parse_error_line("seed=1\nrequest src=A", false) == 2);
    CHECK(parse_error_line("request src=A dst=B arrivals=poisson:-1", false) == 1);
    CHECK(parse_error_line("request src=A dst=B arrivals=poisson:2", false) == 1);
    CHECK(parse_error_line("request src=A dst=B model=mesh", false) == 1);
    CHECK(parse_error_line("physics w0=2", false) == 1);
    CHECK(parse_error_line("\npolicy ttl=0", false) == 2);
    CHECK(parse_error_line("horizon=5\nrequest src=A dst=B arrivals=poisson:2", false) == -1);
}

TEST_CASE("impossible request becomes a failure record") {
    auto t = parse_topology(data("chain5.topo"));
    auto sc = parse_scenario("request src=N0 dst=N4 model=co class=third protocol=sl");
    auto rec = run_experiment(t, sc);
    REQUIRE(rec.size() == 1);
    CHECK(rec[0].outcome == FailureReason::CapabilityViolation);
    CHECK_FALSE(rec[0].end_fidelity);
}

TEST_CASE("zero requests give no records") {
    auto t = parse_topology(data("chain5.topo"));
    CHECK(run_experiment(t, parse_scenario("trials=3")).empty());
}

TEST_CASE("unknown scenario node is a parse error on the request line") {
    auto t = parse_topology(data("chain5.topo"));
    auto sc = parse_scenario("seed=1\nrequest src=N0 dst=Q9");
    CHECK_THROWS_AS(run_experiment(t, sc), ParseError);
}

TEST_CASE("records are ordered by trial then arrival") {
    auto t = parse_topology(data("chain5.topo"));
    auto sc = parse_scenario(data("mixed.scn"));
    auto rec = run_experiment(t, sc);
    REQUIRE(rec.size() == 6);
    for (std::size_t i = 0; i < rec.size(); ++i) {
        CHECK(rec[i].trial == static_cast<int>(i / 3));
        CHECK(rec[i].request_id == i % 3 + 1);
        CHECK(rec[i].end_fidelity.has_value() == rec[i].success());
        CHECK(rec[i].setup_latency_s >= 0.0);
        CHECK(rec[i].node_occupancy_s >= 0.0);
    }
    CHECK(rec[1].outcome == FailureReason::CapabilityViolation);
}

TEST_CASE("trials differ but reruns reproduce") {
    auto t = parse_topology(data("chain5.topo"));
    auto sc = parse_scenario("seed=3 trials=2\nrequest src=N0 dst=N4 model=co protocol=ol");
    auto a = format_metrics(run_experiment(t, sc));
    auto b = format_metrics(run_experiment(t, sc));
    CHECK(a == b);
    auto rec = run_experiment(t, sc);
    CHECK(rec[0].setup_latency_s != rec[1].setup_latency_s);
}

TEST_CASE("arrivals are sorted and numbered") {
    auto t = parse_topology(data("chain5.topo"));
    auto sc = parse_scenario("request src=N0 dst=N4 arrivals=fixed:0.3,0.1\n"
                             "request src=N4 dst=N0 arrivals=fixed:0.2");
    auto rec = run_experiment(t, sc);
    REQUIRE(rec.size() == 3);
    CHECK(rec[0].issued_at == 0.1);
    CHECK(rec[1].issued_at == 0.2);
    CHECK(rec[2].issued_at == 0.3);
}

TEST_CASE("poisson arrivals with random endpoints stay in the horizon") {
    auto t = parse_topology(data("nine_channel.topo"));
    auto sc = parse_scenario("horizon=1\nrequest src=* dst=* model=cl arrivals=poisson:50");
    auto rec = run_experiment(t, sc);
    CHECK(rec.size() > 20);
    for (const auto& r : rec) CHECK(r.issued_at < 1.0);
}

TEST_CASE("requests cut off by the horizon time out") {
    auto t = parse_topology("node A role=end\nnode B role=end\nedge A B length_km=1 p_src=0.0001 rate_hz=10");
    auto sc = parse_scenario("horizon=0.05\nrequest src=A dst=B");
    auto rec = run_experiment(t, sc);
    REQUIRE(rec.size() == 1);
    CHECK(rec[0].outcome == FailureReason::Timeout);
    CHECK(rec[0].setup_latency_s == doctest::Approx(0.05));
}

TEST_CASE("emit_metrics format") {
    CHECK(format_metrics({}) == std::string(kMetricsHeader) + "\n");

    MetricsRecord ok;
    ok.request_id = 1;
    ok.setup_latency_s = 1.0 / 3.0;
    ok.end_fidelity = 0.9;
    auto s = format_metrics({ok});
    CHECK(count_lines(s) == 2);
    CHECK(s.find("1,0,co,first,sl,success,0.333333333,0.9,0,0,0,0\n") != std::string::npos);

    MetricsRecord bad;
    bad.request_id = 2;
    bad.outcome = FailureReason::NoPath;
    s = format_metrics({ok, bad});
    CHECK(s.find("2,0,co,first,sl,failure:NoPath,0,,0,0,0,0\n") != std::string::npos);
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);)
        CHECK(std::count(line.begin(), line.end(), ',') == 11);
    CHECK(format_metrics({ok, bad}) == s);
}

TEST_CASE("trace output is prefixed per trial") {
    auto t = parse_topology(data("chain5.topo"));
    auto sc = parse_scenario("trials=2\nrequest src=N0 dst=N4");
    std::ostringstream trace;
    run_experiment(t, sc, {.trace = &trace});
    auto s = trace.str();
    CHECK(s.rfind("# trial 0\n", 0) == 0);
    CHECK(s.find("# trial 1\n") != std::string::npos);
}
