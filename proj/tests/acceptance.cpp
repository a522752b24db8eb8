// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "qnet/capability.hpp"
#include "qnet/cli.hpp"
#include "qnet/harness.hpp"
#include "qnet/oracle.hpp"

using namespace qnet;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

Topology chain(std::size_t n, RepeaterClass cls, double length_km, double p) {
    Topology t;
    for (std::size_t i = 0; i < n; ++i) {
        NodeSpec node;
        node.id = "N" + std::to_string(i);
        node.role = (i == 0 || i + 1 == n) ? NodeRole::EndNode : NodeRole::Repeater;
        node.repeater_class = cls;
        node.memory_count = 4;
        t.nodes.push_back(node);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        EdgeSpec e;
        e.a = t.nodes[i].id;
        e.b = t.nodes[i + 1].id;
        e.id = e.a + "-" + e.b;
        e.length_km = length_km;
        e.alpha_db_per_km = 0.0;
        e.p_src = p;
        t.edges.push_back(e);
    }
    return t;
}

std::vector<NodeIndex> whole(const Graph& g) {
    std::vector<NodeIndex> p(g.node_count());
    std::iota(p.begin(), p.end(), NodeIndex{0});
    return p;
}

ChannelResult run_link(const Topology& t, std::uint64_t seed, RepeaterClass cls, LinkProtocol p,
                       const LinkConfig& cfg) {
    Graph g(t);
    Simulator sim(seed, {.record_trace = false});
    MemoryLedger ledger(g);
    return p == LinkProtocol::SimultaneousLink
               ? simultaneous_link(sim, g, ledger, whole(g), cls, cfg)
               : one_by_one_link(sim, g, ledger, whole(g), cls, cfg);
}

// 1. Every cell of the capability grid.
Verdict table_exactness() {
    using F = FeatureNeed;
    using S = Support;
    const F R = F::Required, N = F::NotRequired, X = F::Selectable;
    struct Row {
        RepeaterClass cls;
        std::array<F, 6> features;  // HEG HEP HES ECC GQM FGO
        std::array<S, 4> support;   // SL OL CO CL
    };
    const std::array<Row, 4> expected{{
        {RepeaterClass::FirstClass, {R, R, R, N, R, N}, {S::Allowed, S::Allowed, S::Allowed, S::Allowed}},
        {RepeaterClass::SecondClass, {R, N, R, R, R, N}, {S::Allowed, S::Allowed, S::Allowed, S::Allowed}},
        {RepeaterClass::ThirdClass, {N, N, N, R, N, R}, {S::Disallowed, S::Allowed, S::Allowed, S::Allowed}},
        {RepeaterClass::AllPhotonic, {R, X, R, X, N, X}, {S::Allowed, S::NotConsidered, S::Allowed, S::NotConsidered}},
    }};
    const auto& m = CapabilityMatrix::standard();
    int matched = 0;
    for (const auto& row : expected) {
        for (int f = 0; f < 6; ++f) matched += m.feature(row.cls, static_cast<Feature>(f)) == row.features[f];
        matched += m.link(row.cls, LinkProtocol::SimultaneousLink) == row.support[0];
        matched += m.link(row.cls, LinkProtocol::OneByOneLink) == row.support[1];
        matched += m.model(row.cls, NetworkModel::ConnectionOriented) == row.support[2];
        matched += m.model(row.cls, NetworkModel::Connectionless) == row.support[3];
    }
    return {matched == 40, std::to_string(matched) + "/40 cells match"};
}

// 2. Closed-form maps against the density-matrix model.
Verdict oracle_equivalence() {
    auto start = std::chrono::steady_clock::now();
    auto r = run_oracle_suite(128, 2024);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu pairs, max deviation %.2e, %.2f s", r.cases,
                  r.max_deviation(), secs);
    return {r.cases >= 100 && r.max_deviation() <= 1e-9 && secs < 10.0, buf};
}

// 3. w of an n-segment chain is w_seg^n.
Verdict composition_law() {
    const double w0 = 0.93;
    double worst = 0.0;
    int runs = 0;
    bool all_ok = true;
    for (std::size_t segs = 2; segs <= 6; ++segs) {
        const double expect = std::pow(w0, double(segs));
        for (auto cls : {RepeaterClass::FirstClass, RepeaterClass::SecondClass,
                         RepeaterClass::AllPhotonic}) {
            auto t = chain(segs + 1, cls, 12.0, 0.35);
            LinkConfig cfg;
            cfg.physics.w0 = w0;
            cfg.physics.w0_logical = w0;
            std::vector<std::pair<LinkProtocol, SwapPolicy>> variants = {
                {LinkProtocol::SimultaneousLink, SwapPolicy::Hierarchical},
                {LinkProtocol::SimultaneousLink, SwapPolicy::LeftToRight}};
            if (cls != RepeaterClass::AllPhotonic) {
                variants.push_back({LinkProtocol::OneByOneLink, SwapPolicy::Hierarchical});
                variants.push_back({LinkProtocol::OneByOneLink, SwapPolicy::LeftToRight});
            }
            for (auto [protocol, policy] : variants) {
                cfg.swap_policy = policy;
                auto r = run_link(t, derive_seed(17, segs * 31 + runs), cls, protocol, cfg);
                ++runs;
                if (!r.success) {
                    all_ok = false;
                    continue;
                }
                worst = std::max(worst, std::abs(r.link->w() - expect));
            }
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d chains, max |w - w_seg^n| = %.2e", runs, worst);
    return {all_ok && worst <= 1e-12, buf};
}

// 4. One-by-one is slower than simultaneous on a 4-hop chain.
Verdict latency_ordering() {
    const int trials = 1000;
    auto t = chain(5, RepeaterClass::FirstClass, 10.0, 0.5);
    std::vector<double> diff;
    double sl_sum = 0, ol_sum = 0;
    for (int i = 0; i < trials; ++i) {
        auto seed = derive_seed(4, static_cast<std::uint64_t>(i));
        auto sl = run_link(t, seed, RepeaterClass::FirstClass, LinkProtocol::SimultaneousLink, {});
        auto ol = run_link(t, seed, RepeaterClass::FirstClass, LinkProtocol::OneByOneLink, {});
        if (!sl.success || !ol.success) return {false, "a session failed"};
        sl_sum += sl.latency;
        ol_sum += ol.latency;
        diff.push_back(ol.latency - sl.latency);
    }
    const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / trials;
    double var = 0.0;
    for (double d : diff) var += (d - mean) * (d - mean);
    const double se = std::sqrt(var / (trials - 1) / trials);
    char buf[160];
    std::snprintf(buf, sizeof buf, "mean sl %.4g s, ol %.4g s, margin %.4g s = %.1f SE",
                  sl_sum / trials, ol_sum / trials, mean, mean / se);
    return {mean > 3.0 * se, buf};
}

// 5. Connection-oriented contention never overfills memory and always releases.
Verdict resource_release() {
    Topology t;
    const char* ids[] = {"A", "B", "C", "D", "R1", "R2", "R3", "R4"};
    for (auto id : ids) {
        NodeSpec n;
        n.id = id;
        n.role = id[0] == 'R' ? NodeRole::Repeater : NodeRole::EndNode;
        n.repeater_class = RepeaterClass::FirstClass;
        n.memory_count = id[0] == 'R' ? 4 : 8;
        n.t_coh = 0.5;
        t.nodes.push_back(n);
    }
    auto edge = [&](const char* a, const char* b) {
        EdgeSpec e;
        e.a = a;
        e.b = b;
        e.id = std::string(a) + "-" + b;
        e.length_km = 15.0;
        e.p_src = 0.4;
        e.alpha_db_per_km = 0.0;
        t.edges.push_back(e);
    };
    edge("A", "R1");
    edge("B", "R1");
    edge("R1", "R2");
    edge("R2", "R3");
    edge("R1", "R4");
    edge("R4", "R3");
    edge("R3", "C");
    edge("R3", "D");

    Scenario sc;
    sc.seed = 5;
    RequestTemplate r;
    r.src = "*";
    r.dst = "*";
    r.law = ArrivalLaw::Poisson;
    r.rate = 2000.0;
    r.count = 100;
    r.deadline = 0.2;
    r.protocol = LinkProtocol::OneByOneLink;
    sc.requests.push_back(r);

    bool over = false, leaked = false;
    std::size_t finished = 0;
    ExperimentHooks hooks;
    hooks.on_trial_start = [&](int, Network& net) {
        net.ledger().set_observer([&](const MemoryLedger& l, NodeIndex n) {
            over |= l.held(n) > l.capacity(n) || l.held(n) < 0;
        });
    };
    hooks.on_outcome = [&](int, const RequestOutcome& o, Network& net) {
        ++finished;
        for (std::size_t i = 1; i + 1 < o.path.size(); ++i)
            leaked |= net.ledger().held_by(o.owner, o.path[i]) != 0;
        leaked |= net.ledger().held_by(o.owner) != 0;
    };
    auto rec = run_experiment(t, sc, hooks);
    auto served = std::count_if(rec.begin(), rec.end(), [](auto& m) { return m.success(); });
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu requests finished, %ld served, overfill=%s, leak=%s",
                  finished, static_cast<long>(served), over ? "yes" : "no", leaked ? "yes" : "no");
    return {finished == 100 && rec.size() == 100 && !over && !leaked, buf};
}

// 6. Connectionless retries under forced loss.
Verdict cl_retry() {
    Graph g(chain(4, RepeaterClass::FirstClass, 10.0, 1.0));
    ConnectionRequest r{.id = 1, .src = 0, .dst = 3, .cls = RepeaterClass::FirstClass,
                        .protocol = LinkProtocol::OneByOneLink,
                        .model = ConnectionModel::Connectionless, .retry_limit = 3};

    Simulator sim(6, {.record_trace = false});
    Network net(sim, g);
    net.set_forced_payload_loss(true);
    auto lost = net.establish(r);
    bool first = lost.reason == FailureReason::RetriesExhausted && lost.frames_emitted == 4;

    Simulator sim2(6, {.record_trace = false});
    Network net2(sim2, g);
    net2.set_forced_payload_loss(true);
    std::optional<RequestOutcome> out;
    net2.submit(r, [&](const RequestOutcome& o) { out = o; });
    StopCondition until_first_drop;
    until_first_drop.done = [&] { return !out && sim2.now() >= 2e-3; };
    sim2.run_until(until_first_drop);
    net2.set_forced_payload_loss(false);
    StopCondition until_done;
    until_done.done = [&] { return out.has_value(); };
    sim2.run_until(until_done);
    bool second = out && out->success && out->retries == 1 && out->frames_emitted == 2;

    char buf[160];
    std::snprintf(buf, sizeof buf, "forced loss: %d frames, %s; lifted: %s after %d retries",
                  lost.frames_emitted, std::string(to_string(lost.reason)).c_str(),
                  out && out->success ? "success" : "failure", out ? out->retries : -1);
    return {first && second, buf};
}

// 7. Hybrid composition and the waypoint mode comparison.
Verdict hybrid() {
    auto t = chain(5, RepeaterClass::FirstClass, 20.0, 0.5);
    Graph g(t);
    ConnectionRequest r{.id = 1, .src = 0, .dst = 4, .cls = RepeaterClass::FirstClass,
                        .protocol = LinkProtocol::OneByOneLink,
                        .model = ConnectionModel::Hybrid, .waypoints = {2}};
    NetworkConfig cfg;
    cfg.link.physics.w0 = 0.9;
    // Areas get a generous window so the comparison is not cut short by retries.
    cfg.cl_timeout = 1.0;
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        Simulator sim(derive_seed(70, i), {.record_trace = false});
        Network net(sim, g, cfg);
        auto o = net.establish(r);
        if (!o.success || o.area_w.size() != 2) return {false, "hybrid request failed"};
        worst = std::max(worst, std::abs(o.link->w() - o.area_w[0] * o.area_w[1]));
    }

    const int trials = 200;
    int slower = 0;
    for (int i = 0; i < trials; ++i) {
        auto seed = derive_seed(71, static_cast<std::uint64_t>(i));
        Simulator s1(seed, {.record_trace = false});
        Network fast(s1, g, cfg);
        auto a = fast.establish(r);
        auto alt_req = r;
        alt_req.hybrid_mode = HybridMode::Alternate;
        Simulator s2(seed, {.record_trace = false});
        Network alt(s2, g, cfg);
        auto b = alt.establish(alt_req);
        if (!a.success || !b.success)
            return {false, "paired trial " + std::to_string(i) + " failed: " +
                               std::string(to_string(a.success ? b.reason : a.reason)) + " " +
                               (a.success ? b.detail : a.detail)};
        slower += b.latency() >= a.latency();
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "max |w - w1*w2| = %.2e; alternate >= fast in %d/%d trials",
                  worst, slower, trials);
    return {worst <= 1e-12 && slower * 100 >= 95 * trials, buf};
}

// 8. Utilization on a 4x4 grid under load. Reserved paths hold every slot for
// the whole setup, per-hop sessions free them swap by swap. At 1200 requests/s
// about a quarter of the reserved requests miss the 0.1 s deadline.
struct LoadSummary {
    std::size_t total = 0, served = 0;
    double fid_std = 0.0;
};

LoadSummary summarize(const std::vector<MetricsRecord>& rec) {
    LoadSummary s;
    std::vector<double> f;
    for (const auto& m : rec) {
        ++s.total;
        if (m.success()) {
            ++s.served;
            f.push_back(*m.end_fidelity);
        }
    }
    if (f.size() > 1) {
        double mean = std::accumulate(f.begin(), f.end(), 0.0) / f.size();
        double var = 0.0;
        for (double x : f) var += (x - mean) * (x - mean);
        s.fid_std = std::sqrt(var / (f.size() - 1));
    }
    return s;
}

std::string grid_topology() {
    std::ostringstream os;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            os << "node G" << r << c << " role=repeater class=first memories=3 t_coh=0.05\n";
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            const char* link = " length_km=200 alpha=0 p_src=0.9 rate_hz=10000\n";
            if (c + 1 < 4) os << "edge G" << r << c << " G" << r << c + 1 << link;
            if (r + 1 < 4) os << "edge G" << r << c << " G" << r + 1 << c << link;
        }
    return os.str();
}

Verdict utilization() {
    const double horizon = 2.0;
    auto topo = parse_topology(grid_topology());
    auto scenario = [&](const char* request) {
        std::string text = "seed=8\ntrials=1\nhorizon=2\n";
        text += request;
        text += " arrivals=poisson:1200 deadline=0.1\n";
        return parse_scenario(text);
    };
    auto co = summarize(run_experiment(
        topo, scenario("request src=* dst=* model=co class=first protocol=sl")));
    auto cl = summarize(run_experiment(
        topo, scenario("request src=* dst=* model=cl class=first protocol=ol retry_limit=5")));
    const double blocking = co.total ? 1.0 - double(co.served) / co.total : 0.0;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "CO blocking %.1f%%, served/s CO %.1f vs CL %.1f, fidelity std CO %.4f vs CL %.4f",
                  100.0 * blocking, co.served / horizon, cl.served / horizon, co.fid_std,
                  cl.fid_std);
    return {blocking > 0.2 && cl.served > co.served && co.fid_std < cl.fid_std, buf};
}

// 9. Third-class fidelity does not depend on coherence time.
Verdict third_class_memory() {
    std::vector<double> w;
    for (double t_coh : {1e-3, 1.0, kInfinity}) {
        auto t = chain(6, RepeaterClass::ThirdClass, 40.0, 1.0);
        for (auto& n : t.nodes) {
            n.t_coh = t_coh;
            n.eps_op = 0.015;
            n.eps_res = 0.01;
        }
        LinkConfig cfg;
        cfg.physics.w0_logical = 0.96;
        auto r = run_link(t, 9, RepeaterClass::ThirdClass, LinkProtocol::OneByOneLink, cfg);
        if (!r.success) return {false, "third-class session failed"};
        w.push_back(r.link->fidelity());
    }
    bool same = std::memcmp(&w[0], &w[1], sizeof(double)) == 0 &&
                std::memcmp(&w[1], &w[2], sizeof(double)) == 0;
    char buf[128];
    std::snprintf(buf, sizeof buf, "F = %.17g / %.17g / %.17g", w[0], w[1], w[2]);
    return {same, buf};
}

// 10. Two CLI runs produce identical files.
Verdict determinism() {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "qnet_acceptance";
    fs::create_directories(dir);
    const std::string data = QNET_DATA_DIR;
    auto run = [&](const std::string& tag) {
        std::ostringstream out, err;
        return run_cli({"run", "--topology", data + "/nine_channel.topo", "--scenario", data + "/nine_channel.scn",
                        "--seed", "7", "--out", (dir / (tag + ".csv")).string(), "--trace",
                        (dir / (tag + ".trace")).string()},
                       out, err);
    };
    if (run("a") != 0 || run("b") != 0) return {false, "run exited non-zero"};
    auto csv_a = read_file((dir / "a.csv").string());
    auto trace_a = read_file((dir / "a.trace").string());
    bool same = csv_a == read_file((dir / "b.csv").string()) &&
                trace_a == read_file((dir / "b.trace").string());
    return {same && !trace_a.empty(),
            std::to_string(csv_a.size()) + " CSV bytes, " + std::to_string(trace_a.size()) +
                " trace bytes, identical=" + (same ? "yes" : "no")};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"capability table", table_exactness},
        {"oracle equivalence", oracle_equivalence},
        {"composition law", composition_law},
        {"latency ordering", latency_ordering},
        {"resource release", resource_release},
        {"connectionless retries", cl_retry},
        {"hybrid correctness", hybrid},
        {"utilization direction", utilization},
        {"third-class memory independence", third_class_memory},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %2zu %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    v.detail.c_str(), secs);
        failed += !v.pass;
    }
    std::fflush(stdout);
    return failed == 0 ? 0 : 1;
}
