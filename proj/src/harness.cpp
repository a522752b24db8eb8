#include "qnet/harness.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace qnet {

namespace {

struct Line {
    int number;
    std::vector<std::string> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
    std::vector<Line> lines;
    int number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(pos, end - pos);
        ++number;
        if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        std::istringstream in{std::string(raw)};
        Line line{number, {}};
        for (std::string tok; in >> tok;) line.tokens.push_back(tok);
        if (!line.tokens.empty()) lines.push_back(std::move(line));
        if (end == text.size()) break;
        pos = end + 1;
    }
    return lines;
}

std::pair<std::string, std::string> split_key(const Line& line, const std::string& token) {
    auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ParseError(line.number, "expected key=value, got '" + token + "'");
    return {token.substr(0, eq), token.substr(eq + 1)};
}

double to_double(const Line& line, const std::string& key, const std::string& value) {
    if (value == "inf") return kInfinity;
    const char* begin = value.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (value.empty() || end != begin + value.size() || errno == ERANGE || std::isnan(v))
        throw ParseError(line.number, "malformed value for " + key + ": '" + value + "'");
    return v;
}

long long to_int(const Line& line, const std::string& key, const std::string& value) {
    const char* begin = value.c_str();
    char* end = nullptr;
    errno = 0;
    long long v = std::strtoll(begin, &end, 10);
    if (value.empty() || end != begin + value.size() || errno == ERANGE)
        throw ParseError(line.number, "malformed integer for " + key + ": '" + value + "'");
    return v;
}

std::uint64_t to_u64(const Line& line, const std::string& key, const std::string& value) {
    const char* begin = value.c_str();
    char* end = nullptr;
    errno = 0;
    unsigned long long v = std::strtoull(begin, &end, 10);
    if (value.empty() || value[0] == '-' || end != begin + value.size() || errno == ERANGE)
        throw ParseError(line.number, "malformed integer for " + key + ": '" + value + "'");
    return v;
}

bool to_bool(const Line& line, const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ParseError(line.number, "malformed boolean for " + key + ": '" + value + "'");
}

double non_negative(const Line& line, const std::string& key, const std::string& value,
                    const char* what) {
    double v = to_double(line, key, value);
    if (v < 0.0) throw ParseError(line.number, std::string("negative ") + what);
    return v;
}

double probability(const Line& line, const std::string& key, const std::string& value) {
    double v = to_double(line, key, value);
    if (v < 0.0 || v > 1.0) throw ParseError(line.number, key + " outside [0,1]");
    return v;
}

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto end = s.find(sep, pos);
        if (end == std::string::npos) end = s.size();
        out.push_back(s.substr(pos, end - pos));
        pos = end + 1;
    }
    return out;
}

bool is_id(const std::string& s) { return !s.empty() && s.find('=') == std::string::npos; }

} // namespace

Topology parse_topology(std::string_view text) {
    Topology t;
    std::map<std::string, int> node_lines;
    std::vector<int> edge_lines;
    std::map<std::string, int> edge_ids;

    for (const auto& line : tokenize(text)) {
        const auto& kw = line.tokens[0];
        if (kw == "node") {
            if (line.tokens.size() < 2 || !is_id(line.tokens[1]))
                throw ParseError(line.number, "node needs an id");
            NodeSpec n;
            n.id = line.tokens[1];
            std::optional<RepeaterClass> cls;
            for (std::size_t i = 2; i < line.tokens.size(); ++i) {
                auto [key, value] = split_key(line, line.tokens[i]);
                if (key == "role") {
                    auto r = parse_node_role(value);
                    if (!r) throw ParseError(line.number, "unknown role '" + value + "'");
                    n.role = *r;
                } else if (key == "class") {
                    cls = parse_repeater_class(value);
                    if (!cls) throw ParseError(line.number, "unknown class '" + value + "'");
                } else if (key == "memories") {
                    auto m = to_int(line, key, value);
                    if (m < 0) throw ParseError(line.number, "negative memory count");
                    if (m > 1'000'000) throw ParseError(line.number, "memory count too large");
                    n.memory_count = static_cast<int>(m);
                } else if (key == "t_coh") {
                    n.t_coh = to_double(line, key, value);
                    if (!(n.t_coh > 0.0)) throw ParseError(line.number, "t_coh must be positive");
                } else if (key == "eps_op") {
                    n.eps_op = probability(line, key, value);
                } else if (key == "eps_res") {
                    n.eps_res = probability(line, key, value);
                } else if (key == "proc_delay") {
                    n.proc_delay = non_negative(line, key, value, "processing delay");
                } else {
                    throw ParseError(line.number, "unknown node key '" + key + "'");
                }
            }
            n.repeater_class = cls ? cls
                                   : (n.role == NodeRole::EndNode
                                          ? std::nullopt
                                          : std::optional(RepeaterClass::FirstClass));
            if (!node_lines.emplace(n.id, line.number).second)
                throw ParseError(line.number, "duplicate node id '" + n.id + "'");
            t.nodes.push_back(std::move(n));
        } else if (kw == "edge") {
            if (line.tokens.size() < 3 || !is_id(line.tokens[1]) || !is_id(line.tokens[2]))
                throw ParseError(line.number, "edge needs two endpoint ids");
            EdgeSpec e;
            e.a = line.tokens[1];
            e.b = line.tokens[2];
            e.id = e.a + "-" + e.b;
            for (std::size_t i = 3; i < line.tokens.size(); ++i) {
                auto [key, value] = split_key(line, line.tokens[i]);
                if (key == "length_km") {
                    e.length_km = non_negative(line, key, value, "length");
                } else if (key == "alpha") {
                    e.alpha_db_per_km = non_negative(line, key, value, "attenuation");
                } else if (key == "p_src") {
                    e.p_src = probability(line, key, value);
                } else if (key == "eta_det") {
                    e.eta_det = probability(line, key, value);
                } else if (key == "rate_hz") {
                    e.attempt_rate_hz = to_double(line, key, value);
                    if (!(e.attempt_rate_hz > 0.0) || std::isinf(e.attempt_rate_hz))
                        throw ParseError(line.number, "rate_hz must be positive and finite");
                } else if (key == "weight") {
                    e.weight = to_double(line, key, value);
                    if (!(e.weight > 0.0) || std::isinf(e.weight))
                        throw ParseError(line.number, "weight must be positive and finite");
                } else if (key == "id") {
                    if (value.empty()) throw ParseError(line.number, "empty edge id");
                    e.id = value;
                } else {
                    throw ParseError(line.number, "unknown edge key '" + key + "'");
                }
            }
            if (std::isinf(e.length_km))
                throw ParseError(line.number, "length must be finite");
            if (!edge_ids.emplace(e.id, line.number).second)
                throw ParseError(line.number, "duplicate edge id '" + e.id + "'");
            edge_lines.push_back(line.number);
            t.edges.push_back(std::move(e));
        } else {
            throw ParseError(line.number, "unknown keyword '" + kw + "'");
        }
    }

    auto violations = validate_topology(t);
    if (!violations.empty()) {
        const auto& v = violations.front();
        int at = 0;
        if (v.kind == ViolationKind::UnknownEndpoint) {
            for (std::size_t i = 0; i < t.edges.size() && at == 0; ++i)
                if (t.edges[i].a == v.subject || t.edges[i].b == v.subject) at = edge_lines[i];
        } else if (v.kind == ViolationKind::InvalidNodeParameter ||
                   v.kind == ViolationKind::DuplicateNode) {
            at = node_lines.count(v.subject) ? node_lines.at(v.subject) : 0;
        } else {
            for (std::size_t i = t.edges.size(); i-- > 0 && at == 0;)
                if (t.edges[i].id == v.subject) at = edge_lines[i];
        }
        throw ParseError(at, std::string(to_string(v.kind)) + " " + v.subject + ": " + v.reason);
    }
    return t;
}

namespace {

void parse_request(const Line& line, Scenario& sc) {
    RequestTemplate r;
    r.line = line.number;
    bool have_src = false, have_dst = false, have_protocol = false;
    for (std::size_t i = 1; i < line.tokens.size(); ++i) {
        auto [key, value] = split_key(line, line.tokens[i]);
        if (key == "src") {
            r.src = value;
            have_src = !value.empty();
        } else if (key == "dst") {
            r.dst = value;
            have_dst = !value.empty();
        } else if (key == "model") {
            auto m = parse_connection_model(value);
            if (!m) throw ParseError(line.number, "unknown model '" + value + "'");
            r.model = *m;
        } else if (key == "class") {
            auto c = parse_repeater_class(value);
            if (!c) throw ParseError(line.number, "unknown class '" + value + "'");
            r.cls = *c;
        } else if (key == "protocol") {
            auto p = parse_link_protocol(value);
            if (!p) throw ParseError(line.number, "unknown protocol '" + value + "'");
            r.protocol = *p;
            have_protocol = true;
        } else if (key == "f_min") {
            r.f_min = to_double(line, key, value);
            if (r.f_min < 0.25 || r.f_min > 1.0)
                throw ParseError(line.number, "f_min outside [0.25,1]");
        } else if (key == "deadline") {
            r.deadline = non_negative(line, key, value, "deadline");
        } else if (key == "retry_limit") {
            auto n = to_int(line, key, value);
            if (n < 0 || n > 1'000'000) throw ParseError(line.number, "retry_limit out of range");
            r.retry_limit = static_cast<int>(n);
        } else if (key == "waypoints") {
            r.waypoints = split_list(value, ',');
            if (std::any_of(r.waypoints.begin(), r.waypoints.end(),
                            [](const std::string& w) { return w.empty(); }))
                throw ParseError(line.number, "empty waypoint");
        } else if (key == "hybrid_mode") {
            auto m = parse_hybrid_mode(value);
            if (!m) throw ParseError(line.number, "unknown hybrid_mode '" + value + "'");
            r.hybrid_mode = *m;
        } else if (key == "arrivals") {
            auto parts = split_list(value, ':');
            if (parts[0] == "fixed" && parts.size() == 2) {
                r.law = ArrivalLaw::Fixed;
                r.times.clear();
                for (const auto& t : split_list(parts[1], ','))
                    r.times.push_back(non_negative(line, key, t, "arrival time"));
            } else if (parts[0] == "poisson" && (parts.size() == 2 || parts.size() == 3)) {
                r.law = ArrivalLaw::Poisson;
                r.rate = non_negative(line, key, parts[1], "arrival rate");
                if (std::isinf(r.rate)) throw ParseError(line.number, "arrival rate must be finite");
                if (parts.size() == 3) r.count = to_u64(line, key, parts[2]);
            } else {
                throw ParseError(line.number, "malformed arrivals '" + value + "'");
            }
        } else {
            throw ParseError(line.number, "unknown request key '" + key + "'");
        }
    }
    if (!have_src || !have_dst) throw ParseError(line.number, "request needs src= and dst=");
    if (!have_protocol && r.model != ConnectionModel::ConnectionOriented)
        r.protocol = LinkProtocol::OneByOneLink;
    sc.requests.push_back(std::move(r));
}

void parse_physics(const Line& line, PhysicsParams& p) {
    for (std::size_t i = 1; i < line.tokens.size(); ++i) {
        auto [key, value] = split_key(line, line.tokens[i]);
        if (key == "c_fiber") p.c_fiber_km_s = to_double(line, key, value);
        else if (key == "w0") p.w0 = to_double(line, key, value);
        else if (key == "w0_logical") p.w0_logical = to_double(line, key, value);
        else if (key == "f_target") p.purification.f_target = to_double(line, key, value);
        else if (key == "max_rounds") p.purification.max_rounds = static_cast<int>(to_int(line, key, value));
        else if (key == "cluster_overhead") p.cluster_overhead = to_double(line, key, value);
        else if (key == "p_hop") p.p_hop = to_double(line, key, value);
        else throw ParseError(line.number, "unknown physics key '" + key + "'");
    }
    try {
        p.validate();
    } catch (const Error& e) {
        throw ParseError(line.number, e.what());
    }
}

void parse_policy(const Line& line, Scenario& sc) {
    auto& cfg = sc.network;
    for (std::size_t i = 1; i < line.tokens.size(); ++i) {
        auto [key, value] = split_key(line, line.tokens[i]);
        if (key == "swap") {
            if (value == "hierarchical") cfg.link.swap_policy = SwapPolicy::Hierarchical;
            else if (value == "left_to_right") cfg.link.swap_policy = SwapPolicy::LeftToRight;
            else throw ParseError(line.number, "unknown swap policy '" + value + "'");
        } else if (key == "pipelining") {
            cfg.link.pipelining = to_bool(line, key, value);
        } else if (key == "cl_timeout") {
            cfg.cl_timeout = non_negative(line, key, value, "cl_timeout");
        } else if (key == "ttl") {
            auto n = to_int(line, key, value);
            if (n < 1 || n > 255) throw ParseError(line.number, "ttl outside [1,255]");
            cfg.ttl = static_cast<std::uint8_t>(n);
        } else if (key == "controller") {
            sc.controller = value;
        } else if (key == "metric") {
            auto m = parse_cost_metric(value);
            if (!m) throw ParseError(line.number, "unknown metric '" + value + "'");
            cfg.metric = *m;
        } else if (key == "target") {
            bool found = false;
            for (auto s : {BellState::PsiPlus, BellState::PsiMinus, BellState::PhiPlus,
                           BellState::PhiMinus})
                if (to_string(s) == value) {
                    cfg.link.target = s;
                    found = true;
                }
            if (!found) throw ParseError(line.number, "unknown Bell state '" + value + "'");
        } else if (key == "max_events") {
            sc.max_events = to_u64(line, key, value);
        } else {
            throw ParseError(line.number, "unknown policy key '" + key + "'");
        }
    }
}

} // namespace

Scenario parse_scenario(std::string_view text) {
    Scenario sc;
    for (const auto& line : tokenize(text)) {
        const auto& kw = line.tokens[0];
        if (kw.find('=') != std::string::npos) {
            for (const auto& tok : line.tokens) {
                auto [key, value] = split_key(line, tok);
                if (key == "seed") {
                    sc.seed = to_u64(line, key, value);
                } else if (key == "trials") {
                    auto n = to_int(line, key, value);
                    if (n < 1 || n > 100'000'000) throw ParseError(line.number, "trials must be >= 1");
                    sc.trials = static_cast<int>(n);
                } else if (key == "horizon" || key == "time_limit") {
                    sc.horizon = to_double(line, key, value);
                    if (!(sc.horizon > 0.0)) throw ParseError(line.number, "horizon must be positive");
                } else {
                    throw ParseError(line.number, "unknown setting '" + key + "'");
                }
            }
        } else if (kw == "request") {
            parse_request(line, sc);
        } else if (kw == "physics") {
            parse_physics(line, sc.network.link.physics);
        } else if (kw == "allphotonic") {
            for (std::size_t i = 1; i < line.tokens.size(); ++i) {
                auto [key, value] = split_key(line, line.tokens[i]);
                bool b = to_bool(line, key, value);
                if (key == "hep") sc.network.link.allphotonic.hep = b;
                else if (key == "ecc") sc.network.link.allphotonic.ecc = b;
                else if (key == "fgo") sc.network.link.allphotonic.fgo = b;
                else throw ParseError(line.number, "unknown allphotonic key '" + key + "'");
            }
        } else if (kw == "policy") {
            parse_policy(line, sc);
        } else {
            throw ParseError(line.number, "unknown keyword '" + kw + "'");
        }
    }
    for (const auto& r : sc.requests)
        if (r.law == ArrivalLaw::Poisson && !r.count && std::isinf(sc.horizon) && r.rate > 0.0)
            throw ParseError(r.line, "poisson arrivals need horizon= or a count");
    return sc;
}

namespace {

struct Arrival {
    double time;
    std::size_t tmpl;
    std::size_t k;
    ConnectionRequest req;
};

NodeIndex resolve(const Graph& g, const std::string& id, int line) {
    if (auto n = g.find(id)) return *n;
    throw ParseError(line, "unknown node '" + id + "'");
}

std::vector<Arrival> arrivals_for(const Graph& g, const Scenario& sc, Simulator& sim) {
    std::vector<NodeIndex> ends;
    for (NodeIndex n = 0; n < g.node_count(); ++n)
        if (g.node(n).role == NodeRole::EndNode) ends.push_back(n);
    if (ends.size() < 2) {
        ends.clear();
        for (NodeIndex n = 0; n < g.node_count(); ++n) ends.push_back(n);
    }

    std::vector<Arrival> out;
    for (std::size_t i = 0; i < sc.requests.size(); ++i) {
        const auto& t = sc.requests[i];
        std::vector<double> times;
        if (t.law == ArrivalLaw::Fixed) {
            times = t.times;
        } else if (t.rate > 0.0) {
            auto& rng = sim.stream("arrivals:" + std::to_string(i));
            double now = 0.0;
            for (;;) {
                now += rng.exponential(t.rate);
                if (now >= sc.horizon) break;
                if (t.count && times.size() >= *t.count) break;
                times.push_back(now);
            }
        }
        const bool random_src = t.src == "*";
        const bool random_dst = t.dst == "*";
        std::optional<NodeIndex> fixed_src, fixed_dst;
        if (!random_src) fixed_src = resolve(g, t.src, t.line);
        if (!random_dst) fixed_dst = resolve(g, t.dst, t.line);
        std::vector<NodeIndex> waypoints;
        for (const auto& w : t.waypoints) waypoints.push_back(resolve(g, w, t.line));
        if ((random_src || random_dst) && ends.size() < 2)
            throw ParseError(t.line, "random endpoints need at least two nodes");

        auto& pick = sim.stream("endpoints:" + std::to_string(i));
        for (std::size_t k = 0; k < times.size(); ++k) {
            NodeIndex src = fixed_src ? *fixed_src : ends[pick.index(ends.size())];
            NodeIndex dst = 0;
            if (fixed_dst) {
                dst = *fixed_dst;
            } else {
                do dst = ends[pick.index(ends.size())];
                while (dst == src && std::count_if(ends.begin(), ends.end(),
                                                   [&](NodeIndex e) { return e != src; }) > 0);
            }
            ConnectionRequest req;
            req.src = src;
            req.dst = dst;
            req.cls = t.cls;
            req.protocol = t.protocol;
            req.model = t.model;
            req.f_min = t.f_min;
            req.deadline = t.deadline;
            req.retry_limit = t.retry_limit;
            req.waypoints = waypoints;
            req.hybrid_mode = t.hybrid_mode;
            out.push_back({times[k], i, k, std::move(req)});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Arrival& a, const Arrival& b) {
        if (a.time != b.time) return a.time < b.time;
        if (a.tmpl != b.tmpl) return a.tmpl < b.tmpl;
        return a.k < b.k;
    });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].req.id = i + 1;
    return out;
}

MetricsRecord to_record(const RequestOutcome& o, int trial) {
    MetricsRecord m;
    m.request_id = o.request_id;
    m.trial = trial;
    m.model = o.model;
    m.cls = o.cls;
    m.protocol = o.protocol;
    m.outcome = o.success ? FailureReason::None : o.reason;
    m.setup_latency_s = std::max(0.0, o.latency());
    if (o.success && o.link) m.end_fidelity = o.link->fidelity();
    m.attempts_total = o.attempts_total;
    m.purification_rounds = o.purification_rounds;
    m.retries = o.retries;
    m.node_occupancy_s = std::max(0.0, o.occupancy_s);
    m.issued_at = o.issued_at;
    return m;
}

} // namespace

std::vector<MetricsRecord> run_experiment(const Topology& topology, const Scenario& scenario,
                                          const ExperimentHooks& hooks) {
    const Graph graph(topology);
    NetworkConfig cfg = scenario.network;
    if (scenario.controller) {
        auto c = graph.find(*scenario.controller);
        if (!c) throw Error(ErrorKind::InvalidArgument, "unknown controller node '" + *scenario.controller + "'");
        cfg.controller = *c;
    }
    std::vector<MetricsRecord> records;
    for (int trial = 0; trial < scenario.trials; ++trial) {
        SimConfig sim_cfg;
        sim_cfg.c_fiber_km_s = cfg.link.physics.c_fiber_km_s;
        sim_cfg.max_events = scenario.max_events;
        sim_cfg.record_trace = hooks.trace != nullptr;
        Simulator sim(derive_seed(scenario.seed, static_cast<std::uint64_t>(trial)), sim_cfg);
        Network net(sim, graph, cfg);
        if (hooks.on_trial_start) hooks.on_trial_start(trial, net);

        auto arrivals = arrivals_for(graph, scenario, sim);
        std::vector<std::optional<MetricsRecord>> rows(arrivals.size());
        for (std::size_t i = 0; i < arrivals.size(); ++i) {
            const auto& a = arrivals[i];
            std::string summary =
                sim.tracing() ? "arrival request " + std::to_string(a.req.id) : std::string();
            sim.schedule(a.time, EventKind::ProtocolStep, std::move(summary),
                         [&, i, trial] {
                             net.submit(arrivals[i].req, [&, i, trial](const RequestOutcome& o) {
                                 rows[i] = to_record(o, trial);
                                 if (hooks.on_outcome) hooks.on_outcome(trial, o, net);
                             });
                         });
        }
        StopCondition stop;
        stop.time_limit = scenario.horizon;
        sim.run_until(stop);
        const double end = std::isinf(scenario.horizon) ? sim.now() : scenario.horizon;
        for (std::size_t i = 0; i < arrivals.size(); ++i) {
            if (rows[i]) {
                records.push_back(*rows[i]);
                continue;
            }
            // Still in flight (or never issued) when the horizon closed.
            MetricsRecord m;
            const auto& req = arrivals[i].req;
            m.request_id = req.id;
            m.trial = trial;
            m.model = req.model;
            m.cls = req.cls;
            m.protocol = req.protocol;
            m.outcome = FailureReason::Timeout;
            m.setup_latency_s = std::max(0.0, end - arrivals[i].time);
            m.issued_at = arrivals[i].time;
            records.push_back(m);
        }
        if (hooks.trace) {
            *hooks.trace << "# trial " << trial << '\n';
            sim.write_trace(*hooks.trace);
        }
    }
    return records;
}

void emit_metrics(const std::vector<MetricsRecord>& records, std::ostream& out) {
    out << kMetricsHeader << '\n';
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return std::string(buf);
    };
    for (const auto& r : records) {
        out << r.request_id << ',' << r.trial << ',' << to_string(r.model) << ','
            << to_string(r.cls) << ',' << to_string(r.protocol) << ','
            << (r.success() ? std::string("success")
                            : "failure:" + std::string(to_string(r.outcome)))
            << ',' << num(r.setup_latency_s) << ','
            << (r.end_fidelity ? num(*r.end_fidelity) : std::string()) << ','
            << r.attempts_total << ',' << r.purification_rounds << ',' << r.retries << ','
            << num(r.node_occupancy_s) << '\n';
    }
    if (!out) throw Error(ErrorKind::Io, "failed to write metrics");
}

std::string format_metrics(const std::vector<MetricsRecord>& records) {
    std::ostringstream os;
    emit_metrics(records, os);
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace qnet
