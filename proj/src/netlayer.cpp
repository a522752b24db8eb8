#include "qnet/netlayer.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace qnet {

std::string_view to_string(ConnectionModel m) {
    switch (m) {
    case ConnectionModel::ConnectionOriented: return "co";
    case ConnectionModel::Connectionless: return "cl";
    case ConnectionModel::Hybrid: return "hybrid";
    }
    return "?";
}

std::optional<ConnectionModel> parse_connection_model(std::string_view s) {
    for (auto m : {ConnectionModel::ConnectionOriented, ConnectionModel::Connectionless,
                   ConnectionModel::Hybrid})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

std::string_view to_string(HybridMode m) {
    return m == HybridMode::Fast ? "fast" : "alternate";
}

std::optional<HybridMode> parse_hybrid_mode(std::string_view s) {
    if (s == "fast") return HybridMode::Fast;
    if (s == "alternate") return HybridMode::Alternate;
    return std::nullopt;
}

namespace {

constexpr double kMinClTimeout = 1e-6;

std::uint8_t class_code(RepeaterClass c) { return static_cast<std::uint8_t>(c); }

struct Request;
using RequestPtr = std::shared_ptr<Request>;

struct Span {
    std::size_t left;
    std::size_t right;
    WernerLink link;
};

struct Request {
    ConnectionRequest req;
    Network::Callback callback;
    RequestOutcome out;
    bool done = false;

    // connection-oriented
    std::vector<SlotDemand> demand;
    bool waiting = false;

    // connectionless
    int attempt = 0;
    FrameBytes frame{};
    double cl_timeout = kInfinity;

    std::shared_ptr<LinkSession> session;
    std::vector<std::shared_ptr<LinkSession>> sessions;

    // hybrid fast mode
    std::vector<NodeIndex> stops;
    std::vector<RequestPtr> areas;
    std::vector<Span> spans;
    int final_heralds = 0;
};

} // namespace

struct Network::Impl {
    Simulator& sim;
    const Graph& graph;
    NetworkConfig cfg;
    MemoryLedger ledger;
    std::map<RepeaterClass, RoutingTables> tables;
    std::deque<RequestPtr> waiting;
    std::set<RequestPtr> live;
    bool forced_loss = false;
    std::uint64_t internal_ids = 1ull << 62;

    Impl(Simulator& s, const Graph& g, NetworkConfig c)
        : sim(s), graph(g), cfg(std::move(c)), ledger(g) {
        if (cfg.controller && *cfg.controller >= graph.node_count())
            throw Error(ErrorKind::InvalidArgument, "controller node out of range");
        if (cfg.ttl == 0) throw Error(ErrorKind::InvalidArgument, "ttl must be positive");
    }

    NodeIndex controller() const { return cfg.controller.value_or(0); }

    const RoutingTables& routes(RepeaterClass cls) {
        auto it = tables.find(cls);
        if (it == tables.end())
            it = tables.emplace(cls, build_routing_tables(graph, cfg.metric, cls)).first;
        return it->second;
    }

    std::string label(const Request& r, std::string_view what) const {
        if (!sim.tracing()) return {};
        return "request " + std::to_string(r.req.id) + " " + std::string(what);
    }

    // ---- bookkeeping -------------------------------------------------

    void submit(const ConnectionRequest& req, Network::Callback cb) {
        auto r = std::make_shared<Request>();
        r->req = req;
        r->callback = std::move(cb);
        r->out.request_id = req.id;
        r->out.owner = sim.fresh_id();
        r->out.model = req.model;
        r->out.cls = req.cls;
        r->out.protocol = req.protocol;
        r->out.issued_at = sim.now();
        live.insert(r);

        if (req.src >= graph.node_count() || req.dst >= graph.node_count() || req.src == req.dst) {
            finish(r, false, FailureReason::InvalidRequest, "source and destination must differ");
            return;
        }
        if (!(req.f_min >= 0.25 && req.f_min <= 1.0)) {
            finish(r, false, FailureReason::InvalidRequest, "f_min outside [0.25,1]");
            return;
        }
        if (req.deadline < kInfinity) {
            sim.schedule(sim.now() + std::max(0.0, req.deadline), EventKind::Timeout,
                         label(*r, "deadline"), [this, r] {
                             if (!r->done)
                                 finish(r, false, FailureReason::Timeout, "request deadline passed");
                         });
        }
        switch (req.model) {
        case ConnectionModel::ConnectionOriented: start_co(r); break;
        case ConnectionModel::Connectionless: start_cl(r); break;
        case ConnectionModel::Hybrid: start_hybrid(r); break;
        }
    }

    void absorb_stats(Request& r) {
        for (const auto& s : r.sessions) {
            r.out.attempts_total += s->stats().attempts_total();
            r.out.purification_rounds += s->stats().purification_rounds;
        }
        r.sessions.clear();
    }

    void finish(const RequestPtr& r, bool success, FailureReason reason, std::string detail,
                bool notify = true) {
        if (r->done) return;
        r->done = true;
        live.erase(r);
        if (r->waiting) {
            std::erase(waiting, r);
            r->waiting = false;
        }
        if (r->session) r->session->abort(reason, detail);
        const double now = sim.now();
        for (const auto& area : r->areas) {
            cancel(area);
            absorb_stats(*area);
            r->out.attempts_total += area->out.attempts_total;
            r->out.purification_rounds += area->out.purification_rounds;
            r->out.retries += area->out.retries;
            r->out.frames_emitted += area->out.frames_emitted;
        }
        absorb_stats(*r);
        ledger.release_owner(r->out.owner, now);

        const NodeIndex src = r->req.src;
        const NodeIndex dst = r->req.dst;
        auto interior = [src, dst](NodeIndex n) { return n != src && n != dst; };
        double occupancy = ledger.slot_seconds(r->out.owner, interior, now);
        for (const auto& area : r->areas) {
            ledger.release_owner(area->out.owner, now);
            occupancy += ledger.slot_seconds(area->out.owner, interior, now);
        }
        r->out.occupancy_s = occupancy;
        r->out.success = success;
        r->out.reason = success ? FailureReason::None : reason;
        r->out.detail = std::move(detail);
        if (!success) r->out.link.reset();
        r->out.finished_at = now;
        if (notify && r->callback) r->callback(r->out);
        admit_waiting();
    }

    void cancel(const RequestPtr& r) {
        if (r->done) return;
        r->callback = nullptr;
        finish(r, false, FailureReason::Timeout, "cancelled", false);
    }

    void succeed(const RequestPtr& r, WernerLink link) {
        r->out.link = link;
        if (link.fidelity() < r->req.f_min) {
            finish(r, false, FailureReason::FidelityBelowMinimum,
                   "end fidelity below the requested minimum");
            return;
        }
        r->out.link = link;
        finish(r, true, FailureReason::None, {});
    }

    LinkConfig session_config(ResourceMode mode) const {
        LinkConfig c = cfg.link;
        c.resources = mode;
        c.deadline = kInfinity;
        return c;
    }

    // ---- connection-oriented -----------------------------------------

    void start_co(const RequestPtr& r, std::vector<NodeIndex> waypoints = {}) {
        const auto& req = r->req;
        if (auto v = validate_request(req.cls, req.protocol, NetworkModel::ConnectionOriented)) {
            finish(r, false, FailureReason::CapabilityViolation, v->reason);
            return;
        }
        const NodeIndex ctrl = controller();
        sim.send_classical(graph.node(req.src), graph.node(ctrl), "connect-request",
                           graph.distance_km(req.src, ctrl),
                           [this, r, waypoints = std::move(waypoints)] {
                               if (!r->done) route_co(r, waypoints);
                           });
    }

    void route_co(const RequestPtr& r, const std::vector<NodeIndex>& waypoints) {
        const auto& req = r->req;
        auto path =
            compute_path(graph, req.src, req.dst, cfg.metric, {.cls = req.cls, .waypoints = waypoints});
        if (!path) {
            finish(r, false, FailureReason::NoPath, "no class-homogeneous path");
            return;
        }
        r->out.path = *path;
        r->demand = path_demand(*path, req.cls, cfg.link);
        for (const auto& d : r->demand) {
            if (d.slots > ledger.capacity(d.node)) {
                finish(r, false, FailureReason::ResourceExhausted,
                       "node " + graph.node(d.node).id + " can never hold the reservation");
                return;
            }
        }
        if (waiting.empty() && ledger.can_acquire(r->demand)) {
            admit(r);
        } else {
            r->waiting = true;
            waiting.push_back(r);
        }
    }

    void admit_waiting() {
        for (auto it = waiting.begin(); it != waiting.end();) {
            RequestPtr r = *it;
            if (!r->done && ledger.can_acquire(r->demand)) {
                it = waiting.erase(it);
                r->waiting = false;
                admit(r);
            } else {
                ++it;
            }
        }
    }

    void admit(const RequestPtr& r) {
        ledger.acquire(r->out.owner, r->demand, sim.now());
        const NodeIndex ctrl = controller();
        auto pending = std::make_shared<std::size_t>(r->out.path.size());
        for (NodeIndex n : r->out.path) {
            sim.send_classical(graph.node(ctrl), graph.node(n), "operational-order",
                               graph.distance_km(ctrl, n), [this, r, pending] {
                                   if (r->done) return;
                                   if (--*pending == 0) run_co_session(r);
                               });
        }
    }

    void run_co_session(const RequestPtr& r) {
        LinkRequest lr;
        lr.path = r->out.path;
        lr.destination = r->req.dst;
        lr.cls = r->req.cls;
        lr.protocol = r->req.protocol;
        lr.owner = r->out.owner;
        SessionHooks hooks;
        hooks.on_done = [this, r](const ChannelResult& res) {
            if (r->done) return;
            r->session.reset();
            if (res.success) {
                succeed(r, *res.link);
                return;
            }
            r->out.drops.push_back(res.reason);
            if (r->out.retries < r->req.retry_limit) {
                ++r->out.retries;
                run_co_session(r);
                return;
            }
            finish(r, false, r->req.retry_limit > 0 ? FailureReason::RetriesExhausted : res.reason,
                   res.detail);
        };
        auto s = start_link_session(sim, graph, ledger, std::move(lr),
                                    session_config(ResourceMode::PreReserved), std::move(hooks));
        r->sessions.push_back(s);
        if (!s->finished()) r->session = s;
    }

    // ---- connectionless ----------------------------------------------

    double expected_cl_time(NodeIndex src, NodeIndex dst, RepeaterClass cls) {
        const auto& t = routes(cls);
        const double c = cfg.link.physics.c_fiber_km_s;
        double total = graph.distance_km(dst, src) / c;
        NodeIndex at = src;
        std::size_t hops = 0;
        while (at != dst) {
            auto e = t.next_edge(at, dst);
            if (!e || ++hops > graph.node_count()) return kInfinity;
            const auto& edge = graph.edge(*e);
            at = graph.edge_other(*e, at);
            total += graph.node(at).proc_delay;
            if (cls == RepeaterClass::ThirdClass) {
                total += edge.length_km / c;
                continue;
            }
            double p = channel_success_prob(edge);
            if (cls == RepeaterClass::AllPhotonic) p *= cfg.link.physics.cluster_overhead;
            if (p <= 0.0) return kInfinity;
            total += 1.0 / (edge.attempt_rate_hz * p) + 2.0 * edge.length_km / c;
        }
        return total;
    }

    void start_cl(const RequestPtr& r) {
        const auto& req = r->req;
        if (auto v = validate_request(req.cls, req.protocol, NetworkModel::Connectionless)) {
            finish(r, false, FailureReason::CapabilityViolation, v->reason);
            return;
        }
        if (!routes(req.cls).next_edge(req.src, req.dst)) {
            finish(r, false, FailureReason::NoPath, "no route in the routing tables");
            return;
        }
        // The floor keeps zero-length test topologies from timing out at t=0.
        r->cl_timeout = cfg.cl_timeout > 0.0
                            ? cfg.cl_timeout
                            : std::max(3.0 * expected_cl_time(req.src, req.dst, req.cls),
                                       kMinClTimeout);
        cl_attempt(r);
    }

    void cl_attempt(const RequestPtr& r) {
        const auto& req = r->req;
        const int attempt = ++r->attempt;
        ++r->out.frames_emitted;

        FrameHeader h;
        h.frame_id = sim.fresh_id();
        h.src = req.src;
        h.dst = req.dst;
        h.qr_class = class_code(req.cls);
        if (pumping_enabled(req.cls, cfg.link)) h.op_flags |= kOpPurify;
        if (req.cls == RepeaterClass::SecondClass || req.cls == RepeaterClass::ThirdClass)
            h.op_flags |= kOpEcc;
        if (cfg.link.pipelining) h.op_flags |= kOpPipelining;
        h.ttl = cfg.ttl;
        r->frame = encode_frame(h);
        r->out.path.assign(1, req.src);

        const RoutingTables* tables = &routes(req.cls);
        SessionHooks hooks;
        hooks.next_hop = [this, r, tables](NodeIndex at, std::size_t position) {
            HopDecision d;
            if (position > 0 && forced_loss) {
                d.kind = HopDecision::Kind::Drop;
                d.drop_reason = FailureReason::ForcedLoss;
                return d;
            }
            auto fr = forward_frame(graph, at, r->frame, *tables);
            switch (fr.kind) {
            case ForwardResult::Kind::Delivered: d.kind = HopDecision::Kind::Deliver; break;
            case ForwardResult::Kind::Dropped:
                d.kind = HopDecision::Kind::Drop;
                d.drop_reason = fr.reason;
                break;
            case ForwardResult::Kind::Forwarded:
                d.kind = HopDecision::Kind::Forward;
                d.next = graph.edge_other(fr.edge, at);
                r->frame = fr.frame;
                break;
            }
            return d;
        };
        hooks.on_done = [this, r, attempt](const ChannelResult& res) {
            if (r->done || attempt != r->attempt) return;
            r->session.reset();
            r->out.path = res.path;
            if (res.success) {
                succeed(r, *res.link);
                return;
            }
            // The source only learns about the loss through its timeout.
            r->out.drops.push_back(res.reason);
        };
        LinkRequest lr;
        lr.path = {req.src};
        lr.destination = req.dst;
        lr.cls = req.cls;
        lr.protocol = LinkProtocol::OneByOneLink;
        lr.owner = r->out.owner;
        auto s = start_link_session(sim, graph, ledger, std::move(lr),
                                    session_config(ResourceMode::PerHop), std::move(hooks));
        r->sessions.push_back(s);
        if (r->done) return;
        if (!s->finished()) r->session = s;
        if (r->cl_timeout < kInfinity) {
            sim.schedule_after(r->cl_timeout, EventKind::Timeout, label(*r, "cl-timeout"),
                               [this, r, attempt] { on_cl_timeout(r, attempt); });
        }
    }

    void on_cl_timeout(const RequestPtr& r, int attempt) {
        if (r->done || attempt != r->attempt) return;
        if (r->session) {
            r->session->abort(FailureReason::Timeout, "no confirmation before timeout");
            r->session.reset();
        }
        if (r->out.retries < r->req.retry_limit) {
            ++r->out.retries;
            cl_attempt(r);
            return;
        }
        finish(r, false, FailureReason::RetriesExhausted,
               "no confirmation after " + std::to_string(r->out.frames_emitted) + " frames");
    }

    // ---- hybrid ------------------------------------------------------

    void start_hybrid(const RequestPtr& r) {
        auto& req = r->req;
        if (req.waypoints.empty()) {
            finish(r, false, FailureReason::InvalidRequest, "hybrid request needs waypoints");
            return;
        }
        std::set<NodeIndex> distinct(req.waypoints.begin(), req.waypoints.end());
        for (NodeIndex w : req.waypoints) {
            if (w >= graph.node_count() || w == req.src || w == req.dst ||
                distinct.size() != req.waypoints.size()) {
                finish(r, false, FailureReason::InvalidRequest, "invalid waypoint list");
                return;
            }
        }
        if (req.hybrid_mode == HybridMode::Alternate) {
            req.protocol = LinkProtocol::OneByOneLink;
            r->out.protocol = req.protocol;
            start_co(r, req.waypoints);
            return;
        }
        if (auto v = validate_request(req.cls, LinkProtocol::OneByOneLink,
                                      NetworkModel::Connectionless)) {
            finish(r, false, FailureReason::CapabilityViolation, v->reason);
            return;
        }
        for (NodeIndex w : req.waypoints) {
            const auto& n = graph.node(w);
            if (!can_relay(n, req.cls) || req.cls == RepeaterClass::ThirdClass) {
                finish(r, false, FailureReason::CapabilityViolation,
                       "anchor " + n.id + " cannot swap for this class");
                return;
            }
        }
        const NodeIndex ctrl = controller();
        sim.send_classical(graph.node(req.src), graph.node(ctrl), "connect-request",
                           graph.distance_km(req.src, ctrl), [this, r, ctrl] {
                               if (r->done) return;
                               auto pending =
                                   std::make_shared<std::size_t>(r->req.waypoints.size());
                               for (NodeIndex w : r->req.waypoints) {
                                   sim.send_classical(graph.node(ctrl), graph.node(w),
                                                      "anchor-order", graph.distance_km(ctrl, w),
                                                      [this, r, pending] {
                                                          if (r->done) return;
                                                          if (--*pending == 0) launch_areas(r);
                                                      });
                               }
                           });
    }

    void launch_areas(const RequestPtr& r) {
        const auto& req = r->req;
        r->stops.clear();
        r->stops.push_back(req.src);
        r->stops.insert(r->stops.end(), req.waypoints.begin(), req.waypoints.end());
        r->stops.push_back(req.dst);
        r->out.path = r->stops;
        const std::size_t n_areas = r->stops.size() - 1;
        r->out.area_w.assign(n_areas, 0.0);
        for (std::size_t i = 0; i < n_areas; ++i) {
            r->areas.push_back(std::make_shared<Request>());
        }
        for (std::size_t i = 0; i < n_areas; ++i) {
            auto area = r->areas[i];
            // Each area is driven from its end node where it has one.
            const bool reverse = i + 1 == n_areas && n_areas > 1;
            ConnectionRequest sub;
            sub.id = internal_ids++;
            sub.src = reverse ? r->stops[i + 1] : r->stops[i];
            sub.dst = reverse ? r->stops[i] : r->stops[i + 1];
            sub.cls = req.cls;
            sub.protocol = LinkProtocol::OneByOneLink;
            sub.model = ConnectionModel::Connectionless;
            sub.retry_limit = req.retry_limit;
            init_area(area, sub, r, i);
            if (r->done) return;
        }
    }

    void init_area(const RequestPtr& area, const ConnectionRequest& sub, const RequestPtr& r,
                   std::size_t i) {
        area->req = sub;
        area->out.request_id = sub.id;
        area->out.owner = sim.fresh_id();
        area->out.model = sub.model;
        area->out.cls = sub.cls;
        area->out.protocol = sub.protocol;
        area->out.issued_at = sim.now();
        area->callback = [this, r, i](const RequestOutcome& o) { on_area_done(r, i, o); };
        live.insert(area);
        start_cl(area);
    }

    void on_area_done(const RequestPtr& r, std::size_t i, const RequestOutcome& o) {
        if (r->done) return;
        if (!o.success) {
            finish(r, false, o.reason, "area " + std::to_string(i) + ": " + o.detail);
            return;
        }
        r->out.area_w[i] = o.link->w();
        r->spans.push_back({i, i + 1, *o.link});
        join_areas(r);
    }

    bool decoheres(const Request& r, NodeIndex n) const {
        if (r.req.cls == RepeaterClass::ThirdClass) return false;
        return graph.node(n).repeater_class != RepeaterClass::AllPhotonic;
    }

    WernerLink age(const Request& r, WernerLink link) const {
        const double dt = sim.now() - link.last_updated();
        if (dt <= 0.0) return link;
        double rate = 0.0;
        for (NodeIndex n : {link.a(), link.b()})
            if (decoheres(r, n)) rate += 1.0 / graph.node(n).t_coh;
        if (rate == 0.0) {
            link.set_last_updated(sim.now());
            return link;
        }
        return decohere(link, dt, 1.0 / rate);
    }

    void join_areas(const RequestPtr& r) {
        const std::size_t last = r->stops.size() - 1;
        std::optional<std::size_t> swapped_at;
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t a = 0; a < r->spans.size() && !changed; ++a) {
                for (std::size_t b = 0; b < r->spans.size() && !changed; ++b) {
                    if (r->spans[a].right != r->spans[b].left) continue;
                    const std::size_t j = r->spans[a].right;
                    const NodeIndex anchor = r->stops[j];
                    const auto& spec = graph.node(anchor);
                    WernerLink joined =
                        swap(age(*r, r->spans[a].link), age(*r, r->spans[b].link), anchor, spec,
                             sim.fresh_id(), sim.stream("swap:" + spec.id), cfg.link.allphotonic);
                    Span merged{r->spans[a].left, r->spans[b].right, joined};
                    std::erase_if(r->spans, [&](const Span& s) {
                        return s.left == merged.left || s.right == merged.right;
                    });
                    r->spans.push_back(merged);
                    swapped_at = j;
                    changed = true;
                }
            }
        }
        if (r->spans.size() != 1 || r->spans[0].left != 0 || r->spans[0].right != last) return;
        if (!swapped_at) return;
        // The anchor that closed the channel heralds both ends.
        const NodeIndex anchor = r->stops[*swapped_at];
        WernerLink final_link = r->spans[0].link;
        r->final_heralds = 0;
        for (NodeIndex end : {r->req.src, r->req.dst}) {
            sim.send_classical(graph.node(anchor), graph.node(end), "final-herald",
                               graph.distance_km(anchor, end), [this, r, final_link] {
                                   if (r->done) return;
                                   if (++r->final_heralds == 2) succeed(r, age(*r, final_link));
                               });
        }
    }
};

Network::Network(Simulator& sim, const Graph& graph, NetworkConfig config)
    : impl_(std::make_unique<Impl>(sim, graph, std::move(config))) {}

Network::~Network() = default;

void Network::submit(const ConnectionRequest& request, Callback on_done) {
    impl_->submit(request, std::move(on_done));
}

RequestOutcome Network::establish(const ConnectionRequest& request) {
    RequestOutcome out;
    bool done = false;
    submit(request, [&](const RequestOutcome& o) {
        out = o;
        done = true;
    });
    impl_->sim.run_until({kInfinity, [&] { return done; }});
    if (!done) throw Error(ErrorKind::InvalidArgument, "simulation drained before the request ended");
    return out;
}

MemoryLedger& Network::ledger() { return impl_->ledger; }
const NetworkConfig& Network::config() const { return impl_->cfg; }
const RoutingTables& Network::routes(RepeaterClass cls) { return impl_->routes(cls); }
NodeIndex Network::controller() const { return impl_->controller(); }

double Network::expected_cl_time(NodeIndex src, NodeIndex dst, RepeaterClass cls) {
    return impl_->expected_cl_time(src, dst, cls);
}

void Network::set_forced_payload_loss(bool on) { impl_->forced_loss = on; }
std::size_t Network::in_flight() const { return impl_->live.size(); }
std::size_t Network::queued() const { return impl_->waiting.size(); }

} // namespace qnet
