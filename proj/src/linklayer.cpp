#include "qnet/linklayer.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace qnet {

std::string_view to_string(SwapPolicy p) {
    return p == SwapPolicy::Hierarchical ? "hierarchical" : "left_to_right";
}

std::string_view to_string(FailureReason r) {
    switch (r) {
    case FailureReason::None: return "None";
    case FailureReason::CapabilityViolation: return "CapabilityViolation";
    case FailureReason::InvalidRequest: return "InvalidRequest";
    case FailureReason::NoPath: return "NoPath";
    case FailureReason::ResourceExhausted: return "ResourceExhausted";
    case FailureReason::Timeout: return "Timeout";
    case FailureReason::HopFailure: return "HopFailure";
    case FailureReason::FidelityBelowMinimum: return "FidelityBelowMinimum";
    case FailureReason::RetriesExhausted: return "RetriesExhausted";
    case FailureReason::TtlExpired: return "TtlExpired";
    case FailureReason::NoRoute: return "NoRoute";
    case FailureReason::CrcFail: return "CrcFail";
    case FailureReason::NoResource: return "NoResource";
    case FailureReason::ForcedLoss: return "ForcedLoss";
    }
    return "?";
}

int SessionStats::attempts_total() const {
    return std::accumulate(attempts_per_segment.begin(), attempts_per_segment.end(), 0);
}

std::vector<std::vector<std::size_t>> swap_schedule(std::size_t path_nodes, SwapPolicy policy) {
    std::vector<std::vector<std::size_t>> rounds;
    if (path_nodes < 3) return rounds;
    if (policy == SwapPolicy::LeftToRight) {
        for (std::size_t j = 1; j + 1 < path_nodes; ++j) rounds.push_back({j});
        return rounds;
    }
    std::vector<std::size_t> alive(path_nodes);
    std::iota(alive.begin(), alive.end(), std::size_t{0});
    while (alive.size() > 2) {
        std::vector<std::size_t> round, next;
        for (std::size_t i = 0; i < alive.size(); ++i) {
            bool interior = i > 0 && i + 1 < alive.size();
            if (interior && i % 2 == 1)
                round.push_back(alive[i]);
            else
                next.push_back(alive[i]);
        }
        rounds.push_back(std::move(round));
        alive = std::move(next);
    }
    return rounds;
}

namespace {

double fresh_w(RepeaterClass cls, const PhysicsParams& p) {
    return cls == RepeaterClass::SecondClass || cls == RepeaterClass::ThirdClass ? p.w0_logical
                                                                                 : p.w0;
}

} // namespace

bool pumping_enabled(RepeaterClass cls, const LinkConfig& config) {
    const auto& pur = config.physics.purification;
    return can_purify(cls, config.allphotonic) && pur.max_rounds > 0 &&
           pur.f_target > fidelity_of(fresh_w(cls, config.physics));
}

int slots_per_segment_end(RepeaterClass cls, const LinkConfig& config) {
    if (cls == RepeaterClass::ThirdClass || cls == RepeaterClass::AllPhotonic) return 0;
    return pumping_enabled(cls, config) ? 2 : 1;
}

std::vector<SlotDemand> path_demand(const std::vector<NodeIndex>& path, RepeaterClass cls,
                                    const LinkConfig& config) {
    std::vector<SlotDemand> demand;
    const int per = slots_per_segment_end(cls, config);
    if (per == 0) return demand;
    for (std::size_t i = 0; i < path.size(); ++i) {
        bool end = i == 0 || i + 1 == path.size();
        demand.push_back({path[i], end ? per : 2 * per});
    }
    return demand;
}

std::optional<std::string> check_path(const Graph& graph, const std::vector<NodeIndex>& path,
                                      RepeaterClass cls) {
    if (path.size() < 2) return "path needs at least two nodes";
    for (std::size_t i = 0; i < path.size(); ++i) {
        for (std::size_t j = i + 1; j < path.size(); ++j)
            if (path[i] == path[j]) return "path revisits node " + graph.node(path[i]).id;
        if (i + 1 < path.size() && !graph.edge_between(path[i], path[i + 1]))
            return "no edge between " + graph.node(path[i]).id + " and " +
                   graph.node(path[i + 1]).id;
        if (i > 0 && i + 1 < path.size()) {
            const auto& n = graph.node(path[i]);
            if (n.role == NodeRole::EndNode) return "end node " + n.id + " cannot relay";
            if (n.repeater_class != cls)
                return "node " + n.id + " is not of class " + std::string(to_string(cls));
        }
    }
    return std::nullopt;
}

namespace {

class Session final : public LinkSession, public std::enable_shared_from_this<Session> {
public:
    Session(Simulator& sim, const Graph& graph, MemoryLedger& ledger, LinkRequest request,
            LinkConfig config, SessionHooks hooks)
        : sim_(sim), graph_(graph), ledger_(ledger), req_(std::move(request)),
          cfg_(std::move(config)), hooks_(std::move(hooks)), path_(req_.path),
          pumping_(pumping_enabled(req_.cls, cfg_)) {}

    void begin();

    bool finished() const override { return finished_; }
    SessionPhase phase() const override { return phase_; }
    const std::vector<NodeIndex>& path() const override { return path_; }
    const SessionStats& stats() const override { return stats_; }
    void abort(FailureReason reason, std::string detail) override {
        if (finished_) return;
        conclude(false, reason, -1, std::move(detail), false);
    }

private:
    enum class Side { Left, Right };

    struct Segment {
        EdgeIndex edge = 0;
        double length = 0.0;
        double period = 0.0;
        RngStream* gen = nullptr;
        RngStream* pur = nullptr;
        std::optional<WernerLink> fresh;
        std::optional<WernerLink> candidate;
        int heralds = 0;
        int exchanged = 0;
        int rounds = 0;
        bool raw_herald_right = false;
    };

    struct Span {
        std::size_t left;
        std::size_t right;
        WernerLink link;
        bool known_left = false;
        bool known_right = false;
    };

    bool one_by_one() const { return req_.protocol == LinkProtocol::OneByOneLink; }
    bool pipelined() const {
        return one_by_one() && cfg_.pipelining &&
               (req_.cls == RepeaterClass::FirstClass || req_.cls == RepeaterClass::SecondClass);
    }
    std::string label(std::string_view what, std::size_t s) const {
        if (!sim_.tracing()) return {};
        return std::string(what) + " s" + std::to_string(s) + " owner " +
               std::to_string(req_.owner);
    }

    bool decoheres(NodeIndex n) const {
        if (req_.cls == RepeaterClass::ThirdClass) return false;
        return graph_.node(n).repeater_class != RepeaterClass::AllPhotonic;
    }

    WernerLink age(WernerLink link, double t) const {
        const double dt = t - link.last_updated();
        if (dt <= 0.0) return link;
        double rate = 0.0;
        for (NodeIndex n : {link.a(), link.b()})
            if (decoheres(n)) rate += 1.0 / graph_.node(n).t_coh;
        if (rate == 0.0) {
            link.set_last_updated(t);
            return link;
        }
        return decohere(link, dt, 1.0 / rate);
    }

    double distance(std::size_t i, std::size_t j) const {
        if (i > j) std::swap(i, j);
        double d = 0.0;
        for (std::size_t s = i; s < j; ++s) d += segments_[s].length;
        return d;
    }

    void send(std::size_t from, std::size_t to, std::string_view msg, Action action) {
        sim_.send_classical(graph_.node(path_[from]), graph_.node(path_[to]), msg,
                            distance(from, to), std::move(action));
    }

    HopDecision decide(std::size_t k) {
        if (hooks_.next_hop) return hooks_.next_hop(path_[k], k);
        HopDecision d;
        if (k + 1 < path_.size()) {
            d.kind = HopDecision::Kind::Forward;
            d.next = path_[k + 1];
        }
        return d;
    }

    void add_segment(std::size_t k) {
        auto edge = graph_.edge_between(path_[k], path_[k + 1]);
        const auto& spec = graph_.edge(*edge);
        Segment seg;
        seg.edge = *edge;
        seg.length = spec.length_km;
        seg.period = 1.0 / spec.attempt_rate_hz;
        seg.gen = &sim_.stream("gen:" + spec.id);
        seg.pur = &sim_.stream("purify:" + spec.id);
        segments_.push_back(seg);
        stats_.attempts_per_segment.push_back(0);
    }

    // Frontier reached position k (frame header / extended link present).
    void trigger(std::size_t k);
    void claim_segment(std::size_t k);
    void start_segment(std::size_t s);
    void schedule_tick(std::size_t s);
    void on_tick(std::size_t s);
    void on_generated(std::size_t s, WernerLink link);
    void pump_step(std::size_t s);
    void on_exchange(std::size_t s, Side side, bool ok, bool more, std::uint64_t link_id);
    void add_span(std::size_t left, std::size_t right, WernerLink link);
    void mark_known(std::size_t left, std::size_t right, std::uint64_t link_id, Side side);
    void on_known(std::size_t pos, const Span& span);
    void try_swap(std::size_t j);
    void check_complete();
    void hop_from(std::size_t k);

    void conclude(bool success, FailureReason reason, int segment, std::string detail,
                  bool notify);
    void fail(FailureReason reason, int segment, std::string detail) {
        conclude(false, reason, segment, std::move(detail), true);
    }

    Simulator& sim_;
    const Graph& graph_;
    MemoryLedger& ledger_;
    LinkRequest req_;
    LinkConfig cfg_;
    SessionHooks hooks_;
    std::vector<NodeIndex> path_;
    bool pumping_;

    std::vector<Segment> segments_;
    std::vector<bool> triggered_;
    std::vector<bool> swapped_;
    std::map<std::size_t, Span> spans_;            // keyed by left position
    std::map<std::size_t, std::size_t> right_to_left_;
    std::vector<std::size_t> partner_left_;
    std::vector<std::size_t> partner_right_;
    std::size_t complete_len_ = 0;  // path length once the destination is reached
    bool confirm_sent_ = false;
    double payload_w_ = 1.0;

    bool finished_ = false;
    SessionPhase phase_ = SessionPhase::Generating;
    SessionStats stats_;
    std::optional<WernerLink> final_link_;
};

void Session::begin() {
    stats_.start_time = sim_.now();
    if (cfg_.deadline < kInfinity) {
        auto self = shared_from_this();
        sim_.schedule(sim_.now() + cfg_.deadline, EventKind::Timeout, label("deadline", 0),
                      [self] {
                          if (!self->finished_)
                              self->fail(FailureReason::Timeout, -1, "session deadline passed");
                      });
    }
    if (cfg_.resources == ResourceMode::Upfront) {
        auto demand = path_demand(path_, req_.cls, cfg_);
        if (!ledger_.acquire(req_.owner, demand, sim_.now())) {
            fail(FailureReason::ResourceExhausted, -1, "path memory unavailable");
            return;
        }
    }
    triggered_.assign(path_.size(), false);

    if (req_.cls == RepeaterClass::ThirdClass) {
        payload_w_ = cfg_.physics.w0_logical;
        phase_ = SessionPhase::Hopping;
        hop_from(0);
        return;
    }

    if (!one_by_one()) {
        complete_len_ = path_.size();
        partner_left_.assign(path_.size(), 0);
        partner_right_.assign(path_.size(), 0);
        swapped_.assign(path_.size(), false);
        std::vector<std::size_t> alive(path_.size());
        std::iota(alive.begin(), alive.end(), std::size_t{0});
        for (const auto& round : swap_schedule(path_.size(), cfg_.swap_policy)) {
            for (std::size_t j : round) {
                auto it = std::find(alive.begin(), alive.end(), j);
                partner_left_[j] = *(it - 1);
                partner_right_[j] = *(it + 1);
            }
            std::erase_if(alive, [&](std::size_t x) {
                return std::find(round.begin(), round.end(), x) != round.end();
            });
        }
        for (std::size_t s = 0; s + 1 < path_.size(); ++s) add_segment(s);
        for (std::size_t s = 0; s + 1 < path_.size(); ++s) {
            triggered_[s] = true;
            start_segment(s);
        }
        return;
    }
    trigger(0);
}

void Session::trigger(std::size_t k) {
    if (finished_) return;
    if (triggered_.size() <= k) triggered_.resize(k + 1, false);
    if (triggered_[k]) return;
    triggered_[k] = true;

    HopDecision d = decide(k);
    if (finished_) return;
    switch (d.kind) {
    case HopDecision::Kind::Deliver:
        if (k == 0) {
            fail(FailureReason::InvalidRequest, -1, "source is the destination");
            return;
        }
        complete_len_ = k + 1;
        check_complete();
        return;
    case HopDecision::Kind::Drop:
        fail(d.drop_reason, static_cast<int>(k), "frame dropped at " + graph_.node(path_[k]).id);
        return;
    case HopDecision::Kind::Forward:
        break;
    }
    if (path_.size() == k + 1) {
        path_.push_back(d.next);
    } else if (path_[k + 1] != d.next) {
        fail(FailureReason::NoRoute, static_cast<int>(k), "next hop disagrees with path");
        return;
    }
    if (!graph_.edge_between(path_[k], path_[k + 1])) {
        fail(FailureReason::NoRoute, static_cast<int>(k), "next hop is not adjacent");
        return;
    }
    if (segments_.size() == k) add_segment(k);
    if (swapped_.size() < path_.size()) swapped_.resize(path_.size(), false);
    claim_segment(k);
}

void Session::claim_segment(std::size_t k) {
    if (finished_) return;
    if (cfg_.resources == ResourceMode::PerHop) {
        const int per = slots_per_segment_end(req_.cls, cfg_);
        if (per > 0) {
            SlotDemand demand[] = {{path_[k], per}, {path_[k + 1], per}};
            if (!ledger_.acquire(req_.owner, demand, sim_.now())) {
                fail(FailureReason::NoResource, static_cast<int>(k),
                     "no free memory for segment " + std::to_string(k));
                return;
            }
        }
    }
    start_segment(k);
}

void Session::start_segment(std::size_t s) { schedule_tick(s); }

void Session::schedule_tick(std::size_t s) {
    auto self = shared_from_this();
    sim_.schedule_after(segments_[s].period, EventKind::AttemptTick, label("attempt", s),
                        [self, s] { self->on_tick(s); });
}

void Session::on_tick(std::size_t s) {
    if (finished_) return;
    auto& seg = segments_[s];
    ++stats_.attempts_per_segment[s];
    GenerationSite site{graph_.edge(seg.edge), path_[s], path_[s + 1]};
    std::optional<WernerLink> link;
    if (req_.cls == RepeaterClass::AllPhotonic)
        link = allphotonic_generate(site, cfg_.physics, sim_.now(), sim_.fresh_id(), *seg.gen);
    else
        link = attempt_generation(site, fresh_w(req_.cls, cfg_.physics), sim_.now(),
                                  sim_.fresh_id(), *seg.gen);
    if (!link) {
        schedule_tick(s);
        return;
    }
    on_generated(s, *link);
}

void Session::on_generated(std::size_t s, WernerLink link) {
    auto self = shared_from_this();
    auto& seg = segments_[s];
    if (!pumping_) {
        const auto id = link.id();
        add_span(s, s + 1, link);
        send(s + 1, s, "herald", [self, s, id] { self->mark_known(s, s + 1, id, Side::Left); });
        send(s, s + 1, "herald", [self, s, id] {
            if (self->pipelined()) self->trigger(s + 1);
            self->mark_known(s, s + 1, id, Side::Right);
        });
        return;
    }
    seg.fresh = link;
    seg.heralds = 0;
    auto delivered = [self, s](Side side) {
        if (self->finished_) return;
        auto& sg = self->segments_[s];
        if (side == Side::Right && !sg.raw_herald_right) {
            sg.raw_herald_right = true;
            if (self->pipelined()) self->trigger(s + 1);
            if (self->finished_) return;
        }
        if (++sg.heralds == 2) self->pump_step(s);
    };
    send(s + 1, s, "herald", [delivered] { delivered(Side::Left); });
    send(s, s + 1, "herald", [delivered] { delivered(Side::Right); });
}

void Session::pump_step(std::size_t s) {
    auto& seg = segments_[s];
    const auto& policy = cfg_.physics.purification;
    auto needs_more = [&](const WernerLink& l) {
        return seg.rounds < policy.max_rounds && l.fidelity() < policy.f_target;
    };
    const double now = sim_.now();
    if (!seg.candidate) {
        seg.candidate = age(*seg.fresh, now);
        seg.fresh.reset();
        seg.rounds = 0;
        if (needs_more(*seg.candidate)) {
            phase_ = SessionPhase::Purifying;
            schedule_tick(s);
            return;
        }
        WernerLink ready = *seg.candidate;
        seg.candidate.reset();
        add_span(s, s + 1, ready);
        mark_known(s, s + 1, ready.id(), Side::Left);
        mark_known(s, s + 1, ready.id(), Side::Right);
        return;
    }

    WernerLink cand = age(*seg.candidate, now);
    WernerLink aux = age(*seg.fresh, now);
    seg.fresh.reset();
    ++seg.rounds;
    ++stats_.purification_rounds;
    auto outcome = purify(cand, aux, req_.cls, cfg_.allphotonic, *seg.pur);
    const bool ok = outcome.link.has_value();
    bool more = false;
    std::uint64_t id = 0;
    if (ok) {
        cand = *outcome.link;
        more = needs_more(cand);
        id = cand.id();
    }
    if (ok && !more) {
        seg.candidate.reset();
        add_span(s, s + 1, cand);
        if (cfg_.resources == ResourceMode::PerHop) {
            ledger_.release_slots(req_.owner, path_[s], 1, now);
            ledger_.release_slots(req_.owner, path_[s + 1], 1, now);
        }
    } else if (ok) {
        seg.candidate = cand;
    } else {
        seg.candidate.reset();
    }
    seg.exchanged = 0;
    auto self = shared_from_this();
    send(s + 1, s, "purify-outcome",
         [self, s, ok, more, id] { self->on_exchange(s, Side::Left, ok, more, id); });
    send(s, s + 1, "purify-outcome",
         [self, s, ok, more, id] { self->on_exchange(s, Side::Right, ok, more, id); });
}

void Session::on_exchange(std::size_t s, Side side, bool ok, bool more, std::uint64_t link_id) {
    if (finished_) return;
    if (ok && !more) {
        mark_known(s, s + 1, link_id, side);
        return;
    }
    if (++segments_[s].exchanged == 2) schedule_tick(s);
}

void Session::add_span(std::size_t left, std::size_t right, WernerLink link) {
    spans_.insert_or_assign(left, Span{left, right, std::move(link)});
    right_to_left_[right] = left;
}

void Session::mark_known(std::size_t left, std::size_t right, std::uint64_t link_id, Side side) {
    if (finished_) return;
    auto it = spans_.find(left);
    if (it == spans_.end() || it->second.right != right || it->second.link.id() != link_id)
        return;
    Span& span = it->second;
    if (side == Side::Left)
        span.known_left = true;
    else
        span.known_right = true;
    on_known(side == Side::Left ? left : right, span);
}

void Session::on_known(std::size_t pos, const Span& span) {
    if (one_by_one() && !pipelined() && span.left == 0 && pos == span.right) trigger(pos);
    if (finished_) return;
    try_swap(pos);
    if (finished_) return;
    check_complete();
}

void Session::try_swap(std::size_t j) {
    if (j == 0 || (complete_len_ > 0 && j + 1 >= complete_len_)) return;
    if (j >= swapped_.size() || swapped_[j]) return;
    auto rl = right_to_left_.find(j);
    auto rs = spans_.find(j);
    if (rl == right_to_left_.end() || rs == spans_.end()) return;
    auto ls = spans_.find(rl->second);
    if (ls == spans_.end() || ls->second.right != j) return;
    const Span& L = ls->second;
    const Span& R = rs->second;
    if (!L.known_right || !R.known_left) return;
    const std::size_t want_left = one_by_one() ? 0 : partner_left_[j];
    const std::size_t want_right = one_by_one() ? j + 1 : partner_right_[j];
    if (L.left != want_left || R.right != want_right) return;

    const double now = sim_.now();
    const NodeIndex node = path_[j];
    phase_ = SessionPhase::Swapping;
    WernerLink joined = swap(age(L.link, now), age(R.link, now), node, graph_.node(node),
                             sim_.fresh_id(), sim_.stream("swap:" + graph_.node(node).id),
                             cfg_.allphotonic);
    const std::size_t left = L.left;
    const std::size_t right = R.right;
    spans_.erase(rs);
    spans_.erase(ls);
    right_to_left_.erase(j);
    swapped_[j] = true;
    add_span(left, right, joined);
    if (cfg_.resources == ResourceMode::PerHop) ledger_.release_node(req_.owner, node, now);

    auto self = shared_from_this();
    const auto id = joined.id();
    if (!one_by_one())
        send(j, left, "swap-herald",
             [self, left, right, id] { self->mark_known(left, right, id, Side::Left); });
    send(j, right, "swap-herald",
         [self, left, right, id] { self->mark_known(left, right, id, Side::Right); });
}

void Session::check_complete() {
    if (finished_ || complete_len_ == 0) return;
    const std::size_t last = complete_len_ - 1;
    auto it = spans_.find(0);
    if (it == spans_.end() || it->second.right != last) return;
    const Span& span = it->second;
    if (!one_by_one() || last == 1) {
        if (span.known_left && span.known_right) {
            final_link_ = age(span.link, sim_.now());
            conclude(true, FailureReason::None, -1, {}, true);
        }
        return;
    }
    if (!span.known_right || confirm_sent_) return;
    confirm_sent_ = true;
    auto self = shared_from_this();
    const NodeIndex src = path_.front();
    const NodeIndex dst = path_[last];
    sim_.send_classical(graph_.node(dst), graph_.node(src), "confirm",
                        graph_.distance_km(dst, src), [self] {
                            if (self->finished_) return;
                            const auto& sp = self->spans_.at(0);
                            self->final_link_ = self->age(sp.link, self->sim_.now());
                            self->conclude(true, FailureReason::None, -1, {}, true);
                        });
}

void Session::hop_from(std::size_t k) {
    if (finished_) return;
    if (triggered_.size() <= k) triggered_.resize(k + 1, false);
    triggered_[k] = true;
    HopDecision d = decide(k);
    if (finished_) return;
    if (d.kind == HopDecision::Kind::Drop) {
        fail(d.drop_reason, static_cast<int>(k), "frame dropped at " + graph_.node(path_[k]).id);
        return;
    }
    if (d.kind == HopDecision::Kind::Deliver) {
        if (k == 0) {
            fail(FailureReason::InvalidRequest, -1, "source is the destination");
            return;
        }
        complete_len_ = k + 1;
        auto self = shared_from_this();
        const NodeIndex src = path_.front();
        const NodeIndex dst = path_[k];
        sim_.send_classical(graph_.node(dst), graph_.node(src), "confirm",
                            graph_.distance_km(dst, src), [self, src, dst] {
                                if (self->finished_) return;
                                self->final_link_ = WernerLink(
                                    self->sim_.fresh_id(), src, dst, self->payload_w_,
                                    self->sim_.now(), self->cfg_.target);
                                self->conclude(true, FailureReason::None, -1, {}, true);
                            });
        return;
    }
    if (path_.size() == k + 1)
        path_.push_back(d.next);
    else if (path_[k + 1] != d.next) {
        fail(FailureReason::NoRoute, static_cast<int>(k), "next hop disagrees with path");
        return;
    }
    if (!graph_.edge_between(path_[k], path_[k + 1])) {
        fail(FailureReason::NoRoute, static_cast<int>(k), "next hop is not adjacent");
        return;
    }
    if (segments_.size() == k) add_segment(k);
    ++stats_.attempts_per_segment[k];
    const auto& seg = segments_[k];
    const auto& receiver = graph_.node(path_[k + 1]);
    std::optional<double> outcome;
    try {
        outcome = transmit_logical_hop(graph_.edge(seg.edge), payload_w_, receiver, cfg_.physics,
                                       sim_.stream("hop:" + graph_.edge(seg.edge).id));
    } catch (const Error& e) {
        fail(FailureReason::CapabilityViolation, static_cast<int>(k), e.what());
        return;
    }
    auto self = shared_from_this();
    sim_.schedule(sim_.now() + sim_.classical_delay(receiver, seg.length),
                  EventKind::ProtocolStep, label("logical-hop", k), [self, k, outcome] {
                      if (self->finished_) return;
                      if (!outcome) {
                          self->fail(FailureReason::HopFailure, static_cast<int>(k),
                                     "logical qubit lost on segment " + std::to_string(k));
                          return;
                      }
                      self->payload_w_ = *outcome;
                      self->hop_from(k + 1);
                  });
}

void Session::conclude(bool success, FailureReason reason, int segment, std::string detail,
                       bool notify) {
    finished_ = true;
    phase_ = success ? SessionPhase::Done : SessionPhase::Failed;
    stats_.finish_time = sim_.now();
    if (cfg_.resources != ResourceMode::PreReserved) ledger_.release_owner(req_.owner, sim_.now());
    if (!notify || !hooks_.on_done) return;
    ChannelResult r;
    r.success = success;
    r.reason = reason;
    r.detail = std::move(detail);
    r.failing_segment = segment;
    if (success) r.link = final_link_;
    r.latency = stats_.finish_time - stats_.start_time;
    r.path = path_;
    r.stats = stats_;
    // Keep the session alive while the callback runs.
    auto self = shared_from_this();
    hooks_.on_done(r);
}

ChannelResult run_standalone(Simulator& sim, const Graph& graph, MemoryLedger& ledger,
                             const std::vector<NodeIndex>& path, RepeaterClass cls,
                             LinkProtocol protocol, const LinkConfig& config) {
    ChannelResult out;
    out.path = path;
    if (auto v = validate_request(cls, protocol, NetworkModel::ConnectionOriented)) {
        out.reason = FailureReason::CapabilityViolation;
        out.detail = v->reason;
        return out;
    }
    if (auto why = check_path(graph, path, cls)) {
        out.reason = path.size() >= 2 && why->find("class") != std::string::npos
                         ? FailureReason::CapabilityViolation
                         : FailureReason::InvalidRequest;
        out.detail = *why;
        return out;
    }
    LinkRequest req;
    req.path = path;
    req.destination = path.back();
    req.cls = cls;
    req.protocol = protocol;
    req.owner = sim.fresh_id();
    bool done = false;
    SessionHooks hooks;
    hooks.on_done = [&](const ChannelResult& r) {
        out = r;
        done = true;
    };
    auto session = start_link_session(sim, graph, ledger, std::move(req), config, hooks);
    sim.run_until({kInfinity, [&] { return done; }});
    if (!done) {
        out.reason = FailureReason::Timeout;
        out.detail = "event queue drained before completion";
    }
    return out;
}

} // namespace

std::shared_ptr<LinkSession> start_link_session(Simulator& sim, const Graph& graph,
                                                MemoryLedger& ledger, LinkRequest request,
                                                LinkConfig config, SessionHooks hooks) {
    if (request.path.empty())
        throw Error(ErrorKind::InvalidArgument, "link session needs a source");
    auto s = std::make_shared<Session>(sim, graph, ledger, std::move(request), std::move(config),
                                       std::move(hooks));
    s->begin();
    return s;
}

ChannelResult simultaneous_link(Simulator& sim, const Graph& graph, MemoryLedger& ledger,
                                const std::vector<NodeIndex>& path, RepeaterClass cls,
                                const LinkConfig& config) {
    return run_standalone(sim, graph, ledger, path, cls, LinkProtocol::SimultaneousLink, config);
}

ChannelResult one_by_one_link(Simulator& sim, const Graph& graph, MemoryLedger& ledger,
                              const std::vector<NodeIndex>& path, RepeaterClass cls,
                              const LinkConfig& config) {
    return run_standalone(sim, graph, ledger, path, cls, LinkProtocol::OneByOneLink, config);
}

} // namespace qnet
