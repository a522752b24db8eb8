#include "qnet/core.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <unordered_set>

namespace qnet {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::CapabilityViolation: return "CapabilityViolation";
    case ErrorKind::NoFreeMemory: return "NoFreeMemory";
    case ErrorKind::MismatchedEndpoints: return "MismatchedEndpoints";
    case ErrorKind::NoCommonNode: return "NoCommonNode";
    case ErrorKind::PastEvent: return "PastEvent";
    case ErrorKind::LivelockGuard: return "LivelockGuard";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::Io: return "Io";
    }
    return "?";
}

std::string_view to_string(BellState s) {
    switch (s) {
    case BellState::PsiPlus: return "psi+";
    case BellState::PsiMinus: return "psi-";
    case BellState::PhiPlus: return "phi+";
    case BellState::PhiMinus: return "phi-";
    }
    return "?";
}

double clamp_rounding(double x, double lo, double hi) {
    constexpr double slack = 1e-12;
    if (x < lo && x > lo - slack) return lo;
    if (x > hi && x < hi + slack) return hi;
    return x;
}

std::string_view to_string(RepeaterClass c) {
    switch (c) {
    case RepeaterClass::FirstClass: return "first";
    case RepeaterClass::SecondClass: return "second";
    case RepeaterClass::ThirdClass: return "third";
    case RepeaterClass::AllPhotonic: return "all_photonic";
    }
    return "?";
}

std::optional<RepeaterClass> parse_repeater_class(std::string_view s) {
    for (auto c : kAllClasses)
        if (to_string(c) == s) return c;
    return std::nullopt;
}

std::string_view to_string(NodeRole r) {
    switch (r) {
    case NodeRole::EndNode: return "end";
    case NodeRole::Repeater: return "repeater";
    case NodeRole::Switch: return "switch";
    }
    return "?";
}

std::optional<NodeRole> parse_node_role(std::string_view s) {
    for (auto r : {NodeRole::EndNode, NodeRole::Repeater, NodeRole::Switch})
        if (to_string(r) == s) return r;
    return std::nullopt;
}

std::string_view to_string(ViolationKind k) {
    switch (k) {
    case ViolationKind::DuplicateNode: return "DuplicateNode";
    case ViolationKind::UnknownEndpoint: return "UnknownEndpoint";
    case ViolationKind::SelfLoop: return "SelfLoop";
    case ViolationKind::DuplicateEdge: return "DuplicateEdge";
    case ViolationKind::InvalidEdgeParameter: return "InvalidEdgeParameter";
    case ViolationKind::InvalidNodeParameter: return "InvalidNodeParameter";
    }
    return "?";
}

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

void check_node(const NodeSpec& n, std::vector<Violation>& out) {
    auto bad = [&](std::string reason) {
        out.push_back({ViolationKind::InvalidNodeParameter, n.id, std::move(reason)});
    };
    if (n.memory_count < 0) bad("memory_count must be non-negative");
    if (!(n.t_coh > 0.0)) bad("t_coh must be positive");
    if (!is_probability(n.eps_op)) bad("eps_op outside [0,1]");
    if (!is_probability(n.eps_res)) bad("eps_res outside [0,1]");
    if (n.eps_res > n.eps_op) bad("eps_res exceeds eps_op");
    if (!(n.proc_delay >= 0.0)) bad("proc_delay must be non-negative");
    if (n.role != NodeRole::EndNode && n.repeater_class != RepeaterClass::ThirdClass &&
        n.memory_count < 2)
        bad("repeater needs at least two memories to swap");
}

void check_edge(const EdgeSpec& e, std::vector<Violation>& out) {
    auto bad = [&](std::string reason) {
        out.push_back({ViolationKind::InvalidEdgeParameter, e.id, std::move(reason)});
    };
    if (!(e.length_km >= 0.0)) bad("negative length");
    if (!(e.alpha_db_per_km >= 0.0)) bad("negative attenuation");
    if (!is_probability(e.p_src)) bad("p_src outside [0,1]");
    if (!is_probability(e.eta_det)) bad("eta_det outside [0,1]");
    if (!(e.attempt_rate_hz > 0.0) || std::isinf(e.attempt_rate_hz))
        bad("attempt rate must be positive and finite");
    if (!(e.weight > 0.0) || std::isinf(e.weight)) bad("weight must be positive and finite");
}

} // namespace

std::vector<Violation> validate_topology(const Topology& t) {
    std::vector<Violation> out;
    std::unordered_set<std::string> ids;
    for (const auto& n : t.nodes) {
        if (!ids.insert(n.id).second)
            out.push_back({ViolationKind::DuplicateNode, n.id, "duplicate node id"});
        check_node(n, out);
    }
    std::set<std::pair<std::string, std::string>> seen;
    std::unordered_set<std::string> edge_ids;
    for (const auto& e : t.edges) {
        bool endpoints_ok = true;
        for (const auto* end : {&e.a, &e.b}) {
            if (!ids.contains(*end)) {
                out.push_back({ViolationKind::UnknownEndpoint, *end,
                               "edge " + e.id + " references unknown node"});
                endpoints_ok = false;
            }
        }
        if (!edge_ids.insert(e.id).second)
            out.push_back({ViolationKind::DuplicateEdge, e.id, "duplicate edge id"});
        if (e.a == e.b) {
            out.push_back({ViolationKind::SelfLoop, e.id, "self-loop"});
        } else if (endpoints_ok) {
            auto key = std::minmax(e.a, e.b);
            if (!seen.insert({key.first, key.second}).second)
                out.push_back({ViolationKind::DuplicateEdge, e.id,
                               "duplicate undirected edge " + e.a + "-" + e.b});
        }
        check_edge(e, out);
    }
    return out;
}

WernerLink::WernerLink(std::uint64_t id, NodeIndex a, NodeIndex b, double w, double now,
                       BellState target)
    : id_(id), target_(target), created_at_(now), last_updated_(now) {
    set_endpoints(a, b);
    set_w(w);
}

void WernerLink::set_w(double w) {
    if (!(w >= 0.0 && w <= 1.0))
        throw Error(ErrorKind::InvalidArgument,
                    "werner parameter " + std::to_string(w) + " outside [0,1]");
    w_ = w;
}

void WernerLink::set_endpoints(NodeIndex a, NodeIndex b) {
    if (a == b) throw Error(ErrorKind::InvalidArgument, "link endpoints must differ");
    a_ = a;
    b_ = b;
}

Graph::Graph(Topology topology) : topo_(std::move(topology)) {
    auto violations = validate_topology(topo_);
    if (!violations.empty()) {
        const auto& v = violations.front();
        throw Error(ErrorKind::InvalidArgument, "invalid topology: " +
                                                    std::string(to_string(v.kind)) + " " +
                                                    v.subject + ": " + v.reason);
    }
    for (NodeIndex i = 0; i < topo_.nodes.size(); ++i) node_index_[topo_.nodes[i].id] = i;
    adj_.resize(topo_.nodes.size());
    for (EdgeIndex e = 0; e < topo_.edges.size(); ++e) {
        const auto& spec = topo_.edges[e];
        NodeIndex a = node_index_.at(spec.a);
        NodeIndex b = node_index_.at(spec.b);
        edge_index_[spec.id] = e;
        ends_.emplace_back(a, b);
        adj_[a].push_back({e, b});
        adj_[b].push_back({e, a});
    }
}

NodeIndex Graph::edge_other(EdgeIndex e, NodeIndex n) const {
    auto [a, b] = ends_.at(e);
    return a == n ? b : a;
}

std::optional<NodeIndex> Graph::find(std::string_view id) const {
    auto it = node_index_.find(std::string(id));
    if (it == node_index_.end()) return std::nullopt;
    return it->second;
}

NodeIndex Graph::index_of(std::string_view id) const {
    if (auto n = find(id)) return *n;
    throw Error(ErrorKind::InvalidArgument, "unknown node '" + std::string(id) + "'");
}

std::optional<EdgeIndex> Graph::find_edge(std::string_view id) const {
    auto it = edge_index_.find(std::string(id));
    if (it == edge_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<EdgeIndex> Graph::edge_between(NodeIndex a, NodeIndex b) const {
    for (const auto& inc : adj_.at(a))
        if (inc.neighbor == b) return inc.edge;
    return std::nullopt;
}

double Graph::distance_km(NodeIndex from, NodeIndex to) const {
    std::vector<double> dist(node_count(), kInfinity);
    using Item = std::pair<double, NodeIndex>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
    dist.at(from) = 0.0;
    frontier.push({0.0, from});
    while (!frontier.empty()) {
        auto [d, n] = frontier.top();
        frontier.pop();
        if (d > dist[n]) continue;
        if (n == to) return d;
        for (const auto& inc : adj_[n]) {
            double nd = d + topo_.edges[inc.edge].length_km;
            if (nd < dist[inc.neighbor]) {
                dist[inc.neighbor] = nd;
                frontier.push({nd, inc.neighbor});
            }
        }
    }
    return dist.at(to);
}

} // namespace qnet
