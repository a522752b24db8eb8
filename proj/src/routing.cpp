#include "qnet/routing.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qnet {

std::string_view to_string(CostMetric m) {
    switch (m) {
    case CostMetric::HopCount: return "hops";
    case CostMetric::Latency: return "latency";
    case CostMetric::LossWeighted: return "loss";
    }
    return "?";
}

std::optional<CostMetric> parse_cost_metric(std::string_view s) {
    for (auto m : {CostMetric::HopCount, CostMetric::Latency, CostMetric::LossWeighted})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

double edge_cost(const EdgeSpec& e, CostMetric metric) {
    double base = 1.0;
    switch (metric) {
    case CostMetric::HopCount: base = 1.0; break;
    case CostMetric::Latency: base = e.length_km; break;
    case CostMetric::LossWeighted: {
        // total attenuation in dB, source and detector losses included
        const double eff = e.p_src * e.eta_det;
        base = e.alpha_db_per_km * e.length_km + (eff > 0.0 ? -10.0 * std::log10(eff) : 1e9);
        break;
    }
    }
    return base * e.weight;
}

bool can_relay(const NodeSpec& n, std::optional<RepeaterClass> cls) {
    if (n.role == NodeRole::EndNode) return false;
    return !cls || n.repeater_class == cls;
}

namespace {

bool same_cost(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

struct Label {
    double cost = kInfinity;
    std::vector<NodeIndex> path;
};

bool ids_less(const Graph& g, const std::vector<NodeIndex>& a, const std::vector<NodeIndex>& b) {
    return std::lexicographical_compare(
        a.begin(), a.end(), b.begin(), b.end(),
        [&](NodeIndex x, NodeIndex y) { return g.node(x).id < g.node(y).id; });
}

bool better(const Graph& g, double cost, const std::vector<NodeIndex>& path, const Label& than) {
    if (same_cost(cost, than.cost)) return ids_less(g, path, than.path);
    return cost < than.cost;
}

// Dijkstra over (cost, id sequence). `banned` nodes are never entered.
std::optional<Label> leg(const Graph& g, NodeIndex src, NodeIndex dst, CostMetric metric,
                         std::optional<RepeaterClass> cls, const std::vector<bool>& banned) {
    std::vector<Label> best(g.node_count());
    std::vector<bool> done(g.node_count(), false);
    best[src] = {0.0, {src}};
    for (;;) {
        std::optional<NodeIndex> pick;
        for (NodeIndex n = 0; n < g.node_count(); ++n) {
            if (done[n] || best[n].path.empty()) continue;
            if (!pick || better(g, best[n].cost, best[n].path, best[*pick])) pick = n;
        }
        if (!pick) return std::nullopt;
        const NodeIndex u = *pick;
        if (u == dst) return best[u];
        done[u] = true;
        if (u != src && !can_relay(g.node(u), cls)) continue;
        for (const auto& inc : g.incident(u)) {
            const NodeIndex v = inc.neighbor;
            if (done[v] || banned[v]) continue;
            const double c = best[u].cost + edge_cost(g.edge(inc.edge), metric);
            auto path = best[u].path;
            path.push_back(v);
            if (best[v].path.empty() || better(g, c, path, best[v])) best[v] = {c, std::move(path)};
        }
    }
}

} // namespace

std::optional<std::vector<NodeIndex>> compute_path(const Graph& graph, NodeIndex src,
                                                   NodeIndex dst, CostMetric metric,
                                                   const PathConstraints& constraints) {
    if (src >= graph.node_count() || dst >= graph.node_count())
        throw Error(ErrorKind::InvalidArgument, "compute_path: unknown node");
    std::vector<NodeIndex> stops{src};
    for (NodeIndex w : constraints.waypoints) {
        if (w == src || w == dst) return std::nullopt;
        if (!can_relay(graph.node(w), constraints.cls)) return std::nullopt;
        stops.push_back(w);
    }
    stops.push_back(dst);

    std::vector<bool> banned(graph.node_count(), false);
    for (std::size_t i = 1; i < stops.size(); ++i) banned[stops[i]] = true;
    std::vector<NodeIndex> path{src};
    for (std::size_t i = 0; i + 1 < stops.size(); ++i) {
        banned[stops[i + 1]] = false;
        auto l = leg(graph, stops[i], stops[i + 1], metric, constraints.cls, banned);
        if (!l) return std::nullopt;
        for (std::size_t k = 0; k < l->path.size(); ++k) {
            banned[l->path[k]] = true;
            if (k > 0) path.push_back(l->path[k]);
        }
    }
    return path;
}

std::optional<EdgeIndex> RoutingTables::next_edge(NodeIndex at, NodeIndex dst) const {
    if (at >= next_.size()) return std::nullopt;
    auto it = next_[at].find(dst);
    if (it == next_[at].end()) return std::nullopt;
    return it->second;
}

bool RoutingTables::loop_free(const Graph& graph) const {
    for (NodeIndex s = 0; s < next_.size(); ++s) {
        for (const auto& [dst, first] : next_[s]) {
            std::set<NodeIndex> seen{s};
            NodeIndex at = s;
            auto e = std::optional<EdgeIndex>(first);
            while (at != dst) {
                if (!e) break;
                at = graph.edge_other(*e, at);
                if (!seen.insert(at).second) return false;
                e = next_edge(at, dst);
            }
        }
    }
    return true;
}

RoutingTables build_routing_tables(const Graph& graph, CostMetric metric,
                                   std::optional<RepeaterClass> cls) {
    RoutingTables tables(graph.node_count());
    const std::size_t n = graph.node_count();
    for (NodeIndex d = 0; d < n; ++d) {
        // Tree rooted at d: parent edge of every node points one hop closer.
        std::vector<double> dist(n, kInfinity);
        std::vector<std::optional<EdgeIndex>> parent(n);
        std::vector<NodeIndex> parent_node(n, 0);
        std::vector<bool> done(n, false);
        dist[d] = 0.0;
        for (;;) {
            std::optional<NodeIndex> pick;
            for (NodeIndex v = 0; v < n; ++v) {
                if (done[v] || dist[v] == kInfinity) continue;
                if (!pick) {
                    pick = v;
                } else if (same_cost(dist[v], dist[*pick])) {
                    if (graph.node(v).id < graph.node(*pick).id) pick = v;
                } else if (dist[v] < dist[*pick]) {
                    pick = v;
                }
            }
            if (!pick) break;
            const NodeIndex u = *pick;
            done[u] = true;
            if (u != d) tables.set(u, d, *parent[u]);
            // Only the destination and eligible relays extend the tree.
            if (u != d && !can_relay(graph.node(u), cls)) continue;
            for (const auto& inc : graph.incident(u)) {
                const NodeIndex v = inc.neighbor;
                if (done[v]) continue;
                const double c = dist[u] + edge_cost(graph.edge(inc.edge), metric);
                bool take = dist[v] == kInfinity || (c < dist[v] && !same_cost(c, dist[v])) ||
                            (same_cost(c, dist[v]) &&
                             graph.node(u).id < graph.node(parent_node[v]).id);
                if (take) {
                    dist[v] = c;
                    parent[v] = inc.edge;
                    parent_node[v] = u;
                }
            }
        }
    }
    return tables;
}

ForwardResult forward_frame(const Graph& graph, NodeIndex node, const FrameBytes& frame,
                            const RoutingTables& tables) {
    ForwardResult r;
    auto decoded = decode_frame(frame);
    if (!decoded.header) {
        r.reason = FailureReason::CrcFail;
        return r;
    }
    FrameHeader h = *decoded.header;
    if (h.dst == node) {
        r.kind = ForwardResult::Kind::Delivered;
        r.frame = frame;
        return r;
    }
    if (h.ttl == 0 || --h.ttl == 0) {
        r.reason = FailureReason::TtlExpired;
        return r;
    }
    ++h.hop_count;
    auto edge = tables.next_edge(node, h.dst);
    if (!edge || !graph.edge_between(node, graph.edge_other(*edge, node))) {
        r.reason = FailureReason::NoRoute;
        return r;
    }
    r.kind = ForwardResult::Kind::Forwarded;
    r.edge = *edge;
    r.frame = encode_frame(h);
    return r;
}

} // namespace qnet
