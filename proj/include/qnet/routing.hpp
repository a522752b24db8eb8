#pragma once

#include <map>
#include <optional>
#include <vector>

#include "qnet/core.hpp"
#include "qnet/frame.hpp"
#include "qnet/linklayer.hpp"

namespace qnet {

enum class CostMetric { HopCount, Latency, LossWeighted };
std::string_view to_string(CostMetric m);
std::optional<CostMetric> parse_cost_metric(std::string_view s);  // hops | latency | loss

double edge_cost(const EdgeSpec& edge, CostMetric metric);

struct PathConstraints {
    std::optional<RepeaterClass> cls;  // relays must be non-end nodes of this class
    std::vector<NodeIndex> waypoints;  // visited in order
};

// Least-cost simple path; equal costs resolve to the lexicographically
// smallest node-id sequence. Empty optional when no path exists.
std::optional<std::vector<NodeIndex>> compute_path(const Graph& graph, NodeIndex src,
                                                   NodeIndex dst, CostMetric metric,
                                                   const PathConstraints& constraints = {});

// True when `n` may forward traffic of class `cls` (end nodes never relay).
bool can_relay(const NodeSpec& n, std::optional<RepeaterClass> cls);

class RoutingTables {
public:
    RoutingTables() = default;
    explicit RoutingTables(std::size_t nodes) : next_(nodes) {}

    std::optional<EdgeIndex> next_edge(NodeIndex at, NodeIndex dst) const;
    void set(NodeIndex at, NodeIndex dst, EdgeIndex edge) { next_.at(at)[dst] = edge; }
    const std::map<NodeIndex, EdgeIndex>& table(NodeIndex at) const { return next_.at(at); }
    std::size_t node_count() const { return next_.size(); }

    // Walks every (src, dst) pair; false if some walk revisits a node.
    bool loop_free(const Graph& graph) const;

private:
    std::vector<std::map<NodeIndex, EdgeIndex>> next_;
};

// Per-destination shortest-path trees. Only eligible relays carry transit
// traffic; unreachable destinations are absent.
RoutingTables build_routing_tables(const Graph& graph, CostMetric metric,
                                   std::optional<RepeaterClass> cls = std::nullopt);

struct ForwardResult {
    enum class Kind { Forwarded, Delivered, Dropped };
    Kind kind = Kind::Dropped;
    EdgeIndex edge = 0;
    FailureReason reason = FailureReason::None;
    FrameBytes frame{};  // updated frame when forwarded
};

ForwardResult forward_frame(const Graph& graph, NodeIndex node, const FrameBytes& frame,
                            const RoutingTables& tables);

} // namespace qnet
