#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qnet/error.hpp"

namespace qnet {

using NodeIndex = std::uint32_t;
using EdgeIndex = std::uint32_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Target states of a distributed pair.
// Psi = |00>,|11> superpositions, Phi = |01>,|10>.
enum class BellState { PsiPlus, PsiMinus, PhiPlus, PhiMinus };

std::string_view to_string(BellState s);

// Coefficients over the computational basis {|00>, |01>, |10>, |11>}.
template <typename Scalar = double>
Eigen::Matrix<Scalar, 4, 1> bell_amplitudes(BellState state) {
    const Scalar h = Scalar(1) / std::sqrt(Scalar(2));
    Eigen::Matrix<Scalar, 4, 1> v = Eigen::Matrix<Scalar, 4, 1>::Zero();
    switch (state) {
    case BellState::PsiPlus:  v << h, 0, 0, h; break;
    case BellState::PsiMinus: v << h, 0, 0, -h; break;
    case BellState::PhiPlus:  v << 0, h, h, 0; break;
    case BellState::PhiMinus: v << 0, h, -h, 0; break;
    }
    return v;
}

// Werner parameterization: rho = w |B><B| + (1 - w) I/4, F = <B|rho|B>.
template <typename Scalar>
Scalar fidelity_of(Scalar w) {
    if (!(w >= Scalar(0) && w <= Scalar(1)))
        throw Error(ErrorKind::InvalidArgument, "werner parameter outside [0,1]");
    return (Scalar(1) + Scalar(3) * w) / Scalar(4);
}

template <typename Scalar>
Scalar werner_from_fidelity(Scalar f) {
    if (!(f >= Scalar(0.25) && f <= Scalar(1)))
        throw Error(ErrorKind::InvalidArgument, "fidelity outside [0.25,1]");
    return (Scalar(4) * f - Scalar(1)) / Scalar(3);
}

// Clamps values that drifted outside [lo, hi] by rounding only.
double clamp_rounding(double x, double lo, double hi);

enum class RepeaterClass { FirstClass, SecondClass, ThirdClass, AllPhotonic };
inline constexpr RepeaterClass kAllClasses[] = {
    RepeaterClass::FirstClass, RepeaterClass::SecondClass,
    RepeaterClass::ThirdClass, RepeaterClass::AllPhotonic};

std::string_view to_string(RepeaterClass c);
std::optional<RepeaterClass> parse_repeater_class(std::string_view s);

enum class NodeRole { EndNode, Repeater, Switch };
std::string_view to_string(NodeRole r);
std::optional<NodeRole> parse_node_role(std::string_view s);

struct NodeSpec {
    std::string id;
    NodeRole role = NodeRole::Repeater;
    std::optional<RepeaterClass> repeater_class;
    int memory_count = 2;
    double t_coh = kInfinity;
    double eps_op = 0.0;
    double eps_res = 0.0;
    double proc_delay = 0.0;
};

struct EdgeSpec {
    std::string id;
    std::string a;
    std::string b;
    double length_km = 0.0;
    double alpha_db_per_km = 0.2;
    double p_src = 1.0;
    double eta_det = 1.0;
    double attempt_rate_hz = 1000.0;
    double weight = 1.0;  // static admission weight, scales every routing cost
};

struct Topology {
    std::vector<NodeSpec> nodes;
    std::vector<EdgeSpec> edges;
};

enum class ViolationKind {
    DuplicateNode,
    UnknownEndpoint,
    SelfLoop,
    DuplicateEdge,
    InvalidEdgeParameter,
    InvalidNodeParameter,
};
std::string_view to_string(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::string subject;  // node or edge id
    std::string reason;

    bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate_topology(const Topology& t);

// An entangled pair shared by two nodes. The Werner parameter is guarded so
// every mutation re-checks 0 <= w <= 1.
class WernerLink {
public:
    WernerLink() = default;
    WernerLink(std::uint64_t id, NodeIndex a, NodeIndex b, double w, double now,
               BellState target = BellState::PsiPlus);

    std::uint64_t id() const { return id_; }
    NodeIndex a() const { return a_; }
    NodeIndex b() const { return b_; }
    BellState target() const { return target_; }
    double w() const { return w_; }
    double fidelity() const { return fidelity_of(w_); }
    double created_at() const { return created_at_; }
    double last_updated() const { return last_updated_; }
    std::uint8_t pauli_frame() const { return pauli_frame_; }

    void set_w(double w);
    void set_last_updated(double t) { last_updated_ = t; }
    void set_pauli_frame(std::uint8_t bits) { pauli_frame_ = bits & 0x3u; }
    void set_endpoints(NodeIndex a, NodeIndex b);

    bool has_endpoint(NodeIndex n) const { return a_ == n || b_ == n; }
    NodeIndex other(NodeIndex n) const { return a_ == n ? b_ : a_; }

private:
    std::uint64_t id_ = 0;
    NodeIndex a_ = 0;
    NodeIndex b_ = 1;
    BellState target_ = BellState::PsiPlus;
    double w_ = 1.0;
    double created_at_ = 0.0;
    double last_updated_ = 0.0;
    std::uint8_t pauli_frame_ = 0;
};

struct Incidence {
    EdgeIndex edge;
    NodeIndex neighbor;
};

// Validated, index-addressed view of a Topology. Node indices follow file
// order and double as 32-bit frame addresses.
class Graph {
public:
    explicit Graph(Topology topology);

    std::size_t node_count() const { return topo_.nodes.size(); }
    std::size_t edge_count() const { return topo_.edges.size(); }

    const NodeSpec& node(NodeIndex n) const { return topo_.nodes.at(n); }
    const EdgeSpec& edge(EdgeIndex e) const { return topo_.edges.at(e); }
    NodeIndex edge_a(EdgeIndex e) const { return ends_.at(e).first; }
    NodeIndex edge_b(EdgeIndex e) const { return ends_.at(e).second; }
    NodeIndex edge_other(EdgeIndex e, NodeIndex n) const;

    std::optional<NodeIndex> find(std::string_view id) const;
    NodeIndex index_of(std::string_view id) const;  // throws if unknown
    std::optional<EdgeIndex> find_edge(std::string_view id) const;
    std::optional<EdgeIndex> edge_between(NodeIndex a, NodeIndex b) const;
    std::span<const Incidence> incident(NodeIndex n) const { return adj_.at(n); }

    // Shortest fiber distance between two nodes (infinite when disconnected).
    double distance_km(NodeIndex from, NodeIndex to) const;

    const Topology& topology() const { return topo_; }

private:
    Topology topo_;
    std::unordered_map<std::string, NodeIndex> node_index_;
    std::unordered_map<std::string, EdgeIndex> edge_index_;
    std::vector<std::pair<NodeIndex, NodeIndex>> ends_;
    std::vector<std::vector<Incidence>> adj_;
};

} // namespace qnet
