#pragma once

#include <string>
#include <vector>

#include "qnet/core.hpp"

namespace qnet::testing {

// A linear chain N0 - N1 - ... - N{n-1}. End nodes carry the class too so
// third-class and all-photonic chains can relay at the ends.
inline Topology chain(std::size_t n, RepeaterClass cls, double length_km = 0.0,
                      double p = 1.0) {
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

inline std::vector<NodeIndex> iota_path(std::size_t n) {
    std::vector<NodeIndex> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<NodeIndex>(i);
    return p;
}

} // namespace qnet::testing
