#pragma once

#include <cstdint>
#include <optional>

#include "qnet/core.hpp"
#include "qnet/sim.hpp"

namespace qnet {

struct PurificationPolicy {
    double f_target = 0.0;  // pump while F < f_target ...
    int max_rounds = 0;     // ... and fewer than max_rounds rounds were spent
};

// Selections for the all-photonic "to be selected" capabilities.
struct AllPhotonicOptions {
    bool hep = false;
    bool ecc = false;
    bool fgo = false;
};

struct PhysicsParams {
    double c_fiber_km_s = 2.0e5;
    double w0 = 1.0;          // fresh heralded pair
    double w0_logical = 1.0;  // fresh logical pair (second class) / local pair (third class)
    PurificationPolicy purification;
    double cluster_overhead = 1.0;
    double p_hop = 1.0;

    void validate() const;  // throws InvalidArgument
};

// p = p_src * eta_det * 10^(-alpha * length / 10)
double channel_success_prob(double length_km, double alpha_db_per_km, double p_src,
                            double eta_det);
double channel_success_prob(const EdgeSpec& edge);

// One physical channel plus the free memory at each end.
struct GenerationSite {
    const EdgeSpec& edge;
    NodeIndex a;
    NodeIndex b;
    int free_slots_a = 1;
    int free_slots_b = 1;
};

// Heralded generation attempt. Draws exactly one uniform per call.
std::optional<WernerLink> attempt_generation(const GenerationSite& site, double w0, double now,
                                             std::uint64_t link_id, RngStream& rng);

// Cluster-state assisted generation: success scaled by cluster_overhead, no
// memory requirement at either end.
std::optional<WernerLink> allphotonic_generate(const GenerationSite& site,
                                               const PhysicsParams& params, double now,
                                               std::uint64_t link_id, RngStream& rng);

// w' = w exp(-dt / t_coh); t_coh may be infinite.
WernerLink decohere(WernerLink link, double dt, double t_coh);

struct PurificationMap {
    double p_success;
    double fidelity;  // of the surviving pair, conditioned on success
};

// Two-pair recurrence on Werner inputs (bilateral CNOT, parity check).
PurificationMap purification_map(double fa, double fb);

// True when the class may run HEP under the given all-photonic selection.
bool can_purify(RepeaterClass cls, const AllPhotonicOptions& options);

struct PurifyOutcome {
    std::optional<WernerLink> link;  // survivor on success
    double p_success = 0.0;
};

PurifyOutcome purify(const WernerLink& a, const WernerLink& b, RepeaterClass cls,
                     const AllPhotonicOptions& options, RngStream& rng);

// Error rate a node applies to a two-qubit operation: eps_op for first class,
// eps_res where error correction is in use.
double operation_error(const NodeSpec& node, const AllPhotonicOptions& options = {});

WernerLink apply_operation_noise(WernerLink link, const NodeSpec& node,
                                 const AllPhotonicOptions& options = {});

// Bell measurement at `b` joining ab and bc. Result spans the two far ends,
// w' = w_ab w_bc (1 - eps); the measured outcome is folded into the Pauli frame.
WernerLink swap(const WernerLink& ab, const WernerLink& bc, NodeIndex b, const NodeSpec& node_b,
                std::uint64_t new_id, RngStream& rng, const AllPhotonicOptions& options = {});

// Logical-qubit relay into `receiver`. Succeeds with params.p_hop; on success
// the payload quality is scaled by (1 - receiver.eps_res).
std::optional<double> transmit_logical_hop(const EdgeSpec& edge, double state_w,
                                           const NodeSpec& receiver, const PhysicsParams& params,
                                           RngStream& rng);

} // namespace qnet
