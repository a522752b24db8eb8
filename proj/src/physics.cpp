#include "qnet/physics.hpp"

#include <algorithm>
#include <cmath>

namespace qnet {

namespace {

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

} // namespace

void PhysicsParams::validate() const {
    auto fail = [](const char* what) { throw Error(ErrorKind::InvalidArgument, what); };
    if (!(c_fiber_km_s > 0.0)) fail("c_fiber must be positive");
    if (!in_unit(w0)) fail("w0 outside [0,1]");
    if (!in_unit(w0_logical)) fail("w0_logical outside [0,1]");
    if (!in_unit(purification.f_target)) fail("f_target outside [0,1]");
    if (purification.max_rounds < 0) fail("max_rounds must be non-negative");
    if (!(cluster_overhead > 0.0 && cluster_overhead <= 1.0))
        fail("cluster_overhead outside (0,1]");
    if (!in_unit(p_hop)) fail("p_hop outside [0,1]");
}

double channel_success_prob(double length_km, double alpha_db_per_km, double p_src,
                            double eta_det) {
    if (!(length_km >= 0.0)) throw Error(ErrorKind::InvalidArgument, "negative length");
    if (!(alpha_db_per_km >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "negative attenuation");
    if (!in_unit(p_src) || !in_unit(eta_det))
        throw Error(ErrorKind::InvalidArgument, "efficiency outside [0,1]");
    double p = p_src * eta_det * std::pow(10.0, -alpha_db_per_km * length_km / 10.0);
    return std::clamp(p, 0.0, 1.0);
}

double channel_success_prob(const EdgeSpec& edge) {
    return channel_success_prob(edge.length_km, edge.alpha_db_per_km, edge.p_src, edge.eta_det);
}

std::optional<WernerLink> attempt_generation(const GenerationSite& site, double w0, double now,
                                             std::uint64_t link_id, RngStream& rng) {
    if (site.free_slots_a < 1 || site.free_slots_b < 1)
        throw Error(ErrorKind::NoFreeMemory, "no free memory slot on edge " + site.edge.id);
    if (!rng.bernoulli(channel_success_prob(site.edge))) return std::nullopt;
    return WernerLink(link_id, site.a, site.b, w0, now);
}

std::optional<WernerLink> allphotonic_generate(const GenerationSite& site,
                                               const PhysicsParams& params, double now,
                                               std::uint64_t link_id, RngStream& rng) {
    double p = channel_success_prob(site.edge) * params.cluster_overhead;
    if (!rng.bernoulli(p)) return std::nullopt;
    return WernerLink(link_id, site.a, site.b, params.w0, now);
}

WernerLink decohere(WernerLink link, double dt, double t_coh) {
    if (!(dt >= 0.0)) throw Error(ErrorKind::InvalidArgument, "negative decoherence interval");
    if (!(t_coh > 0.0)) throw Error(ErrorKind::InvalidArgument, "t_coh must be positive");
    link.set_w(link.w() * std::exp(-dt / t_coh));
    link.set_last_updated(link.last_updated() + dt);
    return link;
}

PurificationMap purification_map(double fa, double fb) {
    const double ea = 1.0 - fa;
    const double eb = 1.0 - fb;
    const double p = fa * fb + fa * eb / 3.0 + fb * ea / 3.0 + 5.0 * ea * eb / 9.0;
    const double f = (fa * fb + ea * eb / 9.0) / p;
    return {p, clamp_rounding(f, 0.25, 1.0)};
}

bool can_purify(RepeaterClass cls, const AllPhotonicOptions& options) {
    return cls == RepeaterClass::FirstClass ||
           (cls == RepeaterClass::AllPhotonic && options.hep);
}

PurifyOutcome purify(const WernerLink& a, const WernerLink& b, RepeaterClass cls,
                     const AllPhotonicOptions& options, RngStream& rng) {
    bool same_pair = (a.a() == b.a() && a.b() == b.b()) || (a.a() == b.b() && a.b() == b.a());
    if (!same_pair)
        throw Error(ErrorKind::MismatchedEndpoints, "purification inputs span different nodes");
    if (!can_purify(cls, options))
        throw Error(ErrorKind::CapabilityViolation,
                    "HEP unavailable for class " + std::string(to_string(cls)));
    auto map = purification_map(a.fidelity(), b.fidelity());
    PurifyOutcome out;
    out.p_success = map.p_success;
    if (!rng.bernoulli(map.p_success)) return out;
    WernerLink survivor = a;
    survivor.set_w(clamp_rounding(werner_from_fidelity(map.fidelity), 0.0, 1.0));
    survivor.set_last_updated(std::max(a.last_updated(), b.last_updated()));
    out.link = survivor;
    return out;
}

double operation_error(const NodeSpec& node, const AllPhotonicOptions& options) {
    if (!node.repeater_class) return node.eps_op;
    switch (*node.repeater_class) {
    case RepeaterClass::FirstClass: return node.eps_op;
    case RepeaterClass::SecondClass:
    case RepeaterClass::ThirdClass: return node.eps_res;
    case RepeaterClass::AllPhotonic: return options.ecc ? node.eps_res : node.eps_op;
    }
    return node.eps_op;
}

WernerLink apply_operation_noise(WernerLink link, const NodeSpec& node,
                                 const AllPhotonicOptions& options) {
    link.set_w(link.w() * (1.0 - operation_error(node, options)));
    return link;
}

WernerLink swap(const WernerLink& ab, const WernerLink& bc, NodeIndex b, const NodeSpec& node_b,
                std::uint64_t new_id, RngStream& rng, const AllPhotonicOptions& options) {
    if (!ab.has_endpoint(b) || !bc.has_endpoint(b))
        throw Error(ErrorKind::NoCommonNode, "links do not meet at node " + node_b.id);
    const NodeIndex a = ab.other(b);
    const NodeIndex c = bc.other(b);
    if (a == c) throw Error(ErrorKind::NoCommonNode, "links share both endpoints");
    if (!node_b.repeater_class || *node_b.repeater_class == RepeaterClass::ThirdClass)
        throw Error(ErrorKind::CapabilityViolation, "node " + node_b.id + " cannot swap");

    const double eps = operation_error(node_b, options);
    WernerLink out(new_id, a, c, ab.w() * bc.w() * (1.0 - eps),
                   std::max(ab.last_updated(), bc.last_updated()), ab.target());
    out.set_pauli_frame(ab.pauli_frame() ^ bc.pauli_frame() ^ rng.two_bits());
    return out;
}

std::optional<double> transmit_logical_hop(const EdgeSpec& edge, double state_w,
                                           const NodeSpec& receiver, const PhysicsParams& params,
                                           RngStream& rng) {
    if (receiver.repeater_class && *receiver.repeater_class != RepeaterClass::ThirdClass)
        throw Error(ErrorKind::CapabilityViolation,
                    "node " + receiver.id + " cannot relay logical qubits over " + edge.id);
    if (!(state_w >= 0.0 && state_w <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "payload quality outside [0,1]");
    if (!rng.bernoulli(params.p_hop)) return std::nullopt;
    return state_w * (1.0 - receiver.eps_res);
}

} // namespace qnet
