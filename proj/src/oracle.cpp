#include "qnet/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "qnet/density.hpp"
#include "qnet/physics.hpp"
#include "qnet/sim.hpp"

namespace qnet {

double OracleReport::max_deviation() const {
    return std::max({purify_fidelity, purify_probability, swap_fidelity, decoherence_fidelity});
}

OracleReport run_oracle_suite(std::size_t cases, std::uint64_t seed) {
    OracleReport report;
    RngStream rng(seed, "oracle:inputs");
    RngStream outcomes(seed, "oracle:outcomes");
    NodeSpec middle;
    middle.id = "B";
    middle.repeater_class = RepeaterClass::FirstClass;

    for (std::size_t i = 0; i < cases; ++i) {
        const double fa = 0.25 + 0.75 * rng.uniform();
        const double fb = 0.25 + 0.75 * rng.uniform();

        const auto closed = purification_map(fa, fb);
        const auto brute = density::purify<double>(fa, fb);
        report.purify_fidelity =
            std::max(report.purify_fidelity, std::abs(closed.fidelity - brute.fidelity));
        report.purify_probability =
            std::max(report.purify_probability, std::abs(closed.p_success - brute.p_success));

        const double wa = werner_from_fidelity(fa);
        const double wb = werner_from_fidelity(fb);
        WernerLink ab(1, 0, 1, wa, 0.0);
        WernerLink bc(2, 1, 2, wb, 0.0);
        const WernerLink ac = swap(ab, bc, 1, middle, 3, outcomes);
        report.swap_fidelity = std::max(
            report.swap_fidelity, std::abs(ac.fidelity() - density::swap_fidelity<double>(wa, wb)));

        const double t_coh = 0.1 + rng.uniform();
        const double dt = 2.0 * rng.uniform();
        const WernerLink aged = decohere(ab, dt, t_coh);
        const double lambda = std::exp(-dt / t_coh);
        report.decoherence_fidelity =
            std::max(report.decoherence_fidelity,
                     std::abs(aged.fidelity() - density::depolarized_fidelity<double>(wa, lambda, {1})));
        ++report.cases;
    }
    return report;
}

} // namespace qnet
