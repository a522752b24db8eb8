#pragma once

#include <cstddef>
#include <cstdint>

namespace qnet {

// Maximum absolute deviations between the closed-form maps and the
// density-matrix reference over random Werner inputs.
struct OracleReport {
    std::size_t cases = 0;
    double purify_fidelity = 0.0;
    double purify_probability = 0.0;
    double swap_fidelity = 0.0;
    double decoherence_fidelity = 0.0;

    double max_deviation() const;
};

OracleReport run_oracle_suite(std::size_t cases = 128, std::uint64_t seed = 1);

} // namespace qnet
