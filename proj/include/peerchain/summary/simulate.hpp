#pragma once

#include <cstdint>
#include <vector>

#include "peerchain/parallel/kernels.hpp"

namespace peerchain::summary {

struct SimulationReport {
    std::size_t runs = 0;
    std::uint64_t total_attempts = 0;
    std::size_t accepted = 0;
    std::size_t exhausted = 0;
    /// Accepted runs whose provenance is not two true verdicts from distinct
    /// non-generator validators.
    std::size_t provenance_violations = 0;
    /// Exhausted runs containing an attempt both validators accepted.
    std::size_t leaked_summaries = 0;
    std::vector<std::uint32_t> attempts;

    double mean_attempts() const { return runs ? static_cast<double>(total_attempts) / static_cast<double>(runs) : 0.0; }
};

/// Runs the consensus loop `runs` times on a 3-instance pool whose validators
/// accept independently with probability `accept_p`. Run i draws from streams
/// derived from (seed, i) only, so serial and parallel results are identical.
SimulationReport simulate_consensus(std::size_t runs, double accept_p, std::uint32_t max_attempts, std::uint64_t seed,
                                    parallel::Exec exec);

}  // namespace peerchain::summary
