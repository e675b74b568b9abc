#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "ssdopt/domain.hpp"

namespace ssdopt {

/// Random stream handed to a simulator for one replicate.
using Rng = std::mt19937_64;

/// One simulated trial: returns true when the null hypothesis is rejected.
/// Must be pure given the stream and must not touch shared mutable state.
using TrialSimulator = std::function<bool(const DesignPoint&, const Hypothesis&, Rng&)>;

struct McEstimate {
    double mean = 0.0;
    double variance = 0.0;
    std::int64_t n_samples = 0;
    std::int64_t successes = 0;
};

/// Counter-based seed: a bijective mix of (eval_index, replicate_index) keyed by the
/// master seed. Injective for eval_index, replicate_index < 2^32.
std::uint64_t derive_replicate_seed(std::uint64_t master_seed, std::uint64_t eval_index,
                                    std::uint64_t replicate_index);

/// Plain Monte Carlo estimate of the rejection probability over n_samples replicates.
/// Replicate r draws from Rng(derive_replicate_seed(seed, eval_index, r)), so the
/// result does not depend on `workers`. A throwing simulator raises SimulationError
/// carrying the replicate index and its seed.
McEstimate mc_estimate(const TrialSimulator& sim, const DesignPoint& point, const Hypothesis& hyp,
                       std::int64_t n_samples, std::uint64_t seed, std::uint64_t eval_index = 0,
                       int workers = 1);

}  // namespace ssdopt
