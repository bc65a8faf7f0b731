#pragma once

#include <cstdint>
#include <random>

#include "hbf/types.hpp"

namespace hbf {

/// Engine used everywhere. Each Monte Carlo work item gets its own instance
/// seeded from trial_seed(), so no engine state is ever shared.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for work item `index` of stream `stream` under `master`. Stateless, so
/// trial t gets the same seed regardless of execution order.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index,
                         std::uint64_t stream = 0);

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
cd complex_gaussian(Rng& rng, double variance = 1.0);

/// Laplacian deviate with zero mean and scale b (std dev = b*sqrt(2)).
double laplacian(Rng& rng, double scale);

/// Uniform phase in [0, 2*pi).
double uniform_angle(Rng& rng);

/// rows x cols matrix of i.i.d. unit-modulus entries with uniform phases.
CMat random_unit_modulus(Rng& rng, int rows, int cols);

/// rows x cols matrix of i.i.d. CN(0, 1) entries.
CMat random_gaussian(Rng& rng, int rows, int cols);

}  // namespace hbf
