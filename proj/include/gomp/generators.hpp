#pragma once

#include <cstdint>
#include <random>

#include "gomp/linalg.hpp"

namespace gomp {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer over (seed, stream, index). Used to give every trial
/// and every random stream inside a trial its own independent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

/// i.i.d. N(0, 1/m) entries.
Matrix gen_matrix(Index rows, Index cols, std::uint64_t seed);

/// m x n matrix with orthonormal columns (n <= m), from the Q factor of a
/// Gaussian matrix.
Matrix orthonormal_columns(Index rows, Index cols, std::uint64_t seed);

/// Q + eps * E with Q orthonormal-column and E i.i.d. N(0, 1/m).
Matrix perturbed_orthonormal(Index rows, Index cols, double eps, std::uint64_t seed);

/// Uniformly random k-subset of [0, n).
IndexSet random_subset(Index n, Index k, Rng& rng);

}  // namespace gomp
