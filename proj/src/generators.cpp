#include "gomp/generators.hpp"

#include <cmath>
#include <numeric>
#include <vector>

namespace gomp {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ stream) ^ index);
}

Matrix gen_matrix(Index rows, Index cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw ArgumentError("gen_matrix: dimensions must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(rows)));
  Eigen::MatrixXd data(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) data(i, j) = normal(rng);
  }
  return Matrix(std::move(data));
}

Matrix orthonormal_columns(Index rows, Index cols, std::uint64_t seed) {
  if (cols > rows) throw ArgumentError("orthonormal_columns: need n <= m");
  const Matrix g = gen_matrix(rows, cols, seed);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g.data());
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  return Matrix(std::move(q));
}

Matrix perturbed_orthonormal(Index rows, Index cols, double eps, std::uint64_t seed) {
  const Matrix q = orthonormal_columns(rows, cols, derive_seed(seed, 1));
  const Matrix e = gen_matrix(rows, cols, derive_seed(seed, 2));
  return Matrix(q.data() + eps * e.data());
}

IndexSet random_subset(Index n, Index k, Rng& rng) {
  if (k < 0 || k > n) throw ArgumentError("random_subset: need 0 <= k <= n");
  // Partial Fisher-Yates.
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return IndexSet::from_unsorted(std::move(pool));
}

}  // namespace gomp
