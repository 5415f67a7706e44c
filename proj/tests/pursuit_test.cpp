#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gomp/experiments.hpp"
#include "gomp/pursuit.hpp"
#include "gomp/theory.hpp"
#include "helpers.hpp"

namespace gomp {
namespace {

using testing::gaussian;
using testing::random_vector;

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

// Every k-subset of [0, n), in lexicographic order.
std::vector<std::vector<Index>> all_subsets(Index n, Index k) {
  std::vector<std::vector<Index>> out;
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  std::fill(mask.begin(), mask.begin() + k, true);
  do {
    std::vector<Index> s;
    for (Index j = 0; j < n; ++j) {
      if (mask[static_cast<std::size_t>(j)]) s.push_back(j);
    }
    out.push_back(s);
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return out;
}

struct Instance {
  Matrix phi;
  SparseSignal x;
  Vector y;
};

Instance noiseless(Index m, Index n, Index k, std::uint64_t seed, bool unit_columns = false) {
  Rng rng(seed);
  Matrix phi = gaussian(m, n, rng());
  if (unit_columns) {
    Eigen::MatrixXd a = phi.data();
    a.colwise().normalize();
    phi = Matrix(std::move(a));
  }
  SparseSignal x;
  x.length = n;
  x.support = random_subset(n, k, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index i = 0; i < k; ++i) x.values.push_back(normal(rng));
  Vector y = phi * x.dense();
  return {std::move(phi), std::move(x), std::move(y)};
}

PursuitConfig threshold_config(Index k, Index s) {
  PursuitConfig c;
  c.sparsity = k;
  c.selection_size = s;
  c.stopping = StoppingMode::threshold;
  return c;
}

TEST(IdentifyTopSTest, SingleMaximum) {
  EXPECT_EQ(identify_top_s(vec({3, 1, 2, 0}), 1), (IndexSet{0}));
}

TEST(IdentifyTopSTest, TiesGoToSmallerIndex) {
  EXPECT_EQ(identify_top_s(vec({2, -2, 1}), 2), (IndexSet{0, 1}));
  EXPECT_EQ(identify_top_s(vec({1, -1, 1, 1}), 2), (IndexSet{0, 1}));
}

TEST(IdentifyTopSTest, HonorsExclusion) {
  EXPECT_EQ(identify_top_s(vec({9, 1, 8, 7}), 2, IndexSet{0}), (IndexSet{2, 3}));
}

TEST(IdentifyTopSTest, TooManyRequestedThrows) {
  EXPECT_THROW(identify_top_s(vec({1, 2, 3}), 3, IndexSet{1}), ArgumentError);
}

TEST(IdentifyTopSTest, MatchesExhaustiveL1Maximizer) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Vector c = random_vector(12, seed);
    IndexSet best;
    double best_l1 = -1.0;
    for (const auto& s : all_subsets(12, 3)) {
      double l1 = 0.0;
      for (Index j : s) l1 += std::abs(c(j));
      if (l1 > best_l1) {
        best_l1 = l1;
        best = IndexSet::from_sorted(s);
      }
    }
    EXPECT_EQ(identify_top_s(c, 3), best) << "seed " << seed;
  }
}

TEST(PruneToKTest, Examples) {
  EXPECT_EQ(prune_to_k(vec({0, 5, 0, -7}), 2), (IndexSet{1, 3}));
  EXPECT_EQ(prune_to_k(vec({0, 0, 0}), 2), (IndexSet{0, 1}));
  EXPECT_THROW(prune_to_k(vec({1, 2}), 3), ArgumentError);
}

TEST(PruneToKTest, MatchesExhaustiveApproximationError) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Vector x = random_vector(10, 50 + seed);
    IndexSet best;
    double best_err = 1e300;
    for (const auto& s : all_subsets(10, 5)) {
      Vector rest = x;
      for (Index j : s) rest(j) = 0.0;
      const double err = rest.norm();
      if (err < best_err) {
        best_err = err;
        best = IndexSet::from_sorted(s);
      }
    }
    EXPECT_EQ(prune_to_k(x, 5), best);
  }
}

TEST(PursuitConfigTest, SelectionLargerThanSparsityNamesConstraint) {
  PursuitConfig c = threshold_config(2, 3);
  try {
    c.validate(20, 40);
    FAIL() << "expected ArgumentError";
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("S <= K"), std::string::npos);
  }
}

TEST(PursuitConfigTest, IterationGuard) {
  PursuitConfig c = threshold_config(3, 2);
  c.max_iterations = 11;
  EXPECT_THROW(c.validate(20, 40), ArgumentError);
  c.max_iterations = 10;
  EXPECT_NO_THROW(c.validate(20, 40));
  c.sparsity = 0;
  EXPECT_THROW(c.validate(20, 40), ArgumentError);
}

TEST(PursuitConfigTest, TheoremIterationCount) {
  EXPECT_EQ(theorem_iteration_count(10, 3), 26);
  EXPECT_EQ(theorem_iteration_count(10, 8), 10);
  EXPECT_EQ(theorem_iteration_count(2, 1), 16);
  EXPECT_EQ(iteration_cap(100, 3), 33);
}

TEST(GompSolveTest, IdentityRecoversInThreeIterations) {
  const Index n = 10;
  Vector y = Vector::Zero(n);
  y(1) = 3.0;
  y(4) = -1.5;
  y(8) = 0.25;
  PursuitConfig c = threshold_config(3, 1);
  c.residual_threshold = 1e-12;
  const PursuitResult r = gomp_solve(Matrix::identity(n), y, c);
  EXPECT_EQ(r.iterations_used, 3);
  EXPECT_EQ(r.support, (IndexSet{1, 4, 8}));
  EXPECT_EQ(r.residual_norm, 0.0);
  EXPECT_EQ(r.estimate, y);
}

int oracle_matches(Index seeds, bool unit_columns) {
  int successes = 0;
  for (Index seed = 0; seed < seeds; ++seed) {
    const Instance inst = noiseless(20, 40, 3, 1000 + static_cast<std::uint64_t>(seed), unit_columns);
    const PursuitResult r = gomp_solve(inst.phi, inst.y, threshold_config(3, 2));
    const Vector oracle = oracle_ls(inst.phi, inst.y, inst.x.support);
    if (r.residual_norm <= 1e-8 && (r.estimate - oracle).cwiseAbs().maxCoeff() <= 1e-8) {
      ++successes;
    }
  }
  return successes;
}

// Unit-norm Gaussian columns: about 99.7% over 5000 seeds.
TEST(GompSolveTest, NoiselessGaussianMatchesOracle) {
  EXPECT_GE(oracle_matches(100, true), 99);
}

// Raw N(0, 1/m) columns fail about 2% of the time at m = 20 (true support
// never selected before T^k fills all m rows).
TEST(GompSolveTest, NoiselessRawGaussianMostlyMatchesOracle) {
  EXPECT_GE(oracle_matches(1000, false), 970);
}

TEST(GompSolveTest, SingleAtom) {
  const Matrix phi = gaussian(10, 20, 5);
  const Vector y = 2.0 * phi.data().col(7);
  const PursuitResult r = omp_solve(phi, y, threshold_config(1, 1));
  EXPECT_EQ(r.iterations_used, 1);
  EXPECT_EQ(r.trace.support(1), (IndexSet{7}));
  EXPECT_NEAR(r.estimate(7), 2.0, 1e-12);
}

TEST(GompSolveTest, OmpRecoversMostNoiselessInstances) {
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Instance inst = noiseless(30, 60, 4, 5000 + seed);
    const PursuitResult r = omp_solve(inst.phi, inst.y, threshold_config(4, 1));
    if (r.support == inst.x.support && (r.estimate - inst.x.dense()).norm() <= 1e-8) ++exact;
  }
  EXPECT_GE(exact, 190);
}

TEST(GompSolveTest, OmpTraceEqualsGompWithSelectionOne) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Instance inst = noiseless(25, 50, 5, 300 + seed);
    inst.y += 0.05 * random_vector(25, seed);
    PursuitConfig c = threshold_config(5, 3);
    c.stopping = StoppingMode::fixed_iterations;
    const PursuitResult a = omp_solve(inst.phi, inst.y, c);
    c.selection_size = 1;
    const PursuitResult b = gomp_solve(inst.phi, inst.y, c);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (Index k = 1; k <= a.trace.size(); ++k) {
      const auto& ra = a.trace.iterations[static_cast<std::size_t>(k - 1)];
      const auto& rb = b.trace.iterations[static_cast<std::size_t>(k - 1)];
      EXPECT_EQ(ra.selected, rb.selected);
      EXPECT_EQ(ra.support, rb.support);
      EXPECT_EQ(ra.residual_norm, rb.residual_norm);  // bitwise
      EXPECT_EQ(ra.estimate, rb.estimate);
    }
    EXPECT_EQ(a.estimate, b.estimate);
  }
}

TEST(GompSolveTest, FixedModeDefaultCountAndClamp) {
  const Instance inst = noiseless(100, 200, 10, 8);
  PursuitConfig c = threshold_config(10, 3);
  c.stopping = StoppingMode::fixed_iterations;
  PursuitResult r = gomp_solve(inst.phi, inst.y, c);
  EXPECT_EQ(r.iteration_limit, 26);
  EXPECT_EQ(r.iterations_used, 26);
  EXPECT_FALSE(r.iterations_clamped);

  Instance small = noiseless(20, 40, 4, 9);
  small.y += 0.01 * random_vector(20, 3);
  c.sparsity = 4;
  c.selection_size = 1;  // 8K = 32 > m = 20
  r = gomp_solve(small.phi, small.y, c);
  EXPECT_EQ(r.iteration_limit, 20);
  EXPECT_TRUE(r.iterations_clamped);
}

TEST(GompSolveTest, ThresholdDefaultsToRelativeEpsilon) {
  const Instance inst = noiseless(20, 40, 3, 10);
  const PursuitResult r = gomp_solve(inst.phi, inst.y, threshold_config(3, 1));
  EXPECT_DOUBLE_EQ(r.threshold, 1e-6 * inst.y.norm());
  EXPECT_LE(r.trace.residual_norm(r.iterations_used), r.threshold);
}

TEST(GompSolveTest, SingularSubsystemReportsIteration) {
  Eigen::MatrixXd a = gaussian(10, 12, 4).data();
  a.col(9) = a.col(3);
  const Matrix phi(a);
  const Vector y = phi.data().col(3);
  try {
    gomp_solve(phi, y, threshold_config(2, 2));
    FAIL() << "expected SingularSystemError";
  } catch (const SingularSystemError& e) {
    ASSERT_TRUE(e.iteration().has_value());
    EXPECT_EQ(*e.iteration(), 1);
  }
}

TEST(GompSolveTest, RejectsWrongMeasurementLength) {
  EXPECT_THROW(gomp_solve(gaussian(10, 12, 4), random_vector(9, 1), threshold_config(2, 1)),
               ArgumentError);
}

TEST(GompSolveTest, TheoremThreeBoundOnCertifiedMatrix) {
  // K = 1, S = 1 needs delta_9, which enumerates exactly at n = 16.
  Rng rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix phi = perturbed_orthonormal(16, 16, 0.02, rng());
    const RicEstimate ric = ric_exact(phi, 9);
    ASSERT_LE(ric.delta, 0.125);
    SparseSignal x;
    x.length = 16;
    x.support = random_subset(16, 1, rng);
    x.values = {1.5};
    const Vector v = 0.1 * random_vector(16, rng());
    PursuitConfig c = threshold_config(1, 1);
    c.stopping = StoppingMode::fixed_iterations;
    const PursuitResult r = gomp_solve(phi, phi * x.dense() + v, c);
    EXPECT_LE((r.estimate - x.dense()).norm(), bound_constants(ric.delta).C * v.norm());
  }
}

TEST(GompSolveTest, NoiselessRecoveryOnCertifiedMatrix) {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix phi = perturbed_orthonormal(16, 16, 0.02, rng());
    ASSERT_LE(ric_exact(phi, 7).delta, 0.125);
    SparseSignal x;
    x.length = 16;
    x.support = random_subset(16, 1, rng);
    x.values = {-0.7};
    PursuitConfig c = threshold_config(1, 1);
    c.stopping = StoppingMode::fixed_iterations;
    const PursuitResult r = gomp_solve(phi, phi * x.dense(), c);
    EXPECT_LE(r.trace.residual_norm(r.trace.size()), 1e-8);
  }
}

// Trace invariants on random noisy runs: monotone residual, disjoint growth,
// residual orthogonal to the selected columns.
TEST(GompProperty, TraceInvariants) {
  Rng rng(31337);
  std::uniform_int_distribution<Index> pick_k(1, 8);
  std::uniform_int_distribution<Index> pick_s(1, 4);
  for (int trial = 0; trial < 150; ++trial) {
    const Index m = 40;
    const Index n = 80;
    const Index k = pick_k(rng);
    const Index s = std::min(k, pick_s(rng));
    Instance inst = noiseless(m, n, k, rng());
    inst.y += 0.1 * random_vector(m, rng());
    PursuitConfig c = threshold_config(k, s);
    c.stopping = StoppingMode::fixed_iterations;
    const PursuitResult r = gomp_solve(inst.phi, inst.y, c);
    IndexSet previous;
    double previous_norm = inst.y.norm();
    for (Index it = 1; it <= r.trace.size(); ++it) {
      const auto& rec = r.trace.iterations[static_cast<std::size_t>(it - 1)];
      EXPECT_EQ(rec.selected.size(), s);
      EXPECT_TRUE(rec.selected.disjoint(previous));
      EXPECT_EQ(rec.support, previous.united(rec.selected));
      EXPECT_EQ(rec.support.size(), it * s);
      EXPECT_LE(rec.residual_norm, previous_norm * (1 + 1e-12));
      const Vector residual = inst.y - inst.phi * rec.estimate;
      EXPECT_NEAR(residual.norm(), rec.residual_norm, 1e-10);
      // Once T^k spans all m rows the residual is pure round-off.
      if (residual.norm() > 1e-10 * inst.y.norm()) {
        for (Index j : rec.support) {
          EXPECT_LE(std::abs(inst.phi.col(j).dot(residual)),
                    1e-10 * inst.phi.col(j).norm() * residual.norm());
        }
      }
      previous = rec.support;
      previous_norm = rec.residual_norm;
    }
    EXPECT_EQ(r.support.size(), k);
    EXPECT_EQ(r.support, prune_to_k(r.trace.iterations.back().estimate, k));
    EXPECT_EQ(r.estimate, least_squares(inst.phi, r.support, inst.y).dense(n));
    for (Index j = 0; j < n; ++j) {
      if (!r.support.contains(j)) EXPECT_EQ(r.estimate(j), 0.0);
    }
  }
}

TEST(GompProperty, ExactRecoveryCertificate) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Instance inst = noiseless(30, 60, 4, 900 + seed);
    const PursuitResult r = gomp_solve(inst.phi, inst.y, threshold_config(4, 2));
    const IndexSet& last = r.trace.support(r.trace.size());
    if (last.intersected(inst.x.support).size() == 4 &&
        r.trace.residual_norm(r.trace.size()) <= 1e-6 * inst.y.norm()) {
      EXPECT_LE((r.estimate - inst.x.dense()).norm(), 1e-10 * std::max(1.0, inst.y.norm()));
    }
  }
}

TEST(PursuitJsonTest, SerializesTrace) {
  const Instance inst = noiseless(20, 40, 3, 77);
  const PursuitResult r = gomp_solve(inst.phi, inst.y, threshold_config(3, 2));
  const nlohmann::json j = to_json(r);
  EXPECT_EQ(j["config"]["selection_size"], 2);
  EXPECT_EQ(j["iterations"].size(), static_cast<std::size_t>(r.iterations_used));
  EXPECT_EQ(j["support"].get<std::vector<Index>>(), r.support.values());
  EXPECT_EQ(j["estimate"].size(), 40u);
  EXPECT_EQ(j["iterations"][0]["selected"].size(), 2u);
}

}  // namespace
}  // namespace gomp
