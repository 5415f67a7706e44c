#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gomp/generators.hpp"
#include "gomp/linalg.hpp"
#include "gomp/pursuit.hpp"

namespace gomp {

enum class SignalModel { gaussian_bernoulli, rademacher_bernoulli, compressible };

/// Which sparsity the solvers are told: the realized |T| of each trial, or
/// ceil(p n).
enum class SparsityInput { realized, expected };

struct SparseSignal {
  Index length = 0;
  IndexSet support;
  std::vector<double> values;  // aligned with support, all nonzero

  Index sparsity() const { return support.size(); }
  Vector dense() const;
};

/// Parameters of one Monte-Carlo trial family.
struct TrialSpec {
  Index rows = 100;
  Index cols = 200;
  /// Bernoulli rate p. Exactly one of sparsity_rate / fixed_sparsity is set.
  std::optional<double> sparsity_rate = 0.05;
  std::optional<Index> fixed_sparsity;
  Index selection_size = 3;
  /// Unset means noiseless. Values above 300 dB are treated as 300 dB.
  std::optional<double> snr_db;
  std::uint64_t seed = 0;
  SignalModel model = SignalModel::gaussian_bernoulli;
  double exponent = 2.0;  // compressible model only

  void validate() const;
  /// E||x||_2^2 under the model: p n, K, or sum_i i^{-2 exponent}.
  double expected_energy() const;
};

inline constexpr double kMaxSnrDb = 300.0;

struct GeneratedSignal {
  SparseSignal signal;
  Index resamples = 0;  // draws discarded because realized K < min_sparsity
};

/// Bernoulli(p) support then N(0,1) or +-1 values; fixed-K picks a uniform
/// K-subset; compressible emits |x|_(i) = i^{-exponent} at random positions
/// with random signs. Rate-based draws are repeated until |T| >= min_sparsity.
GeneratedSignal gen_signal(const TrialSpec& spec, Rng& rng, Index min_sparsity = 1);

/// (E||x||^2 / m) 10^{-snr/10}; zero when noiseless.
double noise_variance(const TrialSpec& spec);

/// i.i.d. N(0, noise_variance(spec)).
Vector gen_noise(const TrialSpec& spec, Index rows, Rng& rng);

/// Least squares on the true support, zero elsewhere.
Vector oracle_ls(const Matrix& phi, const Vector& y, const IndexSet& support);

/// Linear MMSE (Wiener) estimate p Phi'(p Phi Phi' + s2 I)^{-1} y for an
/// i.i.d. prior of per-entry variance p and white noise of variance s2.
Vector linear_mmse(const Matrix& phi, const Vector& y, double prior_variance,
                   double noise_variance);

enum class AlgorithmKind { omp, gomp, oracle_ls, linear_mmse };

struct Algorithm {
  AlgorithmKind kind = AlgorithmKind::gomp;
  Index selection_size = 1;  // gOMP only

  std::string name() const;
  static Algorithm parse(const std::string& name);
  friend bool operator==(const Algorithm&, const Algorithm&) = default;
};

struct AlgorithmOutcome {
  double mse = 0.0;
  double l2_error = 0.0;
  bool support_recovered = false;
  double wall_ms = 0.0;
  Index iterations = 0;
  bool failed = false;
  std::string error;
};

struct TrialRecord {
  Index trial = 0;
  Index realized_sparsity = 0;
  Index resamples = 0;
  double noise_norm = 0.0;
  double signal_power = 0.0;  // ||Phi x||_2^2
  std::vector<AlgorithmOutcome> outcomes;  // aligned with the algorithm list
};

struct ExperimentOptions {
  std::vector<Algorithm> algorithms = {{AlgorithmKind::omp, 1},
                                       {AlgorithmKind::gomp, 3},
                                       {AlgorithmKind::oracle_ls, 1},
                                       {AlgorithmKind::linear_mmse, 1}};
  Index trials = 2000;
  std::uint64_t master_seed = 0;
  SparsityInput sparsity_input = SparsityInput::realized;
  bool fixed_matrix = false;
  /// Default: fixed iterations when noisy, threshold when noiseless.
  std::optional<StoppingMode> stopping;
  /// Replaces the 8 in max{K, floor(8K/S)} in fixed mode (still clamped to
  /// floor(m/S)).
  std::optional<Index> iteration_multiplier;
  unsigned threads = 1;
};

/// Generates one instance (from master seed and trial index only) and runs
/// every algorithm on it.
TrialRecord run_trial(const TrialSpec& spec, const ExperimentOptions& options, Index trial);

struct CellSummary {
  double sparsity_rate = 0.0;
  std::optional<double> snr_db;
  Algorithm algorithm;
  double mean_mse = 0.0;
  double stderr_mse = 0.0;
  double mean_l2 = 0.0;
  double median_time_ms = 0.0;
  double mean_iterations = 0.0;
  double support_recovery_rate = 0.0;
  Index trials = 0;
  Index failures = 0;
};

struct SweepResult {
  std::vector<CellSummary> rows;
  /// One entry per grid point, trial records in trial order.
  std::vector<std::vector<TrialRecord>> records;
  std::vector<TrialSpec> cells;
  ExperimentOptions options;
};

/// MSE against SNR for every (p, snr) on the grid.
SweepResult run_mse_sweep(const TrialSpec& base, const std::vector<double>& rates,
                          const std::vector<double>& snrs_db, const ExperimentOptions& options);

/// Wall time against p. `base.snr_db` unset means noiseless instances.
SweepResult run_timing_sweep(const TrialSpec& base, const std::vector<double>& rates,
                             const ExperimentOptions& options);

struct CompressibleReport {
  Index sparsity = 0;
  Index iterations = 0;
  std::vector<double> ratios;  // ||x^ - x|| / (||x - x_K||_1 / sqrt K + ||v||)
  double mean = 0.0;
  double median = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
  Index failures = 0;
};

/// gOMP for max{2K, floor(16K/S)} iterations (clamped to floor(m/S)) on
/// possibly non-sparse signals. `spec.fixed_sparsity` gives K.
CompressibleReport run_compressible(const TrialSpec& spec, const ExperimentOptions& options);

/// Per-trial ratio; 0 when both numerator and denominator vanish.
double compressible_ratio(const Vector& x, const Vector& estimate, Index sparsity,
                          double noise_norm);

/// Columns: sparsity_rate,snr_db,algorithm,mean_mse,stderr_mse,mean_l2,
/// median_time_ms,mean_iterations,support_recovery_rate,trials,failures.
std::string sweep_to_csv(const SweepResult& result, bool include_timing = true);
nlohmann::json sweep_to_json(const SweepResult& result, bool include_timing = true);
nlohmann::json sweep_manifest(const SweepResult& result, const std::string& command);
nlohmann::json to_json(const TrialSpec& spec);
nlohmann::json to_json(const CompressibleReport& report);

const char* to_string(SignalModel model);
SignalModel signal_model_from_string(const std::string& name);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace gomp
