#include "gomp/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace gomp {
namespace {

constexpr std::uint64_t kStreamTrial = 0x7472;
constexpr std::uint64_t kStreamMatrix = 1;
constexpr std::uint64_t kStreamSignal = 2;
constexpr std::uint64_t kStreamNoise = 3;
constexpr std::uint64_t kStreamFixedMatrix = 0x6669786d;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

double median_of(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

// Nearest-rank quantile of an ascending-sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

// Runs fn(i) for i in [0, count) on `threads` workers. Results must be written
// to index-addressed storage by fn, so output order never depends on scheduling.
template <typename Fn>
void parallel_for(Index count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, threads);
  if (threads == 1 || count < 2) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (Index i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& worker : pool) worker.join();
  if (failure) std::rethrow_exception(failure);
}

Index solver_sparsity(const TrialSpec& spec, const ExperimentOptions& options, Index realized) {
  if (spec.fixed_sparsity) return *spec.fixed_sparsity;
  if (options.sparsity_input == SparsityInput::expected) {
    return std::max<Index>(
        1, static_cast<Index>(std::ceil(*spec.sparsity_rate * static_cast<double>(spec.cols))));
  }
  return realized;
}

Index min_sparsity_for(const ExperimentOptions& options) {
  Index need = 1;
  for (const auto& a : options.algorithms) {
    if (a.kind == AlgorithmKind::gomp) need = std::max(need, a.selection_size);
  }
  return need;
}

struct Instance {
  Matrix phi;
  SparseSignal signal;
  Index resamples = 0;
  Vector x;
  Vector noise;
  Vector y;
};

Instance make_instance(const TrialSpec& spec, const ExperimentOptions& options, Index trial,
                       Index min_sparsity) {
  const std::uint64_t trial_seed =
      derive_seed(options.master_seed, kStreamTrial, static_cast<std::uint64_t>(trial));
  const std::uint64_t matrix_seed = options.fixed_matrix
                                        ? derive_seed(options.master_seed, kStreamFixedMatrix)
                                        : derive_seed(trial_seed, kStreamMatrix);
  Matrix phi = gen_matrix(spec.rows, spec.cols, matrix_seed);
  Rng signal_rng(derive_seed(trial_seed, kStreamSignal));
  Rng noise_rng(derive_seed(trial_seed, kStreamNoise));
  GeneratedSignal generated = gen_signal(spec, signal_rng, min_sparsity);
  Vector x = generated.signal.dense();
  Vector noise = gen_noise(spec, spec.rows, noise_rng);
  Vector y = phi * x + noise;
  return Instance{std::move(phi), std::move(generated.signal), generated.resamples,
                  std::move(x), std::move(noise), std::move(y)};
}

void summarize(CellSummary& row, const std::vector<TrialRecord>& records, std::size_t slot) {
  std::vector<double> mses, l2s, times, iterations;
  Index recovered = 0;
  for (const auto& rec : records) {
    const auto& out = rec.outcomes[slot];
    if (out.failed) {
      ++row.failures;
      continue;
    }
    mses.push_back(out.mse);
    l2s.push_back(out.l2_error);
    times.push_back(out.wall_ms);
    iterations.push_back(static_cast<double>(out.iterations));
    if (out.support_recovered) ++recovered;
  }
  const auto n = static_cast<double>(mses.size());
  row.trials = static_cast<Index>(records.size());
  if (mses.empty()) {
    row.mean_mse = row.stderr_mse = row.mean_l2 = row.median_time_ms = row.mean_iterations =
        std::numeric_limits<double>::quiet_NaN();
    return;
  }
  row.mean_mse = std::accumulate(mses.begin(), mses.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : mses) ss += (v - row.mean_mse) * (v - row.mean_mse);
  row.stderr_mse = mses.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
  row.mean_l2 = std::accumulate(l2s.begin(), l2s.end(), 0.0) / n;
  row.median_time_ms = median_of(times);
  row.mean_iterations = std::accumulate(iterations.begin(), iterations.end(), 0.0) / n;
  row.support_recovery_rate = static_cast<double>(recovered) / n;
}

SweepResult run_grid(std::vector<TrialSpec> cells, const ExperimentOptions& options) {
  if (cells.empty()) throw ArgumentError("sweep grid is empty");
  if (options.algorithms.empty()) throw ArgumentError("no algorithms selected");
  if (options.trials < 1) throw ArgumentError("trials must be >= 1");
  SweepResult result;
  result.options = options;
  for (const auto& cell : cells) {
    cell.validate();
    std::vector<TrialRecord> records(static_cast<std::size_t>(options.trials));
    parallel_for(options.trials, options.threads, [&](Index t) {
      records[static_cast<std::size_t>(t)] = run_trial(cell, options, t);
    });
    for (std::size_t a = 0; a < options.algorithms.size(); ++a) {
      CellSummary row;
      row.sparsity_rate = cell.sparsity_rate.value_or(
          static_cast<double>(cell.fixed_sparsity.value_or(0)) / static_cast<double>(cell.cols));
      row.snr_db = cell.snr_db;
      row.algorithm = options.algorithms[a];
      summarize(row, records, a);
      result.rows.push_back(row);
    }
    result.records.push_back(std::move(records));
  }
  result.cells = std::move(cells);
  return result;
}

}  // namespace

Vector SparseSignal::dense() const {
  Vector out = Vector::Zero(length);
  for (Index i = 0; i < support.size(); ++i) out(support[i]) = values[static_cast<std::size_t>(i)];
  return out;
}

void TrialSpec::validate() const {
  const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (rows < 1 || cols < 1) fail("m and n must be >= 1");
  if (sparsity_rate.has_value() == fixed_sparsity.has_value()) {
    fail("exactly one of sparsity_rate and sparsity must be given");
  }
  if (sparsity_rate) {
    const double p = *sparsity_rate;
    if (!(p > 0.0 && p <= 1.0)) fail("sparsity_rate must lie in (0, 1]");
    if (p * static_cast<double>(cols) < 1.0) fail("sparsity_rate * n must be >= 1");
    if (model == SignalModel::compressible) fail("compressible model needs a fixed sparsity K");
  }
  if (fixed_sparsity && (*fixed_sparsity < 1 || *fixed_sparsity > cols)) {
    fail("sparsity K must lie in [1, n]");
  }
  if (selection_size < 1) fail("selection_size S must be >= 1");
  if (fixed_sparsity && selection_size > *fixed_sparsity) {
    fail("selection_size S exceeds sparsity K (requires S <= K)");
  }
  if (snr_db && std::isnan(*snr_db)) fail("snr_db must be a number");
  if (model == SignalModel::compressible && !(exponent > 0.0)) {
    fail("compressible exponent must be positive");
  }
}

double TrialSpec::expected_energy() const {
  if (model == SignalModel::compressible) {
    double total = 0.0;
    for (Index i = 1; i <= cols; ++i) total += std::pow(static_cast<double>(i), -2.0 * exponent);
    return total;
  }
  if (fixed_sparsity) return static_cast<double>(*fixed_sparsity);
  return *sparsity_rate * static_cast<double>(cols);
}

GeneratedSignal gen_signal(const TrialSpec& spec, Rng& rng, Index min_sparsity) {
  spec.validate();
  GeneratedSignal out;
  SparseSignal& s = out.signal;
  s.length = spec.cols;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  auto draw_value = [&] {
    if (spec.model == SignalModel::rademacher_bernoulli) return coin(rng) ? 1.0 : -1.0;
    double v = 0.0;
    while (v == 0.0) v = normal(rng);
    return v;
  };

  if (spec.model == SignalModel::compressible) {
    std::vector<Index> perm(static_cast<std::size_t>(spec.cols));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index i = spec.cols - 1; i > 0; --i) {
      std::uniform_int_distribution<Index> pick(0, i);
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
    }
    Vector dense = Vector::Zero(spec.cols);
    for (Index i = 0; i < spec.cols; ++i) {
      const double magnitude = std::pow(static_cast<double>(i + 1), -spec.exponent);
      dense(perm[static_cast<std::size_t>(i)]) = coin(rng) ? magnitude : -magnitude;
    }
    std::vector<Index> all(static_cast<std::size_t>(spec.cols));
    std::iota(all.begin(), all.end(), Index{0});
    s.support = IndexSet::from_sorted(std::move(all));
    s.values.assign(dense.data(), dense.data() + dense.size());
    return out;
  }

  if (spec.fixed_sparsity) {
    s.support = random_subset(spec.cols, *spec.fixed_sparsity, rng);
    for (Index i = 0; i < s.support.size(); ++i) s.values.push_back(draw_value());
    return out;
  }

  std::bernoulli_distribution active(*spec.sparsity_rate);
  const Index need = std::min(std::max<Index>(1, min_sparsity), spec.cols);
  for (;;) {
    std::vector<Index> support;
    std::vector<double> values;
    for (Index j = 0; j < spec.cols; ++j) {
      if (active(rng)) {
        support.push_back(j);
        values.push_back(draw_value());
      }
    }
    if (static_cast<Index>(support.size()) >= need) {
      s.support = IndexSet::from_sorted(std::move(support));
      s.values = std::move(values);
      return out;
    }
    ++out.resamples;
  }
}

double noise_variance(const TrialSpec& spec) {
  if (!spec.snr_db) return 0.0;
  const double snr = std::min(*spec.snr_db, kMaxSnrDb);
  return spec.expected_energy() / static_cast<double>(spec.rows) * std::pow(10.0, -snr / 10.0);
}

Vector gen_noise(const TrialSpec& spec, Index rows, Rng& rng) {
  const double variance = noise_variance(spec);
  if (variance == 0.0) return Vector::Zero(rows);
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  Vector v(rows);
  for (Index i = 0; i < rows; ++i) v(i) = normal(rng);
  return v;
}

Vector oracle_ls(const Matrix& phi, const Vector& y, const IndexSet& support) {
  return least_squares(phi, support, y).dense(phi.cols());
}

Vector linear_mmse(const Matrix& phi, const Vector& y, double prior_variance,
                   double noise_variance) {
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
    throw ArgumentError("linear_mmse: noise variance must be positive and finite");
  }
  if (!(prior_variance > 0.0)) throw ArgumentError("linear_mmse: prior variance must be positive");
  if (y.size() != phi.rows()) throw ArgumentError("linear_mmse: measurement length mismatch");
  const auto& a = phi.data();
  Eigen::MatrixXd system = prior_variance * (a * a.transpose());
  system.diagonal().array() += noise_variance;
  Eigen::LLT<Eigen::MatrixXd> chol(system);
  if (chol.info() != Eigen::Success) {
    throw SingularSystemError("linear_mmse: system matrix is not positive definite");
  }
  return prior_variance * (a.transpose() * chol.solve(y));
}

std::string Algorithm::name() const {
  switch (kind) {
    case AlgorithmKind::omp: return "OMP";
    case AlgorithmKind::gomp: return "gOMP(S=" + std::to_string(selection_size) + ")";
    case AlgorithmKind::oracle_ls: return "Oracle-LS";
    case AlgorithmKind::linear_mmse: return "LMMSE";
  }
  return "?";
}

Algorithm Algorithm::parse(const std::string& name) {
  if (name == "OMP" || name == "omp") return {AlgorithmKind::omp, 1};
  if (name == "Oracle-LS" || name == "oracle_ls") return {AlgorithmKind::oracle_ls, 1};
  if (name == "LMMSE" || name == "linear_mmse") return {AlgorithmKind::linear_mmse, 1};
  for (const std::string prefix : {"gOMP(S=", "gomp:"}) {
    if (name.rfind(prefix, 0) == 0) {
      std::string digits = name.substr(prefix.size());
      if (!digits.empty() && digits.back() == ')') digits.pop_back();
      Index s = 0;
      const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), s);
      if (ec == std::errc() && ptr == digits.data() + digits.size() && s >= 1) {
        return {AlgorithmKind::gomp, s};
      }
    }
  }
  throw ConfigError("unknown algorithm '" + name +
                    "' (expected OMP, gOMP(S=<n>), Oracle-LS or LMMSE)");
}

TrialRecord run_trial(const TrialSpec& spec, const ExperimentOptions& options, Index trial) {
  const Instance inst = make_instance(spec, options, trial, min_sparsity_for(options));
  TrialRecord rec;
  rec.trial = trial;
  rec.realized_sparsity = inst.signal.sparsity();
  rec.resamples = inst.resamples;
  rec.noise_norm = inst.noise.norm();
  rec.signal_power = (inst.y - inst.noise).squaredNorm();

  const Index k = solver_sparsity(spec, options, rec.realized_sparsity);
  const double s2 = noise_variance(spec);
  const StoppingMode stopping = options.stopping.value_or(
      spec.snr_db ? StoppingMode::fixed_iterations : StoppingMode::threshold);
  const auto n = static_cast<double>(spec.cols);

  for (const auto& algorithm : options.algorithms) {
    AlgorithmOutcome out;
    try {
      Vector estimate;
      const auto start = std::chrono::steady_clock::now();
      if (algorithm.kind == AlgorithmKind::omp || algorithm.kind == AlgorithmKind::gomp) {
        PursuitConfig config;
        config.sparsity = k;
        config.selection_size = algorithm.kind == AlgorithmKind::omp ? 1 : algorithm.selection_size;
        config.stopping = stopping;
        if (stopping == StoppingMode::fixed_iterations && options.iteration_multiplier) {
          const Index s = config.selection_size;
          config.max_iterations = std::min(std::max(k, *options.iteration_multiplier * k / s),
                                           iteration_cap(spec.rows, s));
        }
        PursuitResult res = gomp_solve(inst.phi, inst.y, config);
        out.iterations = res.iterations_used;
        out.support_recovered = res.support == inst.signal.support;
        estimate = std::move(res.estimate);
      } else if (algorithm.kind == AlgorithmKind::oracle_ls) {
        estimate = oracle_ls(inst.phi, inst.y, inst.signal.support);
        out.support_recovered = true;
      } else {
        estimate = linear_mmse(inst.phi, inst.y, spec.expected_energy() / n, s2);
        out.support_recovered = prune_to_k(estimate, k) == inst.signal.support;
      }
      const auto stop = std::chrono::steady_clock::now();
      out.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
      const Vector diff = inst.x - estimate;
      out.mse = diff.squaredNorm() / n;
      out.l2_error = diff.norm();
    } catch (const std::exception& e) {
      out.failed = true;
      out.error = e.what();
    }
    rec.outcomes.push_back(std::move(out));
  }
  return rec;
}

SweepResult run_mse_sweep(const TrialSpec& base, const std::vector<double>& rates,
                          const std::vector<double>& snrs_db, const ExperimentOptions& options) {
  if (rates.empty() || snrs_db.empty()) throw ArgumentError("sweep grid is empty");
  std::vector<TrialSpec> cells;
  for (double p : rates) {
    for (double snr : snrs_db) {
      TrialSpec cell = base;
      cell.sparsity_rate = p;
      cell.fixed_sparsity.reset();
      cell.snr_db = snr;
      cells.push_back(cell);
    }
  }
  return run_grid(std::move(cells), options);
}

SweepResult run_timing_sweep(const TrialSpec& base, const std::vector<double>& rates,
                             const ExperimentOptions& options) {
  if (rates.empty()) throw ArgumentError("sweep grid is empty");
  std::vector<TrialSpec> cells;
  for (double p : rates) {
    TrialSpec cell = base;
    cell.sparsity_rate = p;
    cell.fixed_sparsity.reset();
    cells.push_back(cell);
  }
  return run_grid(std::move(cells), options);
}

double compressible_ratio(const Vector& x, const Vector& estimate, Index sparsity,
                          double noise_norm) {
  const IndexSet head = prune_to_k(x, sparsity);
  double tail_l1 = x.lpNorm<1>();
  for (Index j : head) tail_l1 -= std::abs(x(j));
  tail_l1 = std::max(tail_l1, 0.0);
  const double denominator = tail_l1 / std::sqrt(static_cast<double>(sparsity)) + noise_norm;
  const double numerator = (estimate - x).norm();
  if (denominator == 0.0) {
    return numerator <= 1e-10 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return numerator / denominator;
}

CompressibleReport run_compressible(const TrialSpec& spec, const ExperimentOptions& options) {
  spec.validate();
  if (!spec.fixed_sparsity) throw ConfigError("compressible runs need a fixed sparsity K");
  if (options.trials < 1) throw ArgumentError("trials must be >= 1");
  const Index k = *spec.fixed_sparsity;
  const Index s = spec.selection_size;
  CompressibleReport report;
  report.sparsity = k;
  report.iterations = std::min(std::max(2 * k, (16 * k) / s), iteration_cap(spec.rows, s));

  ExperimentOptions gen_options = options;
  gen_options.algorithms = {{AlgorithmKind::gomp, s}};
  std::vector<double> ratios(static_cast<std::size_t>(options.trials));
  std::vector<char> failed(static_cast<std::size_t>(options.trials), 0);
  parallel_for(options.trials, options.threads, [&](Index t) {
    const Instance inst = make_instance(spec, gen_options, t, s);
    try {
      PursuitConfig config;
      config.sparsity = k;
      config.selection_size = s;
      config.stopping = StoppingMode::fixed_iterations;
      config.max_iterations = report.iterations;
      const PursuitResult res = gomp_solve(inst.phi, inst.y, config);
      ratios[static_cast<std::size_t>(t)] =
          compressible_ratio(inst.x, res.estimate, k, inst.noise.norm());
    } catch (const std::exception&) {
      failed[static_cast<std::size_t>(t)] = 1;
    }
  });
  for (std::size_t t = 0; t < ratios.size(); ++t) {
    if (failed[t]) {
      ++report.failures;
    } else {
      report.ratios.push_back(ratios[t]);
    }
  }
  std::vector<double> sorted = report.ratios;
  std::sort(sorted.begin(), sorted.end());
  if (!sorted.empty()) {
    report.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
                  static_cast<double>(sorted.size());
    report.median = quantile_sorted(sorted, 0.5);
    report.p90 = quantile_sorted(sorted, 0.9);
    report.p99 = quantile_sorted(sorted, 0.99);
    report.max = sorted.back();
  }
  return report;
}

std::string sweep_to_csv(const SweepResult& result, bool include_timing) {
  std::string out = "sparsity_rate,snr_db,algorithm,mean_mse,stderr_mse,mean_l2,";
  if (include_timing) out += "median_time_ms,";
  out += "mean_iterations,support_recovery_rate,trials,failures\n";
  for (const auto& row : result.rows) {
    out += format_number(row.sparsity_rate) + ',';
    out += (row.snr_db ? format_number(*row.snr_db) : std::string()) + ',';
    out += row.algorithm.name() + ',';
    out += format_number(row.mean_mse) + ',' + format_number(row.stderr_mse) + ',' +
           format_number(row.mean_l2) + ',';
    if (include_timing) out += format_number(row.median_time_ms) + ',';
    out += format_number(row.mean_iterations) + ',' + format_number(row.support_recovery_rate) +
           ',' + std::to_string(row.trials) + ',' + std::to_string(row.failures) + '\n';
  }
  return out;
}

nlohmann::json sweep_to_json(const SweepResult& result, bool include_timing) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : result.rows) {
    nlohmann::json r;
    r["sparsity_rate"] = row.sparsity_rate;
    r["snr_db"] = row.snr_db ? nlohmann::json(*row.snr_db) : nlohmann::json();
    r["algorithm"] = row.algorithm.name();
    r["mean_mse"] = row.mean_mse;
    r["stderr_mse"] = row.stderr_mse;
    r["mean_l2"] = row.mean_l2;
    if (include_timing) r["median_time_ms"] = row.median_time_ms;
    r["mean_iterations"] = row.mean_iterations;
    r["support_recovery_rate"] = row.support_recovery_rate;
    r["trials"] = row.trials;
    r["failures"] = row.failures;
    rows.push_back(std::move(r));
  }
  return {{"rows", std::move(rows)}};
}

nlohmann::json to_json(const TrialSpec& spec) {
  nlohmann::json j;
  j["m"] = spec.rows;
  j["n"] = spec.cols;
  j["sparsity_rate"] = spec.sparsity_rate ? nlohmann::json(*spec.sparsity_rate) : nlohmann::json();
  j["sparsity"] = spec.fixed_sparsity ? nlohmann::json(*spec.fixed_sparsity) : nlohmann::json();
  j["selection_size"] = spec.selection_size;
  j["snr_db"] = spec.snr_db ? nlohmann::json(*spec.snr_db) : nlohmann::json();
  j["signal_model"] = to_string(spec.model);
  if (spec.model == SignalModel::compressible) j["exponent"] = spec.exponent;
  return j;
}

nlohmann::json sweep_manifest(const SweepResult& result, const std::string& command) {
  nlohmann::json j;
  j["tool"] = "gomp";
  j["version"] = "0.1.0";
  j["command"] = command;
  j["master_seed"] = result.options.master_seed;
  j["trials"] = result.options.trials;
  j["fixed_matrix"] = result.options.fixed_matrix;
  j["sparsity_input"] =
      result.options.sparsity_input == SparsityInput::realized ? "realized" : "expected";
  j["seed_derivation"] = "splitmix64(master, trial); streams matrix=1 signal=2 noise=3";
  nlohmann::json algos = nlohmann::json::array();
  for (const auto& a : result.options.algorithms) algos.push_back(a.name());
  j["algorithms"] = algos;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : result.cells) cells.push_back(to_json(c));
  j["cells"] = cells;
  j["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                       std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION);
  return j;
}

nlohmann::json to_json(const CompressibleReport& report) {
  return {{"sparsity", report.sparsity}, {"iterations", report.iterations},
          {"trials", static_cast<Index>(report.ratios.size()) + report.failures},
          {"failures", report.failures}, {"ratio_mean", report.mean},
          {"ratio_median", report.median}, {"ratio_p90", report.p90},
          {"ratio_p99", report.p99}, {"ratio_max", report.max}};
}

const char* to_string(SignalModel model) {
  switch (model) {
    case SignalModel::gaussian_bernoulli: return "gaussian_bernoulli";
    case SignalModel::rademacher_bernoulli: return "rademacher_bernoulli";
    case SignalModel::compressible: return "compressible";
  }
  return "?";
}

SignalModel signal_model_from_string(const std::string& name) {
  if (name == "gaussian_bernoulli") return SignalModel::gaussian_bernoulli;
  if (name == "rademacher_bernoulli") return SignalModel::rademacher_bernoulli;
  if (name == "compressible") return SignalModel::compressible;
  throw ConfigError("unknown signal model '" + name + "'");
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ArgumentError("spearman: need two samples of equal length >= 2");
  }
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace gomp
