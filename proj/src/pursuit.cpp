#include "gomp/pursuit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace gomp {
namespace {

// Orders indices by descending magnitude, then ascending index.
struct ByMagnitude {
  const Vector* values;
  bool operator()(Index a, Index b) const {
    const double ma = std::abs((*values)(a));
    const double mb = std::abs((*values)(b));
    if (ma != mb) return ma > mb;
    return a < b;
  }
};

std::vector<Index> top_by_magnitude(const Vector& values, std::vector<Index> candidates,
                                    Index count) {
  const auto mid = candidates.begin() + count;
  std::partial_sort(candidates.begin(), mid, candidates.end(), ByMagnitude{&values});
  candidates.erase(mid, candidates.end());
  return candidates;
}

}  // namespace

void PursuitConfig::validate(Index rows, Index cols) const {
  const auto fail = [](const std::string& msg) { throw ArgumentError(msg); };
  if (sparsity < 1) fail("sparsity K must be >= 1");
  if (selection_size < 1) fail("selection size S must be >= 1");
  if (selection_size > sparsity) {
    fail("selection size S = " + std::to_string(selection_size) +
         " exceeds sparsity K = " + std::to_string(sparsity) + " (requires S <= K)");
  }
  if (sparsity > cols) fail("sparsity K exceeds the number of columns n");
  if (sparsity > rows) fail("sparsity K exceeds the number of rows m");
  if (selection_size > rows) fail("selection size S exceeds the number of rows m");
  if (residual_threshold && !(std::isfinite(*residual_threshold) && *residual_threshold >= 0)) {
    fail("residual threshold must be finite and nonnegative");
  }
  if (max_iterations) {
    if (*max_iterations < 1) fail("max_iterations must be >= 1");
    if (*max_iterations * selection_size > rows) {
      fail("max_iterations * S = " + std::to_string(*max_iterations * selection_size) +
           " exceeds m = " + std::to_string(rows) + " (requires k <= m/S)");
    }
    if (*max_iterations * selection_size > cols) {
      fail("max_iterations * S = " + std::to_string(*max_iterations * selection_size) +
           " exceeds n = " + std::to_string(cols) + " (not enough columns to select)");
    }
  }
}

Index theorem_iteration_count(Index sparsity, Index selection_size) {
  return std::max(sparsity, (8 * sparsity) / selection_size);
}

Index iteration_cap(Index rows, Index selection_size) { return rows / selection_size; }

double PursuitTrace::residual_norm(Index k) const {
  if (k == 0) return initial_residual_norm;
  if (k < 0 || k > size()) throw ArgumentError("trace has no iteration " + std::to_string(k));
  return iterations[static_cast<std::size_t>(k - 1)].residual_norm;
}

const IndexSet& PursuitTrace::support(Index k) const {
  static const IndexSet kEmpty;
  if (k == 0) return kEmpty;
  if (k < 0 || k > size()) throw ArgumentError("trace has no iteration " + std::to_string(k));
  return iterations[static_cast<std::size_t>(k - 1)].support;
}

IndexSet identify_top_s(const Vector& c, Index count, const IndexSet& exclude) {
  exclude.check_bound(c.size());
  const Index available = c.size() - exclude.size();
  if (count < 0 || count > available) {
    throw ArgumentError("cannot select " + std::to_string(count) + " indices from " +
                        std::to_string(available) + " available");
  }
  std::vector<Index> candidates;
  candidates.reserve(static_cast<std::size_t>(available));
  for (Index j = 0; j < c.size(); ++j) {
    if (!exclude.contains(j)) candidates.push_back(j);
  }
  return IndexSet::from_unsorted(top_by_magnitude(c, std::move(candidates), count));
}

IndexSet prune_to_k(const Vector& estimate, Index count) {
  if (count < 0 || count > estimate.size()) {
    throw ArgumentError("cannot keep " + std::to_string(count) + " of " +
                        std::to_string(estimate.size()) + " entries");
  }
  std::vector<Index> all(static_cast<std::size_t>(estimate.size()));
  std::iota(all.begin(), all.end(), Index{0});
  return IndexSet::from_unsorted(top_by_magnitude(estimate, std::move(all), count));
}

PursuitResult gomp_solve(const Matrix& phi, const Vector& y, const PursuitConfig& config) {
  const Index m = phi.rows();
  const Index n = phi.cols();
  config.validate(m, n);
  if (y.size() != m) {
    throw ArgumentError("measurement vector has length " + std::to_string(y.size()) +
                        ", expected " + std::to_string(m));
  }
  if (!y.allFinite()) throw ArgumentError("measurement vector must be finite");

  const Index s = config.selection_size;
  PursuitResult result;
  result.config = config;

  // Selection would run out of columns before rows when n < m.
  const Index cap = iteration_cap(std::min(m, n), s);
  Index limit = 0;
  if (config.max_iterations) {
    limit = *config.max_iterations;
  } else {
    limit = config.stopping == StoppingMode::fixed_iterations
                ? theorem_iteration_count(config.sparsity, s)
                : cap;
    if (limit > cap) {
      limit = cap;
      result.iterations_clamped = true;
    }
  }
  result.iteration_limit = limit;
  const bool use_threshold = config.stopping == StoppingMode::threshold;
  result.threshold = use_threshold ? config.residual_threshold.value_or(1e-6 * y.norm()) : 0.0;

  IncrementalQr qr(phi, limit * s);
  Vector residual = y;
  double residual_norm = y.norm();
  result.trace.initial_residual_norm = residual_norm;
  result.trace.iterations.reserve(static_cast<std::size_t>(limit));

  Index k = 0;
  while (k < limit && !(use_threshold && residual_norm <= result.threshold)) {
    ++k;
    const Vector c = correlations(phi, residual);
    IndexSet selected = identify_top_s(c, s, qr.support());
    try {
      qr.append(selected);
    } catch (const SingularSystemError& e) {
      throw SingularSystemError(std::string(e.what()) + " (iteration " + std::to_string(k) + ")",
                                k);
    }
    LsSolution fit = qr.solve(y);
    residual = std::move(fit.residual);
    residual_norm = fit.residual_norm;
    IterationRecord record;
    record.selected = std::move(selected);
    record.support = qr.support();
    record.estimate = Vector::Zero(n);
    for (Index i = 0; i < fit.support.size(); ++i) {
      record.estimate(fit.support[i]) = fit.coefficients(i);
    }
    record.residual_norm = residual_norm;
    result.trace.iterations.push_back(std::move(record));
  }
  result.iterations_used = k;

  const Vector final_estimate =
      k == 0 ? Vector(Vector::Zero(n)) : result.trace.iterations.back().estimate;
  result.support = prune_to_k(final_estimate, config.sparsity);
  LsSolution refit;
  try {
    refit = least_squares(phi, result.support, y);
  } catch (const SingularSystemError& e) {
    throw SingularSystemError(std::string(e.what()) + " (final refit)", k);
  }
  result.estimate = refit.dense(n);
  result.residual_norm = refit.residual_norm;
  return result;
}

PursuitResult omp_solve(const Matrix& phi, const Vector& y, PursuitConfig config) {
  config.selection_size = 1;
  return gomp_solve(phi, y, config);
}

const char* to_string(StoppingMode mode) {
  return mode == StoppingMode::threshold ? "threshold" : "fixed_iterations";
}

StoppingMode stopping_mode_from_string(const std::string& name) {
  if (name == "threshold") return StoppingMode::threshold;
  if (name == "fixed_iterations") return StoppingMode::fixed_iterations;
  throw ArgumentError("unknown stopping mode '" + name +
                      "' (expected threshold or fixed_iterations)");
}

nlohmann::json to_json(const PursuitConfig& config) {
  nlohmann::json j;
  j["sparsity"] = config.sparsity;
  j["selection_size"] = config.selection_size;
  j["stopping"] = to_string(config.stopping);
  j["residual_threshold"] =
      config.residual_threshold ? nlohmann::json(*config.residual_threshold) : nlohmann::json();
  j["max_iterations"] =
      config.max_iterations ? nlohmann::json(*config.max_iterations) : nlohmann::json();
  return j;
}

nlohmann::json to_json(const PursuitResult& result) {
  nlohmann::json j;
  j["config"] = to_json(result.config);
  j["iteration_limit"] = result.iteration_limit;
  j["iterations_clamped"] = result.iterations_clamped;
  j["iterations_used"] = result.iterations_used;
  j["threshold"] = result.threshold;
  j["initial_residual_norm"] = result.trace.initial_residual_norm;
  auto& iters = j["iterations"] = nlohmann::json::array();
  for (Index k = 1; k <= result.trace.size(); ++k) {
    const auto& rec = result.trace.iterations[static_cast<std::size_t>(k - 1)];
    iters.push_back({{"k", k}, {"selected", rec.selected.values()}, {"residual_norm", rec.residual_norm}});
  }
  j["support"] = result.support.values();
  j["estimate"] = std::vector<double>(result.estimate.data(),
                                      result.estimate.data() + result.estimate.size());
  j["residual_norm"] = result.residual_norm;
  return j;
}

}  // namespace gomp
