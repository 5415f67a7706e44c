#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "gomp/linalg.hpp"

namespace gomp {

enum class StoppingMode { threshold, fixed_iterations };

/// Solver inputs. `sparsity` is K, `selection_size` is S (indices per
/// iteration). Unset fields take the documented defaults at solve time.
struct PursuitConfig {
  Index sparsity = 1;
  Index selection_size = 1;
  StoppingMode stopping = StoppingMode::threshold;
  /// Threshold mode only. Default 1e-6 * ||y||_2.
  std::optional<double> residual_threshold;
  /// Fixed mode default: max{K, floor(8K/S)}; threshold mode default: floor(m/S).
  /// Defaults are clamped to floor(min(m, n)/S); explicit values must satisfy
  /// max_iterations * S <= min(m, n).
  std::optional<Index> max_iterations;

  /// Throws ArgumentError naming the violated constraint.
  void validate(Index rows, Index cols) const;
};

/// max{K, floor(8K/S)}: iterations after which the residual bound applies.
Index theorem_iteration_count(Index sparsity, Index selection_size);
/// floor(m/S): keeps every least-squares subproblem overdetermined.
Index iteration_cap(Index rows, Index selection_size);

struct IterationRecord {
  IndexSet selected;   // Lambda^k
  IndexSet support;    // T^k
  Vector estimate;     // x^k, dense length n, zero off T^k
  double residual_norm = 0.0;
};

struct PursuitTrace {
  double initial_residual_norm = 0.0;
  std::vector<IterationRecord> iterations;

  Index size() const { return static_cast<Index>(iterations.size()); }
  /// ||r^k||_2 with r^0 = y.
  double residual_norm(Index k) const;
  /// T^k with T^0 empty.
  const IndexSet& support(Index k) const;
};

struct PursuitResult {
  PursuitConfig config;
  IndexSet support;        // pruned support, |T| = K
  Vector estimate;         // LS refit on `support`, zero elsewhere
  PursuitTrace trace;
  Index iterations_used = 0;
  Index iteration_limit = 0;
  bool iterations_clamped = false;  // default count exceeded floor(min(m, n)/S)
  double threshold = 0.0;           // epsilon actually used (threshold mode)
  double residual_norm = 0.0;       // ||y - Phi x||_2 after the refit
};

/// The S indices outside `exclude` with the largest |c_j|; ties go to the
/// smaller index.
IndexSet identify_top_s(const Vector& c, Index count, const IndexSet& exclude = {});

/// Indices of the K largest-magnitude entries; ties go to the smaller index.
IndexSet prune_to_k(const Vector& estimate, Index count);

/// Generalized OMP: per iteration select the S columns most correlated with
/// the residual, refit by least squares on the accumulated support, then
/// prune to K and refit once more.
PursuitResult gomp_solve(const Matrix& phi, const Vector& y, const PursuitConfig& config);

/// gomp_solve with S forced to 1.
PursuitResult omp_solve(const Matrix& phi, const Vector& y, PursuitConfig config);

const char* to_string(StoppingMode mode);
StoppingMode stopping_mode_from_string(const std::string& name);

nlohmann::json to_json(const PursuitConfig& config);
nlohmann::json to_json(const PursuitResult& result);

}  // namespace gomp
