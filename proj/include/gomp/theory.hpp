#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gomp/experiments.hpp"
#include "gomp/linalg.hpp"
#include "gomp/pursuit.hpp"

namespace gomp {

// ---------------------------------------------------------------------------
// Restricted isometry constants

enum class RicKind {
  exact,
  monte_carlo_lower,
  /// delta of a higher order (up to the full Gram), an upper bound by
  /// monotonicity in the order.
  monotone_upper,
};

struct RicEstimate {
  Index order = 0;
  RicKind kind = RicKind::exact;
  double delta = 0.0;
  bool at_least_one = false;  // delta >= 1: the RIP bound is vacuous
  IndexSet witness;           // subset attaining delta
  Index order_used = 0;       // monotone_upper only: the order actually computed
};

inline constexpr double kRicBudget = 1e6;

/// C(n, k) as a double (exact below 2^53).
double binomial(Index n, Index k);

/// Max over all K-subsets A of max(lambda_max - 1, 1 - lambda_min) of
/// Phi_A' Phi_A. Witness is the first maximizer in lexicographic order.
/// Throws BudgetError when C(n, K) exceeds `budget`.
RicEstimate ric_exact(const Matrix& phi, Index order, double budget = kRicBudget);

/// Same deviation maximized over `trials` uniformly drawn K-subsets.
RicEstimate ric_monte_carlo(const Matrix& phi, Index order, Index trials, std::uint64_t seed);

/// Exact delta when enumeration fits the budget, else delta_n of the whole
/// Gram matrix, which bounds every lower order from above.
RicEstimate ric_certify(const Matrix& phi, Index order, double budget = kRicBudget);

/// Lazily computed exact RICs of one matrix.
class RicCache {
 public:
  explicit RicCache(const Matrix& phi, double budget = kRicBudget);
  /// Throws BudgetError past the budget.
  const RicEstimate& get(Index order);
  bool affordable(Index order) const;

 private:
  const Matrix* phi_;
  double budget_;
  std::map<Index, RicEstimate> cache_;
};

enum class Condition { new_noisy, new_noiseless, prior_wang };

/// RIC order the condition is stated at: max{9, S+1}K, 7K or SK.
Index required_order(Condition which, Index sparsity, Index selection_size);

/// delta <= 1/8, delta <= 1/8, or delta < sqrt(S)/(sqrt(K) + 3 sqrt(S)).
bool check_condition(double delta, Index sparsity, Index selection_size, Condition which);

const char* to_string(Condition which);
Condition condition_from_string(const std::string& name);

// ---------------------------------------------------------------------------
// Proof constants

inline constexpr double kProofT = 1.0 / 6.0;
double proof_sigma();  // exp(14/9) / 2
double proof_eta();    // exp(-14/9)

struct BoundReport {
  double delta = 0.0;
  double mu_k = 0.0;
  double mu = 0.0;
  double C = 0.0;
  double t = kProofT;
  bool condition_met = false;  // delta <= 1/8
};

/// Residual constant mu_k, estimate constant mu = (mu_k + 1)/sqrt(1 - delta)
/// and pruned-estimate constant C. Throws DomainError outside [0, 1) or when
/// the mu_k denominator is not positive.
BoundReport bound_constants(double delta);

nlohmann::json to_json(const BoundReport& report);

// ---------------------------------------------------------------------------
// Support partition

struct PartitionReport {
  IndexSet remaining;              // Gamma^k as a set
  std::vector<Index> gamma;        // Gamma^k by descending |x|, ties by index
  std::vector<IndexSet> subsets;   // Gamma^k_tau, tau = 0..tau_max
  std::vector<double> tail_energy; // ||x_{Gamma \ Gamma_tau}||^2 per tau
  std::optional<Index> L;          // unset when Gamma^k is empty
  std::vector<Index> milestones;   // k_i, i = 0..tau_max
  double sigma = 0.0;
  double eta = 0.0;
  Index selection_size = 1;

  Index tau_max() const { return static_cast<Index>(subsets.size()) - 1; }
  bool empty() const { return gamma.empty(); }
};

/// Splits T \ T^k into the nested blocks of sizes 0, S, 2S, 4S, ..., |Gamma|
/// and picks the decay index L.
PartitionReport partition(const SparseSignal& x, const IndexSet& estimated_support,
                          Index selection_size);

/// Every report invariant that fails, as a human-readable list.
std::vector<std::string> verify_partition(const PartitionReport& report);

// ---------------------------------------------------------------------------
// Inequality checkers. Slack is rhs - lhs; a check holds when slack >= -tol.

struct Lemma1Check {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

Lemma1Check check_lemma1(const Vector& u, const Vector& z, Index selection_size);

struct Prop1Check {
  bool holds_residual = false;  // ||r^k||^2 <= ||Phi_G x_G + v||^2
  double slack_residual = 0.0;
  bool applicable_decrease = false;  // false when a needed delta >= 1
  bool holds_decrease = false;
  double slack_decrease = 0.0;
  Index order = 0;  // |Gamma_tau U T^l|
};

struct Prop2Check {
  bool applicable = false;
  bool holds = false;
  double factor = 1.0;  // C_{tau,l,dl}
  double slack = 0.0;
  Index order = 0;  // |Gamma_tau U T^{l+dl-1}|
};

/// The instance a trace was produced from.
struct TheoryInstance {
  const Matrix& phi;
  const SparseSignal& x;
  const Vector& noise;
  const PursuitTrace& trace;
  Index selection_size;
};

/// Orders of the RICs a (k, l, tau) check reads.
Index prop1_order(const TheoryInstance& inst, Index k, Index l, Index tau);
Index prop2_order(const TheoryInstance& inst, Index k, Index l, Index dl, Index tau);

/// Only the ||r^k|| half; needs no RICs.
Prop1Check check_prop1_residual(const TheoryInstance& inst, Index k);
Prop1Check check_prop1(const TheoryInstance& inst, RicCache& rics, Index k, Index l, Index tau);
Prop2Check check_prop2(const TheoryInstance& inst, RicCache& rics, Index k, Index l, Index dl,
                       Index tau);

struct TheoremCheck {
  bool holds = false;
  double lhs = 0.0;
  double bound = 0.0;
  double constant = 0.0;
  RicEstimate ric;
  Index iterations = 0;
};

/// Runs gOMP for max{K, floor(8K/S)} fixed iterations and compares
/// ||r|| against mu_0 ||v|| with mu_0 from delta_{7K}. Throws DomainError when
/// delta_{7K} <= 1/8 cannot be certified.
TheoremCheck check_theorem_residual(const Matrix& phi, const SparseSignal& x, const Vector& noise,
                                    Index selection_size);

/// Same run; compares the pruned refit error against C ||v|| and the
/// unpruned estimate against mu ||v||, with delta_{max{9,S+1}K}.
struct TheoremErrorCheck {
  TheoremCheck pruned;
  TheoremCheck unpruned;
};
TheoremErrorCheck check_theorem_error(const Matrix& phi, const SparseSignal& x,
                                      const Vector& noise, Index selection_size);

// ---------------------------------------------------------------------------
// Randomized verification corpus

struct TheoryCorpus {
  std::uint64_t seed = 1;
  Index lemma_pairs = 10000;
  Index partition_draws = 10000;
  Index prop_instances = 500;
  Index max_ric_order = 5;
  Index theorem_instances = 100;
  Index theorem_rows = 32;
  Index theorem_sparsity = 2;
  Index theorem_selection = 1;
  double theorem_max_eps = 0.02;
};

struct CheckTally {
  Index checked = 0;
  Index violations = 0;
  Index not_applicable = 0;
  double worst_slack = 0.0;  // smallest rhs - lhs seen; 0 when nothing checked
  void add(bool holds, double slack);
};

struct TheoryReport {
  TheoryCorpus corpus;
  CheckTally lemma1;
  CheckTally partition;
  CheckTally prop1_residual;
  CheckTally prop1_decrease;
  CheckTally prop2;
  CheckTally theorem_residual;
  CheckTally theorem_noiseless;
  CheckTally theorem_error;
  CheckTally theorem_estimate;
  Index skipped_instances = 0;  // singular subsystems in the prop corpus
  BoundReport reference_constants;  // at delta = 0.05

  Index total_violations() const;
};

TheoryReport verify_theory(const TheoryCorpus& corpus);
nlohmann::json to_json(const TheoryReport& report);

}  // namespace gomp
