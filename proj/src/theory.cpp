#include "gomp/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "gomp/generators.hpp"

namespace gomp {
namespace {

constexpr double kEighth = 0.125;

double deviation(const Eigen::MatrixXd& gram) {
  if (gram.rows() == 1) return std::abs(gram(0, 0) - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  return std::max(ev(ev.size() - 1) - 1.0, 1.0 - ev(0));
}

Eigen::MatrixXd gram_of(const Eigen::MatrixXd& full, const std::vector<Index>& subset) {
  const auto k = static_cast<Index>(subset.size());
  Eigen::MatrixXd g(k, k);
  for (Index a = 0; a < k; ++a) {
    for (Index b = 0; b < k; ++b) {
      g(a, b) = full(subset[static_cast<std::size_t>(a)], subset[static_cast<std::size_t>(b)]);
    }
  }
  return g;
}

void check_order(const Matrix& phi, Index order) {
  if (order < 1 || order > phi.cols()) {
    throw ArgumentError("RIC order " + std::to_string(order) + " outside [1, " +
                        std::to_string(phi.cols()) + "]");
  }
}

Index ceil_div(Index a, Index b) { return (a + b - 1) / b; }

double tolerance_for(const Vector& y) { return 1e-9 * std::max(1.0, y.squaredNorm()); }

Vector partial_image(const Matrix& phi, const Vector& x_dense, const IndexSet& cols,
                     const Vector& noise) {
  Vector out = noise;
  for (Index j : cols) out += x_dense(j) * phi.data().col(j);
  return out;
}

IndexSet remainder(const PartitionReport& part, Index tau) {
  return part.remaining.minus(part.subsets[static_cast<std::size_t>(tau)]);
}

void check_tau(const PartitionReport& part, Index tau) {
  if (part.empty() || tau < 1 || tau > part.tau_max()) {
    throw ArgumentError("tau " + std::to_string(tau) + " outside [1, tau_max]");
  }
}

void check_trace_range(const PursuitTrace& trace, Index k, Index last) {
  if (k < 0 || last < k || last > trace.size()) {
    throw ArgumentError("trace does not cover iterations " + std::to_string(k) + ".." +
                        std::to_string(last));
  }
}

Vector measurements(const TheoryInstance& inst, const Vector& x_dense) {
  return inst.phi * x_dense + inst.noise;
}

}  // namespace

double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (Index i = 1; i <= k; ++i) {
    out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(out);
}

RicEstimate ric_exact(const Matrix& phi, Index order, double budget) {
  check_order(phi, order);
  const Index n = phi.cols();
  const double required = binomial(n, order);
  if (required > budget) {
    throw BudgetError("exact RIC of order " + std::to_string(order) + " needs " +
                          std::to_string(static_cast<long long>(required)) +
                          " subsets, budget is " +
                          std::to_string(static_cast<long long>(budget)),
                      required, budget);
  }
  const Eigen::MatrixXd full = phi.data().transpose() * phi.data();
  std::vector<Index> subset(static_cast<std::size_t>(order));
  std::iota(subset.begin(), subset.end(), Index{0});
  RicEstimate best;
  best.order = order;
  best.kind = RicKind::exact;
  best.delta = -std::numeric_limits<double>::infinity();
  for (;;) {
    const double d = deviation(gram_of(full, subset));
    if (d > best.delta) {
      best.delta = d;
      best.witness = IndexSet::from_sorted(subset);
    }
    // Next subset in lexicographic order.
    Index i = order - 1;
    while (i >= 0 && subset[static_cast<std::size_t>(i)] == n - order + i) --i;
    if (i < 0) break;
    ++subset[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < order; ++j) {
      subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  best.order_used = order;
  best.at_least_one = best.delta >= 1.0;
  return best;
}

RicEstimate ric_monte_carlo(const Matrix& phi, Index order, Index trials, std::uint64_t seed) {
  check_order(phi, order);
  if (trials < 1) throw ArgumentError("ric_monte_carlo: trials must be >= 1");
  const Eigen::MatrixXd full = phi.data().transpose() * phi.data();
  Rng rng(seed);
  RicEstimate best;
  best.order = order;
  best.order_used = order;
  best.kind = RicKind::monte_carlo_lower;
  best.delta = -std::numeric_limits<double>::infinity();
  for (Index t = 0; t < trials; ++t) {
    const IndexSet subset = random_subset(phi.cols(), order, rng);
    const double d = deviation(gram_of(full, subset.values()));
    if (d > best.delta) {
      best.delta = d;
      best.witness = subset;
    }
  }
  best.at_least_one = best.delta >= 1.0;
  return best;
}

RicEstimate ric_certify(const Matrix& phi, Index order, double budget) {
  check_order(phi, order);
  if (binomial(phi.cols(), order) <= budget) return ric_exact(phi, order, budget);
  const Eigen::MatrixXd full = phi.data().transpose() * phi.data();
  RicEstimate out;
  out.order = order;
  out.order_used = phi.cols();
  out.kind = RicKind::monotone_upper;
  out.delta = deviation(full);
  out.at_least_one = out.delta >= 1.0;
  std::vector<Index> all(static_cast<std::size_t>(phi.cols()));
  std::iota(all.begin(), all.end(), Index{0});
  out.witness = IndexSet::from_sorted(std::move(all));
  return out;
}

RicCache::RicCache(const Matrix& phi, double budget) : phi_(&phi), budget_(budget) {}

bool RicCache::affordable(Index order) const {
  return order <= 0 || (order <= phi_->cols() && binomial(phi_->cols(), order) <= budget_);
}

const RicEstimate& RicCache::get(Index order) {
  auto it = cache_.find(order);
  if (it != cache_.end()) return it->second;
  RicEstimate est;
  if (order == 0) {
    est.kind = RicKind::exact;
  } else {
    est = ric_exact(*phi_, order, budget_);
  }
  return cache_.emplace(order, std::move(est)).first->second;
}

Index required_order(Condition which, Index sparsity, Index selection_size) {
  switch (which) {
    case Condition::new_noisy: return std::max<Index>(9, selection_size + 1) * sparsity;
    case Condition::new_noiseless: return 7 * sparsity;
    case Condition::prior_wang: return selection_size * sparsity;
  }
  return 0;
}

bool check_condition(double delta, Index sparsity, Index selection_size, Condition which) {
  if (!(delta >= 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in [0, 1)");
  if (sparsity < 1 || selection_size < 1) throw ArgumentError("K and S must be >= 1");
  switch (which) {
    case Condition::new_noisy:
    case Condition::new_noiseless: return delta <= kEighth;
    case Condition::prior_wang: {
      const double s = std::sqrt(static_cast<double>(selection_size));
      return delta < s / (std::sqrt(static_cast<double>(sparsity)) + 3.0 * s);
    }
  }
  return false;
}

const char* to_string(Condition which) {
  switch (which) {
    case Condition::new_noisy: return "new_noisy";
    case Condition::new_noiseless: return "new_noiseless";
    case Condition::prior_wang: return "prior_wang";
  }
  return "?";
}

Condition condition_from_string(const std::string& name) {
  if (name == "new_noisy") return Condition::new_noisy;
  if (name == "new_noiseless") return Condition::new_noiseless;
  if (name == "prior_wang") return Condition::prior_wang;
  throw ConfigError("unknown condition '" + name + "'");
}

double proof_sigma() { return std::exp(14.0 / 9.0) / 2.0; }
double proof_eta() { return std::exp(-14.0 / 9.0); }

BoundReport bound_constants(double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw DomainError("bound constants need delta in [0, 1), got " + std::to_string(delta));
  }
  const double e = std::exp(14.0 / 9.0);
  const double alpha =
      2.0 * std::sqrt(7.0 * (1.0 + delta) * (1.0 - 1.0 / e) / (6.0 * (1.0 - delta) * e));
  if (!(1.0 - alpha > 0.0)) {
    throw DomainError("mu_k denominator 1 - alpha = " + std::to_string(1.0 - alpha) +
                      " is not positive at delta = " + std::to_string(delta));
  }
  BoundReport out;
  out.delta = delta;
  out.mu_k = (std::sqrt(7.0) + 1.0) / (1.0 - alpha) - 1.0;
  const double root = std::sqrt(1.0 - delta);
  out.mu = (out.mu_k + 1.0) / root;
  out.C = 2.0 * std::sqrt((1.0 + delta) / (1.0 - delta)) * out.mu + 2.0 / root;
  out.condition_met = delta <= kEighth;
  return out;
}

nlohmann::json to_json(const BoundReport& report) {
  return {{"delta", report.delta}, {"mu_k", report.mu_k}, {"mu", report.mu},
          {"C", report.C},         {"t", report.t},       {"condition_met", report.condition_met}};
}

PartitionReport partition(const SparseSignal& x, const IndexSet& estimated_support,
                          Index selection_size) {
  if (selection_size < 1) throw ArgumentError("partition: S must be >= 1");
  estimated_support.check_bound(x.length);
  const Vector dense = x.dense();
  PartitionReport out;
  out.sigma = proof_sigma();
  out.eta = proof_eta();
  out.selection_size = selection_size;
  out.remaining = x.support.minus(estimated_support);
  out.gamma = out.remaining.values();
  std::stable_sort(out.gamma.begin(), out.gamma.end(), [&](Index a, Index b) {
    const double ma = std::abs(dense(a));
    const double mb = std::abs(dense(b));
    return ma != mb ? ma > mb : a < b;
  });

  const auto g = static_cast<Index>(out.gamma.size());
  const Index s = selection_size;
  out.subsets.emplace_back();
  if (g == 0) {
    out.tail_energy = {0.0};
    out.milestones = {0};
    return out;
  }
  Index c = 0;
  while (s * (Index{1} << c) < g) ++c;
  const Index tau_max = c + 1;
  for (Index tau = 1; tau <= tau_max; ++tau) {
    const Index size = tau == tau_max ? g : (Index{1} << (tau - 1)) * s;
    out.subsets.push_back(IndexSet::from_unsorted(
        std::vector<Index>(out.gamma.begin(), out.gamma.begin() + size)));
  }

  // Suffix sums so the last tail is exactly zero.
  std::vector<double> suffix(static_cast<std::size_t>(g) + 1, 0.0);
  for (Index i = g - 1; i >= 0; --i) {
    const double v = dense(out.gamma[static_cast<std::size_t>(i)]);
    suffix[static_cast<std::size_t>(i)] = suffix[static_cast<std::size_t>(i) + 1] + v * v;
  }
  Index running = 0;
  for (Index tau = 0; tau <= tau_max; ++tau) {
    const Index size = out.subsets[static_cast<std::size_t>(tau)].size();
    out.tail_energy.push_back(suffix[static_cast<std::size_t>(size)]);
    running += ceil_div(size, s);
    out.milestones.push_back(2 * running);
  }
  for (Index l = 1; l <= tau_max; ++l) {
    if (out.tail_energy[static_cast<std::size_t>(l - 1)] >=
        out.sigma * out.tail_energy[static_cast<std::size_t>(l)]) {
      out.L = l;
      break;
    }
  }
  return out;
}

std::vector<std::string> verify_partition(const PartitionReport& r) {
  std::vector<std::string> bad;
  const auto fail = [&](const std::string& msg) { bad.push_back(msg); };
  const Index s = r.selection_size;
  const auto g = static_cast<Index>(r.gamma.size());

  if (std::abs(r.sigma - proof_sigma()) > 1e-15 * proof_sigma()) fail("sigma constant");
  if (std::abs(r.eta - proof_eta()) > 1e-15) fail("eta constant");
  if (std::abs(r.sigma * r.eta - 0.5) > 1e-12) fail("sigma * eta != 1/2");
  if (r.subsets.empty() || r.subsets.front().size() != 0) fail("first subset not empty");
  if (IndexSet::from_unsorted(r.gamma) != r.remaining) fail("gamma order is not a permutation");

  if (g == 0) {
    if (r.L) fail("L defined for empty Gamma");
    if (r.subsets.size() != 1) fail("empty Gamma must give a single empty subset");
    return bad;
  }
  const Index tau_max = r.tau_max();
  const Index expected_tau_max =
      1 + std::max<Index>(0, static_cast<Index>(std::ceil(
                                 std::log2(static_cast<double>(g) / static_cast<double>(s)) -
                                 1e-12)));
  if (tau_max != expected_tau_max) fail("tau_max mismatch");
  if (r.subsets.back() != r.remaining) fail("last subset is not Gamma");
  for (Index tau = 1; tau <= tau_max; ++tau) {
    const auto& cur = r.subsets[static_cast<std::size_t>(tau)];
    const Index want = std::min(g, (Index{1} << (tau - 1)) * s);
    if (cur.size() != want) fail("subset " + std::to_string(tau) + " has wrong size");
    if (!r.subsets[static_cast<std::size_t>(tau - 1)].minus(cur).values().empty()) {
      fail("subsets not nested at " + std::to_string(tau));
    }
  }
  for (Index i = 0; i + 1 < g; ++i) {
    if (r.gamma[static_cast<std::size_t>(i)] == r.gamma[static_cast<std::size_t>(i) + 1]) {
      fail("duplicate in gamma");
    }
  }
  if (r.tail_energy.size() != r.subsets.size()) {
    fail("tail energy length");
    return bad;
  }
  if (r.tail_energy.back() != 0.0) fail("last tail energy not zero");

  if (!r.L || *r.L < 1 || *r.L > tau_max) {
    fail("L outside [1, tau_max]");
    return bad;
  }
  const Index L = *r.L;
  const auto tail = [&](Index tau) { return r.tail_energy[static_cast<std::size_t>(tau)]; };
  for (Index tau = 0; tau + 2 <= L; ++tau) {
    if (!(tail(tau) < r.sigma * tail(tau + 1))) fail("strict growth fails at " + std::to_string(tau));
  }
  if (!(tail(L - 1) >= r.sigma * tail(L))) fail("stopping inequality fails at L");
  for (Index tau = 0; tau <= L; ++tau) {
    const double bound = std::pow(r.sigma, static_cast<double>(L - 1 - tau)) * tail(L - 1);
    if (tail(tau) > bound * (1.0 + 1e-12) + 1e-300) fail("decay bound fails at " + std::to_string(tau));
  }
  if (L >= 2) {
    const double lower = (2.0 * r.sigma - 1.0) / (2.0 * r.sigma - 2.0) *
                         std::ldexp(1.0, static_cast<int>(L - 2)) * static_cast<double>(s);
    if (!(static_cast<double>(g) > lower)) fail("|Gamma| lower bound fails");
  }
  if (r.milestones.size() != r.subsets.size()) {
    fail("milestone count");
    return bad;
  }
  Index running = 0;
  for (Index i = 0; i <= tau_max; ++i) {
    running += ceil_div(r.subsets[static_cast<std::size_t>(i)].size(), s);
    if (r.milestones[static_cast<std::size_t>(i)] != 2 * running) {
      fail("milestone " + std::to_string(i) + " mismatch");
    }
  }
  if (r.milestones[static_cast<std::size_t>(L)] > 2 * ((Index{1} << L) - 1)) {
    fail("k_L exceeds 2(2^L - 1)");
  }
  return bad;
}

Lemma1Check check_lemma1(const Vector& u, const Vector& z, Index selection_size) {
  if (u.size() != z.size()) throw ArgumentError("check_lemma1: length mismatch");
  if (selection_size < 1) throw ArgumentError("check_lemma1: S must be >= 1");
  Index overlap = 0;
  double z_on_w = 0.0;
  for (Index j = 0; j < u.size(); ++j) {
    if (u(j) != 0.0 && z(j) != 0.0) {
      ++overlap;
      z_on_w += z(j) * z(j);
    }
  }
  const IndexSet top = prune_to_k(u, std::min(selection_size, u.size()));
  double u_on_top = 0.0;
  for (Index j : top) u_on_top += u(j) * u(j);
  Lemma1Check out;
  out.lhs = u.dot(z);
  out.rhs = std::sqrt(static_cast<double>(ceil_div(overlap, selection_size))) *
            std::sqrt(u_on_top) * std::sqrt(z_on_w);
  out.holds = out.lhs <= out.rhs + 1e-12 * std::max(1.0, u.norm() * z.norm());
  return out;
}

Index prop1_order(const TheoryInstance& inst, Index k, Index l, Index tau) {
  const PartitionReport part = partition(inst.x, inst.trace.support(k), inst.selection_size);
  check_tau(part, tau);
  return part.subsets[static_cast<std::size_t>(tau)].united(inst.trace.support(l)).size();
}

Index prop2_order(const TheoryInstance& inst, Index k, Index l, Index dl, Index tau) {
  if (dl == 0) return 0;
  return prop1_order(inst, k, l + dl - 1, tau);
}

Prop1Check check_prop1_residual(const TheoryInstance& inst, Index k) {
  check_trace_range(inst.trace, k, k);
  const Vector x_dense = inst.x.dense();
  const double tol = tolerance_for(measurements(inst, x_dense));
  const IndexSet remaining = inst.x.support.minus(inst.trace.support(k));
  Prop1Check out;
  const double rk = inst.trace.residual_norm(k);
  out.slack_residual =
      partial_image(inst.phi, x_dense, remaining, inst.noise).squaredNorm() - rk * rk;
  out.holds_residual = out.slack_residual >= -tol;
  return out;
}

Prop1Check check_prop1(const TheoryInstance& inst, RicCache& rics, Index k, Index l, Index tau) {
  check_trace_range(inst.trace, k, l + 1);
  const Vector x_dense = inst.x.dense();
  const double tol = tolerance_for(measurements(inst, x_dense));
  const PartitionReport part = partition(inst.x, inst.trace.support(k), inst.selection_size);
  check_tau(part, tau);

  Prop1Check out = check_prop1_residual(inst, k);
  const IndexSet& block = part.subsets[static_cast<std::size_t>(tau)];
  out.order = block.united(inst.trace.support(l)).size();
  const double d_order = rics.get(out.order).delta;
  const double d_s = rics.get(inst.selection_size).delta;
  if (d_order >= 1.0) return out;
  out.applicable_decrease = true;
  const double base =
      partial_image(inst.phi, x_dense, remainder(part, tau), inst.noise).squaredNorm();
  const double rl = inst.trace.residual_norm(l);
  const double rl1 = inst.trace.residual_norm(l + 1);
  const double coef = (1.0 - d_order) /
                      ((1.0 + d_s) * static_cast<double>(ceil_div(block.size(), inst.selection_size)));
  out.slack_decrease = (rl * rl - rl1 * rl1) - coef * (rl * rl - base);
  out.holds_decrease = out.slack_decrease >= -tol;
  return out;
}

Prop2Check check_prop2(const TheoryInstance& inst, RicCache& rics, Index k, Index l, Index dl,
                       Index tau) {
  if (dl < 0) throw ArgumentError("check_prop2: delta l must be >= 0");
  check_trace_range(inst.trace, k, l + dl);
  const Vector x_dense = inst.x.dense();
  const double tol = tolerance_for(measurements(inst, x_dense));
  const PartitionReport part = partition(inst.x, inst.trace.support(k), inst.selection_size);
  check_tau(part, tau);
  const IndexSet& block = part.subsets[static_cast<std::size_t>(tau)];

  Prop2Check out;
  if (dl > 0) {
    out.order = block.united(inst.trace.support(l + dl - 1)).size();
    const double d_order = rics.get(out.order).delta;
    const double d_s = rics.get(inst.selection_size).delta;
    if (d_order >= 1.0) return out;
    out.factor = std::exp(-static_cast<double>(dl) * (1.0 - d_order) /
                          (static_cast<double>(ceil_div(block.size(), inst.selection_size)) *
                           (1.0 + d_s)));
  }
  out.applicable = true;
  const double base =
      partial_image(inst.phi, x_dense, remainder(part, tau), inst.noise).squaredNorm();
  const double rl = inst.trace.residual_norm(l);
  const double rlast = inst.trace.residual_norm(l + dl);
  out.slack = out.factor * (rl * rl - base) - (rlast * rlast - base);
  out.holds = out.slack >= -tol;
  return out;
}

namespace {

struct TheoremRun {
  PursuitResult result;
  Index iterations = 0;
};

TheoremRun run_for_theorem(const Matrix& phi, const SparseSignal& x, const Vector& noise,
                           Index selection_size) {
  const Index k = x.sparsity();
  if (k < 1) throw ArgumentError("theorem checks need a nonzero signal");
  PursuitConfig config;
  config.sparsity = k;
  config.selection_size = selection_size;
  config.stopping = StoppingMode::fixed_iterations;
  const Index iterations = theorem_iteration_count(k, selection_size);
  if (iterations * selection_size > phi.rows()) {
    throw ArgumentError("theorem iteration count exceeds floor(m/S)");
  }
  config.max_iterations = iterations;
  const Vector y = phi * x.dense() + noise;
  return {gomp_solve(phi, y, config), iterations};
}

RicEstimate certified(const Matrix& phi, Index order) {
  if (order > phi.cols()) {
    throw DomainError("RIC order " + std::to_string(order) + " exceeds n = " +
                      std::to_string(phi.cols()));
  }
  RicEstimate ric = ric_certify(phi, order);
  if (ric.delta > kEighth) {
    throw DomainError("cannot certify delta_" + std::to_string(order) +
                      " <= 1/8: measured " + std::to_string(ric.delta));
  }
  return ric;
}

}  // namespace

TheoremCheck check_theorem_residual(const Matrix& phi, const SparseSignal& x, const Vector& noise,
                                    Index selection_size) {
  const RicEstimate ric =
      certified(phi, required_order(Condition::new_noiseless, x.sparsity(), selection_size));
  const TheoremRun run = run_for_theorem(phi, x, noise, selection_size);
  TheoremCheck out;
  out.ric = ric;
  out.iterations = run.iterations;
  out.constant = bound_constants(ric.delta).mu_k;
  out.lhs = run.result.trace.residual_norm(run.result.trace.size());
  out.bound = out.constant * noise.norm();
  const double tol = 1e-8 * std::max(1.0, phi.data().norm() * x.dense().norm());
  out.holds = out.lhs <= out.bound + tol;
  return out;
}

TheoremErrorCheck check_theorem_error(const Matrix& phi, const SparseSignal& x,
                                      const Vector& noise, Index selection_size) {
  const RicEstimate ric =
      certified(phi, required_order(Condition::new_noisy, x.sparsity(), selection_size));
  const TheoremRun run = run_for_theorem(phi, x, noise, selection_size);
  const BoundReport constants = bound_constants(ric.delta);
  const Vector x_dense = x.dense();
  const double tol = 1e-8 * std::max(1.0, x_dense.norm());
  const double v = noise.norm();

  TheoremErrorCheck out;
  out.pruned.ric = out.unpruned.ric = ric;
  out.pruned.iterations = out.unpruned.iterations = run.iterations;
  out.pruned.constant = constants.C;
  out.pruned.lhs = (run.result.estimate - x_dense).norm();
  out.pruned.bound = constants.C * v;
  out.pruned.holds = out.pruned.lhs <= out.pruned.bound + tol;
  out.unpruned.constant = constants.mu;
  out.unpruned.lhs = (run.result.trace.iterations.back().estimate - x_dense).norm();
  out.unpruned.bound = constants.mu * v;
  out.unpruned.holds = out.unpruned.lhs <= out.unpruned.bound + tol;
  return out;
}

void CheckTally::add(bool holds, double slack) {
  worst_slack = checked == 0 ? slack : std::min(worst_slack, slack);
  ++checked;
  if (!holds) ++violations;
}

Index TheoryReport::total_violations() const {
  return lemma1.violations + partition.violations + prop1_residual.violations +
         prop1_decrease.violations + prop2.violations + theorem_residual.violations +
         theorem_noiseless.violations + theorem_error.violations + theorem_estimate.violations;
}

namespace {

Vector random_sparse(Index n, Index count, Rng& rng, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector out = Vector::Zero(n);
  for (Index j : random_subset(n, count, rng)) {
    double v = 0.0;
    while (v == 0.0) v = normal(rng);
    out(j) = v;
  }
  return out;
}

SparseSignal gaussian_signal(Index n, Index k, Rng& rng) {
  SparseSignal x;
  x.length = n;
  x.support = random_subset(n, k, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index i = 0; i < k; ++i) {
    double v = 0.0;
    while (v == 0.0) v = normal(rng);
    x.values.push_back(v);
  }
  return x;
}

void run_lemma_corpus(const TheoryCorpus& c, TheoryReport& report) {
  Rng rng(derive_seed(c.seed, 11));
  std::uniform_int_distribution<Index> pick_n(3, 30);
  std::uniform_int_distribution<Index> pick_s(1, 3);
  std::bernoulli_distribution correlated(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index t = 0; t < c.lemma_pairs; ++t) {
    const Index n = pick_n(rng);
    std::uniform_int_distribution<Index> pick_k(0, n);
    const Vector u = random_sparse(n, pick_k(rng), rng, 1.0);
    Vector z = random_sparse(n, pick_k(rng), rng, 1.0);
    if (correlated(rng)) {
      // Push z toward u on the shared support so the inner product is large.
      for (Index j = 0; j < n; ++j) {
        if (z(j) != 0.0 && u(j) != 0.0) z(j) = u(j) + 0.1 * normal(rng);
      }
    }
    const Lemma1Check chk = check_lemma1(u, z, pick_s(rng));
    report.lemma1.add(chk.holds, chk.rhs - chk.lhs);
  }
}

void run_partition_corpus(const TheoryCorpus& c, TheoryReport& report) {
  Rng rng(derive_seed(c.seed, 12));
  std::uniform_int_distribution<Index> pick_k(1, 40);
  std::uniform_int_distribution<Index> pick_s(1, 5);
  std::uniform_int_distribution<int> pick_shape(0, 2);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> ratio(0.05, 1.0);
  for (Index t = 0; t < c.partition_draws; ++t) {
    const Index k = pick_k(rng);
    const Index n = k + pick_k(rng);
    SparseSignal x;
    x.length = n;
    x.support = random_subset(n, k, rng);
    const int shape = pick_shape(rng);
    const double r = ratio(rng);
    for (Index i = 0; i < k; ++i) {
      double v = normal(rng);
      if (shape == 1) v = std::copysign(std::exp(3.0 * normal(rng)), v);
      if (shape == 2) v = std::copysign(std::pow(r, static_cast<double>(i)), v);
      if (v == 0.0) v = 1.0;
      x.values.push_back(v);
    }
    std::uniform_int_distribution<Index> pick_tk(0, n);
    const IndexSet tk = random_subset(n, pick_tk(rng), rng);
    const PartitionReport part = partition(x, tk, pick_s(rng));
    report.partition.add(verify_partition(part).empty(), 0.0);
  }
}

void run_prop_corpus(const TheoryCorpus& c, TheoryReport& report) {
  Rng rng(derive_seed(c.seed, 13));
  std::uniform_int_distribution<Index> pick_m(12, 16);
  std::uniform_int_distribution<Index> pick_extra(2, 6);
  std::uniform_int_distribution<Index> pick_k(1, 3);
  std::uniform_int_distribution<int> pick_noise(0, 3);
  std::uniform_real_distribution<double> pick_eps(0.0, 0.6);
  const double noise_levels[] = {0.0, 0.01, 0.1, 0.5};
  for (Index t = 0; t < c.prop_instances; ++t) {
    const Index m = pick_m(rng);
    // Odd instances are near-orthonormal so the larger-order RICs stay below 1.
    const bool near_orthonormal = t % 2 == 1;
    const Index n = near_orthonormal ? m - pick_extra(rng) : m + pick_extra(rng);
    const Index k = pick_k(rng);
    std::uniform_int_distribution<Index> pick_s(1, std::min<Index>(2, k));
    const Index s = pick_s(rng);
    Eigen::MatrixXd a = near_orthonormal
                            ? perturbed_orthonormal(m, n, pick_eps(rng), rng()).data()
                            : gen_matrix(m, n, rng()).data();
    a.colwise().normalize();
    const Matrix phi(std::move(a));
    const SparseSignal x = gaussian_signal(n, k, rng);
    const double level = noise_levels[pick_noise(rng)];
    Vector noise = Vector::Zero(m);
    if (level > 0.0) {
      std::normal_distribution<double> normal(0.0, level / std::sqrt(static_cast<double>(m)));
      for (Index i = 0; i < m; ++i) noise(i) = normal(rng);
    }

    PursuitConfig config;
    config.sparsity = k;
    config.selection_size = s;
    config.stopping = StoppingMode::fixed_iterations;
    config.max_iterations = std::min<Index>(iteration_cap(std::min(m, n), s), c.max_ric_order + 1);
    PursuitResult run;
    try {
      run = gomp_solve(phi, phi * x.dense() + noise, config);
    } catch (const SingularSystemError&) {
      ++report.skipped_instances;
      continue;
    }
    const TheoryInstance inst{phi, x, noise, run.trace, s};
    RicCache rics(phi);
    const Index steps = run.trace.size();
    for (Index kk = 0; kk <= steps; ++kk) {
      const PartitionReport part = partition(x, run.trace.support(kk), s);
      const Prop1Check first = check_prop1_residual(inst, kk);
      report.prop1_residual.add(first.holds_residual, first.slack_residual);
      if (part.empty()) continue;
      for (Index tau = 1; tau <= part.tau_max(); ++tau) {
        for (Index l = kk; l + 1 <= steps; ++l) {
          if (prop1_order(inst, kk, l, tau) > c.max_ric_order) break;
          const Prop1Check chk = check_prop1(inst, rics, kk, l, tau);
          if (!chk.applicable_decrease) {
            ++report.prop1_decrease.not_applicable;
            continue;
          }
          report.prop1_decrease.add(chk.holds_decrease, chk.slack_decrease);
        }
        for (Index l = kk; l <= steps; ++l) {
          for (Index dl = 0; l + dl <= steps; ++dl) {
            if (prop2_order(inst, kk, l, dl, tau) > c.max_ric_order) break;
            const Prop2Check chk = check_prop2(inst, rics, kk, l, dl, tau);
            if (!chk.applicable) {
              ++report.prop2.not_applicable;
              continue;
            }
            report.prop2.add(chk.holds, chk.slack);
          }
        }
      }
    }
  }
}

void run_theorem_corpus(const TheoryCorpus& c, TheoryReport& report) {
  Rng rng(derive_seed(c.seed, 14));
  std::uniform_real_distribution<double> pick_eps(0.0, c.theorem_max_eps);
  std::uniform_real_distribution<double> pick_level(0.01, 1.0);
  const Index m = c.theorem_rows;
  const Index k = c.theorem_sparsity;
  const Index s = c.theorem_selection;
  for (Index t = 0; t < c.theorem_instances; ++t) {
    const Matrix phi = perturbed_orthonormal(m, m, pick_eps(rng), rng());
    const SparseSignal x = gaussian_signal(m, k, rng);
    std::normal_distribution<double> normal(0.0, pick_level(rng) / std::sqrt(static_cast<double>(m)));
    Vector noise(m);
    for (Index i = 0; i < m; ++i) noise(i) = normal(rng);

    const auto tally = [](CheckTally& tally, const TheoremCheck& chk) {
      tally.add(chk.holds, chk.bound - chk.lhs);
    };
    try {
      tally(report.theorem_residual, check_theorem_residual(phi, x, noise, s));
      tally(report.theorem_noiseless, check_theorem_residual(phi, x, Vector::Zero(m), s));
    } catch (const DomainError&) {
      ++report.theorem_residual.not_applicable;
    }
    try {
      const TheoremErrorCheck chk = check_theorem_error(phi, x, noise, s);
      tally(report.theorem_error, chk.pruned);
      tally(report.theorem_estimate, chk.unpruned);
    } catch (const DomainError&) {
      ++report.theorem_error.not_applicable;
    }
  }
}

nlohmann::json tally_json(const CheckTally& t) {
  return {{"checked", t.checked},
          {"violations", t.violations},
          {"not_applicable", t.not_applicable},
          {"worst_slack", t.checked > 0 ? nlohmann::json(t.worst_slack) : nlohmann::json()}};
}

}  // namespace

TheoryReport verify_theory(const TheoryCorpus& corpus) {
  if (corpus.lemma_pairs < 0 || corpus.partition_draws < 0 || corpus.prop_instances < 0 ||
      corpus.theorem_instances < 0) {
    throw ConfigError("corpus sizes must be nonnegative");
  }
  if (corpus.max_ric_order < 1) throw ConfigError("max_ric_order must be >= 1");
  if (corpus.theorem_sparsity < 1 || corpus.theorem_selection < 1 ||
      corpus.theorem_selection > corpus.theorem_sparsity) {
    throw ConfigError("theorem corpus needs 1 <= S <= K");
  }
  if (theorem_iteration_count(corpus.theorem_sparsity, corpus.theorem_selection) *
          corpus.theorem_selection > corpus.theorem_rows) {
    throw ConfigError("theorem corpus: max{K, 8K/S} * S exceeds m");
  }
  if (!(corpus.theorem_max_eps >= 0.0)) throw ConfigError("theorem_max_eps must be >= 0");
  TheoryReport report;
  report.corpus = corpus;
  report.reference_constants = bound_constants(0.05);
  run_lemma_corpus(corpus, report);
  run_partition_corpus(corpus, report);
  run_prop_corpus(corpus, report);
  run_theorem_corpus(corpus, report);
  return report;
}

nlohmann::json to_json(const TheoryReport& report) {
  const auto& c = report.corpus;
  nlohmann::json j;
  j["corpus"] = {{"seed", c.seed},
                 {"lemma_pairs", c.lemma_pairs},
                 {"partition_draws", c.partition_draws},
                 {"prop_instances", c.prop_instances},
                 {"max_ric_order", c.max_ric_order},
                 {"theorem_instances", c.theorem_instances},
                 {"theorem_rows", c.theorem_rows},
                 {"theorem_sparsity", c.theorem_sparsity},
                 {"theorem_selection", c.theorem_selection},
                 {"theorem_max_eps", c.theorem_max_eps}};
  j["checks"] = {{"lemma1", tally_json(report.lemma1)},
                 {"partition", tally_json(report.partition)},
                 {"prop1_residual", tally_json(report.prop1_residual)},
                 {"prop1_decrease", tally_json(report.prop1_decrease)},
                 {"prop2", tally_json(report.prop2)},
                 {"theorem_residual", tally_json(report.theorem_residual)},
                 {"theorem_noiseless", tally_json(report.theorem_noiseless)},
                 {"theorem_error", tally_json(report.theorem_error)},
                 {"theorem_estimate", tally_json(report.theorem_estimate)}};
  j["skipped_instances"] = report.skipped_instances;
  j["total_violations"] = report.total_violations();
  j["constants_at_0.05"] = to_json(report.reference_constants);
  return j;
}

}  // namespace gomp
