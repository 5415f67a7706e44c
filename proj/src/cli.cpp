#include "gomp/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "gomp/config.hpp"
#include "gomp/errors.hpp"
#include "gomp/experiments.hpp"
#include "gomp/generators.hpp"
#include "gomp/matrix_io.hpp"
#include "gomp/pursuit.hpp"
#include "gomp/theory.hpp"

namespace gomp::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> format;
};

struct Context {
  Flags flags;
  json root;
  fs::path base_dir;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct Output {
  std::string text;
  std::optional<json> manifest;
  int code = kOk;
};

std::string format_or(const Context& ctx, const std::string& fallback,
                      std::initializer_list<const char*> allowed, const std::string& command) {
  const std::string f = ctx.flags.format.value_or(fallback);
  for (const char* a : allowed) {
    if (f == a) return f;
  }
  throw ConfigError("--format " + f + " is not supported by " + command);
}

Output cmd_solve(const Context& ctx) {
  format_or(ctx, "json", {"json"}, "solve");
  config::SolveConfig cfg = config::parse_solve(ctx.root, ctx.base_dir);
  json doc;
  if (cfg.matrix) {
    const Matrix phi = io::read_matrix(*cfg.matrix);
    const Vector y = io::read_vector_csv(*cfg.measurements);
    doc = to_json(gomp_solve(phi, y, cfg.pursuit));
    doc["instance"] = {{"generated", false},
                       {"matrix", cfg.matrix->string()},
                       {"measurements", cfg.measurements->string()}};
  } else {
    cfg.problem.validate();
    const Matrix phi = gen_matrix(cfg.problem.rows, cfg.problem.cols, derive_seed(ctx.seed, 1));
    Rng signal_rng(derive_seed(ctx.seed, 2));
    Rng noise_rng(derive_seed(ctx.seed, 3));
    const GeneratedSignal x = gen_signal(cfg.problem, signal_rng, cfg.pursuit.selection_size);
    const Vector noise = gen_noise(cfg.problem, cfg.problem.rows, noise_rng);
    const Vector y = phi * x.signal.dense() + noise;
    if (cfg.pursuit.sparsity < 1) cfg.pursuit.sparsity = x.signal.sparsity();
    const PursuitResult result = gomp_solve(phi, y, cfg.pursuit);
    doc = to_json(result);
    const Vector truth = x.signal.dense();
    doc["instance"] = {{"generated", true},
                       {"seed", ctx.seed},
                       {"problem", to_json(cfg.problem)},
                       {"true_support", x.signal.support.values()},
                       {"noise_norm", noise.norm()},
                       {"error_l2", (result.estimate - truth).norm()},
                       {"support_recovered", result.support == x.signal.support}};
  }
  return {doc.dump(2) + "\n", std::nullopt, kOk};
}

Output cmd_sweep(const Context& ctx, bool timing) {
  const std::string command = timing ? "sweep-time" : "sweep-mse";
  const std::string format = format_or(ctx, "csv", {"csv", "json"}, command);
  config::SweepConfig cfg = config::parse_sweep(ctx.root, timing);
  cfg.options.master_seed = ctx.seed;
  cfg.options.threads = ctx.threads;
  const SweepResult result =
      timing ? run_timing_sweep(cfg.base, cfg.sparsity_rates, cfg.options)
             : run_mse_sweep(cfg.base, cfg.sparsity_rates, cfg.snrs_db, cfg.options);
  Output out;
  out.text = format == "csv" ? sweep_to_csv(result, cfg.include_timing)
                             : sweep_to_json(result, cfg.include_timing).dump(2) + "\n";
  out.manifest = sweep_manifest(result, command);
  return out;
}

Output cmd_compressible(const Context& ctx) {
  const std::string format = format_or(ctx, "json", {"csv", "json"}, "compressible");
  config::CompressibleConfig cfg = config::parse_compressible(ctx.root);
  cfg.options.master_seed = ctx.seed;
  cfg.options.threads = ctx.threads;
  const CompressibleReport report = run_compressible(cfg.spec, cfg.options);
  json doc = to_json(report);
  doc["problem"] = to_json(cfg.spec);
  doc["seed"] = ctx.seed;
  Output out;
  if (format == "json") {
    out.text = doc.dump(2) + "\n";
  } else {
    out.text = "trial,ratio\n";
    for (std::size_t i = 0; i < report.ratios.size(); ++i) {
      out.text += std::to_string(i) + ',' + json(report.ratios[i]).dump() + '\n';
    }
  }
  return out;
}

Output cmd_verify_theory(const Context& ctx) {
  format_or(ctx, "json", {"json"}, "verify-theory");
  TheoryCorpus corpus = config::parse_theory(ctx.root);
  if (ctx.flags.seed || config::parse_common(ctx.root).seed) corpus.seed = ctx.seed;
  const TheoryReport report = verify_theory(corpus);
  Output out;
  out.text = to_json(report).dump(2) + "\n";
  out.code = report.total_violations() == 0 ? kOk : kViolations;
  return out;
}

Output cmd_ric(const Context& ctx) {
  format_or(ctx, "json", {"json"}, "ric");
  const config::RicConfig cfg = config::parse_ric(ctx.root, ctx.base_dir);
  Matrix phi = [&] {
    if (cfg.matrix) return io::read_matrix(*cfg.matrix);
    if (cfg.generator == "orthonormal") return orthonormal_columns(cfg.rows, cfg.cols, ctx.seed);
    if (cfg.generator == "perturbed_orthonormal") {
      return perturbed_orthonormal(cfg.rows, cfg.cols, cfg.eps, ctx.seed);
    }
    return gen_matrix(cfg.rows, cfg.cols, ctx.seed);
  }();
  if (cfg.normalize_columns) {
    Eigen::MatrixXd a = phi.data();
    for (Index j = 0; j < a.cols(); ++j) {
      const double norm = a.col(j).norm();
      if (norm == 0.0) throw SingularSystemError("cannot normalize a zero column");
      a.col(j) /= norm;
    }
    phi = Matrix(std::move(a));
  }
  RicEstimate est;
  switch (cfg.method) {
    case config::RicMethod::exact: est = ric_exact(phi, cfg.order, cfg.budget); break;
    case config::RicMethod::monte_carlo:
      est = ric_monte_carlo(phi, cfg.order, cfg.trials, derive_seed(ctx.seed, 7));
      break;
    case config::RicMethod::certify: est = ric_certify(phi, cfg.order, cfg.budget); break;
  }
  const char* kind = est.kind == RicKind::exact             ? "exact"
                     : est.kind == RicKind::monte_carlo_lower ? "monte_carlo_lower"
                                                              : "monotone_upper";
  json doc = {{"m", phi.rows()},
              {"n", phi.cols()},
              {"order", est.order},
              {"kind", kind},
              {"delta", est.delta},
              {"at_least_one", est.at_least_one},
              {"witness", est.witness.values()},
              {"order_used", est.order_used}};
  return {doc.dump(2) + "\n", std::nullopt, kOk};
}

json error_json(const std::string& kind, int code, const std::string& message) {
  return {{"error", {{"kind", kind}, {"exit_code", code}, {"message", message}}}};
}

int report(std::ostream& err, const std::string& kind, int code, const std::string& message,
           const json& extra = json::object()) {
  json doc = error_json(kind, code, message);
  for (const auto& [k, v] : extra.items()) doc["error"][k] = v;
  err << doc.dump() << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized orthogonal matching pursuit: solver, sweeps and theory checks."};
  app.name("gomp");
  app.require_subcommand(1, 1);
  Flags flags;
  std::string chosen;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"solve", "Run gOMP on one instance and print the result as JSON."},
      {"sweep-mse", "MSE against SNR for OMP, gOMP, Oracle-LS and LMMSE."},
      {"sweep-time", "Running time against sparsity rate."},
      {"compressible", "Error ratios on power-law (non-sparse) signals."},
      {"verify-theory", "Randomized checks of the convergence inequalities."},
      {"ric", "Restricted isometry constant of a matrix."},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "TOML or JSON config file")->required();
    sub->add_option("--out", flags.out, "Output file (default: stdout)");
    sub->add_option("--seed", flags.seed, "Override the config seed");
    sub->add_option("--threads", flags.threads, "Worker threads for trial loops")
        ->check(CLI::PositiveNumber);
    sub->add_option("--format", flags.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->callback([&chosen, name = name] { chosen = name; });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    return report(err, "usage_error", kConfigError, e.what());
  }

  try {
    Context ctx;
    ctx.flags = flags;
    const fs::path config_path(flags.config);
    ctx.root = config::load_file(config_path);
    ctx.base_dir = config_path.parent_path();
    const config::Common common = config::parse_common(ctx.root);
    ctx.seed = flags.seed.value_or(common.seed.value_or(0));
    ctx.threads = flags.threads.value_or(
        common.threads.value_or(std::max(1u, std::thread::hardware_concurrency())));

    Output result;
    if (chosen == "solve") {
      result = cmd_solve(ctx);
    } else if (chosen == "sweep-mse") {
      result = cmd_sweep(ctx, false);
    } else if (chosen == "sweep-time") {
      result = cmd_sweep(ctx, true);
    } else if (chosen == "compressible") {
      result = cmd_compressible(ctx);
    } else if (chosen == "verify-theory") {
      result = cmd_verify_theory(ctx);
    } else {
      result = cmd_ric(ctx);
    }

    if (flags.out.empty()) {
      out << result.text;
    } else {
      io::write_file_atomic(flags.out, result.text);
      if (result.manifest) {
        io::write_file_atomic(flags.out + ".manifest.json", result.manifest->dump(2) + "\n");
      }
    }
    return result.code;
  } catch (const BudgetError& e) {
    return report(err, "budget_exceeded", kBudgetRefused, e.what(),
                  {{"required", e.required()}, {"budget", e.budget()}});
  } catch (const ConfigError& e) {
    return report(err, "config_error", kConfigError, e.what());
  } catch (const ArgumentError& e) {
    return report(err, "invalid_argument", kConfigError, e.what());
  } catch (const IoError& e) {
    return report(err, "io_error", kConfigError, e.what());
  } catch (const fs::filesystem_error& e) {
    return report(err, "io_error", kConfigError, e.what());
  } catch (const SingularSystemError& e) {
    json extra = json::object();
    if (e.iteration()) extra["iteration"] = *e.iteration();
    return report(err, "singular_system", kNumericFailure, e.what(), extra);
  } catch (const DomainError& e) {
    return report(err, "domain_error", kNumericFailure, e.what());
  } catch (const std::exception& e) {
    return report(err, "internal_error", kInternalError, e.what());
  }
}

}  // namespace gomp::cli
