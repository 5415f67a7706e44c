#include "gomp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "gomp/errors.hpp"

namespace gomp::config {
namespace {

using nlohmann::json;

json to_json_node(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json out = json::object();
    for (const auto& [key, value] : *t) out[std::string(key.str())] = to_json_node(value);
    return out;
  }
  if (const auto* a = node.as_array()) {
    json out = json::array();
    for (const auto& value : *a) out.push_back(to_json_node(value));
    return out;
  }
  if (const auto* v = node.as_string()) return v->get();
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  // Dates and times have no use here; keep their text.
  std::ostringstream text;
  node.visit([&](const auto& n) { text << n; });
  return text.str();
}

/// Typed access to one table with unknown-key detection.
class Section {
 public:
  Section(const json& root, std::string name) : name_(std::move(name)) {
    if (name_.empty()) {
      node_ = &root;
    } else if (root.contains(name_)) {
      node_ = &root.at(name_);
    }
    if (node_ && !node_->is_object()) fail("", "must be a table");
  }

  bool present() const { return node_ != nullptr; }
  bool has(const std::string& key) const { return node_ && node_->contains(key); }

  std::optional<std::int64_t> integer(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) fail(key, "must be an integer");
    return v->get<std::int64_t>();
  }

  std::optional<double> number(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) fail(key, "must be a number");
    return v->get<double>();
  }

  std::optional<bool> boolean(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) fail(key, "must be true or false");
    return v->get<bool>();
  }

  std::optional<std::string> string(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) fail(key, "must be a string");
    return v->get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) fail(key, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) fail(key, "must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::optional<std::vector<std::string>> strings(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) fail(key, "must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : *v) {
      if (!e.is_string()) fail(key, "must be an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  std::optional<Index> count(const std::string& key, Index min) {
    auto v = integer(key);
    if (v && *v < min) fail(key, "must be >= " + std::to_string(min));
    return v ? std::optional<Index>(static_cast<Index>(*v)) : std::nullopt;
  }

  void skip(const std::string& key) { used_.insert(key); }

  /// Rejects keys that were never read (typos, misplaced settings).
  void finish() const {
    if (!node_) return;
    for (const auto& [key, value] : node_->items()) {
      if (!used_.count(key)) fail(key, "is not a recognized setting");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    std::string where = name_.empty() ? std::string("config") : "[" + name_ + "]";
    if (!key.empty()) where += (name_.empty() ? " key " : ".") + key;
    throw ConfigError(where + " " + msg);
  }

 private:
  const json* take(const std::string& key) {
    used_.insert(key);
    if (!node_ || !node_->contains(key) || node_->at(key).is_null()) return nullptr;
    return &node_->at(key);
  }

  std::string name_;
  const json* node_ = nullptr;
  std::set<std::string> used_;
};

const std::set<std::string> kTopLevel = {"seed",  "threads",      "problem", "solve", "sweep",
                                         "compressible", "ric", "theory"};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

TrialSpec parse_problem(const json& root, const TrialSpec& defaults) {
  Section s(root, "problem");
  TrialSpec spec = defaults;
  if (auto v = s.count("m", 1)) spec.rows = *v;
  if (auto v = s.count("n", 1)) spec.cols = *v;
  const auto rate = s.number("sparsity_rate");
  const auto k = s.count("sparsity", 1);
  if (rate && k) s.fail("", "sets both sparsity_rate and sparsity; give one");
  if (rate) {
    spec.sparsity_rate = *rate;
    spec.fixed_sparsity.reset();
  }
  if (k) {
    spec.fixed_sparsity = *k;
    spec.sparsity_rate.reset();
  }
  if (auto v = s.count("selection_size", 1)) spec.selection_size = *v;
  if (auto v = s.number("snr_db")) spec.snr_db = *v;
  if (auto v = s.string("signal_model")) spec.model = signal_model_from_string(*v);
  if (auto v = s.number("exponent")) spec.exponent = *v;
  s.finish();
  return spec;
}

StoppingMode parse_stopping(Section& s, const std::string& key, StoppingMode fallback) {
  const auto v = s.string(key);
  if (!v) return fallback;
  try {
    return stopping_mode_from_string(*v);
  } catch (const ArgumentError& e) {
    s.fail(key, e.what());
  }
}

}  // namespace

json parse_toml(const std::string& text, const std::string& source) {
  try {
    const toml::table table = toml::parse(text, source);
    return to_json_node(table);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
        << e.description();
    throw ConfigError(msg.str());
  }
}

json load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  json root;
  if (path.extension() == ".json") {
    try {
      root = json::parse(buf.str());
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  } else {
    root = parse_toml(buf.str(), path.string());
  }
  if (!root.is_object()) throw ConfigError(path.string() + ": top level must be a table");
  for (const auto& [key, value] : root.items()) {
    if (!kTopLevel.count(key)) throw ConfigError("config key " + key + " is not a recognized setting");
  }
  return root;
}

Common parse_common(const json& root) {
  Section s(root, "");
  Common out;
  if (auto v = s.integer("seed")) {
    if (*v < 0) s.fail("seed", "must be >= 0");
    out.seed = static_cast<std::uint64_t>(*v);
  }
  if (auto v = s.count("threads", 1)) out.threads = static_cast<unsigned>(*v);
  return out;
}

SolveConfig parse_solve(const json& root, const std::filesystem::path& base_dir) {
  SolveConfig out;
  TrialSpec defaults;
  defaults.sparsity_rate.reset();
  defaults.fixed_sparsity = 10;
  out.problem = parse_problem(root, defaults);

  Section s(root, "solve");
  if (auto v = s.string("matrix")) out.matrix = resolve(base_dir, *v);
  if (auto v = s.string("measurements")) out.measurements = resolve(base_dir, *v);
  if (out.matrix.has_value() != out.measurements.has_value()) {
    s.fail("", "needs both matrix and measurements, or neither (generate from [problem])");
  }
  const auto k = s.count("sparsity", 1);
  if (!k && out.matrix) s.fail("sparsity", "is required when reading a matrix file");
  out.pursuit.sparsity = k.value_or(out.problem.fixed_sparsity.value_or(0));
  out.pursuit.selection_size = s.count("selection_size", 1).value_or(out.problem.selection_size);
  out.pursuit.stopping = parse_stopping(
      s, "stopping",
      out.problem.snr_db && !out.matrix ? StoppingMode::fixed_iterations : StoppingMode::threshold);
  if (auto v = s.number("residual_threshold")) {
    if (!(*v >= 0.0)) s.fail("residual_threshold", "must be >= 0");
    out.pursuit.residual_threshold = *v;
  }
  if (auto v = s.count("max_iterations", 1)) out.pursuit.max_iterations = *v;
  s.finish();
  return out;
}

SweepConfig parse_sweep(const json& root, bool timing) {
  SweepConfig out;
  out.base = parse_problem(root, TrialSpec{});
  if (!out.base.sparsity_rate) {
    throw ConfigError("[problem] sweeps are rate based; set sparsity_rate instead of sparsity");
  }
  Section s(root, "sweep");
  out.sparsity_rates = s.numbers("sparsity_rates").value_or(std::vector<double>{*out.base.sparsity_rate});
  if (timing) {
    s.skip("snr_db");
  } else {
    out.snrs_db = s.numbers("snr_db").value_or(std::vector<double>{0, 10, 20, 30, 40});
  }
  if (out.sparsity_rates.empty()) s.fail("sparsity_rates", "must not be empty");
  if (!timing && out.snrs_db.empty()) s.fail("snr_db", "must not be empty");
  if (auto v = s.count("trials", 1)) out.options.trials = *v;
  if (timing) {
    out.options.algorithms = {{AlgorithmKind::omp, 1}, {AlgorithmKind::gomp, out.base.selection_size}};
  } else {
    out.options.algorithms = {{AlgorithmKind::omp, 1},
                              {AlgorithmKind::gomp, out.base.selection_size},
                              {AlgorithmKind::oracle_ls, 1},
                              {AlgorithmKind::linear_mmse, 1}};
  }
  if (auto names = s.strings("algorithms")) {
    if (names->empty()) s.fail("algorithms", "must not be empty");
    out.options.algorithms.clear();
    for (const auto& name : *names) out.options.algorithms.push_back(Algorithm::parse(name));
  }
  if (auto v = s.string("sparsity_input")) {
    if (*v == "realized") {
      out.options.sparsity_input = SparsityInput::realized;
    } else if (*v == "expected") {
      out.options.sparsity_input = SparsityInput::expected;
    } else {
      s.fail("sparsity_input", "must be realized or expected");
    }
  }
  if (auto v = s.boolean("fixed_matrix")) out.options.fixed_matrix = *v;
  if (s.has("stopping")) out.options.stopping = parse_stopping(s, "stopping", StoppingMode::threshold);
  if (auto v = s.count("iteration_multiplier", 1)) out.options.iteration_multiplier = *v;
  if (auto v = s.boolean("include_timing")) out.include_timing = *v;
  s.finish();

  // Validate every grid point before any trial runs.
  for (double p : out.sparsity_rates) {
    TrialSpec cell = out.base;
    cell.sparsity_rate = p;
    cell.validate();
  }
  return out;
}

CompressibleConfig parse_compressible(const json& root) {
  TrialSpec defaults;
  defaults.sparsity_rate.reset();
  defaults.fixed_sparsity = 10;
  defaults.model = SignalModel::compressible;
  CompressibleConfig out;
  out.spec = parse_problem(root, defaults);
  out.spec.validate();
  if (!out.spec.fixed_sparsity) throw ConfigError("[problem] compressible runs need sparsity K");
  Section s(root, "compressible");
  if (auto v = s.count("trials", 1)) out.options.trials = *v;
  if (auto v = s.boolean("fixed_matrix")) out.options.fixed_matrix = *v;
  s.finish();
  return out;
}

RicConfig parse_ric(const json& root, const std::filesystem::path& base_dir) {
  RicConfig out;
  Section s(root, "ric");
  if (auto v = s.string("matrix")) out.matrix = resolve(base_dir, *v);
  if (auto v = s.string("generator")) {
    if (*v != "gaussian" && *v != "orthonormal" && *v != "perturbed_orthonormal") {
      s.fail("generator", "must be gaussian, orthonormal or perturbed_orthonormal");
    }
    out.generator = *v;
  }
  if (auto v = s.count("m", 1)) out.rows = *v;
  if (auto v = s.count("n", 1)) out.cols = *v;
  if (auto v = s.number("eps")) out.eps = *v;
  if (auto v = s.boolean("normalize_columns")) out.normalize_columns = *v;
  if (auto v = s.count("order", 1)) out.order = *v;
  if (auto v = s.string("method")) {
    if (*v == "exact") {
      out.method = RicMethod::exact;
    } else if (*v == "monte_carlo") {
      out.method = RicMethod::monte_carlo;
    } else if (*v == "certify") {
      out.method = RicMethod::certify;
    } else {
      s.fail("method", "must be exact, monte_carlo or certify");
    }
  }
  if (auto v = s.count("trials", 1)) out.trials = *v;
  if (auto v = s.number("budget")) {
    if (!(*v >= 1.0)) s.fail("budget", "must be >= 1");
    out.budget = *v;
  }
  s.finish();
  if (!out.matrix && out.generator != "gaussian" && out.cols > out.rows) {
    throw ConfigError("[ric] orthonormal generators need n <= m");
  }
  if (!out.matrix && out.order > out.cols) throw ConfigError("[ric] order exceeds n");
  return out;
}

TheoryCorpus parse_theory(const json& root) {
  TheoryCorpus out;
  Section s(root, "theory");
  if (auto v = s.count("lemma_pairs", 0)) out.lemma_pairs = *v;
  if (auto v = s.count("partition_draws", 0)) out.partition_draws = *v;
  if (auto v = s.count("prop_instances", 0)) out.prop_instances = *v;
  if (auto v = s.count("max_ric_order", 1)) out.max_ric_order = *v;
  if (auto v = s.count("theorem_instances", 0)) out.theorem_instances = *v;
  if (auto v = s.count("theorem_rows", 1)) out.theorem_rows = *v;
  if (auto v = s.count("theorem_sparsity", 1)) out.theorem_sparsity = *v;
  if (auto v = s.count("theorem_selection", 1)) out.theorem_selection = *v;
  if (auto v = s.number("theorem_max_eps")) out.theorem_max_eps = *v;
  s.finish();
  return out;
}

}  // namespace gomp::config
