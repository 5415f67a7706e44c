#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gomp/experiments.hpp"
#include "gomp/pursuit.hpp"
#include "gomp/theory.hpp"

namespace gomp::config {

/// Parses a TOML file (or JSON when the extension is .json) into one JSON
/// tree. Throws ConfigError with the parser's position on malformed input.
nlohmann::json load_file(const std::filesystem::path& path);
nlohmann::json parse_toml(const std::string& text, const std::string& source = "<string>");

/// Top-level keys shared by every command.
struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

struct SolveConfig {
  /// Either both files are given, or the instance is generated from `problem`.
  std::optional<std::filesystem::path> matrix;
  std::optional<std::filesystem::path> measurements;
  TrialSpec problem;
  PursuitConfig pursuit;
};

struct SweepConfig {
  TrialSpec base;
  std::vector<double> sparsity_rates;
  std::vector<double> snrs_db;  // ignored by sweep-time
  ExperimentOptions options;
  bool include_timing = true;
};

struct CompressibleConfig {
  TrialSpec spec;
  ExperimentOptions options;
};

enum class RicMethod { exact, monte_carlo, certify };

struct RicConfig {
  std::optional<std::filesystem::path> matrix;
  /// Generator used when no matrix file is given.
  std::string generator = "gaussian";  // gaussian, orthonormal, perturbed_orthonormal
  Index rows = 6;
  Index cols = 10;
  double eps = 0.0;
  bool normalize_columns = false;
  Index order = 2;
  RicMethod method = RicMethod::exact;
  Index trials = 10000;
  double budget = kRicBudget;
};

Common parse_common(const nlohmann::json& root);
/// Relative file paths resolve against `base_dir` (the config file's folder).
SolveConfig parse_solve(const nlohmann::json& root, const std::filesystem::path& base_dir);
SweepConfig parse_sweep(const nlohmann::json& root, bool timing);
CompressibleConfig parse_compressible(const nlohmann::json& root);
RicConfig parse_ric(const nlohmann::json& root, const std::filesystem::path& base_dir);
TheoryCorpus parse_theory(const nlohmann::json& root);

}  // namespace gomp::config
