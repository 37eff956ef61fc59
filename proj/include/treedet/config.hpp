#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "treedet/detector.hpp"
#include "treedet/idd.hpp"

namespace treedet {

struct CplSweepConfig {
  int n = 5;
  int l = 5;
  int q = 2;
  int m = 1;
  int n_l = 5;
  Metric metric = Metric::kLookahead;
  std::vector<double> snr_db;
  std::uint64_t trials = 100000;
  std::uint64_t bound_samples = 2000;
};

struct ScalingConfig {
  std::vector<int> n_list;
  std::vector<double> snr_db;
  int q = 2;
  std::uint64_t samples = 20000;
  double lambda_max = 1.0;
};

struct SinrConfig {
  int n = 8;
  int l = 8;
  std::vector<double> snr_db;
  int samples = 100;
};

struct ComplexityConfig {
  int n = 12;
  int l = 12;
  int q = 4;
  int m = 8;
  std::vector<int> n_l_list = {2, 3, 5, 8};
  int vectors = 200;
  double snr_db = 15.0;
};

struct AsymptoticsConfig {
  double gamma = 0.5;
  double beta = 1.0;
  double lambda_min = 1.0;
  double lambda_max = 1.0;
  std::vector<double> sigma2;
};

// One fully resolved run description. `resolved` echoes the config with every
// default filled in; it is what validate prints and what the config hash
// covers (minus out/workers, which do not change the numbers).
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out;

  IddConfig idd;
  CplSweepConfig cpl;
  ScalingConfig scaling;
  SinrConfig sinr;
  ComplexityConfig complexity;
  AsymptoticsConfig asym;

  nlohmann::json resolved;
};

// Parses and validates a config document. Every failure is a ConfigError
// whose message starts with the dotted field path.
ExperimentConfig parse_config(const nlohmann::json& j);

// Reads the file, applies --set key=value overrides (value parsed as JSON,
// falling back to a plain string), then parses.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides);

// Applies one key=value override to a raw document.
void apply_override(nlohmann::json& j, const std::string& expr);

// FNV-1a over the canonical dump of the resolved config minus out/workers.
std::string config_hash(const nlohmann::json& resolved);

}  // namespace treedet
