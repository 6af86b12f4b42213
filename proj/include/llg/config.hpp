#pragma once

// Experiment configuration: JSON document, defaults, validation.
//
// Schema (every key optional except K; unknown keys are rejected):
//   {
//     "K": int, "mu1": num, "mu2": num, "noise_scale": num,
//     "control_modes": [[k, l], ...], "T": num, "dt": num, "seed": uint,
//     "steering": {"S": int, "budget": int, "eps_target": num, "restarts": int,
//                  "amplitude_bound": num},
//     "support":  {"N": int, "eps": num, "R": num, "grid_points": int},
//     "pde":      {"N_x": int}
//   }

#include "llg/galerkin.hpp"
#include "llg/spectral.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace llg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SteeringBlock {
  int S = 8;
  int budget = 2000;
  double eps_target = 1e-2;
  int restarts = 5;
  std::optional<double> amplitude_bound;
};

struct SupportBlock {
  int N = 10000;
  double eps = 0.05;
  double R = 0.0;
  int grid_points = 5;
};

struct PdeBlock {
  int N_x = 257;
};

struct ExperimentConfig {
  std::optional<int> K;
  double mu1 = 1.0;
  double mu2 = 1.0;
  double noise_scale = 1.0;
  std::vector<ModeIndex> control_modes = default_control_modes();
  double T = 1.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  SteeringBlock steering;
  SupportBlock support;
  PdeBlock pde;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  /// Requires a validated config.
  LlgParams params() const;
};

/// Parses a JSON document; an empty or whitespace-only document means {}.
/// Throws ConfigError with line/column for syntax errors and the key path for
/// type mismatches and unknown keys. Does not check that K is present.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

void to_json(nlohmann::json& j, const ExperimentConfig& c);

}  // namespace llg
