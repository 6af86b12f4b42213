#pragma once

// Monte-Carlo side of the stochastic Galerkin system: Girsanov weights,
// small-ball probabilities with confidence intervals, and the support sweep.

#include "llg/galerkin.hpp"
#include "llg/integrators.hpp"
#include "llg/schedule.hpp"
#include "llg/spectral.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace llg {

struct GirsanovWeight {
  double value = 1.0;
  double log_value = 0.0;
};

/// log Q = -sum_c sum_i u_c(t_i) dW_ic - 1/2 sum_c sum_i u_c(t_i)^2 dt, left point.
/// Throws std::invalid_argument if the schedule and path disagree on modes or horizon.
GirsanovWeight girsanov_weight(const SamplePath& path, const ControlSchedule& shift);

/// sum_c sum_i u_c(t_i)^2 dt on the path grid: the exact exponent of E[1/Q].
double discrete_energy(const ControlSchedule& shift, double dt);

struct MomentEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  /// Value the mean should match: 1 for E[Q], exp(discrete energy) for E[1/Q].
  double reference = 0.0;
  double z = 0.0;
  int N = 0;
  std::uint64_t seed = 0;
  double energy = 0.0;
};

/// Per-path seed: base xor path index.
inline std::uint64_t path_seed(std::uint64_t base, std::size_t i) { return base ^ static_cast<std::uint64_t>(i); }

MomentEstimate weight_moment(const ControlSchedule& shift, double dt, int N, std::uint64_t seed,
                             int threads = 1);
/// Throws std::invalid_argument for N < 1000.
MomentEstimate inverse_weight_moment(const ControlSchedule& shift, double dt, int N, std::uint64_t seed,
                                     int threads = 1);

enum class EstimateMethod { Direct, GirsanovShifted };
std::string to_string(EstimateMethod m);

struct SmallBallEstimate {
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  int N = 0;
  double eps = 0.0;
  EstimateMethod method = EstimateMethod::Direct;
  int hits = 0;
  double stderr_ = 0.0;
  /// Unclipped weighted mean (equals p_hat in direct mode).
  double raw_mean = 0.0;
  /// (sum w)^2 / sum w^2 over hitting paths; N in direct mode.
  double effective_sample_size = 0.0;
  double mean_terminal_distance = 0.0;
  std::uint64_t seed = 0;
  double T = 0.0;
  double dt = 0.0;
};

/// Exact binomial 95% interval.
std::pair<double, double> clopper_pearson(int hits, int N, double confidence = 0.95);

struct SmallBallOptions {
  double eps = 0.05;
  double T = 1.0;
  double dt = 1e-2;
  int N = 10000;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Steering schedule in control units. The Brownian shift is u = v / noise_scale,
  /// so that the shifted noise reproduces the steered dynamics.
  std::optional<ControlSchedule> shift;
  SdeScheme scheme = SdeScheme::HeunStratonovich;
};

/// Fraction of Heun paths from m0 ending within eps of m1 (direct), or the
/// Girsanov-weighted fraction of paths driven by the shifted noise.
SmallBallEstimate estimate_small_ball(const GalerkinModel& model, const ModeState& m0, const ModeState& m1,
                                      const SmallBallOptions& opts);

/// Points at weighted distance R from m0 obtained by flowing along the control
/// fields (+A_0, -A_0, +A_1, -A_1, ...). They share every invariant of m0.
std::vector<ModeState> control_orbit_grid(const GalerkinModel& model, const ModeState& m0, double R, int count);

struct SweepPoint {
  ModeState m0;
  std::optional<ControlSchedule> shift;
  /// Ball radius for this point (falls back to the sweep's eps when <= 0).
  double eps = 0.0;
};

struct SweepReport {
  double R = 0.0;
  std::vector<SmallBallEstimate> estimates;
  /// min over points of ci_low
  double delta = 0.0;
};

SweepReport support_theorem_sweep(const GalerkinModel& model, const std::vector<SweepPoint>& points,
                                  const ModeState& m1, double R, const SmallBallOptions& opts);

void to_json(nlohmann::json& j, const MomentEstimate& e);
void to_json(nlohmann::json& j, const SmallBallEstimate& e);
void to_json(nlohmann::json& j, const SweepReport& r);

}  // namespace llg
