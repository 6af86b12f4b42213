#pragma once

// Open-loop steering of the Galerkin system by single shooting over
// piecewise-constant schedules, and the truncate/steer/bound-the-tail
// experiment for the infinite-dimensional system.

#include "llg/galerkin.hpp"
#include "llg/schedule.hpp"
#include "llg/spectral.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace llg {

struct NormCheck {
  bool compatible = false;
  /// | |m0|_w - |m1|_w |
  double gap = 0.0;
};

/// Every field of the system conserves |m|_w, so only equal-norm pairs can be joined.
NormCheck norm_compatibility_check(const ModeState& m0, const ModeState& m1, double tolerance = 1e-9);

class NormIncompatible : public std::invalid_argument {
 public:
  NormIncompatible(const std::string& what, double gap) : std::invalid_argument(what), gap(gap) {}
  double gap;
};

struct ShootingValue {
  /// |m(T) - m1|_w^2, or kBlowupPenalty when the integration diverged
  double value = 0.0;
  bool blowup = false;
};

inline constexpr double kBlowupPenalty = 1e30;

/// Integrates the controlled system (RK4, step <= dt inside each segment) with
/// the schedule encoded by `flat` (segment-major, model control-mode order).
ShootingValue shooting_residual(const GalerkinModel& model, const Eigen::VectorXd& flat, int segments,
                                const ModeState& m0, const ModeState& m1, double T, double dt);

struct SteeringOptions {
  int segments = 8;
  /// Total Jacobian evaluations over all attempts.
  int budget = 2000;
  std::uint64_t seed = 0;
  /// Convergence threshold on |m(T) - m1|_w / |m1|_w.
  double eps_target = 1e-2;
  double dt = 2e-3;
  /// Central-difference step for the Jacobian.
  double fd_step = 1e-6;
  /// Random restarts after the zero-schedule attempt.
  int restarts = 5;
  /// Standard deviation of random initial amplitudes.
  double init_scale = 1.0;
  std::optional<double> amplitude_bound;
  int threads = 1;
};

struct SteeringResult {
  ControlSchedule schedule;
  /// |m(T) - m1|_w
  double residual = 0.0;
  double relative_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  /// 0 = zero-schedule start, r >= 1 = r-th seeded restart
  int winning_attempt = 0;
  int attempts = 0;
  double energy = 0.0;
  /// Accepted residuals of the winning attempt, in order.
  std::vector<double> history;
};

/// Levenberg-Marquardt on the terminal mismatch sqrt(W)(m(T) - m1) with a
/// central-difference Jacobian. Steps are accepted only if they decrease the
/// residual. Throws NormIncompatible for pairs of different weighted norm.
SteeringResult synthesize_steering(const GalerkinModel& model, const ModeState& m0, const ModeState& m1,
                                   double T, const SteeringOptions& opts = {});

void to_json(nlohmann::json& j, const SteeringResult& r);

/// Coefficients of frequencies <= K (the L2 projection, since the basis is orthogonal).
ModeState truncate(const ModeState& m, int K);
/// Zero-padding of m into S_K, K >= m.K().
ModeState embed(const ModeState& m, int K);

struct ApproxControlReport {
  int K = 0;
  int K_ref = 0;
  double T1 = 0.0;
  /// |(I - Pi_K) M0|, |(I - Pi_K) M1|
  double projection_error_M0 = 0.0;
  double projection_error_M1 = 0.0;
  /// |m_perp(0)|^2, |m_perp(T1)|^2 and their difference, from the reference run
  double tail_initial_sq = 0.0;
  double tail_final_sq = 0.0;
  double tail_growth = 0.0;
  /// sqrt(|m_perp(0)|^2 + max(growth, 0)) - |m_perp(0)|: what the growth adds to the tail norm
  double tail_budget = 0.0;
  double budget_sum = 0.0;
  /// |m(T1) - Pi_K M1|_w of the K-truncated steering
  double steering_residual = 0.0;
  bool steering_converged = false;
  /// |Pi_K M(T1) - Pi_K M1| of the reference solution
  double low_mode_error = 0.0;
  /// |M(T1) - M1| of the reference solution
  double final_error = 0.0;
  bool within_budget = false;
  /// Ratio applied to Pi_K M1 to match |Pi_K M0|_w (1 if already compatible).
  double target_rescale = 1.0;
  SteeringResult steering;
};

/// Steers Pi_K M0 to Pi_K M1 in time T1 with the K-truncation, replays the
/// schedule on the K_ref = M0.K() Galerkin reference, and reports the error
/// budget of the truncation argument against the measured final error.
ApproxControlReport approx_control_experiment(const LlgParams& params, const ModeState& M0,
                                              const ModeState& M1, int K, double T1,
                                              const SteeringOptions& opts = {});

void to_json(nlohmann::json& j, const ApproxControlReport& r);

}  // namespace llg
