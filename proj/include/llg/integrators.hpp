#pragma once

// Time stepping for the Galerkin system: classical RK4 for the controlled
// ODE, Heun (Stratonovich) and Euler-Maruyama (Ito, comparison only) for the
// noise-driven system, and seeded Brownian increments.

#include "llg/galerkin.hpp"
#include "llg/schedule.hpp"
#include "llg/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace llg {

/// out = f(t, m)
using VectorFieldFn = std::function<void(double t, const Eigen::VectorXd& m, Eigen::VectorXd& out)>;

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Eigen::VectorXd rk4_step(const VectorFieldFn& f, const Eigen::VectorXd& m, double t, double dt);
ModeState rk4_step(const VectorFieldFn& f, const ModeState& m, double t, double dt);

struct Trajectory {
  std::vector<double> times;
  std::vector<ModeState> states;
  /// max over the grid of | |m(t)|_w - |m(0)|_w |
  double norm_drift = 0.0;

  const ModeState& final_state() const { return states.back(); }
};

struct IntegrateOptions {
  /// Store every `stride`-th state (the final state is always stored).
  int stride = 1;
  /// Rescale to the initial weighted norm after every step. Off by default:
  /// conservation is something to measure, not enforce.
  bool renormalize = false;
  double blowup_factor = 1e3;
};

/// Uniform grid with ceil(T/dt) steps; the last step is shortened to land on T.
Trajectory integrate(const VectorFieldFn& f, const ModeState& m0, double T, double dt,
                     const IntegrateOptions& opts = {});

/// Controlled Galerkin flow with a piecewise-constant schedule. Steps of size
/// <= dt are placed inside each segment, so stored times are multiples of
/// segment_length() / ceil(segment_length() / dt).
Trajectory integrate_controlled(const GalerkinModel& model, const ModeState& m0,
                                const ControlSchedule& sched, double dt,
                                const IntegrateOptions& opts = {});

/// Terminal state only; no allocation per step. Throws IntegrationError on blow-up.
Eigen::VectorXd integrate_final(const GalerkinModel& model, const Eigen::VectorXd& m0,
                                const ControlSchedule& sched, double dt);

/// Brownian increments for each control mode on a uniform grid.
struct SamplePath {
  std::vector<ModeIndex> modes;
  double dt = 0.0;
  std::uint64_t seed = 0;
  /// increments(step, mode)
  Eigen::MatrixXd increments;

  int steps() const { return static_cast<int>(increments.rows()); }
  double T() const { return dt * steps(); }
};

/// Number of steps of size dt covering T; throws unless dt divides T to 1e-9 relative.
int step_count(double T, double dt);

SamplePath sample_brownian(const std::vector<ModeIndex>& modes, double T, double dt,
                           std::uint64_t seed);

/// Increments of beta + int v dt: adds v(t_i) * dt with v sampled at the left
/// point of each step. The schedule's modes must match the path's.
SamplePath shift_path(const SamplePath& path, const ControlSchedule& sched);

/// Heun predictor-corrector for dm = drift dt + sigma * sum_c A_c m o dW_c.
Eigen::VectorXd heun_stratonovich_step(const GalerkinModel& model, const Eigen::VectorXd& m,
                                       double dt, const Eigen::VectorXd& dW);
ModeState heun_stratonovich_step(const GalerkinModel& model, const ModeState& m, double dt,
                                 const Eigen::VectorXd& dW);

/// Explicit Euler-Maruyama on the same equation read in the Ito sense.
Eigen::VectorXd euler_maruyama_step(const GalerkinModel& model, const Eigen::VectorXd& m,
                                    double dt, const Eigen::VectorXd& dW);

enum class SdeScheme { HeunStratonovich, EulerMaruyama };

/// Drives the stochastic Galerkin system with a sample path (path.modes must
/// equal model.params().control_modes).
Trajectory integrate_sde(const GalerkinModel& model, const ModeState& m0, const SamplePath& path,
                         SdeScheme scheme = SdeScheme::HeunStratonovich, int stride = 1);

/// Terminal state of integrate_sde without storing the trajectory.
Eigen::VectorXd integrate_sde_final(const GalerkinModel& model, const Eigen::VectorXd& m0,
                                    const SamplePath& path,
                                    SdeScheme scheme = SdeScheme::HeunStratonovich);

/// Header: t, m_0^1, ..., m_K^3, norm.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace llg
