#pragma once

// Explicit finite-difference reference solver for the full equation on
// (0, 2*pi) with homogeneous Neumann conditions:
//   vertex grid x_q = q dx, q = 0..Nx-1, dx = 2*pi/(Nx-1),
//   central second difference with mirror ghost points M_{-1} = M_1, M_{Nx} = M_{Nx-2},
//   classical RK4 in time.

#include "llg/galerkin.hpp"
#include "llg/schedule.hpp"
#include "llg/spectral.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

namespace llg {

using GridField = Eigen::Matrix<double, Eigen::Dynamic, 3>;

struct GridState {
  GridField M;
  double dx = 0.0;
  double t = 0.0;
  /// max over steps taken so far of max_q | |M_q| - 1 |
  double saturation_deviation = 0.0;

  int Nx() const { return static_cast<int>(M.rows()); }
  static double node(int q, int Nx) { return kTwoPi * q / (Nx - 1); }
};

class CflViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Largest dt accepted by pde_step: dx^2 / (4 (mu1 + mu2)).
double cfl_limit(double dx, const LlgParams& p);

GridState make_grid(int Nx, const std::function<Eigen::Vector3d(double)>& f);
/// Samples sum_i m_i cos(i x) on the vertex grid.
GridState grid_from_modes(const ModeState& m, int Nx);
/// Trapezoid projection of grid data onto S_K.
ModeState grid_to_modes(const GridState& g, int K);
/// Trapezoid L2(0, 2*pi) norm of grid data.
double grid_l2_norm(const GridField& f, double dx);
/// Trapezoid approximation of int |M_x|^2 with one-sided differences.
double exchange_energy(const GridState& g);

/// Control samples v(x_q) = sum_c amplitudes[c] cos(k_c x_q) e_{l_c}.
GridField control_samples(const std::vector<ModeIndex>& modes, const Eigen::VectorXd& amplitudes, int Nx);

/// One RK4 step with the control held fixed over the step. Throws CflViolation.
GridState pde_step(const GridState& g, const GridField& v, const LlgParams& p, double dt, bool renormalize);

struct PdeRunOptions {
  double dt = 0.0;  // <= 0: 0.9 * cfl_limit
  bool renormalize = false;
  /// Times (ascending, <= T) at which snapshots are recorded.
  std::vector<double> snapshot_times;
};

struct PdeRun {
  GridState final_state;
  std::vector<GridState> snapshots;
  double dt = 0.0;
  int steps = 0;
};

/// Integrates to T; the schedule (if any) supplies piecewise-constant control amplitudes.
PdeRun pde_integrate(const GridState& g0, const LlgParams& p, double T,
                     const std::optional<ControlSchedule>& sched = std::nullopt, const PdeRunOptions& opts = {});

struct GalerkinPdeComparison {
  int K = 0;
  int Nx = 0;
  double T = 0.0;
  /// |M_pde(T) - m_K(T)|_{L2}, with m_K(T) evaluated on the grid
  double discrepancy = 0.0;
  /// |M_pde(0) - Pi_K M_pde(0)|_{L2}
  double initial_projection_error = 0.0;
  /// |(I - Pi_K) M_pde(T)|^2
  double tail_energy = 0.0;
  double galerkin_norm_drift = 0.0;
  double pde_saturation_deviation = 0.0;
};

/// Runs the Galerkin system from Pi_K M0 and the PDE from the grid samples of
/// M0 (M0 given at any resolution >= K) and compares them at T.
GalerkinPdeComparison compare_galerkin_pde(const LlgParams& p, const ModeState& M0, int K,
                                           const std::optional<ControlSchedule>& sched, double T,
                                           double galerkin_dt, int Nx, double pde_dt = 0.0);

struct TailGrowthReport {
  int K = 0;
  int Nx = 0;
  std::vector<double> T1;
  /// |m_perp(T1)|^2 - |m_perp(0)|^2
  std::vector<double> growth;
  double tail_initial_sq = 0.0;
  /// least-squares growth ~ C T1 + intercept
  double C = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Uncontrolled PDE run from g0, recording the tail beyond frequency K at each T1.
TailGrowthReport tail_growth_experiment(const GridState& g0, const LlgParams& p, int K,
                                        const std::vector<double>& T1, double dt = 0.0);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Sphere-valued even field (sin th cos ph, sin th sin ph, cos th) with
/// th = th0 + th1 cos x, ph = ph1 cos x + ph2 cos 2x. Smooth and Neumann-compatible.
struct SmoothUnitField {
  double th0 = 0.9, th1 = 0.5, ph1 = 0.7, ph2 = 0.3;
  Eigen::Vector3d operator()(double x) const;
};

/// L2 projection of a function onto S_K by Q-point trapezoid quadrature.
ModeState project_function(const std::function<Eigen::Vector3d(double)>& f, int K, int Q = 4096);

/// CSV snapshot: x, M^1, M^2, M^3.
void write_grid_csv(std::ostream& os, const GridState& g);

void to_json(nlohmann::json& j, const GalerkinPdeComparison& c);
void to_json(nlohmann::json& j, const TailGrowthReport& r);

}  // namespace llg
