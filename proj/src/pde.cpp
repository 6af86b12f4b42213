#include "llg/pde.hpp"

#include "llg/integrators.hpp"
#include "llg/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace llg {

namespace {

GridField cross(const GridField& a, const GridField& b) {
  GridField c(a.rows(), 3);
  c.col(0) = a.col(1).cwiseProduct(b.col(2)) - a.col(2).cwiseProduct(b.col(1));
  c.col(1) = a.col(2).cwiseProduct(b.col(0)) - a.col(0).cwiseProduct(b.col(2));
  c.col(2) = a.col(0).cwiseProduct(b.col(1)) - a.col(1).cwiseProduct(b.col(0));
  return c;
}

GridField second_difference(const GridField& M, double dx) {
  const Eigen::Index n = M.rows();
  GridField D(n, 3);
  const double s = 1.0 / (dx * dx);
  D.row(0) = 2.0 * (M.row(1) - M.row(0)) * s;
  D.row(n - 1) = 2.0 * (M.row(n - 2) - M.row(n - 1)) * s;
  D.middleRows(1, n - 2) = (M.topRows(n - 2) - 2.0 * M.middleRows(1, n - 2) + M.bottomRows(n - 2)) * s;
  return D;
}

GridField pde_rhs(const GridField& M, const GridField& v, const LlgParams& p, double dx) {
  const GridField Mxx = second_difference(M, dx);
  const GridField MxMxx = cross(M, Mxx);
  GridField out = p.mu1 * MxMxx - p.mu2 * cross(M, MxMxx);
  if (v.size() != 0) out += cross(M, v);
  return out;
}

double saturation(const GridField& M) {
  return (M.rowwise().norm().array() - 1.0).abs().maxCoeff();
}

Eigen::VectorXd trapezoid_weights(int Nx, double dx) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(Nx, dx);
  w[0] = w[Nx - 1] = 0.5 * dx;
  return w;
}

}  // namespace

double cfl_limit(double dx, const LlgParams& p) { return dx * dx / (4.0 * (p.mu1 + p.mu2)); }

GridState make_grid(int Nx, const std::function<Eigen::Vector3d(double)>& f) {
  if (Nx < 3) throw std::invalid_argument("make_grid: need Nx >= 3");
  GridState g;
  g.dx = kTwoPi / (Nx - 1);
  g.M.resize(Nx, 3);
  for (int q = 0; q < Nx; ++q) g.M.row(q) = f(GridState::node(q, Nx)).transpose();
  g.saturation_deviation = saturation(g.M);
  return g;
}

GridState grid_from_modes(const ModeState& m, int Nx) {
  return make_grid(Nx, [&](double x) {
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (int i = 0; i <= m.K(); ++i) v += std::cos(i * x) * m.mode(i);
    return v;
  });
}

ModeState grid_to_modes(const GridState& g, int K) {
  const int Nx = g.Nx();
  const Eigen::VectorXd w = trapezoid_weights(Nx, g.dx);
  ModeState m(K);
  for (int i = 0; i <= K; ++i) {
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    for (int q = 0; q < Nx; ++q) acc += w[q] * std::cos(i * GridState::node(q, Nx)) * g.M.row(q).transpose();
    m.coeffs().segment<3>(3 * i) = acc / basis_norm_sq(i);
  }
  return m;
}

double grid_l2_norm(const GridField& f, double dx) {
  const Eigen::VectorXd w = trapezoid_weights(static_cast<int>(f.rows()), dx);
  return std::sqrt(f.rowwise().squaredNorm().dot(w));
}

double exchange_energy(const GridState& g) {
  const Eigen::Index n = g.M.rows();
  return (g.M.bottomRows(n - 1) - g.M.topRows(n - 1)).rowwise().squaredNorm().sum() / g.dx;
}

GridField control_samples(const std::vector<ModeIndex>& modes, const Eigen::VectorXd& amplitudes, int Nx) {
  if (amplitudes.size() != static_cast<Eigen::Index>(modes.size())) {
    throw std::invalid_argument("control_samples: one amplitude per mode");
  }
  GridField v = GridField::Zero(Nx, 3);
  for (std::size_t c = 0; c < modes.size(); ++c) {
    const auto [k, l] = modes[c];
    for (int q = 0; q < Nx; ++q) {
      v(q, l - 1) += amplitudes[static_cast<Eigen::Index>(c)] * std::cos(k * GridState::node(q, Nx));
    }
  }
  return v;
}

GridState pde_step(const GridState& g, const GridField& v, const LlgParams& p, double dt, bool renormalize) {
  if (!(dt > 0.0)) throw std::invalid_argument("pde_step: dt must be > 0");
  const double lim = cfl_limit(g.dx, p);
  if (dt > lim * (1.0 + 1e-12)) {
    throw CflViolation("pde_step: dt=" + format_double(dt) + " exceeds dx^2/(4(mu1+mu2))=" + format_double(lim));
  }
  const GridField k1 = pde_rhs(g.M, v, p, g.dx);
  const GridField k2 = pde_rhs(g.M + 0.5 * dt * k1, v, p, g.dx);
  const GridField k3 = pde_rhs(g.M + 0.5 * dt * k2, v, p, g.dx);
  const GridField k4 = pde_rhs(g.M + dt * k3, v, p, g.dx);
  GridState out = g;
  out.M += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  out.t += dt;
  if (!out.M.allFinite()) throw IntegrationError("pde_step: non-finite state");
  if (renormalize) out.M.rowwise().normalize();
  out.saturation_deviation = std::max(g.saturation_deviation, saturation(out.M));
  return out;
}

PdeRun pde_integrate(const GridState& g0, const LlgParams& p, double T, const std::optional<ControlSchedule>& sched,
                     const PdeRunOptions& opts) {
  if (!(T > 0.0)) throw std::invalid_argument("pde_integrate: T must be > 0");
  PdeRun run;
  run.dt = opts.dt > 0.0 ? opts.dt : 0.9 * cfl_limit(g0.dx, p);
  if (run.dt > cfl_limit(g0.dx, p) * (1.0 + 1e-12)) {
    throw CflViolation("pde_integrate: dt=" + format_double(run.dt) + " exceeds the explicit limit " +
                       format_double(cfl_limit(g0.dx, p)));
  }
  if (sched && std::abs(sched->T() - T) > 1e-9 * T) {
    throw std::invalid_argument("pde_integrate: schedule horizon differs from T");
  }

  // integrate piecewise between breakpoints so steps never straddle a control jump or a snapshot
  std::vector<double> breaks{T};
  if (sched)
    for (int s = 1; s < sched->segments(); ++s) breaks.push_back(s * sched->segment_length());
  for (double ts : opts.snapshot_times) {
    if (ts < 0.0 || ts > T * (1.0 + 1e-12)) throw std::invalid_argument("pde_integrate: snapshot outside [0, T]");
    breaks.push_back(std::min(ts, T));
  }
  std::sort(breaks.begin(), breaks.end());

  GridState g = g0;
  const double t0 = g0.t;
  double t = 0.0;
  std::size_t next_snap = 0;
  std::vector<double> snaps = opts.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  auto take_snapshots = [&] {
    while (next_snap < snaps.size() && snaps[next_snap] <= t + 1e-12 * std::max(1.0, T)) {
      run.snapshots.push_back(g);
      ++next_snap;
    }
  };
  take_snapshots();
  for (double b : breaks) {
    const double span = b - t;
    if (span <= 1e-14 * std::max(1.0, T)) continue;
    const int n = static_cast<int>(std::ceil(span / run.dt - 1e-9));
    const double h = span / n;
    GridField v;
    if (sched) {
      v = control_samples(sched->modes(), sched->at(t + 0.5 * span), g.Nx());
    }
    for (int i = 0; i < n; ++i) g = pde_step(g, v, p, h, opts.renormalize);
    run.steps += n;
    t = b;
    g.t = t0 + t;
    take_snapshots();
  }
  run.final_state = std::move(g);
  return run;
}

namespace {

GridField tail_on_grid(const GridState& g, int K) {
  return g.M - grid_from_modes(grid_to_modes(g, K), g.Nx()).M;
}

}  // namespace

GalerkinPdeComparison compare_galerkin_pde(const LlgParams& p, const ModeState& M0, int K,
                                           const std::optional<ControlSchedule>& sched, double T,
                                           double galerkin_dt, int Nx, double pde_dt) {
  if (K < 0 || K > M0.K()) throw std::invalid_argument("compare_galerkin_pde: need 0 <= K <= M0.K()");
  GalerkinPdeComparison c;
  c.K = K;
  c.Nx = Nx;
  c.T = T;

  LlgParams pk = p;
  pk.K = K;
  pk.control_modes = sched ? sched->modes() : std::vector<ModeIndex>{};
  const GalerkinModel model(pk);
  const ModeState m0 = ModeState(K, M0.coeffs().head(3 * (K + 1)));
  const ControlSchedule s = sched ? *sched : ControlSchedule::Zero({}, T, 1);
  const ModeState mT(K, integrate_final(model, m0.coeffs(), s, galerkin_dt));
  c.galerkin_norm_drift = std::abs(weighted_norm(mT) - weighted_norm(m0));

  const GridState g0 = grid_from_modes(M0, Nx);
  PdeRunOptions o;
  o.dt = pde_dt;
  const PdeRun run = pde_integrate(g0, p, T, sched, o);
  const GridState& gT = run.final_state;

  c.discrepancy = grid_l2_norm(gT.M - grid_from_modes(mT, Nx).M, gT.dx);
  c.initial_projection_error = grid_l2_norm(tail_on_grid(g0, K), g0.dx);
  const double tail = grid_l2_norm(tail_on_grid(gT, K), gT.dx);
  c.tail_energy = tail * tail;
  c.pde_saturation_deviation = gT.saturation_deviation;
  return c;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

TailGrowthReport tail_growth_experiment(const GridState& g0, const LlgParams& p, int K, const std::vector<double>& T1,
                                        double dt) {
  if (T1.size() < 2) throw std::invalid_argument("tail_growth_experiment: need at least two T1 values");
  TailGrowthReport rep;
  rep.K = K;
  rep.Nx = g0.Nx();
  rep.T1 = T1;
  std::sort(rep.T1.begin(), rep.T1.end());
  if (!(rep.T1.front() > 0.0)) throw std::invalid_argument("tail_growth_experiment: T1 values must be > 0");

  const double t0 = grid_l2_norm(tail_on_grid(g0, K), g0.dx);
  rep.tail_initial_sq = t0 * t0;
  PdeRunOptions o;
  o.dt = dt;
  o.snapshot_times = rep.T1;
  const PdeRun run = pde_integrate(g0, p, rep.T1.back(), std::nullopt, o);
  for (const auto& s : run.snapshots) {
    const double tn = grid_l2_norm(tail_on_grid(s, K), s.dx);
    rep.growth.push_back(tn * tn - rep.tail_initial_sq);
  }
  const LinearFit fit = fit_line(rep.T1, rep.growth);
  rep.C = fit.slope;
  rep.intercept = fit.intercept;
  rep.r_squared = fit.r_squared;
  return rep;
}

Eigen::Vector3d SmoothUnitField::operator()(double x) const {
  const double th = th0 + th1 * std::cos(x);
  const double ph = ph1 * std::cos(x) + ph2 * std::cos(2.0 * x);
  return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
}

ModeState project_function(const std::function<Eigen::Vector3d(double)>& f, int K, int Q) {
  if (Q < 2 * K + 2) throw std::invalid_argument("project_function: too few quadrature points");
  PhysicalField pf;
  pf.values.resize(Q, 3);
  for (int q = 0; q < Q; ++q) pf.values.row(q) = f(PhysicalField::node(q, Q)).transpose();
  return project_to_modes(pf, K);
}

void write_grid_csv(std::ostream& os, const GridState& g) {
  os << "x,M^1,M^2,M^3\r\n";
  for (int q = 0; q < g.Nx(); ++q) {
    os << format_double(GridState::node(q, g.Nx()));
    for (int c = 0; c < 3; ++c) os << ',' << format_double(g.M(q, c));
    os << "\r\n";
  }
}

void to_json(nlohmann::json& j, const GalerkinPdeComparison& c) {
  j = {{"K", c.K},
       {"Nx", c.Nx},
       {"T", c.T},
       {"discrepancy", c.discrepancy},
       {"initial_projection_error", c.initial_projection_error},
       {"tail_energy", c.tail_energy},
       {"galerkin_norm_drift", c.galerkin_norm_drift},
       {"pde_saturation_deviation", c.pde_saturation_deviation}};
}

void to_json(nlohmann::json& j, const TailGrowthReport& r) {
  j = {{"K", r.K},         {"Nx", r.Nx},
       {"T1", r.T1},       {"growth", r.growth},
       {"tail_initial_sq", r.tail_initial_sq},
       {"C", r.C},         {"intercept", r.intercept},
       {"r_squared", r.r_squared}};
}

}  // namespace llg
