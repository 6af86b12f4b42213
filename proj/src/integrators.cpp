#include "llg/integrators.hpp"

#include "llg/json_io.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <string>

namespace llg {

Eigen::VectorXd rk4_step(const VectorFieldFn& f, const Eigen::VectorXd& m, double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be > 0");
  Eigen::VectorXd k1, k2, k3, k4;
  f(t, m, k1);
  f(t + 0.5 * dt, m + 0.5 * dt * k1, k2);
  f(t + 0.5 * dt, m + 0.5 * dt * k2, k3);
  f(t + dt, m + dt * k3, k4);
  Eigen::VectorXd out = m + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) {
    throw IntegrationError("rk4_step: non-finite state at t=" + std::to_string(t + dt));
  }
  return out;
}

ModeState rk4_step(const VectorFieldFn& f, const ModeState& m, double t, double dt) {
  return ModeState(m.K(), rk4_step(f, m.coeffs(), t, dt));
}

namespace {

double weighted_norm_flat(const Eigen::VectorXd& m, const Eigen::VectorXd& w) {
  return std::sqrt(m.cwiseProduct(m).dot(w));
}

}  // namespace

Trajectory integrate(const VectorFieldFn& f, const ModeState& m0, double T, double dt,
                     const IntegrateOptions& opts) {
  if (!(T > 0.0)) throw std::invalid_argument("integrate: T must be > 0");
  if (!(dt > 0.0) || dt > T * (1.0 + 1e-12)) throw std::invalid_argument("integrate: need 0 < dt <= T");
  const int K = m0.K();
  const Eigen::VectorXd w = weight_diagonal(K);
  const double n0 = weighted_norm_flat(m0.coeffs(), w);
  const int steps = static_cast<int>(std::ceil(T / dt - 1e-9));
  const int stride = std::max(1, opts.stride);

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(m0);
  Eigen::VectorXd m = m0.coeffs();
  double t = 0.0;
  for (int s = 0; s < steps; ++s) {
    const double h = (s == steps - 1) ? T - t : dt;
    m = rk4_step(f, m, t, h);
    t = (s == steps - 1) ? T : t + h;
    double n = weighted_norm_flat(m, w);
    if (n > opts.blowup_factor * std::max(n0, 1e-300)) {
      throw IntegrationError("integrate: blow-up at t=" + std::to_string(t) + " (|m|_w=" +
                             std::to_string(n) + ")");
    }
    if (opts.renormalize && n > 0.0) {
      m *= n0 / n;
      n = n0;
    }
    traj.norm_drift = std::max(traj.norm_drift, std::abs(n - n0));
    if ((s + 1) % stride == 0 || s == steps - 1) {
      traj.times.push_back(t);
      traj.states.emplace_back(K, m);
    }
  }
  return traj;
}

Trajectory integrate_controlled(const GalerkinModel& model, const ModeState& m0,
                                const ControlSchedule& sched, double dt,
                                const IntegrateOptions& opts) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_controlled: dt must be > 0");
  if (m0.K() != model.K()) throw DimensionMismatch("integrate_controlled: state K does not match the model");
  const int K = m0.K();
  const Eigen::VectorXd w = weight_diagonal(K);
  const double n0 = weighted_norm_flat(m0.coeffs(), w);
  const int stride = std::max(1, opts.stride);
  // steps never straddle a segment boundary, so every RK4 stage sees one amplitude
  const int segments = sched.segments();
  const double h_seg = sched.segment_length();
  const int sub = std::max(1, static_cast<int>(std::ceil(h_seg / dt - 1e-9)));
  const double h = h_seg / sub;
  const int steps = segments * sub;

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(m0);
  Eigen::VectorXd m = m0.coeffs();
  int count = 0;
  for (int s = 0; s < segments; ++s) {
    const Eigen::VectorXd amp = model.amplitudes(sched, (s + 0.5) * h_seg);
    const VectorFieldFn f = [&](double, const Eigen::VectorXd& x, Eigen::VectorXd& out) { model.rhs(x, amp, out); };
    for (int i = 0; i < sub; ++i) {
      const double t0 = s * h_seg + i * h;
      m = rk4_step(f, m, t0, h);
      ++count;
      const double t = count == steps ? sched.T() : s * h_seg + (i + 1) * h;
      double n = weighted_norm_flat(m, w);
      if (n > opts.blowup_factor * std::max(n0, 1e-300)) {
        throw IntegrationError("integrate_controlled: blow-up at t=" + std::to_string(t));
      }
      if (opts.renormalize && n > 0.0) {
        m *= n0 / n;
        n = n0;
      }
      traj.norm_drift = std::max(traj.norm_drift, std::abs(n - n0));
      if (count % stride == 0 || count == steps) {
        traj.times.push_back(t);
        traj.states.emplace_back(K, m);
      }
    }
  }
  return traj;
}

Eigen::VectorXd integrate_final(const GalerkinModel& model, const Eigen::VectorXd& m0,
                                const ControlSchedule& sched, double dt) {
  const Eigen::VectorXd w = weight_diagonal(model.K());
  const double n0 = weighted_norm_flat(m0, w);
  // step inside each constant segment so the RK4 stages never straddle a jump
  const int segments = sched.segments();
  const double h_seg = sched.segment_length();
  const int sub = std::max(1, static_cast<int>(std::ceil(h_seg / dt - 1e-9)));
  const double h = h_seg / sub;
  Eigen::VectorXd m = m0, k1, k2, k3, k4, tmp;
  for (int s = 0; s < segments; ++s) {
    const Eigen::VectorXd amp = model.amplitudes(sched, (s + 0.5) * h_seg);
    for (int i = 0; i < sub; ++i) {
      model.rhs(m, amp, k1);
      tmp = m + 0.5 * h * k1;
      model.rhs(tmp, amp, k2);
      tmp = m + 0.5 * h * k2;
      model.rhs(tmp, amp, k3);
      tmp = m + h * k3;
      model.rhs(tmp, amp, k4);
      m += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!m.allFinite() || weighted_norm_flat(m, w) > 1e3 * std::max(n0, 1e-300)) {
      throw IntegrationError("integrate_final: blow-up in segment " + std::to_string(s));
    }
  }
  return m;
}

int step_count(double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("step_count: T and dt must be > 0");
  const double n = T / dt;
  const double r = std::round(n);
  if (r < 1.0 || std::abs(n - r) > 1e-9 * std::max(1.0, n)) {
    throw std::invalid_argument("dt=" + std::to_string(dt) + " does not divide T=" + std::to_string(T));
  }
  return static_cast<int>(r);
}

SamplePath sample_brownian(const std::vector<ModeIndex>& modes, double T, double dt,
                           std::uint64_t seed) {
  SamplePath path;
  path.modes = modes;
  path.dt = dt;
  path.seed = seed;
  const int steps = step_count(T, dt);
  path.increments.resize(steps, static_cast<Eigen::Index>(modes.size()));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(dt));
  for (int s = 0; s < steps; ++s)
    for (Eigen::Index c = 0; c < path.increments.cols(); ++c) path.increments(s, c) = gauss(rng);
  return path;
}

SamplePath shift_path(const SamplePath& path, const ControlSchedule& sched) {
  if (sched.modes() != path.modes) throw std::invalid_argument("shift_path: mode lists differ");
  if (std::abs(sched.T() - path.T()) > 1e-9 * sched.T()) {
    throw std::invalid_argument("shift_path: schedule horizon differs from path horizon");
  }
  SamplePath out = path;
  for (int s = 0; s < path.steps(); ++s) {
    out.increments.row(s) += path.dt * sched.at(s * path.dt).transpose();
  }
  return out;
}

namespace {

// sum_c dW_c A_c m, scaled by the noise amplitude
void noise_apply(const GalerkinModel& model, const Eigen::VectorXd& m, const Eigen::VectorXd& dW,
                 Eigen::VectorXd& out) {
  out.setZero(m.size());
  const auto& fields = model.control_fields();
  for (std::size_t c = 0; c < fields.size(); ++c) {
    const double d = dW[static_cast<Eigen::Index>(c)];
    if (d != 0.0) out.noalias() += d * (fields[c].matrix * m);
  }
  out *= model.params().noise_scale;
}

void check_increments(const GalerkinModel& model, const Eigen::VectorXd& dW) {
  if (dW.size() != static_cast<Eigen::Index>(model.control_fields().size())) {
    throw std::invalid_argument("SDE step: need one increment per control mode");
  }
}

}  // namespace

Eigen::VectorXd heun_stratonovich_step(const GalerkinModel& model, const Eigen::VectorXd& m,
                                       double dt, const Eigen::VectorXd& dW) {
  check_increments(model, dW);
  Eigen::VectorXd d0, g0, d1, g1;
  model.drift(m, d0);
  noise_apply(model, m, dW, g0);
  const Eigen::VectorXd pred = m + dt * d0 + g0;
  model.drift(pred, d1);
  noise_apply(model, pred, dW, g1);
  Eigen::VectorXd out = m + 0.5 * dt * (d0 + d1) + 0.5 * (g0 + g1);
  if (!out.allFinite()) throw IntegrationError("heun_stratonovich_step: non-finite state");
  return out;
}

ModeState heun_stratonovich_step(const GalerkinModel& model, const ModeState& m, double dt,
                                 const Eigen::VectorXd& dW) {
  return ModeState(m.K(), heun_stratonovich_step(model, m.coeffs(), dt, dW));
}

Eigen::VectorXd euler_maruyama_step(const GalerkinModel& model, const Eigen::VectorXd& m,
                                    double dt, const Eigen::VectorXd& dW) {
  check_increments(model, dW);
  Eigen::VectorXd d0, g0;
  model.drift(m, d0);
  noise_apply(model, m, dW, g0);
  Eigen::VectorXd out = m + dt * d0 + g0;
  if (!out.allFinite()) throw IntegrationError("euler_maruyama_step: non-finite state");
  return out;
}

namespace {

void check_path(const GalerkinModel& model, const SamplePath& path) {
  if (path.modes != model.params().control_modes) {
    throw std::invalid_argument("integrate_sde: path modes differ from the model's control modes");
  }
}

Eigen::VectorXd sde_step(const GalerkinModel& model, const Eigen::VectorXd& m, double dt,
                         const Eigen::VectorXd& dW, SdeScheme scheme) {
  return scheme == SdeScheme::HeunStratonovich ? heun_stratonovich_step(model, m, dt, dW)
                                               : euler_maruyama_step(model, m, dt, dW);
}

}  // namespace

Trajectory integrate_sde(const GalerkinModel& model, const ModeState& m0, const SamplePath& path,
                         SdeScheme scheme, int stride) {
  check_path(model, path);
  const Eigen::VectorXd w = weight_diagonal(model.K());
  const double n0 = weighted_norm_flat(m0.coeffs(), w);
  stride = std::max(1, stride);
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(m0);
  Eigen::VectorXd m = m0.coeffs();
  for (int s = 0; s < path.steps(); ++s) {
    m = sde_step(model, m, path.dt, path.increments.row(s).transpose(), scheme);
    traj.norm_drift = std::max(traj.norm_drift, std::abs(weighted_norm_flat(m, w) - n0));
    if ((s + 1) % stride == 0 || s == path.steps() - 1) {
      traj.times.push_back((s + 1) * path.dt);
      traj.states.emplace_back(model.K(), m);
    }
  }
  return traj;
}

Eigen::VectorXd integrate_sde_final(const GalerkinModel& model, const Eigen::VectorXd& m0,
                                    const SamplePath& path, SdeScheme scheme) {
  check_path(model, path);
  Eigen::VectorXd m = m0;
  for (int s = 0; s < path.steps(); ++s) {
    m = sde_step(model, m, path.dt, path.increments.row(s).transpose(), scheme);
  }
  return m;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  if (traj.states.empty()) return;
  const int K = traj.states.front().K();
  os << "t";
  for (int i = 0; i <= K; ++i)
    for (int j = 1; j <= 3; ++j) os << ",m_" << i << "^" << j;
  os << ",norm\r\n";
  for (std::size_t r = 0; r < traj.states.size(); ++r) {
    os << format_double(traj.times[r]);
    for (Eigen::Index c = 0; c < traj.states[r].dim(); ++c) {
      os << ',' << format_double(traj.states[r].coeffs()[c]);
    }
    os << ',' << format_double(weighted_norm(traj.states[r])) << "\r\n";
  }
}

}  // namespace llg
