#include "llg/steering.hpp"

#include "llg/integrators.hpp"
#include "llg/json_io.hpp"
#include "llg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace llg {

NormCheck norm_compatibility_check(const ModeState& m0, const ModeState& m1, double tolerance) {
  if (m0.K() != m1.K()) throw DimensionMismatch("norm_compatibility_check: K differs");
  NormCheck c;
  c.gap = std::abs(weighted_norm(m0) - weighted_norm(m1));
  c.compatible = c.gap <= tolerance;
  return c;
}

namespace {

struct Problem {
  const GalerkinModel& model;
  const ModeState& m0;
  const ModeState& m1;
  double T;
  int segments;
  double dt;
  Eigen::VectorXd sqrt_w;

  ControlSchedule schedule(const Eigen::VectorXd& flat) const {
    return ControlSchedule::from_flat(model.params().control_modes, T, segments, flat);
  }

  // sqrt(W) (m(T) - m1); false on blow-up
  bool residual(const Eigen::VectorXd& flat, Eigen::VectorXd& r) const {
    try {
      const Eigen::VectorXd mT = integrate_final(model, m0.coeffs(), schedule(flat), dt);
      r = sqrt_w.cwiseProduct(mT - m1.coeffs());
      return r.allFinite();
    } catch (const IntegrationError&) {
      return false;
    }
  }
};

}  // namespace

ShootingValue shooting_residual(const GalerkinModel& model, const Eigen::VectorXd& flat, int segments,
                                const ModeState& m0, const ModeState& m1, double T, double dt) {
  if (m0.K() != model.K() || m1.K() != model.K()) {
    throw DimensionMismatch("shooting_residual: endpoint K differs from the model");
  }
  const Problem prob{model, m0, m1, T, segments, dt, weight_diagonal(model.K()).cwiseSqrt()};
  Eigen::VectorXd r;
  if (!prob.residual(flat, r)) return {kBlowupPenalty, true};
  return {r.squaredNorm(), false};
}

namespace {

struct Attempt {
  Eigen::VectorXd params;
  double residual = 0.0;  // |.|_w, not squared
  std::vector<double> history;
  int iterations = 0;
};

Eigen::VectorXd clamp(Eigen::VectorXd p, const std::optional<double>& bound) {
  if (bound) p = p.cwiseMax(-*bound).cwiseMin(*bound);
  return p;
}

Attempt levenberg_marquardt(const Problem& prob, Eigen::VectorXd p, double target, int budget,
                            const SteeringOptions& opts) {
  Attempt a;
  Eigen::VectorXd r;
  if (!prob.residual(p, r)) {
    a.params = std::move(p);
    a.residual = std::sqrt(kBlowupPenalty);
    return a;
  }
  double f = r.squaredNorm();
  a.history.push_back(std::sqrt(f));
  const Eigen::Index P = p.size();
  const Eigen::Index n = r.size();
  double lambda = -1.0;
  int slow = 0;
  double checkpoint = f;

  while (a.iterations < budget && std::sqrt(f) > target) {
    Eigen::MatrixXd J(n, P);
    std::vector<char> ok(static_cast<std::size_t>(P), 1);
    parallel_for(static_cast<std::size_t>(P), opts.threads, [&](std::size_t c) {
      const auto col = static_cast<Eigen::Index>(c);
      Eigen::VectorXd plus = p, minus = p, rp, rm;
      plus[col] += opts.fd_step;
      minus[col] -= opts.fd_step;
      if (!prob.residual(plus, rp) || !prob.residual(minus, rm)) {
        ok[c] = 0;
        return;
      }
      J.col(col) = (rp - rm) / (2.0 * opts.fd_step);
    });
    ++a.iterations;
    if (std::find(ok.begin(), ok.end(), 0) != ok.end()) break;

    const Eigen::MatrixXd H = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    if (lambda < 0.0) lambda = 1e-3 * std::max(H.diagonal().maxCoeff(), 1e-12);

    bool accepted = false;
    for (int tries = 0; tries < 16 && !accepted; ++tries) {
      Eigen::MatrixXd A = H;
      A.diagonal().array() += lambda;
      const Eigen::VectorXd step = A.ldlt().solve(-g);
      const Eigen::VectorXd trial = clamp(p + step, opts.amplitude_bound);
      Eigen::VectorXd rt;
      if (step.allFinite() && prob.residual(trial, rt) && rt.squaredNorm() < f) {
        const double fn = rt.squaredNorm();
        slow = (f - fn) < 1e-6 * f ? slow + 1 : 0;
        p = trial;
        r = std::move(rt);
        f = fn;
        a.history.push_back(std::sqrt(f));
        lambda = std::max(lambda / 3.0, 1e-15);
        accepted = true;
      } else {
        lambda *= 4.0;
      }
    }
    if (!accepted || slow >= 20) break;
    // give up on an attempt that stopped making real progress
    if (a.iterations % 100 == 0) {
      if (f > 0.75 * checkpoint) break;
      checkpoint = f;
    }
  }
  a.params = std::move(p);
  a.residual = std::sqrt(f);
  return a;
}

}  // namespace

SteeringResult synthesize_steering(const GalerkinModel& model, const ModeState& m0, const ModeState& m1,
                                   double T, const SteeringOptions& opts) {
  if (m0.K() != model.K() || m1.K() != model.K()) {
    throw DimensionMismatch("synthesize_steering: endpoint K differs from the model");
  }
  const NormCheck nc = norm_compatibility_check(m0, m1);
  if (!nc.compatible) {
    throw NormIncompatible("endpoints have different weighted L2 norms (gap " + format_double(nc.gap) +
                               "); the norm is conserved by every field of the system",
                           nc.gap);
  }
  if (!(T > 0.0)) throw std::invalid_argument("synthesize_steering: T must be > 0");
  if (opts.segments < 1) throw std::invalid_argument("synthesize_steering: segments must be >= 1");
  if (opts.budget < 0 || opts.restarts < 0) throw std::invalid_argument("synthesize_steering: negative budget");
  if (!(opts.dt > 0.0) || !(opts.fd_step > 0.0) || !(opts.eps_target > 0.0)) {
    throw std::invalid_argument("synthesize_steering: dt, fd_step and eps_target must be > 0");
  }

  const Problem prob{model, m0, m1, T, opts.segments, opts.dt, weight_diagonal(model.K()).cwiseSqrt()};
  const auto P = static_cast<Eigen::Index>(opts.segments * model.params().control_modes.size());
  const double scale = std::max(weighted_norm(m1), 1e-300);
  const double target = opts.eps_target * scale;

  std::vector<Attempt> attempts;
  int used = 0;
  for (int r = 0; r <= opts.restarts; ++r) {
    Eigen::VectorXd start = Eigen::VectorXd::Zero(P);
    if (r > 0) {
      std::mt19937_64 rng(opts.seed ^ static_cast<std::uint64_t>(r));
      std::normal_distribution<double> gauss(0.0, opts.init_scale);
      for (Eigen::Index i = 0; i < P; ++i) start[i] = gauss(rng);
      start = clamp(start, opts.amplitude_bound);
    }
    attempts.push_back(levenberg_marquardt(prob, start, target, opts.budget - used, opts));
    used += attempts.back().iterations;
    if (attempts.back().residual <= target || used >= opts.budget) break;
  }

  // lowest residual, then lowest energy, then earliest attempt
  std::size_t best = 0;
  double best_energy = prob.schedule(attempts[0].params).energy();
  for (std::size_t i = 1; i < attempts.size(); ++i) {
    const double e = prob.schedule(attempts[i].params).energy();
    if (attempts[i].residual < attempts[best].residual ||
        (attempts[i].residual == attempts[best].residual && e < best_energy)) {
      best = i;
      best_energy = e;
    }
  }

  SteeringResult out;
  out.schedule = prob.schedule(attempts[best].params);
  out.residual = attempts[best].residual;
  out.relative_residual = out.residual / scale;
  out.iterations = used;
  out.converged = out.residual <= target;
  out.winning_attempt = static_cast<int>(best);
  out.attempts = static_cast<int>(attempts.size());
  out.energy = best_energy;
  out.history = std::move(attempts[best].history);
  return out;
}

void to_json(nlohmann::json& j, const SteeringResult& r) {
  j = {{"schedule", r.schedule},
       {"residual", r.residual},
       {"relative_residual", r.relative_residual},
       {"iterations", r.iterations},
       {"converged", r.converged},
       {"winning_attempt", r.winning_attempt},
       {"attempts", r.attempts},
       {"energy", r.energy},
       {"history", r.history}};
}

ModeState truncate(const ModeState& m, int K) {
  if (K < 0 || K > m.K()) throw DimensionMismatch("truncate: need 0 <= K <= m.K()");
  return ModeState(K, m.coeffs().head(3 * (K + 1)));
}

ModeState embed(const ModeState& m, int K) {
  if (K < m.K()) throw DimensionMismatch("embed: target K smaller than the state's");
  ModeState out(K);
  out.coeffs().head(m.dim()) = m.coeffs();
  return out;
}

namespace {

double tail_norm_sq(const ModeState& m, int K) {
  const Eigen::VectorXd w = weight_diagonal(m.K());
  const Eigen::Index from = 3 * (K + 1);
  const Eigen::Index len = m.dim() - from;
  return m.coeffs().tail(len).cwiseProduct(m.coeffs().tail(len)).dot(w.tail(len));
}

}  // namespace

ApproxControlReport approx_control_experiment(const LlgParams& params, const ModeState& M0,
                                              const ModeState& M1, int K, double T1,
                                              const SteeringOptions& opts) {
  if (M0.K() != M1.K()) throw DimensionMismatch("approx_control_experiment: M0 and M1 differ in K");
  if (K < 0 || K >= M0.K()) {
    throw std::invalid_argument("approx_control_experiment: need K below the endpoint resolution");
  }
  ApproxControlReport rep;
  rep.K = K;
  rep.K_ref = M0.K();
  rep.T1 = T1;

  LlgParams pk = params;
  pk.K = K;
  LlgParams pref = params;
  pref.K = rep.K_ref;
  const GalerkinModel low(pk);
  const GalerkinModel ref(pref);

  const ModeState m0 = truncate(M0, K);
  ModeState m1 = truncate(M1, K);
  const double n0 = weighted_norm(m0);
  const double n1 = weighted_norm(m1);
  if (!norm_compatibility_check(m0, m1).compatible && n1 > 0.0) {
    rep.target_rescale = n0 / n1;
    m1 = rep.target_rescale * m1;
  }

  rep.projection_error_M0 = std::sqrt(tail_norm_sq(M0, K));
  rep.projection_error_M1 = std::sqrt(tail_norm_sq(M1, K));

  rep.steering = synthesize_steering(low, m0, m1, T1, opts);
  rep.steering_residual = rep.steering.residual;
  rep.steering_converged = rep.steering.converged;

  const ModeState MT(rep.K_ref, integrate_final(ref, M0.coeffs(), rep.steering.schedule, opts.dt));
  rep.tail_initial_sq = tail_norm_sq(M0, K);
  rep.tail_final_sq = tail_norm_sq(MT, K);
  rep.tail_growth = rep.tail_final_sq - rep.tail_initial_sq;
  rep.tail_budget = std::sqrt(rep.tail_initial_sq + std::max(rep.tail_growth, 0.0)) -
                    std::sqrt(rep.tail_initial_sq);
  rep.budget_sum = rep.projection_error_M0 + rep.projection_error_M1 + rep.tail_budget;
  rep.low_mode_error = weighted_norm(truncate(MT, K) - truncate(M1, K));
  rep.final_error = weighted_norm(MT - M1);
  rep.within_budget = rep.final_error <= rep.budget_sum;
  return rep;
}

void to_json(nlohmann::json& j, const ApproxControlReport& r) {
  j = {{"K", r.K},
       {"K_ref", r.K_ref},
       {"T1", r.T1},
       {"projection_error_M0", r.projection_error_M0},
       {"projection_error_M1", r.projection_error_M1},
       {"tail_initial_sq", r.tail_initial_sq},
       {"tail_final_sq", r.tail_final_sq},
       {"tail_growth", r.tail_growth},
       {"tail_budget", r.tail_budget},
       {"budget_sum", r.budget_sum},
       {"steering_residual", r.steering_residual},
       {"steering_converged", r.steering_converged},
       {"low_mode_error", r.low_mode_error},
       {"final_error", r.final_error},
       {"within_budget", r.within_budget},
       {"target_rescale", r.target_rescale},
       {"steering", r.steering}};
}

}  // namespace llg
