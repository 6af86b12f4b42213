#include "llg/stochastic.hpp"

#include "llg/json_io.hpp"
#include "llg/parallel.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace llg {

namespace {

// Neumaier-compensated running sum
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_grid(const SamplePath& path, const ControlSchedule& shift) {
  if (shift.modes() != path.modes) throw std::invalid_argument("girsanov: schedule and path modes differ");
  if (std::abs(shift.T() - path.T()) > 1e-9 * std::max(1.0, shift.T())) {
    throw std::invalid_argument("girsanov: schedule horizon " + format_double(shift.T()) +
                                " differs from path horizon " + format_double(path.T()));
  }
}

double z_975() {
  static const double z = boost::math::quantile(boost::math::normal(), 0.975);
  return z;
}

struct MeanSe {
  double mean, se;
};

MeanSe mean_and_stderr(const std::vector<double>& x) {
  CompensatedSum s;
  for (double v : x) s.add(v);
  const double n = static_cast<double>(x.size());
  const double mean = s.value() / n;
  CompensatedSum q;
  for (double v : x) q.add((v - mean) * (v - mean));
  const double var = x.size() > 1 ? q.value() / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

}  // namespace

GirsanovWeight girsanov_weight(const SamplePath& path, const ControlSchedule& shift) {
  check_grid(path, shift);
  CompensatedSum log_q;
  for (int s = 0; s < path.steps(); ++s) {
    const Eigen::VectorXd u = shift.at(s * path.dt);
    for (Eigen::Index c = 0; c < u.size(); ++c) {
      log_q.add(-u[c] * path.increments(s, c));
      log_q.add(-0.5 * u[c] * u[c] * path.dt);
    }
  }
  GirsanovWeight w;
  w.log_value = log_q.value();
  w.value = std::exp(w.log_value);
  return w;
}

double discrete_energy(const ControlSchedule& shift, double dt) {
  const int steps = step_count(shift.T(), dt);
  CompensatedSum e;
  for (int s = 0; s < steps; ++s) e.add(shift.at(s * dt).squaredNorm() * dt);
  return e.value();
}

namespace {

MomentEstimate moment(const ControlSchedule& shift, double dt, int N, std::uint64_t seed, int threads,
                      bool inverse) {
  if (N < 1) throw std::invalid_argument("weight moment: N must be >= 1");
  std::vector<double> vals(static_cast<std::size_t>(N));
  parallel_for(vals.size(), threads, [&](std::size_t i) {
    const SamplePath path = sample_brownian(shift.modes(), shift.T(), dt, path_seed(seed, i));
    const double lq = girsanov_weight(path, shift).log_value;
    vals[i] = std::exp(inverse ? -lq : lq);
  });
  const MeanSe ms = mean_and_stderr(vals);
  MomentEstimate e;
  e.mean = ms.mean;
  e.stderr_ = ms.se;
  e.N = N;
  e.seed = seed;
  e.energy = discrete_energy(shift, dt);
  e.reference = inverse ? std::exp(e.energy) : 1.0;
  e.z = ms.se > 0.0 ? (e.mean - e.reference) / ms.se : (e.mean == e.reference ? 0.0 : INFINITY);
  return e;
}

}  // namespace

MomentEstimate weight_moment(const ControlSchedule& shift, double dt, int N, std::uint64_t seed, int threads) {
  return moment(shift, dt, N, seed, threads, false);
}

MomentEstimate inverse_weight_moment(const ControlSchedule& shift, double dt, int N, std::uint64_t seed,
                                     int threads) {
  if (N < 1000) throw std::invalid_argument("inverse_weight_moment: N must be >= 1000");
  return moment(shift, dt, N, seed, threads, true);
}

std::string to_string(EstimateMethod m) {
  return m == EstimateMethod::Direct ? "direct" : "girsanov-shifted";
}

std::pair<double, double> clopper_pearson(int hits, int N, double confidence) {
  if (N < 1 || hits < 0 || hits > N) throw std::invalid_argument("clopper_pearson: need 0 <= hits <= N, N >= 1");
  const double alpha = 1.0 - confidence;
  const double lo = hits == 0 ? 0.0 : boost::math::ibeta_inv(hits, N - hits + 1, alpha / 2);
  const double hi = hits == N ? 1.0 : boost::math::ibeta_inv(hits + 1, N - hits, 1.0 - alpha / 2);
  return {lo, hi};
}

SmallBallEstimate estimate_small_ball(const GalerkinModel& model, const ModeState& m0, const ModeState& m1,
                                      const SmallBallOptions& opts) {
  if (!(opts.eps > 0.0)) throw std::invalid_argument("estimate_small_ball: eps must be > 0");
  if (opts.N < 1) throw std::invalid_argument("estimate_small_ball: N must be >= 1");
  if (m0.K() != model.K() || m1.K() != model.K()) throw DimensionMismatch("estimate_small_ball: K mismatch");
  const auto& modes = model.params().control_modes;
  step_count(opts.T, opts.dt);

  std::optional<ControlSchedule> u;
  if (opts.shift) {
    const double sigma = model.params().noise_scale;
    if (!(sigma > 0.0)) throw std::invalid_argument("estimate_small_ball: shifted mode needs noise_scale > 0");
    if (opts.shift->modes() != modes) {
      throw std::invalid_argument("estimate_small_ball: shift modes differ from the model's control modes");
    }
    u = ControlSchedule(modes, opts.shift->T(), opts.shift->values() / sigma);
  }

  const Eigen::VectorXd w = weight_diagonal(model.K());
  std::vector<double> dist(static_cast<std::size_t>(opts.N));
  std::vector<double> weight(static_cast<std::size_t>(opts.N), 1.0);
  parallel_for(dist.size(), opts.threads, [&](std::size_t i) {
    const SamplePath path = sample_brownian(modes, opts.T, opts.dt, path_seed(opts.seed, i));
    Eigen::VectorXd mT;
    if (u) {
      mT = integrate_sde_final(model, m0.coeffs(), shift_path(path, *u), opts.scheme);
      weight[i] = girsanov_weight(path, *u).value;
    } else {
      mT = integrate_sde_final(model, m0.coeffs(), path, opts.scheme);
    }
    const Eigen::VectorXd d = mT - m1.coeffs();
    dist[i] = std::sqrt(d.cwiseProduct(d).dot(w));
  });

  SmallBallEstimate e;
  e.N = opts.N;
  e.eps = opts.eps;
  e.seed = opts.seed;
  e.T = opts.T;
  e.dt = opts.dt;
  e.method = u ? EstimateMethod::GirsanovShifted : EstimateMethod::Direct;
  std::vector<double> contrib(dist.size());
  CompensatedSum dsum, wsum, w2sum;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const bool hit = dist[i] <= opts.eps;
    e.hits += hit;
    contrib[i] = hit ? weight[i] : 0.0;
    dsum.add(dist[i]);
    if (hit) {
      wsum.add(weight[i]);
      w2sum.add(weight[i] * weight[i]);
    }
  }
  e.mean_terminal_distance = dsum.value() / opts.N;
  const MeanSe ms = mean_and_stderr(contrib);
  e.raw_mean = ms.mean;
  e.stderr_ = ms.se;
  if (e.method == EstimateMethod::Direct) {
    e.p_hat = static_cast<double>(e.hits) / opts.N;
    std::tie(e.ci_low, e.ci_high) = clopper_pearson(e.hits, opts.N);
    e.effective_sample_size = opts.N;
  } else {
    e.p_hat = std::clamp(ms.mean, 0.0, 1.0);
    e.ci_low = std::clamp(ms.mean - z_975() * ms.se, 0.0, e.p_hat);
    e.ci_high = std::clamp(ms.mean + z_975() * ms.se, e.p_hat, 1.0);
    e.effective_sample_size = w2sum.value() > 0.0 ? wsum.value() * wsum.value() / w2sum.value() : 0.0;
  }
  return e;
}

std::vector<ModeState> control_orbit_grid(const GalerkinModel& model, const ModeState& m0, double R, int count) {
  if (R < 0.0 || count < 1) throw std::invalid_argument("control_orbit_grid: need R >= 0 and count >= 1");
  if (R == 0.0) return {m0};
  const auto& fields = model.control_fields();
  if (fields.empty()) throw std::invalid_argument("control_orbit_grid: no control fields");
  const Eigen::VectorXd w = weight_diagonal(model.K());
  std::vector<ModeState> grid;
  for (int i = 0; i < count; ++i) {
    const Eigen::MatrixXd A = (i % 2 == 0 ? 1.0 : -1.0) * fields[static_cast<std::size_t>(i / 2) % fields.size()].matrix;
    auto gap = [&](double th) {
      const Eigen::VectorXd d = (th * A).exp() * m0.coeffs() - m0.coeffs();
      return std::sqrt(d.cwiseProduct(d).dot(w)) - R;
    };
    // first crossing of distance R, then bisection
    double lo = 0.0, hi = 0.0;
    const double h = 1e-2;
    for (double th = h; th <= 50.0; th += h) {
      if (gap(th) >= 0.0) {
        lo = th - h;
        hi = th;
        break;
      }
    }
    if (hi == 0.0) throw std::invalid_argument("control_orbit_grid: field orbit never reaches distance R");
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (gap(mid) < 0.0 ? lo : hi) = mid;
    }
    grid.emplace_back(model.K(), (hi * A).exp() * m0.coeffs());
  }
  return grid;
}

SweepReport support_theorem_sweep(const GalerkinModel& model, const std::vector<SweepPoint>& points,
                                  const ModeState& m1, double R, const SmallBallOptions& opts) {
  if (points.empty()) throw std::invalid_argument("support_theorem_sweep: empty grid");
  SweepReport rep;
  rep.R = R;
  for (const auto& p : points) {
    SmallBallOptions o = opts;
    o.shift = p.shift;
    if (p.eps > 0.0) o.eps = p.eps;
    rep.estimates.push_back(estimate_small_ball(model, p.m0, m1, o));
  }
  rep.delta = rep.estimates.front().ci_low;
  for (const auto& e : rep.estimates) rep.delta = std::min(rep.delta, e.ci_low);
  return rep;
}

void to_json(nlohmann::json& j, const MomentEstimate& e) {
  j = {{"mean", e.mean}, {"stderr", e.stderr_}, {"reference", e.reference}, {"z", e.z},
       {"N", e.N},       {"seed", e.seed},      {"energy", e.energy}};
}

void to_json(nlohmann::json& j, const SmallBallEstimate& e) {
  j = {{"p_hat", e.p_hat},
       {"ci_low", e.ci_low},
       {"ci_high", e.ci_high},
       {"N", e.N},
       {"eps", e.eps},
       {"method", to_string(e.method)},
       {"hits", e.hits},
       {"stderr", e.stderr_},
       {"raw_mean", e.raw_mean},
       {"effective_sample_size", e.effective_sample_size},
       {"mean_terminal_distance", e.mean_terminal_distance},
       {"seed", e.seed},
       {"T", e.T},
       {"dt", e.dt}};
}

void to_json(nlohmann::json& j, const SweepReport& r) {
  j = {{"R", r.R}, {"delta", r.delta}, {"estimates", r.estimates}};
}

}  // namespace llg
