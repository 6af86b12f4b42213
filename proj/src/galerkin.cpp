#include "llg/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace llg {

void LlgParams::validate() const {
  if (K < 0) throw std::invalid_argument("K must be >= 0");
  if (!std::isfinite(mu1) || !std::isfinite(mu2)) throw std::invalid_argument("mu1, mu2 must be finite");
  if (mu2 < 0.0) throw std::invalid_argument("mu2 must be >= 0");
  if (!(noise_scale >= 0.0)) throw std::invalid_argument("noise_scale must be >= 0");
  for (const auto& [k, l] : control_modes) {
    if (k < 0 || k > K) {
      throw std::invalid_argument("control mode frequency " + std::to_string(k) +
                                  " outside 0..K=" + std::to_string(K));
    }
    if (l < 1 || l > 3) throw std::invalid_argument("control mode axis must be 1, 2 or 3");
  }
}

ModeState LinearField::apply(const ModeState& m) const {
  if (m.K() != K) throw DimensionMismatch("LinearField::apply: K mismatch");
  return ModeState(K, matrix * m.coeffs());
}

LinearField control_field(int k, int l, int K, FieldConvention convention) {
  if (k < 0 || k > K) {
    throw std::invalid_argument("control_field: frequency " + std::to_string(k) + " > K=" +
                                std::to_string(K));
  }
  if (l < 1 || l > 3) throw std::invalid_argument("control_field: axis must be 1..3");
  const double scale = convention == FieldConvention::LiteralFormula ? 2.0 : 1.0;
  LinearField f{K, Eigen::MatrixXd::Zero(3 * (K + 1), 3 * (K + 1))};
  for (int i = 0; i <= K; ++i) {
    for (int n : {k + i, std::abs(k - i)}) {
      if (n > K) continue;
      const double c = scale * triple_product_coeff(n, k, i) / basis_norm_sq(i);
      for (int j = 1; j <= 3; ++j)
        for (int p = 1; p <= 3; ++p) {
          const int eps = levi_civita(p, l, j);
          if (eps != 0) {
            f.matrix(ModeState::flat_index(i, j), ModeState::flat_index(n, p)) = c * eps;
          }
        }
      if (k == 0) break;  // k+i and |k-i| coincide
    }
  }
  return f;
}

GalerkinModel::GalerkinModel(LlgParams params) : params_(std::move(params)) {
  params_.validate();
  const int K = params_.K;
  N_ = dealiased_grid(K);
  synth_.resize(N_, K + 1);
  synth_xx_.resize(N_, K + 1);
  analysis_.resize(K + 1, N_);
  const double h = kTwoPi / N_;
  for (int q = 0; q < N_; ++q) {
    const double x = PhysicalField::node(q, N_);
    for (int i = 0; i <= K; ++i) {
      const double c = std::cos(i * x);
      synth_(q, i) = c;
      synth_xx_(q, i) = eigenvalue(i) * c;
      analysis_(i, q) = h * c / basis_norm_sq(i);
    }
  }
  fields_.reserve(params_.control_modes.size());
  for (const auto& [k, l] : params_.control_modes) fields_.push_back(control_field(k, l, K));
}

void GalerkinModel::drift(const Eigen::VectorXd& m, Eigen::VectorXd& out) const {
  const int K = params_.K;
  // view flat coefficients as (K+1) x 3, row i = mode i
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>> modes(m.data(), K + 1, 3);
  const Eigen::Matrix<double, Eigen::Dynamic, 3> M = synth_ * modes;
  const Eigen::Matrix<double, Eigen::Dynamic, 3> Mxx = synth_xx_ * modes;
  Eigen::Matrix<double, Eigen::Dynamic, 3> F(N_, 3);
  for (int q = 0; q < N_; ++q) {
    const Eigen::Vector3d a = M.row(q).transpose();
    const Eigen::Vector3d b = Mxx.row(q).transpose();
    const Eigen::Vector3d axb = a.cross(b);
    F.row(q) = (params_.mu1 * axb - params_.mu2 * a.cross(axb)).transpose();
  }
  out.resize(3 * (K + 1));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>> result(out.data(), K + 1, 3);
  result = analysis_ * F;
}

ModeState GalerkinModel::drift(const ModeState& m) const {
  if (m.K() != params_.K) throw DimensionMismatch("drift: state K does not match params K");
  Eigen::VectorXd out;
  drift(m.coeffs(), out);
  return ModeState(params_.K, std::move(out));
}

void GalerkinModel::rhs(const Eigen::VectorXd& m, const Eigen::VectorXd& amplitudes,
                        Eigen::VectorXd& out) const {
  drift(m, out);
  for (std::size_t c = 0; c < fields_.size(); ++c) {
    const double v = amplitudes[static_cast<Eigen::Index>(c)];
    if (v != 0.0) out.noalias() += v * (fields_[c].matrix * m);
  }
}

Eigen::VectorXd GalerkinModel::amplitudes(const ControlSchedule& sched, double t) const {
  Eigen::VectorXd amp = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fields_.size()));
  if (sched.modes().empty()) return amp;
  const Eigen::VectorXd v = sched.at(t);
  const auto& modes = params_.control_modes;
  for (std::size_t s = 0; s < sched.modes().size(); ++s) {
    const auto it = std::find(modes.begin(), modes.end(), sched.modes()[s]);
    if (it == modes.end()) {
      throw std::invalid_argument("schedule mode (" + std::to_string(sched.modes()[s].frequency) +
                                  "," + std::to_string(sched.modes()[s].axis) +
                                  ") is not an admissible control mode");
    }
    amp[it - modes.begin()] += v[static_cast<Eigen::Index>(s)];
  }
  return amp;
}

ModeState GalerkinModel::rhs(const ModeState& m, double t, const ControlSchedule& sched) const {
  if (m.K() != params_.K) throw DimensionMismatch("rhs: state K does not match params K");
  Eigen::VectorXd out;
  rhs(m.coeffs(), amplitudes(sched, t), out);
  return ModeState(params_.K, std::move(out));
}

ModeState drift(const ModeState& m, const LlgParams& p) { return GalerkinModel(p).drift(m); }

ModeState rhs(const ModeState& m, double t, const ControlSchedule& sched, const LlgParams& p) {
  return GalerkinModel(p).rhs(m, t, sched);
}

}  // namespace llg
