#include "llg/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace llg {

std::vector<ModeIndex> default_control_modes() { return {{0, 1}, {0, 2}, {1, 1}}; }

ControlSchedule::ControlSchedule(std::vector<ModeIndex> modes, double T, Eigen::MatrixXd values)
    : modes_(std::move(modes)), T_(T), values_(std::move(values)) {
  if (!(T_ > 0.0)) throw std::invalid_argument("ControlSchedule: T must be > 0");
  if (values_.rows() < 1) throw std::invalid_argument("ControlSchedule: need at least one segment");
  if (values_.cols() != static_cast<Eigen::Index>(modes_.size())) {
    throw std::invalid_argument("ControlSchedule: " + std::to_string(values_.cols()) +
                                " value columns for " + std::to_string(modes_.size()) + " modes");
  }
  if (!values_.allFinite()) throw std::invalid_argument("ControlSchedule: non-finite amplitude");
}

ControlSchedule ControlSchedule::Zero(std::vector<ModeIndex> modes, double T, int segments) {
  const auto n = static_cast<Eigen::Index>(modes.size());
  return ControlSchedule(std::move(modes), T, Eigen::MatrixXd::Zero(segments, n));
}

ControlSchedule ControlSchedule::Constant(std::vector<ModeIndex> modes, double T,
                                          const Eigen::VectorXd& amplitudes) {
  return ControlSchedule(std::move(modes), T, amplitudes.transpose());
}

int ControlSchedule::segment_at(double t) const {
  // small slack so that grid times accumulated in floating point still land inside
  const double slack = 1e-9 * T_;
  if (t < -slack || t > T_ + slack) {
    throw std::out_of_range("ControlSchedule: t=" + std::to_string(t) + " outside [0, " +
                            std::to_string(T_) + "]");
  }
  const int s = static_cast<int>(std::floor(t / segment_length()));
  return std::clamp(s, 0, segments() - 1);
}

Eigen::VectorXd ControlSchedule::at(double t) const {
  return values_.row(segment_at(t)).transpose();
}

double ControlSchedule::energy() const { return values_.squaredNorm() * segment_length(); }

Eigen::VectorXd ControlSchedule::flatten() const {
  Eigen::MatrixXd rowmajor = values_.transpose();
  return Eigen::Map<const Eigen::VectorXd>(rowmajor.data(), rowmajor.size());
}

ControlSchedule ControlSchedule::from_flat(std::vector<ModeIndex> modes, double T, int segments,
                                           const Eigen::VectorXd& flat) {
  const auto n = static_cast<Eigen::Index>(modes.size());
  if (flat.size() != segments * n) {
    throw std::invalid_argument("ControlSchedule::from_flat: size mismatch");
  }
  Eigen::MatrixXd v = Eigen::Map<const Eigen::MatrixXd>(flat.data(), n, segments).transpose();
  return ControlSchedule(std::move(modes), T, std::move(v));
}

}  // namespace llg
