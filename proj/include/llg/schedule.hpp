#pragma once

#include "llg/spectral.hpp"

#include <Eigen/Dense>

#include <vector>

namespace llg {

/// Minimal generating set {(0,1), (0,2), (1,1)}.
std::vector<ModeIndex> default_control_modes();

/// Piecewise-constant amplitudes v_k^l(t) on S equal segments of [0, T].
/// values(s, c) is the amplitude of modes[c] on segment s.
class ControlSchedule {
 public:
  ControlSchedule() = default;
  ControlSchedule(std::vector<ModeIndex> modes, double T, Eigen::MatrixXd values);

  static ControlSchedule Zero(std::vector<ModeIndex> modes, double T, int segments);
  /// Constant-in-time amplitudes.
  static ControlSchedule Constant(std::vector<ModeIndex> modes, double T,
                                  const Eigen::VectorXd& amplitudes);

  const std::vector<ModeIndex>& modes() const { return modes_; }
  double T() const { return T_; }
  int segments() const { return static_cast<int>(values_.rows()); }
  double segment_length() const { return T_ / segments(); }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

  /// Segment containing t; t = T belongs to the last segment.
  int segment_at(double t) const;
  /// Amplitudes at time t. Throws std::out_of_range outside [0, T].
  Eigen::VectorXd at(double t) const;

  /// Sum over modes of the time integral of v^2.
  double energy() const;

  /// Flattened (segment-major) parameter vector, for optimizers.
  Eigen::VectorXd flatten() const;
  static ControlSchedule from_flat(std::vector<ModeIndex> modes, double T, int segments,
                                   const Eigen::VectorXd& flat);

 private:
  std::vector<ModeIndex> modes_;
  double T_ = 1.0;
  Eigen::MatrixXd values_ = Eigen::MatrixXd::Zero(1, 0);
};

}  // namespace llg
