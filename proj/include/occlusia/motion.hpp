#pragma once

// Constant-velocity Kalman filter over box center, size and their
// velocities. State layout: [cx, cy, w, h, vcx, vcy, vw, vh].

#include <Eigen/Dense>
#include <algorithm>

#include "occlusia/core.hpp"

namespace occlusia {

struct KalmanParams {
  double sigma_process_pos = 1.0;   // per-frame process noise on cx, cy, vcx, vcy
  double sigma_process_size = 0.5;  // per-frame process noise on w, h, vw, vh
  double sigma_measure = 2.0;       // detector localization noise (pixels)
  double init_var_pos = 10.0;       // initial variance of position/size
  double init_var_vel = 100.0;      // initial variance of the velocities
};

struct MotionState {
  Eigen::Matrix<double, 8, 1> mean = Eigen::Matrix<double, 8, 1>::Zero();
  Eigen::Matrix<double, 8, 8> cov = Eigen::Matrix<double, 8, 8>::Zero();

  BoundingBox box() const {
    const double w = std::max(mean(2), 1.0);
    const double h = std::max(mean(3), 1.0);
    return BoundingBox::from_center(mean(0), mean(1), w, h);
  }
};

namespace detail {

inline Eigen::Matrix<double, 8, 8> kf_transition() {
  Eigen::Matrix<double, 8, 8> f = Eigen::Matrix<double, 8, 8>::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
  return f;
}

inline Eigen::Matrix<double, 8, 8> kf_process_noise(const KalmanParams& p) {
  Eigen::Matrix<double, 8, 1> d;
  const double qp = p.sigma_process_pos * p.sigma_process_pos;
  const double qs = p.sigma_process_size * p.sigma_process_size;
  d << qp, qp, qs, qs, qp, qp, qs, qs;
  return d.asDiagonal();
}

inline void kf_clamp_size(MotionState& s) {
  s.mean(2) = std::max(s.mean(2), 1.0);
  s.mean(3) = std::max(s.mean(3), 1.0);
}

}  // namespace detail

/// Fresh motion state centered on a detection. Velocities start at zero
/// with a wide prior so the first few updates can pull them anywhere.
inline MotionState kf_init(const BoundingBox& box, const KalmanParams& p = {}) {
  if (!box.valid()) throw SpecError("kf_init requires a box with positive size");
  MotionState s;
  s.mean << box.cx(), box.cy(), box.w, box.h, 0.0, 0.0, 0.0, 0.0;
  Eigen::Matrix<double, 8, 1> d;
  d << p.init_var_pos, p.init_var_pos, p.init_var_pos, p.init_var_pos,
      p.init_var_vel, p.init_var_vel, p.init_var_vel, p.init_var_vel;
  s.cov = d.asDiagonal();
  detail::kf_clamp_size(s);
  return s;
}

/// One constant-velocity time step.
inline MotionState kf_predict(const MotionState& s, const KalmanParams& p = {}) {
  const auto f = detail::kf_transition();
  MotionState out;
  out.mean = f * s.mean;
  out.cov = f * s.cov * f.transpose() + detail::kf_process_noise(p);
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  detail::kf_clamp_size(out);
  return out;
}

/// Measurement update with an observed box. Uses the Joseph form so the
/// covariance stays symmetric positive semidefinite over long runs.
inline MotionState kf_update(const MotionState& s, const BoundingBox& z,
                             const KalmanParams& p = {}) {
  if (!z.valid()) throw SpecError("kf_update requires a box with positive size");
  Eigen::Matrix<double, 4, 8> h = Eigen::Matrix<double, 4, 8>::Zero();
  h.leftCols<4>() = Eigen::Matrix4d::Identity();
  const Eigen::Matrix4d r =
      Eigen::Matrix4d::Identity() * (p.sigma_measure * p.sigma_measure);

  Eigen::Vector4d zv(z.cx(), z.cy(), z.w, z.h);
  const Eigen::Vector4d innov = zv - h * s.mean;
  // Tiny ridge keeps the innovation covariance invertible when both the
  // state covariance and R collapse to zero (fully converged noiseless
  // runs); it is ~12 orders below any physical noise level.
  const Eigen::Matrix4d cov_innov = h * s.cov * h.transpose() + r +
                                    Eigen::Matrix4d::Identity() * 1e-12;
  const Eigen::Matrix<double, 8, 4> gain =
      s.cov * h.transpose() * cov_innov.inverse();

  MotionState out;
  out.mean = s.mean + gain * innov;
  const Eigen::Matrix<double, 8, 8> ikh =
      Eigen::Matrix<double, 8, 8>::Identity() - gain * h;
  out.cov = ikh * s.cov * ikh.transpose() + gain * r * gain.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  detail::kf_clamp_size(out);
  return out;
}

}  // namespace occlusia
