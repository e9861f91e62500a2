#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "sof/core.hpp"

namespace sof {

/// One anisotropic 3D Gaussian with activated (world-space) parameters.
struct GaussianPrimitive {
  Vec3 position = Vec3::Zero();
  Vec3 scale = Vec3::Ones();    // per-axis standard deviations, > 0
  Quat rotation = Quat::Identity();
  double opacity = 1.0;         // in [0, 1]
  Vec3 dc_color = Vec3::Zero(); // degree-0 color, in [0, 1]
};

inline constexpr double kMinScale = 1e-8;

/// Sigma = R S S^T R^T.
inline Mat3 covariance(const GaussianPrimitive& g) {
  const Mat3 r = g.rotation.toRotationMatrix();
  return r * g.scale.cwiseProduct(g.scale).asDiagonal() * r.transpose();
}

/// Maps a world-space ray into the Gaussian's unit-isotropic frame.
/// o_g = S^-1 R^T (o - mu), d_g = S^-1 R^T d.
inline void ray_to_gaussian_space(const Vec3& origin, const Vec3& direction,
                                  const GaussianPrimitive& g, Vec3& o_g, Vec3& d_g) {
  const Mat3 rt = g.rotation.toRotationMatrix().transpose();
  const Vec3 inv_s = g.scale.cwiseMax(kMinScale).cwiseInverse();
  o_g = inv_s.cwiseProduct(rt * (origin - g.position));
  d_g = inv_s.cwiseProduct(rt * direction);
}

/// A = d_g.d_g, B = 2 d_g.o_g, C = o_g.o_g. The 1D contribution along the
/// ray is exp(-(A t^2 + B t + C)/2).
inline void abc(const Vec3& o_g, const Vec3& d_g, double& a, double& b, double& c) {
  if (d_g.squaredNorm() == 0.0) throw std::invalid_argument("degenerate ray");
  a = d_g.dot(d_g);
  b = 2.0 * d_g.dot(o_g);
  c = o_g.dot(o_g);
}

inline double eval_1d(double a, double b, double c, double t) {
  return std::exp(-0.5 * ((a * t + b) * t + c));
}

/// Ray parameter of maximum contribution; identical to the resort depth.
inline double peak_t(double a, double b) { return -b / (2.0 * a); }

inline double peak_value(double a, double b, double c) {
  return std::exp(-0.5 * (c - b * b / (4.0 * a)));
}

/// Mahalanobis radius beyond which alpha falls below 1/255.
/// Empty when the Gaussian can never reach the render threshold.
inline std::optional<double> tight_bound(double opacity) {
  if (opacity < kMinAlpha) return std::nullopt;
  const double v = 2.0 * std::log(255.0 * opacity);
  return std::sqrt(std::max(v, 0.0));
}

/// Opacity with the 3D low-pass filter applied: o * sqrt(|S| / |S + sI|).
inline double filtered_opacity(const GaussianPrimitive& g, double filter_scale) {
  if (filter_scale <= 0.0) return g.opacity;
  const Mat3 cov = covariance(g);
  const double det = cov.determinant();
  const double det_f = (cov + filter_scale * Mat3::Identity()).determinant();
  return g.opacity * std::sqrt(det / det_f);
}

}  // namespace sof
