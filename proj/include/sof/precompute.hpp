#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sof/camera.hpp"
#include "sof/gaussian.hpp"

namespace sof {

enum class ZExtentMode {
  kDiagonal,    // sqrt of the (z,z) entry of W Sigma W^T
  kEigenvalue,  // sqrt of the largest eigenvalue of W Sigma W^T
};

/// Per-(Gaussian, camera) cache for 1D ray evaluation: 10 values as in the
/// splatting preprocessing pass (6 for Sigma^-1, 3 for the B precursor, 1
/// for C), plus culling quantities.
struct PrecomputedGaussian {
  // Sigma^-1, upper triangle: xx, xy, xz, yy, yz, zz.
  std::array<double, 6> inv_cov{};
  Vec3 b_vec = Vec3::Zero();  // Sigma^-1 (o - mu)
  double c_scalar = 0.0;      // (o - mu)^T Sigma^-1 (o - mu)
  double tight_bound = 0.0;   // E_i, 0 for dead Gaussians
  double min_z = 0.0;         // minimal view-space depth of contribution
  double filtered_opacity = 0.0;

  Mat3 inv_cov_mat() const {
    Mat3 m;
    m << inv_cov[0], inv_cov[1], inv_cov[2],
         inv_cov[1], inv_cov[3], inv_cov[4],
         inv_cov[2], inv_cov[4], inv_cov[5];
    return m;
  }

  /// A = d^T Sigma^-1 d, B = 2 d^T b_vec, C = c_scalar.
  void abc_cached(const Vec3& d, double& a, double& b, double& c) const {
    const double x = d.x(), y = d.y(), z = d.z();
    a = inv_cov[0] * x * x + inv_cov[3] * y * y + inv_cov[5] * z * z +
        2.0 * (inv_cov[1] * x * y + inv_cov[2] * x * z + inv_cov[4] * y * z);
    b = 2.0 * d.dot(b_vec);
    c = c_scalar;
  }
};

/// View-space standard deviation of the Gaussian along the camera z-axis.
inline double z_extent_sigma(const GaussianPrimitive& g, const Camera& cam,
                             ZExtentMode mode) {
  const Mat3 cov_view = cam.rotation * covariance(g) * cam.rotation.transpose();
  if (mode == ZExtentMode::kDiagonal) return std::sqrt(cov_view(2, 2));
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov_view);
  return std::sqrt(es.eigenvalues().maxCoeff());
}

inline PrecomputedGaussian precompute(const GaussianPrimitive& g, const Camera& cam,
                                      double filter_scale = 0.0,
                                      ZExtentMode z_mode = ZExtentMode::kDiagonal) {
  if (!g.position.allFinite() || !g.scale.allFinite() ||
      !std::isfinite(g.opacity)) {
    throw std::invalid_argument("non-finite Gaussian parameters");
  }
  PrecomputedGaussian pc;
  const Mat3 r = g.rotation.toRotationMatrix();
  const Vec3 s = g.scale.cwiseMax(kMinScale);
  const Mat3 inv_cov =
      r * s.cwiseProduct(s).cwiseInverse().asDiagonal() * r.transpose();
  pc.inv_cov = {inv_cov(0, 0), inv_cov(0, 1), inv_cov(0, 2),
                inv_cov(1, 1), inv_cov(1, 2), inv_cov(2, 2)};
  const Vec3 delta = cam.center() - g.position;
  pc.b_vec = inv_cov * delta;
  pc.c_scalar = delta.dot(pc.b_vec);
  pc.filtered_opacity = filtered_opacity(g, filter_scale);
  pc.tight_bound = tight_bound(pc.filtered_opacity).value_or(0.0);
  pc.min_z = cam.to_view(g.position).z() - pc.tight_bound * z_extent_sigma(g, cam, z_mode);
  return pc;
}

inline std::vector<PrecomputedGaussian> precompute_all(
    const std::vector<GaussianPrimitive>& gaussians, const Camera& cam,
    double filter_scale = 0.0, ZExtentMode z_mode = ZExtentMode::kDiagonal) {
  std::vector<PrecomputedGaussian> out;
  out.reserve(gaussians.size());
  for (const auto& g : gaussians) out.push_back(precompute(g, cam, filter_scale, z_mode));
  return out;
}

}  // namespace sof
