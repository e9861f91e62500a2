#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sof/opacity_field.hpp"
#include "sof/render.hpp"

namespace sof {

struct LossWeights {
  double lambda_dist_unbounded = 100.0;
  double lambda_dist_bounded = 1000.0;
  double lambda_normal = 0.05;
  double lambda_ext = 0.1;
  double lambda_opa = 0.04;
  double lambda_smooth = 0.01;
  int activation_iteration = 15000;

  double lambda_dist(bool scene_bounded) const {
    return scene_bounded ? lambda_dist_bounded : lambda_dist_unbounded;
  }
};

/// d = f(t-n) / (t(f-n)); maps [near, far] to [0, 1].
inline double ndc_map(double t, double near, double far) {
  if (t <= 0.0) throw std::invalid_argument("ndc_map requires t > 0");
  return far * (t - near) / (t * (far - near));
}

inline double ndc_derivative(double t, double near, double far) {
  if (t <= 0.0) throw std::invalid_argument("ndc_map requires t > 0");
  return far * near / ((far - near) * t * t);
}

// ---------------------------------------------------------------------------
// Distortion loss, Sum_ij w_i w_j (d_i - d_j)^2 over all ordered pairs.
// Forward uses the prefix-accumulator reformulation; the backward pass runs
// strictly front-to-back, peeling the suffix sums off the full-ray totals.
// ---------------------------------------------------------------------------

struct DistortionSample {
  double alpha = 0.0;  // in [1/255, 0.999]
  double t = 0.0;      // resort depth t*
};

struct DistortionResult {
  double loss = 0.0;
  std::vector<double> d_alpha;  // empty when w is detached
  std::vector<double> d_t;
};

inline DistortionResult distortion_loss(const std::vector<DistortionSample>& samples,
                                        double near, double far,
                                        bool attach_w = true) {
  const size_t n = samples.size();
  DistortionResult out;
  out.d_t.assign(n, 0.0);
  if (attach_w) out.d_alpha.assign(n, 0.0);
  if (n == 0) return out;

  std::vector<double> w(n), d(n), trans(n);
  double transmittance = 1.0;
  for (size_t i = 0; i < n; ++i) {
    if (samples[i].t <= 0.0) {
      // peak behind the camera; nothing to map into NDC
      w[i] = 0.0;
      d[i] = 0.0;
      trans[i] = transmittance;
      continue;
    }
    trans[i] = transmittance;
    w[i] = samples[i].alpha * transmittance;
    d[i] = ndc_map(samples[i].t, near, far);
    transmittance *= 1.0 - samples[i].alpha;
  }

  // forward: single pass over prefix accumulators
  double pa = 0.0, pd = 0.0, pdd = 0.0;
  for (size_t i = 0; i < n; ++i) {
    out.loss += 2.0 * w[i] * (d[i] * d[i] * pa + pdd - 2.0 * d[i] * pd);
    pa += w[i];
    pd += w[i] * d[i];
    pdd += w[i] * d[i] * d[i];
  }
  const double full_a = pa, full_d = pd, full_dd = pdd;

  // backward: front-to-back, suffix sums by subtraction
  pa = pd = pdd = 0.0;
  for (size_t k = 0; k < n; ++k) {
    if (samples[k].t <= 0.0) continue;
    const double gw = 2.0 * (d[k] * d[k] * full_a + full_dd - 2.0 * d[k] * full_d);
    out.d_t[k] = 4.0 * w[k] * (d[k] * full_a - full_d) * ndc_derivative(samples[k].t, near, far);
    pa += w[k];
    pd += w[k] * d[k];
    pdd += w[k] * d[k] * d[k];
    if (attach_w) {
      // Sum_{i>k} w_i dL/dw_i, from the full totals minus the prefix
      const double suffix = 2.0 * (full_a * (full_dd - pdd) + full_dd * (full_a - pa) -
                                   2.0 * full_d * (full_d - pd));
      const double denom = 1.0 - samples[k].alpha;
      out.d_alpha[k] = trans[k] * gw - (denom > 0.0 ? suffix / denom : 0.0);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Depth-normal consistency, Sum_i w_i (1 - n_i . N).
// ---------------------------------------------------------------------------

struct DepthNormalResult {
  double loss = 0.0;
  std::vector<double> d_w;
  std::vector<Vec3> d_n;
};

inline DepthNormalResult depth_normal_loss(const std::vector<double>& w,
                                           const std::vector<Vec3>& normals,
                                           const Vec3& pixel_normal) {
  DepthNormalResult out;
  const size_t n = w.size();
  out.d_w.assign(n, 0.0);
  out.d_n.assign(n, Vec3::Zero());
  for (size_t i = 0; i < n; ++i) {
    const double mis = 1.0 - normals[i].dot(pixel_normal);
    out.loss += w[i] * mis;
    out.d_w[i] = mis;
    out.d_n[i] = -w[i] * pixel_normal;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Extent loss: NDC-linearized per-Gaussian visible extent, alpha-blended.
// L = fn/(f-n) * Sum_i w_i * 2A sqrt(B^2 - 4A(C - E^2)) / B^2
// ---------------------------------------------------------------------------

struct ExtentSample {
  double w = 0.0;
  double a = 0.0, b = 0.0, c = 0.0;
  double bound = 0.0;  // E_i
};

struct ExtentResult {
  double loss = 0.0;
  std::vector<double> d_a, d_b, d_c, d_w;
  int skipped = 0;  // samples with empty visible segment or singular B
};

inline ExtentResult extent_loss(const std::vector<ExtentSample>& samples,
                                double near, double far) {
  ExtentResult out;
  const size_t n = samples.size();
  out.d_a.assign(n, 0.0);
  out.d_b.assign(n, 0.0);
  out.d_c.assign(n, 0.0);
  out.d_w.assign(n, 0.0);
  const double scale = far * near / (far - near);
  for (size_t i = 0; i < n; ++i) {
    const auto& s = samples[i];
    const double b2 = s.b * s.b;
    const double shifted_c = s.c - s.bound * s.bound;
    const double disc = b2 - 4.0 * s.a * shifted_c;
    if (disc <= 0.0 || std::abs(s.b) < 1e-12) {
      ++out.skipped;
      continue;
    }
    const double root = std::sqrt(disc);
    const double g = 2.0 * s.a * root / b2;
    out.loss += scale * s.w * g;
    out.d_w[i] = scale * g;
    out.d_a[i] = scale * s.w * (2.0 * root / b2 - 4.0 * s.a * shifted_c / (b2 * root));
    out.d_b[i] = scale * s.w * (2.0 * s.a / (b2 * s.b)) * (b2 / root - 2.0 * root);
    out.d_c[i] = scale * s.w * (-4.0 * s.a * s.a / (b2 * root));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Direct opacity-field supervision: || O_N(o + t* d) - 0.5 ||^2 at the exact
// (or median) depth. O_N is assembled as O_k + T_k * suffix, where the suffix
// is accumulated in the pass that finds the depth and the prefix in a second
// truncated pass.
// ---------------------------------------------------------------------------

struct OpacitySupervisionResult {
  double loss = 0.0;
  double field_value = 0.0;
  bool defined = false;
  std::vector<double> d_alpha;  // w.r.t. the per-Gaussian alphas at the depth
};

inline OpacitySupervisionResult opacity_supervision_loss(
    const std::vector<RayContribution>& contribs, double depth) {
  OpacitySupervisionResult out;
  const auto m = find_median(contribs);
  if (!m || is_no_surface(depth)) return out;
  const size_t k = size_t(m->index);
  const size_t n = contribs.size();

  // suffix from the median index, as accumulated once the depth is known
  double suffix = 0.0, tau = 1.0;
  for (size_t i = k; i < n; ++i) {
    const double a = alpha_at(contribs[i], depth);
    suffix += a * tau;
    tau *= 1.0 - a;
  }
  // truncated prefix pass, reusing the preprocessed (A, B, C)
  double prefix = 0.0, transmittance = 1.0;
  for (size_t i = 0; i < k; ++i) {
    const double a = alpha_at(contribs[i], depth);
    prefix += a * transmittance;
    transmittance *= 1.0 - a;
  }
  out.field_value = prefix + transmittance * suffix;
  const double residual = out.field_value - 0.5;
  out.loss = residual * residual;
  out.defined = true;

  out.d_alpha.assign(n, 0.0);
  const double survive = (1.0 - out.field_value);  // product of (1 - a_i)
  for (size_t i = 0; i < n; ++i) {
    const double a = alpha_at(contribs[i], depth);
    out.d_alpha[i] = 2.0 * residual * survive / (1.0 - a);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normal smoothness: mean |grad N| exp(-|grad I|) with forward differences.
// ---------------------------------------------------------------------------

enum class ImageGradientMode { kLuminance, kPerChannel };

struct NormalSmoothnessResult {
  double loss = 0.0;
  Grid2D<Vec3> d_normal;
  int pixels_used = 0;
};

inline double luminance(const Vec3& rgb) {
  return 0.299 * rgb.x() + 0.587 * rgb.y() + 0.114 * rgb.z();
}

inline NormalSmoothnessResult normal_smoothness_loss(
    const NormalMap& normals, const Grid2D<Vec3>& image,
    ImageGradientMode mode = ImageGradientMode::kLuminance) {
  if (normals.normal.width != image.width || normals.normal.height != image.height)
    throw std::invalid_argument("normal map and image resolution mismatch");
  NormalSmoothnessResult out;
  out.d_normal = Grid2D<Vec3>(image.width, image.height, Vec3::Zero());
  double sum = 0.0;
  int used = 0;
  for (int y = 0; y + 1 < image.height; ++y) {
    for (int x = 0; x + 1 < image.width; ++x) {
      if (!normals.valid.at(x, y) || !normals.valid.at(x + 1, y) ||
          !normals.valid.at(x, y + 1))
        continue;
      const Vec3 gx = normals.normal.at(x + 1, y) - normals.normal.at(x, y);
      const Vec3 gy = normals.normal.at(x, y + 1) - normals.normal.at(x, y);
      const double norm_n = std::sqrt(gx.squaredNorm() + gy.squaredNorm());

      double grad_i;
      if (mode == ImageGradientMode::kLuminance) {
        const double ix = luminance(image.at(x + 1, y)) - luminance(image.at(x, y));
        const double iy = luminance(image.at(x, y + 1)) - luminance(image.at(x, y));
        grad_i = std::sqrt(ix * ix + iy * iy);
      } else {
        const Vec3 ix = image.at(x + 1, y) - image.at(x, y);
        const Vec3 iy = image.at(x, y + 1) - image.at(x, y);
        grad_i = std::sqrt(ix.squaredNorm() + iy.squaredNorm());
      }
      const double weight = std::exp(-grad_i);
      sum += norm_n * weight;
      ++used;
      if (norm_n > 1e-14) {
        const Vec3 dgx = weight * gx / norm_n;
        const Vec3 dgy = weight * gy / norm_n;
        out.d_normal.at(x + 1, y) += dgx;
        out.d_normal.at(x, y + 1) += dgy;
        out.d_normal.at(x, y) -= dgx + dgy;
      }
    }
  }
  out.pixels_used = used;
  if (used > 0) {
    out.loss = sum / used;
    for (auto& v : out.d_normal.data) v /= used;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Total loss
// ---------------------------------------------------------------------------

struct LossTerms {
  double rgb = 0.0;  // mean absolute color error
  double distortion = 0.0;
  double normal = 0.0;
  double extent = 0.0;
  double opacity = 0.0;
  double smoothness = 0.0;
};

inline double l1_rgb_loss(const Grid2D<Vec3>& rendered, const Grid2D<Vec3>& reference) {
  if (rendered.width != reference.width || rendered.height != reference.height)
    throw std::invalid_argument("image resolution mismatch");
  double sum = 0.0;
  for (size_t i = 0; i < rendered.data.size(); ++i)
    sum += (rendered.data[i] - reference.data[i]).cwiseAbs().sum();
  return rendered.data.empty() ? 0.0 : sum / (3.0 * rendered.data.size());
}

/// Auxiliary losses are gated off before the activation iteration.
inline double total_loss(const LossTerms& terms, const LossWeights& weights,
                         int iteration, bool scene_bounded) {
  if (iteration < weights.activation_iteration) return terms.rgb;
  return terms.rgb + weights.lambda_dist(scene_bounded) * terms.distortion +
         weights.lambda_normal * terms.normal + weights.lambda_ext * terms.extent +
         weights.lambda_opa * terms.opacity + weights.lambda_smooth * terms.smoothness;
}

}  // namespace sof
