#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "sof/precompute.hpp"

namespace sof {

/// One Gaussian's sorted sample on a ray.
struct RayContribution {
  int gaussian_index = -1;
  double t_star = 0.0;  // ray parameter of maximum contribution
  double alpha = 0.0;   // opacity * peak value, clamped to [1/255, 0.999]
  double a = 0.0, b = 0.0, c = 0.0;
  double opacity = 0.0; // effective (filtered) opacity
};

struct ViewSet {
  std::vector<Camera> cameras;
  // caches[v][i] is the precomputation of Gaussian i for camera v
  std::vector<std::vector<PrecomputedGaussian>> caches;

  static ViewSet build(const std::vector<GaussianPrimitive>& gaussians,
                       std::vector<Camera> cams, double filter_scale = 0.0,
                       ZExtentMode z_mode = ZExtentMode::kDiagonal) {
    ViewSet vs;
    vs.cameras = std::move(cams);
    for (const auto& cam : vs.cameras)
      vs.caches.push_back(precompute_all(gaussians, cam, filter_scale, z_mode));
    return vs;
  }
};

/// All contributions with alpha >= 1/255 along the ray, sorted ascending by
/// the resort depth t*.
inline std::vector<RayContribution> collect_contributions(
    const std::vector<PrecomputedGaussian>& cache, const Ray& ray) {
  std::vector<RayContribution> out;
  for (size_t i = 0; i < cache.size(); ++i) {
    const auto& pc = cache[i];
    if (pc.filtered_opacity < kMinAlpha) continue;
    RayContribution rc;
    pc.abc_cached(ray.direction, rc.a, rc.b, rc.c);
    const double alpha = pc.filtered_opacity * peak_value(rc.a, rc.b, rc.c);
    if (alpha < kMinAlpha) continue;
    rc.gaussian_index = static_cast<int>(i);
    rc.t_star = peak_t(rc.a, rc.b);
    if (rc.t_star <= 0.0) continue;  // peak behind the ray origin
    rc.alpha = std::min(alpha, kMaxAlpha);
    rc.opacity = pc.filtered_opacity;
    out.push_back(rc);
  }
  std::sort(out.begin(), out.end(), [](const RayContribution& l, const RayContribution& r) {
    if (l.t_star != r.t_star) return l.t_star < r.t_star;
    return l.gaussian_index < r.gaussian_index;
  });
  return out;
}

/// Fixed-window approximate resort: contributions arrive in `order` (e.g.
/// view-space center depth) and leave through a K-slot min-heap window, the
/// limit K -> N being the exact sort.
inline std::vector<RayContribution> windowed_resort(std::vector<RayContribution> in,
                                                    size_t window) {
  if (window == 0 || window >= in.size()) {
    std::sort(in.begin(), in.end(),
              [](const RayContribution& l, const RayContribution& r) { return l.t_star < r.t_star; });
    return in;
  }
  auto cmp = [](const RayContribution& l, const RayContribution& r) { return l.t_star > r.t_star; };
  std::vector<RayContribution> heap, out;
  out.reserve(in.size());
  for (const auto& rc : in) {
    heap.push_back(rc);
    std::push_heap(heap.begin(), heap.end(), cmp);
    if (heap.size() > window) {
      std::pop_heap(heap.begin(), heap.end(), cmp);
      out.push_back(heap.back());
      heap.pop_back();
    }
  }
  while (!heap.empty()) {
    std::pop_heap(heap.begin(), heap.end(), cmp);
    out.push_back(heap.back());
    heap.pop_back();
  }
  return out;
}

/// Contribution of one sample at query parameter t: alpha evaluated at
/// min(t*, t), with the 1/255 render threshold applied.
inline double alpha_at(const RayContribution& rc, double t) {
  const double te = std::min(rc.t_star, t);
  if (te <= 0.0) return 0.0;
  const double a = rc.opacity * eval_1d(rc.a, rc.b, rc.c, te);
  if (a < kMinAlpha) return 0.0;
  return std::min(a, kMaxAlpha);
}

/// O_N(x) along the ray; order-independent product form.
inline double opacity_along_ray(const std::vector<RayContribution>& contribs, double t) {
  double transmittance = 1.0;
  for (const auto& rc : contribs) transmittance *= 1.0 - alpha_at(rc, t);
  return 1.0 - transmittance;
}

/// Minimum opacity of a world point over all views that observe it; 1 when
/// unobserved (interior by convention).
inline double opacity_at_point(const ViewSet& views, const Vec3& x) {
  double out = 1.0;
  for (size_t v = 0; v < views.cameras.size(); ++v) {
    const Camera& cam = views.cameras[v];
    if (!cam.observes(x)) continue;
    double t = 0.0;
    const Ray ray = ray_through_point(cam, x, t);
    const auto contribs = collect_contributions(views.caches[v], ray);
    out = std::min(out, opacity_along_ray(contribs, t));
  }
  return out;
}

struct MedianDepth {
  int index = -1;        // index into the contribution list
  double t_median = 0.0; // t* of the median Gaussian
  double transmittance = 1.0;  // T_i just before the median Gaussian
};

/// First Gaussian at which the transmittance crosses 0.5.
inline std::optional<MedianDepth> find_median(const std::vector<RayContribution>& contribs) {
  double transmittance = 1.0;
  for (size_t i = 0; i < contribs.size(); ++i) {
    const double next = transmittance * (1.0 - contribs[i].alpha);
    if (transmittance > 0.5 && next < 0.5) {
      return MedianDepth{static_cast<int>(i), contribs[i].t_star, transmittance};
    }
    transmittance = next;
  }
  return std::nullopt;
}

inline std::optional<double> median_depth(const std::vector<RayContribution>& contribs) {
  const auto m = find_median(contribs);
  if (!m) return std::nullopt;
  return m->t_median;
}

struct ExactDepthResult {
  double t = 0.0;
  bool fell_back = false;  // negative discriminant, returned the median depth
};

/// Depth at which the transmittance profile T_i (1 - o_i G(t)) reaches 0.5
/// inside the median Gaussian, always at or before its peak.
inline std::optional<ExactDepthResult> exact_depth(const std::vector<RayContribution>& contribs) {
  const auto m = find_median(contribs);
  if (!m) return std::nullopt;
  const RayContribution& rc = contribs[m->index];
  const double log_term =
      2.0 * std::log((m->transmittance - 0.5) / (m->transmittance * rc.opacity));
  const double disc = rc.b * rc.b - 4.0 * rc.a * (rc.c + log_term);
  if (disc < 0.0) return ExactDepthResult{m->t_median, true};
  return ExactDepthResult{m->t_median - std::sqrt(disc) / (2.0 * rc.a), false};
}

struct ExactDepthGradient {
  double d_a = 0.0, d_b = 0.0, d_c = 0.0;
};

/// Gradients of the exact-depth offset delta = t_exact - t_median w.r.t. the
/// median Gaussian's (A, B, C), with the transmittance and opacity detached.
/// Not propagated into any loss path; exposed for verification.
inline std::optional<ExactDepthGradient> exact_depth_gradient(
    const std::vector<RayContribution>& contribs) {
  const auto m = find_median(contribs);
  if (!m) return std::nullopt;
  const RayContribution& rc = contribs[m->index];
  const double k =
      rc.c + 2.0 * std::log((m->transmittance - 0.5) / (m->transmittance * rc.opacity));
  const double disc = rc.b * rc.b - 4.0 * rc.a * k;
  if (disc <= 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  ExactDepthGradient g;
  g.d_a = (rc.b * rc.b - 2.0 * rc.a * k) / (2.0 * rc.a * rc.a * root);
  g.d_b = -rc.b / (2.0 * rc.a * root);
  g.d_c = 1.0 / root;
  return g;
}

struct PixelOutputs {
  Vec3 color = Vec3::Zero();
  double depth = kNoSurface;
  double accumulated_opacity = 0.0;  // O_N at the depth
  double transmittance_final = 1.0;
};

enum class DepthMode { kMedian, kExact };

inline PixelOutputs render_pixel(const std::vector<RayContribution>& contribs,
                                 const std::vector<GaussianPrimitive>& gaussians,
                                 DepthMode mode = DepthMode::kExact) {
  PixelOutputs out;
  double transmittance = 1.0;
  for (const auto& rc : contribs) {
    out.color += gaussians[rc.gaussian_index].dc_color * rc.alpha * transmittance;
    transmittance *= 1.0 - rc.alpha;
  }
  out.transmittance_final = transmittance;
  if (mode == DepthMode::kMedian) {
    if (auto d = median_depth(contribs)) out.depth = *d;
  } else {
    if (auto d = exact_depth(contribs)) out.depth = d->t;
  }
  if (!is_no_surface(out.depth))
    out.accumulated_opacity = opacity_along_ray(contribs, out.depth);
  return out;
}

}  // namespace sof
