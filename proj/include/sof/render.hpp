#pragma once

#include <vector>

#include "sof/opacity_field.hpp"
#include "sof/thread_pool.hpp"

namespace sof {

template <typename T>
struct Grid2D {
  int width = 0, height = 0;
  std::vector<T> data;

  Grid2D() = default;
  Grid2D(int w, int h, T fill = T{}) : width(w), height(h), data(size_t(w) * h, fill) {}
  T& at(int x, int y) { return data[size_t(y) * width + x]; }
  const T& at(int x, int y) const { return data[size_t(y) * width + x]; }
};

struct DepthMap {
  Grid2D<double> depth;        // kNoSurface where transmittance never drops below 0.5
  Grid2D<double> opacity;      // accumulated opacity at the depth (0 if none)
};

inline DepthMap render_depth_map(const std::vector<PrecomputedGaussian>& cache,
                                 const Camera& cam, DepthMode mode,
                                 ThreadPool* pool = nullptr) {
  DepthMap out;
  out.depth = Grid2D<double>(cam.width, cam.height, kNoSurface);
  out.opacity = Grid2D<double>(cam.width, cam.height, 0.0);
  auto render_row = [&](int y) {
    for (int x = 0; x < cam.width; ++x) {
      const Ray ray = ray_through_pixel(cam, x + 0.5, y + 0.5);
      const auto contribs = collect_contributions(cache, ray);
      if (mode == DepthMode::kMedian) {
        if (auto d = median_depth(contribs)) out.depth.at(x, y) = *d;
      } else {
        if (auto d = exact_depth(contribs)) out.depth.at(x, y) = d->t;
      }
      if (!is_no_surface(out.depth.at(x, y)))
        out.opacity.at(x, y) = opacity_along_ray(contribs, out.depth.at(x, y));
    }
  };
  if (pool) {
    pool->parallel_for(0, cam.height, render_row);
  } else {
    for (int y = 0; y < cam.height; ++y) render_row(y);
  }
  return out;
}

struct NormalMap {
  Grid2D<Vec3> normal;
  Grid2D<unsigned char> valid;
};

/// Per-pixel normals from back-projected forward differences of the depth
/// map, oriented toward the camera.
inline NormalMap normal_from_depth(const Grid2D<double>& depth, const Camera& cam) {
  NormalMap out;
  out.normal = Grid2D<Vec3>(depth.width, depth.height, Vec3::Zero());
  out.valid = Grid2D<unsigned char>(depth.width, depth.height, 0);
  // explicit Vec3: a deduced Eigen expression would dangle on the local ray
  auto backproject = [&](int x, int y) -> Vec3 {
    const Ray ray = ray_through_pixel(cam, x + 0.5, y + 0.5);
    return ray.origin + depth.at(x, y) * ray.direction;
  };
  for (int y = 0; y + 1 < depth.height; ++y) {
    for (int x = 0; x + 1 < depth.width; ++x) {
      if (is_no_surface(depth.at(x, y)) || is_no_surface(depth.at(x + 1, y)) ||
          is_no_surface(depth.at(x, y + 1)))
        continue;
      const Vec3 p = backproject(x, y);
      const Vec3 dx = backproject(x + 1, y) - p;
      const Vec3 dy = backproject(x, y + 1) - p;
      Vec3 n = dx.cross(dy);
      const double len = n.norm();
      if (len < 1e-14) continue;
      n /= len;
      const Vec3 view_dir = (p - cam.center()).normalized();
      if (n.dot(view_dir) > 0.0) n = -n;
      out.normal.at(x, y) = n;
      out.valid.at(x, y) = 1;
    }
  }
  return out;
}

/// Normal of one Gaussian at the point o + t d: the normalized negative
/// density gradient, flipped to face the camera. Falls back to the
/// shortest-scale axis when the gradient vanishes at the center.
inline Vec3 gaussian_normal(const GaussianPrimitive& g, const Ray& ray, double t) {
  const Vec3 x = ray.origin + t * ray.direction;
  const Mat3 r = g.rotation.toRotationMatrix();
  const Vec3 s = g.scale.cwiseMax(kMinScale);
  const Mat3 inv_cov = r * s.cwiseProduct(s).cwiseInverse().asDiagonal() * r.transpose();
  Vec3 n = inv_cov * (x - g.position);  // direction of -grad(density)
  if (n.norm() < 1e-12) {
    int axis = 0;
    g.scale.minCoeff(&axis);
    n = r.col(axis);
  }
  n.normalize();
  if (n.dot(ray.direction) > 0.0) n = -n;
  return n;
}

}  // namespace sof
