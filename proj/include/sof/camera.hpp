#pragma once

#include <optional>

#include "sof/core.hpp"

namespace sof {

/// Right-handed pinhole camera, +z forward in view space.
struct Camera {
  Mat3 rotation = Mat3::Identity();  // world-to-view
  Vec3 translation = Vec3::Zero();   // x_view = R x_world + t
  double fx = 500.0, fy = 500.0;
  double cx = 250.0, cy = 250.0;
  int width = 500, height = 500;
  double near = 0.2;
  double far = 100.0;

  Vec3 to_view(const Vec3& x) const { return rotation * x + translation; }
  Vec3 center() const { return -rotation.transpose() * translation; }

  /// Pixel coordinates, or empty if the point is at/behind the camera plane.
  std::optional<Vec2> project(const Vec3& x) const {
    const Vec3 v = to_view(x);
    if (v.z() <= 0.0) return std::nullopt;
    return Vec2(fx * v.x() / v.z() + cx, fy * v.y() / v.z() + cy);
  }

  bool observes(const Vec3& x) const {
    const auto uv = project(x);
    if (!uv) return false;
    return uv->x() >= 0.0 && uv->x() < width && uv->y() >= 0.0 && uv->y() < height;
  }
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();  // unit length
};

/// World-space ray through the center of pixel (px, py).
inline Ray ray_through_pixel(const Camera& cam, double px, double py) {
  Ray r;
  r.origin = cam.center();
  const Vec3 d_view((px - cam.cx) / cam.fx, (py - cam.cy) / cam.fy, 1.0);
  r.direction = (cam.rotation.transpose() * d_view).normalized();
  return r;
}

/// Ray from the camera center through a world point; also returns the ray
/// parameter of the point.
inline Ray ray_through_point(const Camera& cam, const Vec3& x, double& t) {
  Ray r;
  r.origin = cam.center();
  const Vec3 delta = x - r.origin;
  t = delta.norm();
  r.direction = delta / t;
  return r;
}

/// Camera looking at `target` from `eye`, up along `up`.
inline Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up,
                      double fx, double fy, int width, int height) {
  Camera cam;
  const Vec3 fwd = (target - eye).normalized();
  Vec3 right = fwd.cross(up).normalized();
  const Vec3 down = fwd.cross(right);
  cam.rotation.row(0) = right.transpose();
  cam.rotation.row(1) = down.transpose();
  cam.rotation.row(2) = fwd.transpose();
  cam.translation = -cam.rotation * eye;
  cam.fx = fx;
  cam.fy = fy;
  cam.width = width;
  cam.height = height;
  cam.cx = width * 0.5;
  cam.cy = height * 0.5;
  return cam;
}

}  // namespace sof
