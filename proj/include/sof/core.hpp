#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>

namespace sof {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using Index = std::int64_t;

// A Gaussian whose alpha stays below 1/255 is never blended.
inline constexpr double kMinAlpha = 1.0 / 255.0;

// Alpha is clamped before compositing; prevents log singularities in the
// exact-depth solve when alpha -> 1.
inline constexpr double kMaxAlpha = 0.999;

inline constexpr double kNoSurface = std::numeric_limits<double>::quiet_NaN();

inline bool is_no_surface(double depth) { return std::isnan(depth); }

}  // namespace sof
