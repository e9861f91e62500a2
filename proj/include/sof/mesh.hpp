#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "sof/core.hpp"

namespace sof {

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<double> residuals;  // per-vertex |O - 0.5|, empty until computed
};

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

/// Signed volume via the divergence theorem; meaningful for closed meshes
/// with outward-facing triangles.
inline double mesh_signed_volume(const Mesh& m) {
  double v = 0.0;
  for (const auto& t : m.triangles) {
    const Vec3 &a = m.vertices[t[0]], &b = m.vertices[t[1]], &c = m.vertices[t[2]];
    v += a.dot(b.cross(c)) / 6.0;
  }
  return v;
}

/// Welds coincident vertices on a 1e-7 grid and drops degenerate triangles.
/// Output ordering follows first appearance, so fixed input gives fixed bytes.
inline Mesh assemble_mesh(const std::vector<Vec3>& vertices,
                          const std::vector<std::array<int, 3>>& triangles,
                          const std::vector<double>* residuals = nullptr,
                          double weld_eps = 1e-7, double min_area = 1e-14) {
  struct Key {
    std::int64_t x, y, z;
    bool operator==(const Key& o) const { return x == o.x && y == o.y && z == o.z; }
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      std::uint64_t h = 1469598103934665603ull;
      for (std::int64_t v : {k.x, k.y, k.z}) {
        h ^= std::uint64_t(v);
        h *= 1099511628211ull;
      }
      return size_t(h);
    }
  };
  Mesh out;
  std::unordered_map<Key, int, KeyHash> slot;
  std::vector<int> remap(vertices.size(), -1);
  const double inv = 1.0 / weld_eps;
  for (size_t i = 0; i < vertices.size(); ++i) {
    const Vec3& p = vertices[i];
    const Key k{std::int64_t(std::llround(p.x() * inv)),
                std::int64_t(std::llround(p.y() * inv)),
                std::int64_t(std::llround(p.z() * inv))};
    auto [it, inserted] = slot.emplace(k, int(out.vertices.size()));
    if (inserted) {
      out.vertices.push_back(p);
      if (residuals) out.residuals.push_back((*residuals)[i]);
    }
    remap[i] = it->second;
  }
  for (const auto& t : triangles) {
    const std::array<int, 3> r{remap[t[0]], remap[t[1]], remap[t[2]]};
    if (r[0] == r[1] || r[1] == r[2] || r[0] == r[2]) continue;
    if (triangle_area(out.vertices[r[0]], out.vertices[r[1]], out.vertices[r[2]]) <=
        min_area)
      continue;
    out.triangles.push_back(r);
  }
  return out;
}

}  // namespace sof
