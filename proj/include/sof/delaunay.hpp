#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sof/core.hpp"

namespace sof {

/// Seed points, Delaunay tetrahedra and per-vertex opacity labels.
struct TetGrid {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tetrahedra;
  std::vector<double> opacity;  // filled by field evaluation
};

namespace detail {

struct CachedTet {
  std::array<int, 4> v;
  Vec3 circumcenter;
  double radius_sq;
  bool alive = true;
};

/// Circumsphere of 4 points; returns false for (near-)degenerate tets.
inline bool circumsphere(const Vec3& p0, const Vec3& p1, const Vec3& p2,
                         const Vec3& p3, Vec3& center, double& radius_sq) {
  Mat3 m;
  m.row(0) = (p1 - p0).transpose();
  m.row(1) = (p2 - p0).transpose();
  m.row(2) = (p3 - p0).transpose();
  const double det = m.determinant();
  const double scale = m.cwiseAbs().maxCoeff();
  if (std::abs(det) < 1e-14 * scale * scale * scale) return false;
  const Vec3 rhs(0.5 * (p1.squaredNorm() - p0.squaredNorm()),
                 0.5 * (p2.squaredNorm() - p0.squaredNorm()),
                 0.5 * (p3.squaredNorm() - p0.squaredNorm()));
  center = m.partialPivLu().solve(rhs);
  radius_sq = (center - p0).squaredNorm();
  return true;
}

}  // namespace detail

/// Incremental Bowyer-Watson tetrahedralization. Cospherical ties are broken
/// by treating near-boundary points as outside the circumsphere, so the
/// empty-circumsphere property holds up to a relative 1e-9 slack.
inline TetGrid delaunay_tetrahedralize(const std::vector<Vec3>& points) {
  const size_t n = points.size();
  if (n < 4) throw std::invalid_argument("need at least 4 points");

  std::vector<Vec3> verts = points;
  Vec3 lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 center = 0.5 * (lo + hi);
  const double radius = std::max(0.5 * (hi - lo).norm(), 1.0);
  const double big = 1e4 * radius;
  verts.push_back(center + Vec3(0, 0, 3 * big));
  verts.push_back(center + Vec3(-2 * big, -big, -big));
  verts.push_back(center + Vec3(2 * big, -big, -big));
  verts.push_back(center + Vec3(0, 2 * big, -big));

  std::vector<detail::CachedTet> tets;
  auto add_tet = [&](int a, int b, int c, int d) {
    Mat3 m;
    m.row(0) = (verts[b] - verts[a]).transpose();
    m.row(1) = (verts[c] - verts[a]).transpose();
    m.row(2) = (verts[d] - verts[a]).transpose();
    if (m.determinant() < 0) std::swap(c, d);
    detail::CachedTet t;
    t.v = {a, b, c, d};
    if (!detail::circumsphere(verts[a], verts[b], verts[c], verts[d], t.circumcenter,
                              t.radius_sq))
      return;  // degenerate sliver; the cavity walls re-close around it
    tets.push_back(t);
  };
  add_tet(int(n), int(n + 1), int(n + 2), int(n + 3));

  std::vector<size_t> bad;
  std::vector<std::array<int, 3>> faces;
  for (size_t pi = 0; pi < n; ++pi) {
    const Vec3& p = verts[pi];
    bad.clear();
    faces.clear();
    for (size_t ti = 0; ti < tets.size(); ++ti) {
      if (!tets[ti].alive) continue;
      const double d2 = (p - tets[ti].circumcenter).squaredNorm();
      if (d2 < tets[ti].radius_sq * (1.0 - 1e-12) - 1e-30) bad.push_back(ti);
    }
    for (size_t ti : bad) {
      const auto& v = tets[ti].v;
      faces.push_back({v[0], v[1], v[2]});
      faces.push_back({v[0], v[1], v[3]});
      faces.push_back({v[0], v[2], v[3]});
      faces.push_back({v[1], v[2], v[3]});
      tets[ti].alive = false;
    }
    // boundary faces of the cavity appear exactly once
    auto key = [](std::array<int, 3> f) {
      std::sort(f.begin(), f.end());
      return f;
    };
    for (size_t i = 0; i < faces.size(); ++i) {
      bool unique = true;
      for (size_t j = 0; j < faces.size(); ++j) {
        if (i != j && key(faces[i]) == key(faces[j])) {
          unique = false;
          break;
        }
      }
      if (unique) add_tet(int(pi), faces[i][0], faces[i][1], faces[i][2]);
    }
    // periodic compaction keeps the scan linear in live tets
    if (tets.size() > 4 * n + 1024) {
      std::vector<detail::CachedTet> live;
      live.reserve(tets.size());
      for (auto& t : tets)
        if (t.alive) live.push_back(t);
      tets.swap(live);
    }
  }

  TetGrid grid;
  grid.vertices = points;
  for (const auto& t : tets) {
    if (!t.alive) continue;
    if (t.v[0] >= int(n) || t.v[1] >= int(n) || t.v[2] >= int(n) || t.v[3] >= int(n))
      continue;
    grid.tetrahedra.push_back(t.v);
  }
  if (grid.tetrahedra.empty())
    throw std::invalid_argument("degenerate (coplanar) point set");
  grid.opacity.assign(grid.vertices.size(), 0.0);
  return grid;
}

/// Brute-force empty-circumsphere audit; O(tets * points), test oracle.
inline bool delaunay_property_holds(const TetGrid& grid, double tol = 1e-9) {
  for (const auto& t : grid.tetrahedra) {
    Vec3 c;
    double r2;
    if (!detail::circumsphere(grid.vertices[t[0]], grid.vertices[t[1]],
                              grid.vertices[t[2]], grid.vertices[t[3]], c, r2))
      return false;
    const double slack = tol * (1.0 + r2);
    for (size_t i = 0; i < grid.vertices.size(); ++i) {
      if (int(i) == t[0] || int(i) == t[1] || int(i) == t[2] || int(i) == t[3]) continue;
      if ((grid.vertices[i] - c).squaredNorm() < r2 - slack) return false;
    }
  }
  return true;
}

}  // namespace sof
