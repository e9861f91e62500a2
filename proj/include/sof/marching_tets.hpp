#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "sof/delaunay.hpp"
#include "sof/mesh.hpp"

namespace sof {

/// One unique grid edge crossing the 0.5 iso-surface; `inside` has opacity
/// >= 0.5, `outside` below. Shared between tets, so each is refined once.
struct CrossingEdge {
  int inside = -1;
  int outside = -1;
};

struct MarchingResult {
  std::vector<CrossingEdge> edges;
  std::vector<Vec3> vertices;  // edges[i] places vertices[i], initially by lerp
  std::vector<std::array<int, 3>> triangles;
};

/// 16-case marching tetrahedra against the 0.5 iso-value. Triangles face
/// outward (away from the interior corners of their tet).
inline MarchingResult marching_tets(const TetGrid& grid) {
  MarchingResult out;
  std::unordered_map<std::uint64_t, int> edge_slot;
  auto edge_vertex = [&](int vi_in, int vi_out) {
    const std::uint64_t key =
        (std::uint64_t(std::uint32_t(vi_in)) << 32) | std::uint32_t(vi_out);
    auto [it, inserted] = edge_slot.emplace(key, int(out.edges.size()));
    if (inserted) {
      out.edges.push_back({vi_in, vi_out});
      const double oi = grid.opacity[vi_in], oo = grid.opacity[vi_out];
      const double s = (0.5 - oi) / (oo - oi);
      out.vertices.push_back(grid.vertices[vi_in] +
                             s * (grid.vertices[vi_out] - grid.vertices[vi_in]));
    }
    return it->second;
  };
  auto emit = [&](int e0, int e1, int e2, const Vec3& interior_ref) {
    const Vec3 &a = out.vertices[e0], &b = out.vertices[e1], &c = out.vertices[e2];
    const Vec3 n = (b - a).cross(c - a);
    if (n.dot((a + b + c) / 3.0 - interior_ref) >= 0.0)
      out.triangles.push_back({e0, e1, e2});
    else
      out.triangles.push_back({e0, e2, e1});
  };

  for (const auto& tet : grid.tetrahedra) {
    int inside[4], outside[4];
    int ni = 0, no = 0;
    for (int k = 0; k < 4; ++k) {
      if (grid.opacity[tet[k]] >= 0.5)
        inside[ni++] = tet[k];
      else
        outside[no++] = tet[k];
    }
    if (ni == 0 || ni == 4) continue;
    Vec3 interior_ref = Vec3::Zero();
    for (int k = 0; k < ni; ++k) interior_ref += grid.vertices[inside[k]];
    interior_ref /= ni;
    if (ni == 1) {
      emit(edge_vertex(inside[0], outside[0]), edge_vertex(inside[0], outside[1]),
           edge_vertex(inside[0], outside[2]), interior_ref);
    } else if (ni == 3) {
      emit(edge_vertex(inside[0], outside[0]), edge_vertex(inside[1], outside[0]),
           edge_vertex(inside[2], outside[0]), interior_ref);
    } else {
      // quad cycle ac - ad - bd - bc for inside {a,b}, outside {c,d}
      const int ac = edge_vertex(inside[0], outside[0]);
      const int ad = edge_vertex(inside[0], outside[1]);
      const int bd = edge_vertex(inside[1], outside[1]);
      const int bc = edge_vertex(inside[1], outside[0]);
      emit(ac, ad, bd, interior_ref);
      emit(ac, bd, bc, interior_ref);
    }
  }
  return out;
}

struct RefineStats {
  std::uint64_t bracket_lost = 0;  // endpoint re-check disagreed with the grid
};

/// Bisects each crossing edge toward the iso-surface, classifying midpoints
/// with `interior` (classification-only; early stopping is legal). The final
/// vertex is the midpoint of the last bracket, so positions depend only on
/// the classification outcomes. iterations=0 keeps the lerp positions.
inline RefineStats binary_search_refine(MarchingResult& m, const TetGrid& grid,
                                        const std::function<bool(const Vec3&)>& interior,
                                        int iterations = 8,
                                        bool verify_brackets = false) {
  RefineStats stats;
  for (size_t e = 0; e < m.edges.size(); ++e) {
    if (iterations <= 0) continue;
    Vec3 p_in = grid.vertices[m.edges[e].inside];
    Vec3 p_out = grid.vertices[m.edges[e].outside];
    if (verify_brackets && (!interior(p_in) || interior(p_out))) {
      ++stats.bracket_lost;
      continue;  // keep the lerp vertex
    }
    for (int it = 0; it < iterations; ++it) {
      const Vec3 mid = 0.5 * (p_in + p_out);
      (interior(mid) ? p_in : p_out) = mid;
    }
    m.vertices[e] = 0.5 * (p_in + p_out);
  }
  return stats;
}

/// Per-vertex |O(v) - 0.5| from an exact field value query.
inline std::vector<double> level_set_residuals(const MarchingResult& m,
                                               const std::function<double(const Vec3&)>& value) {
  std::vector<double> out(m.vertices.size());
  for (size_t i = 0; i < m.vertices.size(); ++i)
    out[i] = std::abs(value(m.vertices[i]) - 0.5);
  return out;
}

}  // namespace sof
