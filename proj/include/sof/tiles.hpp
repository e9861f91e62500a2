#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "sof/camera.hpp"
#include "sof/precompute.hpp"

namespace sof {

inline constexpr int kDefaultTileSize = 16;
inline constexpr int kBlockSize = 256;

/// Point-to-tile assignment with depth-sorted keys and fixed-size work blocks.
struct TileSchedule {
  int tile_size = kDefaultTileSize;
  int tiles_x = 0, tiles_y = 0;
  std::vector<int> tile_assignment;       // per input point; -1 if dropped
  std::vector<int> order;                 // point indices sorted by (tile, depth)
  std::vector<std::pair<int, double>> sorted_keys;  // (tile_id, depth) per order entry
  std::vector<int> block_counts;          // per tile: ceil(N_P / 256)
  std::vector<int> block_to_tile;
  std::vector<std::pair<int, int>> block_ranges;  // [begin, end) into `order`
};

inline TileSchedule schedule_points(const std::vector<Vec3>& points, const Camera& cam,
                                    int tile_size = kDefaultTileSize,
                                    int block_size = kBlockSize) {
  TileSchedule s;
  s.tile_size = tile_size;
  s.tiles_x = (cam.width + tile_size - 1) / tile_size;
  s.tiles_y = (cam.height + tile_size - 1) / tile_size;
  s.tile_assignment.assign(points.size(), -1);

  struct Entry {
    int tile;
    double depth;
    int point;
  };
  std::vector<Entry> entries;
  entries.reserve(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    const Vec3 v = cam.to_view(points[i]);
    if (v.z() <= 0.0) continue;  // behind the camera
    const double px = cam.fx * v.x() / v.z() + cam.cx;
    const double py = cam.fy * v.y() / v.z() + cam.cy;
    if (px < 0.0 || px >= cam.width || py < 0.0 || py >= cam.height) continue;
    const int tile = int(py) / tile_size * s.tiles_x + int(px) / tile_size;
    s.tile_assignment[i] = tile;
    entries.push_back({tile, v.z(), int(i)});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& l, const Entry& r) {
    if (l.tile != r.tile) return l.tile < r.tile;
    if (l.depth != r.depth) return l.depth < r.depth;
    return l.point < r.point;
  });

  s.block_counts.assign(size_t(s.tiles_x) * s.tiles_y, 0);
  s.order.reserve(entries.size());
  s.sorted_keys.reserve(entries.size());
  for (const auto& e : entries) {
    s.order.push_back(e.point);
    s.sorted_keys.emplace_back(e.tile, e.depth);
  }
  size_t i = 0;
  while (i < entries.size()) {
    size_t j = i;
    while (j < entries.size() && entries[j].tile == entries[i].tile) ++j;
    const int tile = entries[i].tile;
    const int count = int(j - i);
    s.block_counts[tile] = (count + block_size - 1) / block_size;
    for (int b = 0; b < s.block_counts[tile]; ++b) {
      const int begin = int(i) + b * block_size;
      const int end = std::min(begin + block_size, int(j));
      s.block_to_tile.push_back(tile);
      s.block_ranges.emplace_back(begin, end);
    }
    i = j;
  }
  return s;
}

/// Per-tile Gaussian lists from conservative screen-space bounds of each
/// Gaussian's E-radius oriented box, sorted by min_z for early termination.
struct TileBinding {
  int tile_size = kDefaultTileSize;
  int tiles_x = 0, tiles_y = 0;
  std::vector<std::vector<int>> gaussians_per_tile;
};

inline TileBinding build_tile_binding(const std::vector<GaussianPrimitive>& gaussians,
                                      const std::vector<PrecomputedGaussian>& cache,
                                      const Camera& cam,
                                      int tile_size = kDefaultTileSize) {
  TileBinding b;
  b.tile_size = tile_size;
  b.tiles_x = (cam.width + tile_size - 1) / tile_size;
  b.tiles_y = (cam.height + tile_size - 1) / tile_size;
  b.gaussians_per_tile.assign(size_t(b.tiles_x) * b.tiles_y, {});

  for (size_t gi = 0; gi < gaussians.size(); ++gi) {
    const auto& g = gaussians[gi];
    const double r = cache[gi].tight_bound;
    if (r <= 0.0) continue;  // never reaches the render threshold
    const Mat3 rot = g.rotation.toRotationMatrix();
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    bool crosses_camera_plane = false;
    for (int mask = 0; mask < 8; ++mask) {
      const Vec3 local(r * g.scale.x() * ((mask & 1) ? 1 : -1),
                       r * g.scale.y() * ((mask & 2) ? 1 : -1),
                       r * g.scale.z() * ((mask & 4) ? 1 : -1));
      const Vec3 v = cam.to_view(g.position + rot * local);
      if (v.z() <= 1e-9) {
        crosses_camera_plane = true;
        break;
      }
      min_x = std::min(min_x, cam.fx * v.x() / v.z() + cam.cx);
      max_x = std::max(max_x, cam.fx * v.x() / v.z() + cam.cx);
      min_y = std::min(min_y, cam.fy * v.y() / v.z() + cam.cy);
      max_y = std::max(max_y, cam.fy * v.y() / v.z() + cam.cy);
    }
    int tx0 = 0, tx1 = b.tiles_x - 1, ty0 = 0, ty1 = b.tiles_y - 1;
    if (!crosses_camera_plane) {
      tx0 = std::max(0, int(std::floor(min_x)) / tile_size);
      tx1 = std::min(b.tiles_x - 1, int(std::floor(max_x)) / tile_size);
      ty0 = std::max(0, int(std::floor(min_y)) / tile_size);
      ty1 = std::min(b.tiles_y - 1, int(std::floor(max_y)) / tile_size);
      if (max_x < 0.0 || min_x >= cam.width || max_y < 0.0 || min_y >= cam.height)
        continue;  // fully off screen
    }
    for (int ty = ty0; ty <= ty1; ++ty)
      for (int tx = tx0; tx <= tx1; ++tx)
        b.gaussians_per_tile[size_t(ty) * b.tiles_x + tx].push_back(int(gi));
  }
  // sort each list by the minimal contributing depth
  for (auto& list : b.gaussians_per_tile) {
    std::sort(list.begin(), list.end(), [&](int l, int r) {
      if (cache[l].min_z != cache[r].min_z) return cache[l].min_z < cache[r].min_z;
      return l < r;
    });
  }
  return b;
}

struct WorkloadStats {
  double mean = 0.0;
  double variance = 0.0;
  std::vector<int> histogram;  // block populations
};

inline WorkloadStats workload_stats(const std::vector<int>& block_populations) {
  WorkloadStats s;
  s.histogram = block_populations;
  if (block_populations.empty()) return s;
  double sum = 0.0;
  for (int c : block_populations) sum += c;
  s.mean = sum / block_populations.size();
  double var = 0.0;
  for (int c : block_populations) var += (c - s.mean) * (c - s.mean);
  s.variance = var / block_populations.size();
  return s;
}

inline WorkloadStats schedule_workload_stats(const TileSchedule& s) {
  std::vector<int> pops;
  pops.reserve(s.block_ranges.size());
  for (const auto& [begin, end] : s.block_ranges) pops.push_back(end - begin);
  return workload_stats(pops);
}

/// Reference workload of per-pixel binning: one work unit per pixel of every
/// occupied tile, populations being the points projecting into that pixel.
inline WorkloadStats pixel_binning_stats(const std::vector<Vec3>& points,
                                         const Camera& cam,
                                         int tile_size = kDefaultTileSize) {
  std::unordered_map<std::int64_t, int> per_pixel;
  std::unordered_map<std::int64_t, bool> occupied_tiles;
  const int tiles_x = (cam.width + tile_size - 1) / tile_size;
  for (const auto& p : points) {
    const Vec3 v = cam.to_view(p);
    if (v.z() <= 0.0) continue;
    const double px = cam.fx * v.x() / v.z() + cam.cx;
    const double py = cam.fy * v.y() / v.z() + cam.cy;
    if (px < 0.0 || px >= cam.width || py < 0.0 || py >= cam.height) continue;
    per_pixel[std::int64_t(py) * cam.width + std::int64_t(px)]++;
    occupied_tiles[std::int64_t(py) / tile_size * tiles_x + std::int64_t(px) / tile_size] =
        true;
  }
  std::vector<int> pops;
  for (const auto& [tile, _] : occupied_tiles) {
    const int ty = int(tile / tiles_x), tx = int(tile % tiles_x);
    for (int y = ty * tile_size; y < std::min((ty + 1) * tile_size, cam.height); ++y)
      for (int x = tx * tile_size; x < std::min((tx + 1) * tile_size, cam.width); ++x) {
        auto it = per_pixel.find(std::int64_t(y) * cam.width + x);
        pops.push_back(it == per_pixel.end() ? 0 : it->second);
      }
  }
  std::sort(pops.begin(), pops.end());  // hash order must not leak into stats
  return workload_stats(pops);
}

}  // namespace sof
