#pragma once

#include <chrono>

#include "sof/field_eval.hpp"
#include "sof/marching_tets.hpp"
#include "sof/mesh.hpp"
#include "sof/seed_points.hpp"

namespace sof {

struct ExtractOptions {
  BoundingVariant bounding = BoundingVariant::kStp;
  SeedCutoff cutoff = SeedCutoff::kDeadGaussians;
  EvalStrategies strategies = EvalStrategies::all();
  int refine_iterations = 8;
  int tile_size = kDefaultTileSize;
  double filter_scale = 0.0;
  bool compute_residuals = false;  // needs exact field values, extra cost
};

struct ExtractStats {
  size_t seed_points = 0;
  size_t tetrahedra = 0;
  size_t crossing_edges = 0;
  EvalCounters counters;
  RefineStats refine;
  double seconds_seed = 0.0;
  double seconds_delaunay = 0.0;
  double seconds_label = 0.0;
  double seconds_march = 0.0;
  double seconds_refine = 0.0;
};

inline Mesh extract_mesh(const std::vector<GaussianPrimitive>& gaussians,
                         const ViewSet& views, const ExtractOptions& opt,
                         ExtractStats* stats = nullptr, ThreadPool* pool = nullptr) {
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };

  auto t0 = clock::now();
  // The grid is shared by every strategy subset: the dead-Gaussian seed cull
  // changes where vertices sit, not how they are classified, so it is part of
  // the grid, not of the per-subset evaluation.
  const SeedPointSet seeds =
      build_seed_points(gaussians, opt.bounding, opt.cutoff, opt.filter_scale);
  auto t1 = clock::now();
  TetGrid grid = delaunay_tetrahedralize(seeds.points);
  auto t2 = clock::now();

  FieldEvaluator eval(gaussians, views, opt.strategies, opt.tile_size);
  grid.opacity.assign(grid.vertices.size(), 1.0);
  eval.label_grid(grid, /*classify_mode=*/true, pool);
  auto t3 = clock::now();

  MarchingResult march = marching_tets(grid);
  auto t4 = clock::now();
  const RefineStats refine = binary_search_refine(
      march, grid, [&](const Vec3& x) { return eval.classify_point(x); },
      opt.refine_iterations);
  auto t5 = clock::now();

  std::vector<double> residuals;
  if (opt.compute_residuals) {
    FieldEvaluator exact(gaussians, views, EvalStrategies::naive(), opt.tile_size);
    residuals = level_set_residuals(march, [&](const Vec3& x) { return exact.value_at(x); });
  }

  Mesh mesh = assemble_mesh(march.vertices, march.triangles,
                            opt.compute_residuals ? &residuals : nullptr);
  if (stats) {
    stats->seed_points = seeds.points.size();
    stats->tetrahedra = grid.tetrahedra.size();
    stats->crossing_edges = march.edges.size();
    stats->counters = eval.counters();
    stats->refine = refine;
    stats->seconds_seed = seconds(t0, t1);
    stats->seconds_delaunay = seconds(t1, t2);
    stats->seconds_label = seconds(t2, t3);
    stats->seconds_march = seconds(t3, t4);
    stats->seconds_refine = seconds(t4, t5);
  }
  return mesh;
}

}  // namespace sof
