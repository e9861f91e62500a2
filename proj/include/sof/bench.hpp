#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sof/extract.hpp"

namespace sof {

struct StageReport {
  std::string name;
  EvalStrategies strategies;
  std::uint64_t pairs = 0;
  double block_population_variance = 0.0;
  double seconds_label = 0.0;
  double seconds_per_refine_iteration = 0.0;
  size_t vertices_classified = 0;
  size_t mesh_vertices = 0;
};

inline constexpr const char* kBenchCaveat =
    "# CPU build: absolute timings are not comparable to GPU reports; "
    "pair counters and relative wall-clock only";

/// Cumulative strategy ablation in the order scheduling, min-z, early stop,
/// pruning. Every stage's mesh must classify identically to the naive stage
/// before anything is reported; correctness precedes speed.
inline std::vector<StageReport> run_ablation(
    const std::vector<GaussianPrimitive>& gaussians, const ViewSet& views,
    BoundingVariant bounding = BoundingVariant::kStp,
    SeedCutoff cutoff = SeedCutoff::kDeadGaussians, int refine_iterations = 8,
    int tile_size = kDefaultTileSize, ThreadPool* pool = nullptr) {
  using clock = std::chrono::steady_clock;

  struct Stage {
    const char* name;
    EvalStrategies s;
  };
  std::vector<Stage> stages;
  EvalStrategies s;
  stages.push_back({"naive", s});
  s.tile_scheduling = true;
  stages.push_back({"+scheduling", s});
  s.min_z = true;
  stages.push_back({"+min_z", s});
  s.early_stop = true;
  stages.push_back({"+early_stop", s});
  s.prune = true;
  stages.push_back({"+prune", s});

  // one grid for every stage; the comparison is over identical query points
  const SeedPointSet seeds = build_seed_points(gaussians, bounding, cutoff);
  const TetGrid base_grid = delaunay_tetrahedralize(seeds.points);

  std::vector<StageReport> reports;
  std::vector<bool> naive_labels;
  std::vector<Vec3> naive_vertices;
  for (const auto& stage : stages) {
    FieldEvaluator eval(gaussians, views, stage.s, tile_size);
    TetGrid grid = base_grid;

    const auto t0 = clock::now();
    eval.label_grid(grid, /*classify_mode=*/true, pool);
    const auto t1 = clock::now();
    MarchingResult march = marching_tets(grid);
    binary_search_refine(march, grid,
                         [&](const Vec3& x) { return eval.classify_point(x); },
                         refine_iterations);
    const auto t2 = clock::now();

    std::vector<bool> labels(grid.opacity.size());
    for (size_t i = 0; i < labels.size(); ++i) labels[i] = grid.opacity[i] >= 0.5;
    if (reports.empty()) {
      naive_labels = labels;
      naive_vertices = march.vertices;
    } else {
      if (labels != naive_labels)
        throw std::runtime_error("ablation stage " + std::string(stage.name) +
                                 " classifies differently from the naive path");
      if (march.vertices.size() != naive_vertices.size())
        throw std::runtime_error("ablation stage " + std::string(stage.name) +
                                 " produced a different crossing-edge set");
      for (size_t i = 0; i < march.vertices.size(); ++i)
        if ((march.vertices[i] - naive_vertices[i]).cwiseAbs().maxCoeff() > 1e-9)
          throw std::runtime_error("ablation stage " + std::string(stage.name) +
                                   " moved a refined vertex off the naive path");
    }

    StageReport r;
    r.name = stage.name;
    r.strategies = stage.s;
    r.pairs = eval.counters().pairs;
    r.vertices_classified = grid.vertices.size();
    r.mesh_vertices = march.vertices.size();
    r.seconds_label = std::chrono::duration<double>(t1 - t0).count();
    r.seconds_per_refine_iteration =
        refine_iterations > 0
            ? std::chrono::duration<double>(t2 - t1).count() / refine_iterations
            : 0.0;
    if (stage.s.tile_scheduling && !views.cameras.empty()) {
      double var = 0.0;
      for (const auto& cam : views.cameras)
        var += schedule_workload_stats(schedule_points(base_grid.vertices, cam, tile_size))
                   .variance;
      r.block_population_variance = var / views.cameras.size();
    }
    reports.push_back(r);
  }
  return reports;
}

inline void write_ablation_csv(const std::vector<StageReport>& reports,
                               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << kBenchCaveat << "\n";
  out << "stage,pairs,block_variance,seconds_label,seconds_per_refine_iter,"
         "vertices_classified,mesh_vertices\n";
  char buf[256];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%s,%llu,%.6g,%.6g,%.6g,%zu,%zu\n", r.name.c_str(),
                  static_cast<unsigned long long>(r.pairs), r.block_population_variance,
                  r.seconds_label, r.seconds_per_refine_iteration, r.vertices_classified,
                  r.mesh_vertices);
    out << buf;
  }
}

inline void print_ablation(const std::vector<StageReport>& reports, std::FILE* out) {
  std::fprintf(out, "%s\n", kBenchCaveat);
  std::fprintf(out, "%-14s %14s %14s %12s %12s\n", "stage", "pairs", "block_var",
               "label_s", "refine_s/it");
  for (const auto& r : reports)
    std::fprintf(out, "%-14s %14llu %14.4g %12.4g %12.4g\n", r.name.c_str(),
                 static_cast<unsigned long long>(r.pairs), r.block_population_variance,
                 r.seconds_label, r.seconds_per_refine_iteration);
}

}  // namespace sof
