#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "sof/delaunay.hpp"
#include "sof/opacity_field.hpp"
#include "sof/thread_pool.hpp"
#include "sof/tiles.hpp"

namespace sof {

struct EvalStrategies {
  bool tile_scheduling = false;
  bool min_z = false;
  bool early_stop = false;
  bool prune = false;
  bool dead_cull = false;

  static EvalStrategies naive() { return {}; }
  static EvalStrategies all() { return {true, true, true, true, true}; }
};

struct EvalCounters {
  std::uint64_t pairs = 0;             // (point, Gaussian) alpha evaluations
  std::uint64_t point_view_evals = 0;  // per-view point evaluations
  std::uint64_t exact_depth_fallbacks = 0;
};

struct PointLabel {
  double opacity = 1.0;  // min over views; lower bound when early-stopped
  bool interior = true;
};

/// Evaluates the multi-view opacity field O(x) = min_v O_N over a set of
/// query points, with each performance strategy independently toggleable so
/// the naive exhaustive path remains available as an oracle.
class FieldEvaluator {
 public:
  FieldEvaluator(const std::vector<GaussianPrimitive>& gaussians, const ViewSet& views,
                 EvalStrategies strategies, int tile_size = kDefaultTileSize)
      : gaussians_(&gaussians),
        views_(&views),
        strategies_(strategies),
        tile_size_(tile_size) {
    if (strategies_.tile_scheduling) {
      for (size_t v = 0; v < views.cameras.size(); ++v)
        bindings_.push_back(build_tile_binding(gaussians, views.caches[v],
                                               views.cameras[v], tile_size));
    }
  }

  const EvalStrategies& strategies() const { return strategies_; }

  /// O_N(x) from view v. `complete` is false when accumulation stopped early
  /// (classification mode only); `observed` is false when the view does not
  /// see x, in which case the returned value is meaningless.
  double view_opacity(size_t v, const Vec3& x, bool classify_mode, bool& observed,
                      bool& complete) const {
    const Camera& cam = views_->cameras[v];
    observed = cam.observes(x);
    complete = true;
    if (!observed) return 1.0;
    double t = 0.0;
    const Ray ray = ray_through_point(cam, x, t);
    if (t < 1e-12) {
      observed = false;
      return 1.0;
    }
    const double z_point = cam.to_view(x).z();
    const auto& cache = views_->caches[v];
    point_view_evals_.fetch_add(1, std::memory_order_relaxed);

    const std::vector<int>* list = nullptr;
    if (strategies_.tile_scheduling) {
      const auto& binding = bindings_[v];
      const auto uv = cam.project(x);
      const int tile = int(uv->y()) / tile_size_ * binding.tiles_x + int(uv->x()) / tile_size_;
      list = &binding.gaussians_per_tile[tile];
    }
    const size_t count = list ? list->size() : cache.size();

    double survive = 1.0;
    std::uint64_t pairs = 0;
    for (size_t k = 0; k < count; ++k) {
      const int gi = list ? (*list)[k] : int(k);
      const auto& pc = cache[gi];
      if (strategies_.dead_cull && pc.filtered_opacity < kMinAlpha) continue;
      if (strategies_.min_z && pc.min_z > z_point) {
        if (list) break;  // list is sorted by min_z
        continue;
      }
      ++pairs;
      double a, b, c;
      pc.abc_cached(ray.direction, a, b, c);
      const double t_star = peak_t(a, b);
      const double te = std::min(t_star, t);
      if (te <= 0.0) continue;
      double alpha = pc.filtered_opacity * eval_1d(a, b, c, te);
      if (alpha < kMinAlpha) continue;
      alpha = std::min(alpha, kMaxAlpha);
      survive *= 1.0 - alpha;
      if (classify_mode && strategies_.early_stop && 1.0 - survive > 0.5) {
        complete = false;
        break;
      }
    }
    pairs_.fetch_add(pairs, std::memory_order_relaxed);
    return 1.0 - survive;
  }

  /// Interior test (O(x) >= 0.5) for refinement queries.
  bool classify_point(const Vec3& x) const {
    bool interior = true;
    for (size_t v = 0; v < views_->cameras.size(); ++v) {
      bool observed = false, complete = true;
      const double o = view_opacity(v, x, /*classify_mode=*/true, observed, complete);
      if (observed && complete && o < 0.5) {
        interior = false;
        if (strategies_.prune) break;  // min over views can only stay below 0.5
      }
    }
    return interior;
  }

  /// Exact field value; requires early_stop to be disabled.
  double value_at(const Vec3& x) const {
    double out = 1.0;
    for (size_t v = 0; v < views_->cameras.size(); ++v) {
      bool observed = false, complete = true;
      const double o = view_opacity(v, x, /*classify_mode=*/false, observed, complete);
      if (observed) out = std::min(out, o);
    }
    return out;
  }

  /// Labels every grid vertex. Views are processed sequentially so pruning
  /// state carries over; within a view, points are independent work items.
  void label_grid(TetGrid& grid, bool classify_mode, ThreadPool* pool = nullptr) const {
    const size_t n = grid.vertices.size();
    std::vector<double> min_opacity(n, 1.0);
    std::vector<std::uint8_t> exterior(n, 0);

    for (size_t v = 0; v < views_->cameras.size(); ++v) {
      auto eval_point = [&](int i) {
        if (strategies_.prune && exterior[i]) return;
        bool observed = false, complete = true;
        const double o =
            view_opacity(v, grid.vertices[i], classify_mode, observed, complete);
        if (!observed) return;
        min_opacity[i] = std::min(min_opacity[i], o);
        if (complete && o < 0.5) exterior[i] = 1;
      };
      if (strategies_.tile_scheduling) {
        const TileSchedule sched =
            schedule_points(grid.vertices, views_->cameras[v], tile_size_);
        auto run_block = [&](int blk) {
          const auto [begin, end] = sched.block_ranges[blk];
          for (int k = begin; k < end; ++k) eval_point(sched.order[k]);
        };
        if (pool)
          pool->parallel_for(0, int(sched.block_ranges.size()), run_block);
        else
          for (int blk = 0; blk < int(sched.block_ranges.size()); ++blk) run_block(blk);
      } else {
        if (pool)
          pool->parallel_for(0, int(n), eval_point);
        else
          for (int i = 0; i < int(n); ++i) eval_point(i);
      }
    }
    grid.opacity.assign(n, 0.0);
    for (size_t i = 0; i < n; ++i)
      grid.opacity[i] = exterior[i] ? std::min(min_opacity[i], 0.49999999) : min_opacity[i];
  }

  EvalCounters counters() const {
    EvalCounters c;
    c.pairs = pairs_.load();
    c.point_view_evals = point_view_evals_.load();
    return c;
  }

  void reset_counters() const {
    pairs_.store(0);
    point_view_evals_.store(0);
  }

 private:
  const std::vector<GaussianPrimitive>* gaussians_;
  const ViewSet* views_;
  EvalStrategies strategies_;
  int tile_size_;
  std::vector<TileBinding> bindings_;
  mutable std::atomic<std::uint64_t> pairs_{0};
  mutable std::atomic<std::uint64_t> point_view_evals_{0};
};

}  // namespace sof
