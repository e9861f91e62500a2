#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "sof/field_eval.hpp"
#include "sof/losses.hpp"
#include "sof/seed_points.hpp"
#include "sof/tiles.hpp"

namespace sof {

struct RunConfig {
  LossWeights weights;
  double near = 0.2;
  double far = 100.0;
  DepthMode depth_mode = DepthMode::kExact;
  BoundingVariant bounding = BoundingVariant::kStp;
  SeedCutoff cutoff = SeedCutoff::kDeadGaussians;
  EvalStrategies strategies = EvalStrategies::all();
  int tile_size = kDefaultTileSize;
  int block_size = kBlockSize;
  int refine_iterations = 8;
  double filter_scale = 0.0;
  int threads = 1;
  std::uint64_t seed = 0;
  bool scene_bounded = false;
};

inline std::string to_string(DepthMode m) {
  return m == DepthMode::kExact ? "exact" : "median";
}
inline std::string to_string(BoundingVariant b) {
  switch (b) {
    case BoundingVariant::kThreeSigma: return "3sigma";
    case BoundingVariant::kStretchedSigma: return "3.33sigma";
    default: return "stp";
  }
}

inline void validate(const RunConfig& c) {
  if (c.near <= 0.0 || c.far <= c.near)
    throw std::runtime_error("config error: need 0 < near < far");
  if (c.tile_size <= 0) throw std::runtime_error("config error: tile_size must be positive");
  if (c.block_size <= 0) throw std::runtime_error("config error: block_size must be positive");
  if (c.refine_iterations < 0)
    throw std::runtime_error("config error: refine_iterations must be non-negative");
  if (c.threads < 1) throw std::runtime_error("config error: threads must be >= 1");
  if (c.filter_scale < 0.0)
    throw std::runtime_error("config error: filter_scale must be non-negative");
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["weights"] = {{"lambda_dist_unbounded", c.weights.lambda_dist_unbounded},
                  {"lambda_dist_bounded", c.weights.lambda_dist_bounded},
                  {"lambda_normal", c.weights.lambda_normal},
                  {"lambda_ext", c.weights.lambda_ext},
                  {"lambda_opa", c.weights.lambda_opa},
                  {"lambda_smooth", c.weights.lambda_smooth},
                  {"activation_iteration", c.weights.activation_iteration}};
  j["near"] = c.near;
  j["far"] = c.far;
  j["depth_mode"] = to_string(c.depth_mode);
  j["bounding"] = to_string(c.bounding);
  j["cutoff"] = c.cutoff == SeedCutoff::kDeadGaussians ? "dead" : "none";
  j["strategies"] = {{"tile_scheduling", c.strategies.tile_scheduling},
                     {"min_z", c.strategies.min_z},
                     {"early_stop", c.strategies.early_stop},
                     {"prune", c.strategies.prune},
                     {"dead_cull", c.strategies.dead_cull}};
  j["tile_size"] = c.tile_size;
  j["block_size"] = c.block_size;
  j["refine_iterations"] = c.refine_iterations;
  j["filter_scale"] = c.filter_scale;
  j["threads"] = c.threads;
  j["seed"] = c.seed;
  j["scene_bounded"] = c.scene_bounded;
  return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    if (j.contains("weights")) {
      const auto& w = j["weights"];
      auto get = [&](const char* k, double& dst) {
        if (w.contains(k)) dst = w[k].get<double>();
      };
      get("lambda_dist_unbounded", c.weights.lambda_dist_unbounded);
      get("lambda_dist_bounded", c.weights.lambda_dist_bounded);
      get("lambda_normal", c.weights.lambda_normal);
      get("lambda_ext", c.weights.lambda_ext);
      get("lambda_opa", c.weights.lambda_opa);
      get("lambda_smooth", c.weights.lambda_smooth);
      if (w.contains("activation_iteration"))
        c.weights.activation_iteration = w["activation_iteration"].get<int>();
    }
    if (j.contains("near")) c.near = j["near"].get<double>();
    if (j.contains("far")) c.far = j["far"].get<double>();
    if (j.contains("depth_mode")) {
      const std::string m = j["depth_mode"].get<std::string>();
      if (m == "exact")
        c.depth_mode = DepthMode::kExact;
      else if (m == "median")
        c.depth_mode = DepthMode::kMedian;
      else
        throw std::runtime_error("config error: depth_mode must be exact|median");
    }
    if (j.contains("bounding")) {
      const std::string b = j["bounding"].get<std::string>();
      if (b == "stp")
        c.bounding = BoundingVariant::kStp;
      else if (b == "3sigma")
        c.bounding = BoundingVariant::kThreeSigma;
      else if (b == "3.33sigma")
        c.bounding = BoundingVariant::kStretchedSigma;
      else
        throw std::runtime_error("config error: bounding must be stp|3sigma|3.33sigma");
    }
    if (j.contains("cutoff")) {
      const std::string x = j["cutoff"].get<std::string>();
      if (x == "dead")
        c.cutoff = SeedCutoff::kDeadGaussians;
      else if (x == "none")
        c.cutoff = SeedCutoff::kNone;
      else
        throw std::runtime_error("config error: cutoff must be dead|none");
    }
    if (j.contains("strategies")) {
      const auto& s = j["strategies"];
      auto get = [&](const char* k, bool& dst) {
        if (s.contains(k)) dst = s[k].get<bool>();
      };
      get("tile_scheduling", c.strategies.tile_scheduling);
      get("min_z", c.strategies.min_z);
      get("early_stop", c.strategies.early_stop);
      get("prune", c.strategies.prune);
      get("dead_cull", c.strategies.dead_cull);
    }
    if (j.contains("tile_size")) c.tile_size = j["tile_size"].get<int>();
    if (j.contains("block_size")) c.block_size = j["block_size"].get<int>();
    if (j.contains("refine_iterations"))
      c.refine_iterations = j["refine_iterations"].get<int>();
    if (j.contains("filter_scale")) c.filter_scale = j["filter_scale"].get<double>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("scene_bounded")) c.scene_bounded = j["scene_bounded"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("config error: ") + e.what());
  }
  validate(c);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("config error: ") + e.what());
  }
  return config_from_json(j);
}

inline void save_config(const RunConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config: " + path);
  out << to_json(c).dump(2) << "\n";
}

}  // namespace sof
