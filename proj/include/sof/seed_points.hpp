#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "sof/gaussian.hpp"

namespace sof {

enum class BoundingVariant {
  kStp,        // opacity-adaptive radius E_i
  kThreeSigma, // fixed 3
  kStretchedSigma,  // fixed 3.33, the o=1 limit of the adaptive bound
};

enum class SeedCutoff { kNone, kDeadGaussians };  // drop filtered opacity < 1/255

enum class SeedProvenance : std::uint8_t { kCenter, kBoundCorner };

struct SeedPointSet {
  std::vector<Vec3> points;
  std::vector<SeedProvenance> provenance;
};

inline double bounding_radius(double effective_opacity, BoundingVariant variant) {
  switch (variant) {
    case BoundingVariant::kThreeSigma:
      return 3.0;
    case BoundingVariant::kStretchedSigma:
      return 3.33;
    case BoundingVariant::kStp:
    default:
      return tight_bound(effective_opacity).value_or(0.0);
  }
}

/// Gaussian centers plus the 8 corners of each oriented bounding box,
/// deduplicated on a 1e-9 grid.
inline SeedPointSet build_seed_points(const std::vector<GaussianPrimitive>& gaussians,
                                      BoundingVariant variant,
                                      SeedCutoff cutoff = SeedCutoff::kNone,
                                      double filter_scale = 0.0) {
  SeedPointSet out;
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
  std::unordered_map<Key, int, KeyHash> seen;
  auto push = [&](const Vec3& p, SeedProvenance prov) {
    if (!p.allFinite()) return;
    const Key k{std::int64_t(std::llround(p.x() * 1e9)),
                std::int64_t(std::llround(p.y() * 1e9)),
                std::int64_t(std::llround(p.z() * 1e9))};
    if (!seen.emplace(k, int(out.points.size())).second) return;
    out.points.push_back(p);
    out.provenance.push_back(prov);
  };

  for (const auto& g : gaussians) {
    const double eff = filtered_opacity(g, filter_scale);
    if (cutoff == SeedCutoff::kDeadGaussians && eff < kMinAlpha) continue;
    push(g.position, SeedProvenance::kCenter);
    const double r = bounding_radius(eff, variant);
    if (r <= 0.0) continue;
    const Mat3 rot = g.rotation.toRotationMatrix();
    for (int mask = 0; mask < 8; ++mask) {
      const Vec3 local(r * g.scale.x() * ((mask & 1) ? 1 : -1),
                       r * g.scale.y() * ((mask & 2) ? 1 : -1),
                       r * g.scale.z() * ((mask & 4) ? 1 : -1));
      push(g.position + rot * local, SeedProvenance::kBoundCorner);
    }
  }
  if (out.points.empty()) throw std::runtime_error("no live Gaussians");
  return out;
}

}  // namespace sof
