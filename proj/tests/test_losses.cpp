#include <gtest/gtest.h>

#include <random>

#include "sof/gradcheck.hpp"
#include "sof/losses.hpp"
#include "test_util.hpp"

using namespace sof;

namespace {

// Inverse of the NDC map: the t whose mapped depth is d.
double ndc_inverse(double d, double near, double far) {
  return far * near / (far - d * (far - near));
}

// Quadratic-time reference for the distortion loss and its gradients,
// computed back-to-front from explicit weights.
DistortionResult distortion_reference(const std::vector<DistortionSample>& s,
                                      double near, double far) {
  const size_t n = s.size();
  std::vector<double> w(n), d(n), trans(n);
  double transmittance = 1.0;
  for (size_t i = 0; i < n; ++i) {
    trans[i] = transmittance;
    w[i] = s[i].alpha * transmittance;
    d[i] = ndc_map(s[i].t, near, far);
    transmittance *= 1.0 - s[i].alpha;
  }
  DistortionResult out;
  out.d_alpha.assign(n, 0.0);
  out.d_t.assign(n, 0.0);
  std::vector<double> dL_dw(n, 0.0), dL_dd(n, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      const double diff = d[i] - d[j];
      out.loss += w[i] * w[j] * diff * diff;
      dL_dw[i] += 2.0 * w[j] * diff * diff;  // both orderings of the pair
      dL_dd[i] += 4.0 * w[i] * w[j] * diff;
    }
  for (size_t k = 0; k < n; ++k) {
    out.d_t[k] = dL_dd[k] * ndc_derivative(s[k].t, near, far);
    double acc = dL_dw[k] * trans[k];  // direct dependence
    for (size_t i = k + 1; i < n; ++i)
      acc -= dL_dw[i] * w[i] / (1.0 - s[k].alpha);  // through transmittance
    out.d_alpha[k] = acc;
  }
  return out;
}

}  // namespace

TEST(NdcMap, Examples) {
  EXPECT_NEAR(ndc_map(0.2, 0.2, 100.0), 0.0, 1e-12);
  EXPECT_NEAR(ndc_map(100.0, 0.2, 100.0), 1.0, 1e-12);
  EXPECT_NEAR(ndc_map(1.0, 0.2, 100.0), 0.80160, 1e-5);
  EXPECT_THROW(ndc_map(0.0, 0.2, 100.0), std::invalid_argument);
  EXPECT_THROW(ndc_derivative(-1.0, 0.2, 100.0), std::invalid_argument);
}

TEST(NdcMap, DerivativeMatchesFiniteDifference) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(0.3, 50.0);
  for (int i = 0; i < 100; ++i) {
    const double t = u(rng), h = 1e-6;
    const double fd = (ndc_map(t + h, 0.2, 100.0) - ndc_map(t - h, 0.2, 100.0)) / (2 * h);
    EXPECT_NEAR(ndc_derivative(t, 0.2, 100.0), fd, 1e-7);
  }
}

TEST(Distortion, ConstantDepthIsZero) {
  const double t = ndc_inverse(0.5, 0.2, 100.0);
  const auto res = distortion_loss({{0.3, t}, {0.4, t}, {0.2, t}}, 0.2, 100.0);
  EXPECT_NEAR(res.loss, 0.0, 1e-15);
  for (double g : res.d_t) EXPECT_NEAR(g, 0.0, 1e-12);
}

TEST(Distortion, TwoSampleExample) {
  // weights (0.5, 0.5) at mapped depths (0.2, 0.8): L = 2 * 0.25 * 0.36 = 0.18
  const double t1 = ndc_inverse(0.2, 0.2, 100.0);
  const double t2 = ndc_inverse(0.8, 0.2, 100.0);
  // second weight 0.5 needs alpha = 1 under transmittance 0.5
  const auto res = distortion_loss({{0.5, t1}, {1.0, t2}}, 0.2, 100.0);
  EXPECT_NEAR(res.loss, 0.18, 1e-12);
}

TEST(Distortion, ForwardEqualsDirectDoubleSum) {
  std::mt19937 rng(32);
  std::uniform_real_distribution<double> ua(0.02, 0.9), ut(0.5, 40.0);
  for (int c = 0; c < 100; ++c) {
    std::vector<DistortionSample> s(1 + int(rng() % 32));
    for (auto& x : s) x = {ua(rng), ut(rng)};
    std::sort(s.begin(), s.end(),
              [](const DistortionSample& l, const DistortionSample& r) { return l.t < r.t; });
    const auto fast = distortion_loss(s, 0.2, 100.0);
    const auto ref = distortion_reference(s, 0.2, 100.0);
    EXPECT_NEAR(fast.loss, ref.loss, 1e-10 * std::max(1.0, ref.loss));
  }
}

TEST(Distortion, StreamingBackwardEqualsQuadraticReference) {
  std::mt19937 rng(33);
  std::uniform_real_distribution<double> ua(0.02, 0.9), ut(0.5, 40.0);
  for (int c = 0; c < 100; ++c) {
    std::vector<DistortionSample> s(1 + int(rng() % 64));
    for (auto& x : s) x = {ua(rng), ut(rng)};
    std::sort(s.begin(), s.end(),
              [](const DistortionSample& l, const DistortionSample& r) { return l.t < r.t; });
    const auto fast = distortion_loss(s, 0.2, 100.0);
    const auto ref = distortion_reference(s, 0.2, 100.0);
    for (size_t k = 0; k < s.size(); ++k) {
      EXPECT_NEAR(fast.d_alpha[k], ref.d_alpha[k],
                  1e-12 * std::max(1.0, std::abs(ref.d_alpha[k])));
      EXPECT_NEAR(fast.d_t[k], ref.d_t[k], 1e-12 * std::max(1.0, std::abs(ref.d_t[k])));
    }
  }
}

TEST(Distortion, DetachFlagDropsAlphaGradients) {
  const auto res = distortion_loss({{0.5, 1.0}, {0.5, 2.0}}, 0.2, 100.0, false);
  EXPECT_TRUE(res.d_alpha.empty());
  EXPECT_EQ(res.d_t.size(), 2u);
}

TEST(DepthNormal, Examples) {
  const Vec3 N(0, 0, 1);
  EXPECT_NEAR(depth_normal_loss({1.0}, {N}, N).loss, 0.0, 1e-15);
  EXPECT_NEAR(depth_normal_loss({1.0}, {Vec3(0, 0, -1)}, N).loss, 2.0, 1e-12);
  EXPECT_NEAR(depth_normal_loss({0.5, 0.25}, {N, Vec3(1, 0, 0)}, N).loss, 0.25, 1e-12);
}

TEST(Extent, PlugInExample) {
  ExtentSample s;
  s.w = 1.0;
  s.a = 1.0;
  s.b = -10.0;
  s.c = 25.0;
  s.bound = *tight_bound(1.0);  // E^2 = 2 ln 255
  const auto res = extent_loss({s}, 0.2, 100.0);
  EXPECT_EQ(res.skipped, 0);
  EXPECT_NEAR(res.loss, 0.026686, 1e-5);
}

TEST(Extent, EmptyVisibleSegmentSkipped) {
  // E = 0 with the ray through the center: B^2 = 4AC exactly
  ExtentSample s;
  s.w = 1.0;
  s.a = 1.0;
  s.b = -10.0;
  s.c = 25.0;
  s.bound = 0.0;
  const auto res = extent_loss({s}, 0.2, 100.0);
  EXPECT_EQ(res.skipped, 1);
  EXPECT_NEAR(res.loss, 0.0, 1e-15);
}

TEST(Extent, MonotoneInPhysicalExtent) {
  // doubling all scales quarters (A, B, C) in Gaussian space
  ExtentSample s;
  s.w = 1.0;
  s.a = 1.0;
  s.b = -10.0;
  s.c = 25.5;
  s.bound = *tight_bound(0.9);
  ExtentSample bigger = s;
  bigger.a = s.a / 4.0;
  bigger.b = s.b / 4.0;
  bigger.c = s.c / 4.0;
  const double small_loss = extent_loss({s}, 0.2, 100.0).loss;
  const double big_loss = extent_loss({bigger}, 0.2, 100.0).loss;
  EXPECT_GT(big_loss, small_loss);
}

TEST(OpacitySupervision, ExactDepthGivesHalf) {
  Camera cam;
  GaussianPrimitive g;
  g.position = Vec3(0, 0, 5);
  const auto contribs =
      collect_contributions(precompute_all({g}, cam), Ray{cam.center(), Vec3(0, 0, 1)});
  const auto d = exact_depth(contribs);
  ASSERT_TRUE(d.has_value());
  const auto res = opacity_supervision_loss(contribs, d->t);
  ASSERT_TRUE(res.defined);
  EXPECT_NEAR(res.field_value, 0.5, 1e-9);
  EXPECT_NEAR(res.loss, 0.0, 1e-15);
}

TEST(OpacitySupervision, MedianDepthSingleOpaque) {
  Camera cam;
  GaussianPrimitive g;
  g.position = Vec3(0, 0, 5);
  const auto contribs =
      collect_contributions(precompute_all({g}, cam), Ray{cam.center(), Vec3(0, 0, 1)});
  const auto res = opacity_supervision_loss(contribs, *median_depth(contribs));
  ASSERT_TRUE(res.defined);
  // alpha clamp keeps this marginally below the ideal 1.0 / 0.25
  EXPECT_NEAR(res.field_value, 1.0, 0.0015);
  EXPECT_NEAR(res.loss, 0.25, 0.0015);
}

TEST(OpacitySupervision, TwoPassEqualsSinglePass) {
  std::mt19937 rng(34);
  int checked = 0;
  while (checked < 100) {
    const auto contribs = tu::random_contributions(rng, 8);
    const auto d = exact_depth(contribs);
    if (!d) continue;
    const auto res = opacity_supervision_loss(contribs, d->t);
    if (!res.defined) continue;
    EXPECT_NEAR(res.field_value, opacity_along_ray(contribs, d->t), 1e-12);
    ++checked;
  }
}

TEST(OpacitySupervision, NoSurfaceIsZero) {
  const auto res = opacity_supervision_loss({tu::flat_contribution(0.2, 3.0)}, kNoSurface);
  EXPECT_FALSE(res.defined);
  EXPECT_DOUBLE_EQ(res.loss, 0.0);
}

TEST(NormalSmoothness, ConstantMapIsZero) {
  NormalMap nm;
  nm.normal = Grid2D<Vec3>(8, 8, Vec3(0, 0, -1));
  nm.valid = Grid2D<unsigned char>(8, 8, 1);
  const Grid2D<Vec3> image(8, 8, Vec3(0.5, 0.5, 0.5));
  EXPECT_NEAR(normal_smoothness_loss(nm, image).loss, 0.0, 1e-15);
}

TEST(NormalSmoothness, FlatImageEqualsTotalVariation) {
  NormalMap nm;
  nm.normal = Grid2D<Vec3>(4, 4, Vec3(0, 0, -1));
  nm.valid = Grid2D<unsigned char>(4, 4, 1);
  for (int y = 0; y < 4; ++y)
    for (int x = 2; x < 4; ++x) nm.normal.at(x, y) = Vec3(0, 0, 1);
  const Grid2D<Vec3> image(4, 4, Vec3(0.5, 0.5, 0.5));
  const auto res = normal_smoothness_loss(nm, image);
  // 3 crossing pixels at x=1, each contributing |dN| = 2, averaged over 9
  EXPECT_NEAR(res.loss, 3.0 * 2.0 / 9.0, 1e-12);
}

TEST(NormalSmoothness, ImageEdgeDampens) {
  NormalMap nm;
  nm.normal = Grid2D<Vec3>(4, 4, Vec3(0, 0, -1));
  nm.valid = Grid2D<unsigned char>(4, 4, 1);
  for (int y = 0; y < 4; ++y)
    for (int x = 2; x < 4; ++x) nm.normal.at(x, y) = Vec3(0, 0, 1);
  Grid2D<Vec3> flat(4, 4, Vec3(0.5, 0.5, 0.5));
  Grid2D<Vec3> edged = flat;
  for (int y = 0; y < 4; ++y)
    for (int x = 2; x < 4; ++x) edged.at(x, y) = Vec3(1, 1, 1);
  EXPECT_LT(normal_smoothness_loss(nm, edged).loss, normal_smoothness_loss(nm, flat).loss);
}

TEST(NormalSmoothness, GradientMatchesFiniteDifference) {
  std::mt19937 rng(35);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  NormalMap nm;
  nm.normal = Grid2D<Vec3>(4, 4);
  nm.valid = Grid2D<unsigned char>(4, 4, 1);
  Grid2D<Vec3> image(4, 4);
  for (auto& v : nm.normal.data) v = Vec3(u(rng), u(rng), u(rng));
  for (auto& v : image.data) v = Vec3(0.5 + 0.3 * u(rng), 0.5, 0.5);
  const auto res = normal_smoothness_loss(nm, image);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      for (int axis = 0; axis < 3; ++axis) {
        const double h = 1e-6;
        auto perturbed = nm;
        perturbed.normal.at(x, y)[axis] += h;
        const double up = normal_smoothness_loss(perturbed, image).loss;
        perturbed.normal.at(x, y)[axis] -= 2 * h;
        const double dn = normal_smoothness_loss(perturbed, image).loss;
        EXPECT_NEAR(res.d_normal.at(x, y)[axis], (up - dn) / (2 * h), 1e-5);
      }
}

TEST(TotalLoss, GatingAndWeights) {
  LossWeights w;
  EXPECT_DOUBLE_EQ(w.lambda_dist(false), 100.0);
  EXPECT_DOUBLE_EQ(w.lambda_dist(true), 1000.0);
  EXPECT_DOUBLE_EQ(w.lambda_normal, 0.05);
  EXPECT_DOUBLE_EQ(w.lambda_ext, 0.1);
  EXPECT_DOUBLE_EQ(w.lambda_opa, 0.04);
  EXPECT_DOUBLE_EQ(w.lambda_smooth, 0.01);
  EXPECT_EQ(w.activation_iteration, 15000);

  LossTerms terms;
  terms.rgb = 0.5;
  terms.distortion = 1.0;
  terms.normal = 1.0;
  terms.extent = 1.0;
  terms.opacity = 1.0;
  terms.smoothness = 1.0;
  EXPECT_DOUBLE_EQ(total_loss(terms, w, 14999, false), 0.5);
  EXPECT_DOUBLE_EQ(total_loss(terms, w, 15000, false), 0.5 + 100.0 + 0.05 + 0.1 + 0.04 + 0.01);
  EXPECT_DOUBLE_EQ(total_loss(terms, w, 15000, true), 0.5 + 1000.0 + 0.05 + 0.1 + 0.04 + 0.01);

  LossWeights zero;
  zero.lambda_dist_unbounded = zero.lambda_dist_bounded = 0.0;
  zero.lambda_normal = zero.lambda_ext = zero.lambda_opa = zero.lambda_smooth = 0.0;
  EXPECT_DOUBLE_EQ(total_loss(terms, zero, 20000, false), 0.5);
}

TEST(L1Rgb, MeanAbsoluteError) {
  Grid2D<Vec3> a(2, 1, Vec3(0.5, 0.5, 0.5));
  Grid2D<Vec3> b(2, 1, Vec3(0.25, 0.5, 0.5));
  EXPECT_NEAR(l1_rgb_loss(a, b), 0.25 * 2 / 6.0, 1e-12);
}

TEST(GradCheck, AllLossesAgainstFiniteDifferences) {
  for (const auto& rep : gradcheck_all(7, 30)) {
    EXPECT_LE(rep.max_rel_err, 1e-4) << rep.name;
  }
}
