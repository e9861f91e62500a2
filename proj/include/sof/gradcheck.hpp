#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sof/losses.hpp"

namespace sof {

struct GradCheckReport {
  std::string name;
  double max_rel_err = 0.0;
  int configs = 0;
};

namespace detail {

inline double central_diff(const std::function<double(double)>& f, double x,
                           double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel_err(double analytic, double fd) {
  const double scale = std::max({std::abs(analytic), std::abs(fd), 1e-6});
  return std::abs(analytic - fd) / scale;
}

}  // namespace detail

/// Distortion loss gradients w.r.t. every alpha and t against central
/// finite differences on random sorted sample lists.
inline GradCheckReport gradcheck_distortion(std::mt19937& rng, int configs = 100) {
  GradCheckReport rep{"distortion", 0.0, configs};
  std::uniform_int_distribution<int> len(2, 16);
  std::uniform_real_distribution<double> ua(0.02, 0.85), ut(0.5, 20.0);
  const double near = 0.2, far = 100.0;
  for (int c = 0; c < configs; ++c) {
    const int n = len(rng);
    std::vector<DistortionSample> s(n);
    for (auto& x : s) x = {ua(rng), ut(rng)};
    std::sort(s.begin(), s.end(),
              [](const DistortionSample& l, const DistortionSample& r) { return l.t < r.t; });
    const auto res = distortion_loss(s, near, far);
    for (int k = 0; k < n; ++k) {
      auto fa = [&](double v) {
        auto s2 = s;
        s2[k].alpha = v;
        return distortion_loss(s2, near, far).loss;
      };
      auto ft = [&](double v) {
        auto s2 = s;
        s2[k].t = v;
        return distortion_loss(s2, near, far).loss;
      };
      rep.max_rel_err = std::max(
          rep.max_rel_err,
          detail::rel_err(res.d_alpha[k], detail::central_diff(fa, s[k].alpha, 1e-6)));
      rep.max_rel_err = std::max(
          rep.max_rel_err,
          detail::rel_err(res.d_t[k], detail::central_diff(ft, s[k].t, 1e-5)));
    }
  }
  return rep;
}

/// Extent loss gradients w.r.t. (A, B, C, w) on non-singular samples built
/// from valid Gaussian-ray geometry (positive discriminant).
inline GradCheckReport gradcheck_extent(std::mt19937& rng, int configs = 100) {
  GradCheckReport rep{"extent", 0.0, configs};
  std::uniform_real_distribution<double> uq(0.5, 2.0), upk(1.0, 10.0), um(0.0, 1.5),
      ub(2.0, 3.3), uw(0.05, 1.0);
  const double near = 0.2, far = 100.0;
  for (int c = 0; c < configs; ++c) {
    ExtentSample s;
    s.a = uq(rng);
    const double t_peak = upk(rng);
    s.b = -2.0 * s.a * t_peak;
    const double m = um(rng);  // Mahalanobis distance of closest approach
    s.c = s.b * s.b / (4.0 * s.a) + m * m;
    s.bound = ub(rng);
    s.w = uw(rng);
    const auto res = extent_loss({s}, near, far);
    auto f = [&](ExtentSample q) { return extent_loss({q}, near, far).loss; };
    auto fd = [&](double ExtentSample::* field, double h) {
      auto lo = s, hi = s;
      lo.*field -= h;
      hi.*field += h;
      return (f(hi) - f(lo)) / (2.0 * h);
    };
    rep.max_rel_err = std::max(rep.max_rel_err,
                               detail::rel_err(res.d_a[0], fd(&ExtentSample::a, 1e-6)));
    rep.max_rel_err = std::max(rep.max_rel_err,
                               detail::rel_err(res.d_b[0], fd(&ExtentSample::b, 1e-6)));
    rep.max_rel_err = std::max(rep.max_rel_err,
                               detail::rel_err(res.d_c[0], fd(&ExtentSample::c, 1e-6)));
    rep.max_rel_err = std::max(rep.max_rel_err,
                               detail::rel_err(res.d_w[0], fd(&ExtentSample::w, 1e-6)));
  }
  return rep;
}

inline GradCheckReport gradcheck_depth_normal(std::mt19937& rng, int configs = 100) {
  GradCheckReport rep{"depth_normal", 0.0, configs};
  std::uniform_int_distribution<int> len(1, 8);
  std::uniform_real_distribution<double> u(-1.0, 1.0), uw(0.05, 1.0);
  for (int c = 0; c < configs; ++c) {
    const int n = len(rng);
    std::vector<double> w(n);
    std::vector<Vec3> normals(n);
    for (int i = 0; i < n; ++i) {
      w[i] = uw(rng);
      normals[i] = Vec3(u(rng), u(rng), u(rng)).normalized();
    }
    const Vec3 pixel_normal = Vec3(u(rng), u(rng), u(rng)).normalized();
    const auto res = depth_normal_loss(w, normals, pixel_normal);
    for (int k = 0; k < n; ++k) {
      auto fw = [&](double v) {
        auto w2 = w;
        w2[k] = v;
        return depth_normal_loss(w2, normals, pixel_normal).loss;
      };
      rep.max_rel_err = std::max(
          rep.max_rel_err, detail::rel_err(res.d_w[k], detail::central_diff(fw, w[k], 1e-6)));
      for (int axis = 0; axis < 3; ++axis) {
        auto fn = [&](double v) {
          auto n2 = normals;
          n2[k][axis] = v;  // unnormalized perturbation; gradient is of the raw dot
          return depth_normal_loss(w, n2, pixel_normal).loss;
        };
        rep.max_rel_err = std::max(
            rep.max_rel_err,
            detail::rel_err(res.d_n[k][axis],
                            detail::central_diff(fn, normals[k][axis], 1e-6)));
      }
    }
  }
  return rep;
}

/// Opacity supervision gradient w.r.t. the per-Gaussian alphas at the depth:
/// the loss is (1 - prod(1 - a_i) - 0.5)^2 in those variables.
inline GradCheckReport gradcheck_opacity_supervision(std::mt19937& rng,
                                                     int configs = 100) {
  GradCheckReport rep{"opacity_supervision", 0.0, configs};
  std::uniform_int_distribution<int> len(2, 8);
  std::uniform_real_distribution<double> ua(0.05, 0.6);
  for (int c = 0; c < configs; ++c) {
    const int n = len(rng);
    std::vector<double> a(n);
    for (auto& v : a) v = ua(rng);
    auto f = [&](const std::vector<double>& av) {
      double survive = 1.0;
      for (double v : av) survive *= 1.0 - v;
      const double r = (1.0 - survive) - 0.5;
      return r * r;
    };
    double survive = 1.0;
    for (double v : a) survive *= 1.0 - v;
    const double residual = (1.0 - survive) - 0.5;
    for (int k = 0; k < n; ++k) {
      const double analytic = 2.0 * residual * survive / (1.0 - a[k]);
      auto fk = [&](double v) {
        auto a2 = a;
        a2[k] = v;
        return f(a2);
      };
      rep.max_rel_err = std::max(
          rep.max_rel_err, detail::rel_err(analytic, detail::central_diff(fk, a[k], 1e-6)));
    }
  }
  return rep;
}

/// Exact-depth offset delta = -sqrt(B^2 - 4A(C + K)) / 2A with the
/// transmittance/opacity log term K detached; gradients w.r.t. (A, B, C).
inline GradCheckReport gradcheck_exact_depth(std::mt19937& rng, int configs = 100) {
  GradCheckReport rep{"exact_depth", 0.0, configs};
  std::uniform_real_distribution<double> uq(0.5, 2.0), upk(2.0, 10.0), um(0.0, 0.5),
      uo(0.7, 0.999), ut(0.8, 1.0);
  for (int c = 0; c < configs; ++c) {
    RayContribution rc;
    rc.gaussian_index = 0;
    rc.a = uq(rng);
    const double t_peak = upk(rng);
    rc.b = -2.0 * rc.a * t_peak;
    const double m = um(rng);
    rc.c = rc.b * rc.b / (4.0 * rc.a) + m * m;
    rc.t_star = t_peak;
    rc.opacity = uo(rng);
    rc.alpha = rc.opacity * peak_value(rc.a, rc.b, rc.c);
    const double transmittance = ut(rng);
    if (transmittance * (1.0 - rc.alpha) >= 0.5) {
      --c;  // no median crossing; resample
      continue;
    }
    const double log_term =
        2.0 * std::log((transmittance - 0.5) / (transmittance * rc.opacity));
    auto delta = [&](double a, double b, double cq) {
      return -std::sqrt(b * b - 4.0 * a * (cq + log_term)) / (2.0 * a);
    };
    if (rc.b * rc.b - 4.0 * rc.a * (rc.c + log_term) <= 1e-6) {
      --c;
      continue;
    }
    // assemble a ray whose median Gaussian is rc, preceded by one filler
    // whose alpha produces the requested transmittance
    RayContribution first = rc;
    first.gaussian_index = 1;
    first.t_star = t_peak * 0.5;
    first.alpha = 1.0 - transmittance;
    const auto g = exact_depth_gradient({first, rc});
    if (!g) {
      --c;
      continue;
    }
    rep.max_rel_err = std::max(
        rep.max_rel_err,
        detail::rel_err(g->d_a, detail::central_diff(
                                    [&](double v) { return delta(v, rc.b, rc.c); },
                                    rc.a, 1e-6)));
    rep.max_rel_err = std::max(
        rep.max_rel_err,
        detail::rel_err(g->d_b, detail::central_diff(
                                    [&](double v) { return delta(rc.a, v, rc.c); },
                                    rc.b, 1e-6)));
    rep.max_rel_err = std::max(
        rep.max_rel_err,
        detail::rel_err(g->d_c, detail::central_diff(
                                    [&](double v) { return delta(rc.a, rc.b, v); },
                                    rc.c, 1e-6)));
  }
  return rep;
}

inline std::vector<GradCheckReport> gradcheck_all(std::uint64_t seed = 7,
                                                  int configs = 100) {
  std::mt19937 rng(static_cast<std::uint32_t>(seed));
  return {gradcheck_distortion(rng, configs), gradcheck_extent(rng, configs),
          gradcheck_depth_normal(rng, configs),
          gradcheck_opacity_supervision(rng, configs),
          gradcheck_exact_depth(rng, configs)};
}

}  // namespace sof
