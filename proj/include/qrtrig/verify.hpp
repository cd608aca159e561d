#pragma once

// Executable checks shared by `qrtrig verify` and the acceptance binary.
// Each check runs a seeded experiment and reports pass/fail with a one-line
// detail string; nothing here is cached across calls except what a
// VerifyContext holds explicitly.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include "qrtrig/analysis.hpp"
#include "qrtrig/basemap.hpp"
#include "qrtrig/core.hpp"
#include "qrtrig/dynamics.hpp"
#include "qrtrig/io.hpp"
#include "qrtrig/render.hpp"

namespace qrtrig {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

/// Per-run calibration shared between checks: beta and M estimates keyed by
/// dimension (and lambda for M).
class VerifyContext {
 public:
  explicit VerifyContext(std::uint64_t seed, int beta_samples = 100000)
      : seed_(seed), beta_samples_(beta_samples) {}

  std::uint64_t seed() const { return seed_; }

  double beta(int dim) {
    auto it = beta_.find(dim);
    if (it != beta_.end()) return it->second;
    const double b = estimate_beta(dim, beta_samples_, seed_ + 101).beta_hat;
    beta_[dim] = b;
    return b;
  }

  /// lambda = factor / beta_hat, with M raised to its calibrated value.
  MapParams params(int dim, double factor) {
    const double b = beta(dim);
    MapParams p = validate_params(dim, factor / b, b);
    const auto key = std::make_pair(dim, factor);
    auto it = m_hat_.find(key);
    if (it == m_hat_.end()) it = m_hat_.emplace(key, calibrate_M(p, 1000, 6, seed_ + 202)).first;
    return with_m_hat(p, it->second);
  }

 private:
  std::uint64_t seed_;
  int beta_samples_;
  std::map<int, double> beta_;
  std::map<std::pair<int, double>, double> m_hat_;
};

/// Default lambda factors: lambda = 1.1/beta for the map itself, 2/beta where
/// a visibly contracting branch family is wanted.
inline constexpr double kLambdaFactor = 1.1;
inline constexpr double kStrongFactor = 2.0;

namespace detail {

inline Check timed(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Check c{name, false, "", 0.0};
  try {
    auto [ok, detail] = body();
    c.pass = ok;
    c.detail = std::move(detail);
  } catch (const std::exception& e) {
    c.pass = false;
    c.detail = std::string("exception: ") + e.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Lateral coordinates uniform in [-lat, lat], |x_d| uniform in [h_lo, h_hi]
/// with a random sign.
inline Point random_point(Sampler& rng, int dim, double lat, double h_lo, double h_hi) {
  Point x(dim);
  for (int j = 0; j + 1 < dim; ++j) x[j] = rng.uniform(-lat, lat);
  const double h = rng.uniform(h_lo, h_hi);
  x[dim - 1] = rng.uniform() < 0.5 ? h : -h;
  return x;
}

/// Distance to the walls of the tray containing x (fold hyperplanes and
/// x_d = 0; the seam x_d = 1 is interior to the tray).
inline double tray_margin(const Point& x) {
  const auto d = x.size();
  const Point u = fold(x).folded;
  double m = std::abs(u[d - 1]);
  for (Eigen::Index j = 0; j + 1 < d; ++j) m = std::min(m, 1.0 - std::abs(u[j]));
  return m;
}

inline TrayIndex random_tray(Sampler& rng, int dim, std::int64_t bound) {
  std::vector<std::int64_t> lat(static_cast<std::size_t>(dim - 1));
  for (auto& v : lat) v = rng.uniform_int(-bound, bound);
  return TrayIndex(std::move(lat), rng.uniform() < 0.5 ? 1 : -1);
}

/// Point of tray r whose folded image is uniform in [-1,1]^{d-1} x [0, h_max].
inline Point random_in_tray(Sampler& rng, const TrayIndex& r, double h_max) {
  const int dim = r.dim();
  Point u(dim);
  for (int j = 0; j + 1 < dim; ++j) u[j] = rng.uniform(-1.0, 1.0);
  u[dim - 1] = rng.uniform(0.0, h_max);
  return unfold(u, r);
}

}  // namespace detail

/// Constant, period-2 and random-prefix itineraries used by the endpoint,
/// hair and dimension experiments.
inline std::vector<Itinerary> standard_itineraries(int dim, std::uint64_t seed, int count = 10) {
  std::vector<Itinerary> out;
  out.push_back(Itinerary::constant(TrayIndex::origin(dim)));
  std::vector<std::int64_t> e1(static_cast<std::size_t>(dim - 1), 0);
  e1[0] = 1;
  out.emplace_back(dim, std::vector<TrayIndex>{},
                   std::vector<TrayIndex>{TrayIndex(e1, 1), TrayIndex(e1, -1)});
  Sampler rng(seed);
  while (static_cast<int>(out.size()) < count) out.push_back(random_itinerary(dim, 30, 3, rng));
  return out;
}

// ---------------------------------------------------------------------------
// Acceptance criteria

inline Check criterion_norm_identity(VerifyContext& ctx, int dim) {
  return detail::timed("norm identity (d=" + std::to_string(dim) + ")", [&] {
    const MapParams p = validate_params(dim, kLambdaFactor / ctx.beta(dim), ctx.beta(dim));
    Sampler rng(ctx.seed() + 1);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const Point x = detail::random_point(rng, dim, 10.0, 1.0, 100.0);
      const double expect = p.lambda * std::exp(std::abs(height(x)) - 1.0);
      worst = std::max(worst, std::abs(f(x, p).norm() - expect) / expect);
    }
    return std::make_pair(worst <= 1e-9, "max relative error " + detail::fmt(worst));
  });
}

inline Check criterion_round_trip(VerifyContext& ctx, int dim) {
  return detail::timed("branch round-trip (d=" + std::to_string(dim) + ")", [&] {
    const MapParams p = validate_params(dim, kLambdaFactor / ctx.beta(dim), ctx.beta(dim));
    Sampler rng(ctx.seed() + 2);
    double worst = 0.0;
    int used = 0;
    while (used < 10000) {
      const Point x = detail::random_point(rng, dim, 10.0, 0.0, 5.0);
      if (detail::tray_margin(x) < 1e-6) continue;
      ++used;
      worst = std::max(worst, (lambda_branch(tray_of(x), f(x, p), p) - x).norm());
    }
    return std::make_pair(worst <= 1e-8, "max error " + detail::fmt(worst));
  });
}

inline Check criterion_parity(VerifyContext& ctx, int dim) {
  return detail::timed("parity mapping (d=" + std::to_string(dim) + ")", [&] {
    const MapParams p = validate_params(dim, kLambdaFactor / ctx.beta(dim), ctx.beta(dim));
    Sampler rng(ctx.seed() + 3);
    int violations = 0, skipped = 0;
    for (int i = 0; i < 100000; ++i) {
      const Point x = detail::random_point(rng, dim, 20.0, 0.0, 5.0);
      const double yd = height(f(x, p));
      if (std::abs(yd) < 1e-12) {
        ++skipped;
        continue;
      }
      if ((yd > 0 ? 1 : -1) != tray_of(x).image_sign()) ++violations;
    }
    return std::make_pair(violations == 0, std::to_string(violations) + " violations, " +
                                               std::to_string(skipped) + " skipped");
  });
}

/// Minimum ||f(a)-f(b)|| / ||a-b|| over same-tray pairs; half the pairs are
/// far apart, half are separated by at most 1e-3.
inline double min_expansion_ratio(const MapParams& p, int n_pairs, std::uint64_t seed) {
  Sampler rng(seed);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_pairs; ++i) {
    const TrayIndex r = detail::random_tray(rng, p.dim, 3);
    const Point a = detail::random_in_tray(rng, r, 3.0);
    Point b;
    if (i % 2 == 0) {
      b = detail::random_in_tray(rng, r, 3.0);
    } else {
      Point u = fold(a).folded;
      for (int j = 0; j < p.dim; ++j) u[j] += rng.uniform(-1e-3, 1e-3);
      for (int j = 0; j + 1 < p.dim; ++j) u[j] = std::clamp(u[j], -1.0, 1.0);
      u[p.dim - 1] = std::max(u[p.dim - 1], 0.0);
      b = unfold(u, r);
    }
    const double gap = (a - b).norm();
    if (gap == 0.0) continue;
    worst = std::min(worst, (f(a, p) - f(b, p)).norm() / gap);
  }
  return worst;
}

inline Check criterion_expansion(VerifyContext& ctx, int dim) {
  return detail::timed("expansion (d=" + std::to_string(dim) + ")", [&] {
    const double b = ctx.beta(dim);
    const double r1 = min_expansion_ratio(validate_params(dim, 1.1 / b, b), 10000, ctx.seed() + 4);
    const double r2 = min_expansion_ratio(validate_params(dim, 2.0 / b, b), 10000, ctx.seed() + 5);
    return std::make_pair(r1 >= 1.05 && r2 >= 1.9, "min ratio " + detail::fmt(r1) +
                                                       " at 1.1/beta, " + detail::fmt(r2) +
                                                       " at 2/beta (beta_hat " +
                                                       detail::fmt(b) + ")");
  });
}

inline Check criterion_constant_stability(int dim = 2) {
  return detail::timed("constant stability (d=" + std::to_string(dim) + ")", [&] {
    const int n = 100000;
    const auto b1 = estimate_beta(dim, n, 1), b2 = estimate_beta(dim, n, 2);
    const auto k1 = estimate_dilatation(dim, n, 1), k2 = estimate_dilatation(dim, n, 2);
    const MapParams p = validate_params(dim, kLambdaFactor / b1.beta_hat, b1.beta_hat);
    const auto d1 = estimate_delta(p, n, 1), d2 = estimate_delta(p, n, 2);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(a, b); };
    const double rb = rel(b1.beta_hat, b2.beta_hat);
    const double rd = rel(d1.delta_hat, d2.delta_hat);
    const double rk = rel(k1.k_hat, k2.k_hat);
    const bool ok = rb <= 0.05 && rd <= 0.10 && rk <= 0.10 && b1.beta_hat > 0 &&
                    d1.delta_hat > 0 && k1.k_hat >= 1.0 && k1.consistent && k2.consistent &&
                    k1.nonpositive_jacobians == 0 && k2.nonpositive_jacobians == 0;
    return std::make_pair(ok, "beta " + detail::fmt(b1.beta_hat) + "/" +
                                  detail::fmt(b2.beta_hat) + ", delta " +
                                  detail::fmt(d1.delta_hat) + "/" + detail::fmt(d2.delta_hat) +
                                  ", K " + detail::fmt(k1.k_hat) + "/" + detail::fmt(k2.k_hat) +
                                  " (K_O " + detail::fmt(k1.k_o_hat) + ", K_I " +
                                  detail::fmt(k1.k_i_hat) + ")");
  });
}

inline Check criterion_derivative_scaling(int dim = 2) {
  return detail::timed("derivative scaling (d=" + std::to_string(dim) + ")", [&] {
    double worst = 0.0;
    const std::vector<double> laterals{0.0, 0.3, -0.55};
    for (double u : laterals) {
      Point a = Point::Constant(dim, u), b = Point::Constant(dim, u);
      a[dim - 1] = 1.5;
      b[dim - 1] = 2.5;
      const Matrix ja = std::numbers::e * jacobian_fd(a).matrix;
      const Matrix jb = jacobian_fd(b).matrix;
      for (Eigen::Index i = 0; i < ja.size(); ++i) {
        const double scale = std::max(std::abs(ja(i)), 1e-12 * ja.norm());
        worst = std::max(worst, std::abs(jb(i) - ja(i)) / scale);
      }
    }
    return std::make_pair(worst <= 1e-5, "max entrywise relative deviation " + detail::fmt(worst));
  });
}

inline Check criterion_endpoint_convergence(VerifyContext& ctx, int dim = 2) {
  return detail::timed("endpoint convergence (d=" + std::to_string(dim) + ")", [&] {
    const MapParams p = ctx.params(dim, kStrongFactor);
    const double bound = 1.0 / p.alpha_hat + 0.1;
    double worst_rate = 0.0;
    double origin_err = 0.0;
    const auto its = standard_itineraries(dim, ctx.seed() + 7);
    for (std::size_t i = 0; i < its.size(); ++i) {
      const EndpointResult e = endpoint(its[i], 1e-13, 120, p);
      if (i == 0) origin_err = e.point.norm();
      const double rate = increment_decay_rate(its[i], e.increments, 5);
      if (!std::isnan(rate)) worst_rate = std::max(worst_rate, rate);
    }
    return std::make_pair(worst_rate <= bound && origin_err <= 1e-8,
                          "max decay rate " + detail::fmt(worst_rate) + " (bound " +
                              detail::fmt(bound) + "), constant endpoint |E| = " +
                              detail::fmt(origin_err));
  });
}

struct HairEscapeStats {
  int samples = 0;
  int escaped = 0;
  int omega_last3 = 0;
  int omega_last = 0;
  int greater = 0;
  int less = 0;
};

inline HairEscapeStats hair_escape_stats(const MapParams& p, const std::vector<Itinerary>& its,
                                         int depth, double t_max, int n_samples) {
  HairEscapeStats s;
  for (const auto& it : its) {
    const HairTrace hair = hair_trace(it, depth, t_max, n_samples, p);
    for (const auto& smp : hair.samples) {
      if (smp.t < 1.0) continue;
      ++s.samples;
      const OrbitRecord orb = iterate(smp.point, depth + 40, p);
      if (orb.escaped()) {
        ++s.escaped;
        const auto n = orb.points.size() - 1;  // last entry is at or past the cap
        int in = 0;
        for (std::size_t k = n >= 3 ? n - 3 : 0; k < n; ++k) in += in_omega(orb.points[k], p);
        if (n >= 3 && in == 3) ++s.omega_last3;
        if (n >= 1 && in_omega(orb.points[n - 1], p)) ++s.omega_last;
      }
      const Order o = order_compare(hair.endpoint_estimate, smp.point, p, depth + 40).order;
      s.greater += o == Order::Greater;
      s.less += o == Order::Less;
    }
  }
  return s;
}

inline std::string describe(const HairEscapeStats& s) {
  return std::to_string(s.escaped) + "/" + std::to_string(s.samples) + " escape, " +
         std::to_string(s.omega_last3) + " with last 3 pre-cap points in Omega (" +
         std::to_string(s.omega_last) + " with the last one), endpoint Less/Greater " +
         std::to_string(s.less) + "/" + std::to_string(s.greater);
}

inline Check criterion_hair_escape(VerifyContext& ctx, int dim = 2) {
  return detail::timed("hair escape (d=" + std::to_string(dim) + ")", [&] {
    const MapParams p = ctx.params(dim, kStrongFactor);
    const auto s = hair_escape_stats(p, standard_itineraries(dim, ctx.seed() + 7), 8, 1e3, 201);
    const bool ok = s.escaped == s.samples && s.omega_last3 == s.samples && s.greater == 0;
    return std::make_pair(ok, describe(s));
  });
}

/// Union of traced hairs minus endpoint neighbourhoods, densified for box counting.
inline std::vector<Point> hair_union_points(const MapParams& p, const std::vector<Itinerary>& its,
                                            int depth, double t_max, int n_samples,
                                            double spacing, double endpoint_radius) {
  std::vector<Point> pts;
  for (const auto& it : its) {
    const HairTrace hair = hair_trace(it, depth, t_max, n_samples, p);
    std::vector<Point> poly;
    for (const auto& s : hair.samples) poly.push_back(s.point);
    for (auto& q : densify(poly, spacing))
      if ((q - hair.endpoint_estimate).norm() > endpoint_radius) pts.push_back(std::move(q));
  }
  return pts;
}

inline std::vector<Point> segment_points(int n) {
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) {
    const double s = (i + 0.5) / n;
    pts.push_back(make_point({0.1 + 0.6 * s, 0.05 + 0.8 * s}));
  }
  return pts;
}

inline std::vector<Point> square_points(int side) {
  std::vector<Point> pts;
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) pts.push_back(make_point({(i + 0.5) / side, (j + 0.5) / side}));
  return pts;
}

inline Check criterion_dimension_proxy(VerifyContext& ctx) {
  return detail::timed("dimension proxy (d=2)", [&] {
    const MapParams p = ctx.params(2, kStrongFactor);
    const auto pts = hair_union_points(p, standard_itineraries(2, ctx.seed() + 7), 3, 1e3, 2000,
                                       std::ldexp(1.0, -16), 1e-3);
    const auto hair = box_count(pts, dyadic_scales(std::ldexp(1.0, -5), 8));
    const auto seg = box_count(segment_points(10000), dyadic_scales(0.25, 8));
    const auto sq = box_count(square_points(100), dyadic_scales(0.5, 6));
    const bool ok = std::abs(hair.slope - 1.0) <= 0.15 && hair.r2 >= 0.98 &&
                    std::abs(seg.slope - 1.0) <= 0.05 && std::abs(sq.slope - 2.0) <= 0.1;
    return std::make_pair(ok, "hairs " + detail::fmt(hair.slope) + " (r2 " +
                                  detail::fmt(hair.r2) + ", " + std::to_string(pts.size()) +
                                  " points), segment " + detail::fmt(seg.slope) + ", square " +
                                  detail::fmt(sq.slope));
  });
}

inline Check criterion_lemma1(VerifyContext& ctx, int dim = 2) {
  return detail::timed("ordering constant (d=" + std::to_string(dim) + ")", [&] {
    const MapParams p = ctx.params(dim, kStrongFactor);
    const auto fresh = sample_orbit_pairs(p, 1000, 6, ctx.seed() + 303);
    const auto at_m = lemma1_violations(p, p.m_hat, fresh).size();
    const auto at_0 = lemma1_violations(p, 0.0, fresh).size();
    const bool ok = p.m_hat >= p.m_floor() && at_m == 0 && at_0 >= 1;
    return std::make_pair(ok, "M_hat " + detail::fmt(p.m_hat) + " (floor " +
                                  detail::fmt(p.m_floor()) + "), violations " +
                                  std::to_string(at_m) + " at M_hat, " + std::to_string(at_0) +
                                  " at M = 0");
  });
}

/// (x_1, x_d) slice over u in [-1, 3], symmetric about the wall x_1 = 1.
inline SliceSpec symmetry_slice(int dim, int width, int height) {
  SliceSpec s;
  s.axis_u = 0;
  s.axis_v = dim - 1;
  s.base = Point::Zero(dim);
  s.window = {-1.0, 3.0, -2.0, 2.0};
  s.width = width;
  s.height = height;
  return s;
}

inline Check criterion_render(VerifyContext& ctx, int dim = 2) {
  return detail::timed("render determinism and symmetry (d=" + std::to_string(dim) + ")", [&] {
    const MapParams p = validate_params(dim, kLambdaFactor / ctx.beta(dim), ctx.beta(dim));
    const SliceSpec spec = symmetry_slice(dim, 64, 49);
    const ImageGrid g1 = render_slice(spec, p, 64);
    const ImageGrid g2 = render_slice(spec, p, 64);
    const std::string h1 = sha256_hex(ppm_bytes(g1, Palette::Hue));
    const std::string h2 = sha256_hex(ppm_bytes(g2, Palette::Hue));
    int mismatched = 0, escaping = 0;
    for (int row = 0; row < g1.height; ++row)
      for (int col = 0; col < g1.width; ++col) {
        escaping += g1.at(col, row).escape_step.has_value();
        if (g1.at(col, row).escape_step != g1.at(g1.width - 1 - col, row).escape_step) ++mismatched;
      }
    return std::make_pair(h1 == h2 && mismatched == 0 && escaping > 0,
                          "sha256 " + h1.substr(0, 16) + (h1 == h2 ? " (match)" : " (differs)") +
                              ", " + std::to_string(mismatched) + " asymmetric pixels, " +
                              std::to_string(escaping) + " escaping");
  });
}

// ---------------------------------------------------------------------------
// Invariant checks beyond the criteria

inline Check check_chain_examples() {
  return detail::timed("base map chain examples", [] {
    double err = 0.0;
    for (int d = 2; d <= 4; ++d) {
      Point z = Point::Zero(d), top = Point::Zero(d), two = Point::Zero(d);
      top[d - 1] = 1.0;
      two[d - 1] = 2.0;
      Point e_top = top * std::numbers::e;
      err = std::max(err, base_F(z).norm());
      err = std::max(err, (base_F(top) - top).norm());
      err = std::max(err, (base_F(two) - e_top).norm());
      err = std::max(err, (h3(h2(h1(z)))).norm());
    }
    return std::make_pair(err <= 1e-15, "max deviation " + detail::fmt(err));
  });
}

inline Check check_fold_exact(std::uint64_t seed) {
  return detail::timed("fold/unfold exactness", [&] {
    Sampler rng(seed);
    int bad = 0;
    for (int i = 0; i < 10000; ++i) {
      const int d = 2 + static_cast<int>(i % 3);
      const Point x = detail::random_point(rng, d, 1e6, 0.0, 50.0);
      const auto [u, r] = fold(x);
      bool inside = u[d - 1] >= 0.0;
      for (int j = 0; j + 1 < d; ++j) inside = inside && std::abs(u[j]) <= 1.0;
      if (!inside || unfold(u, r) != x) ++bad;
    }
    return std::make_pair(bad == 0, std::to_string(bad) + " failures over 10000 points");
  });
}

inline Check check_continuity(VerifyContext& ctx, int dim) {
  return detail::timed("continuity across folds (d=" + std::to_string(dim) + ")", [&] {
    const MapParams p = validate_params(dim, kLambdaFactor / ctx.beta(dim), ctx.beta(dim));
    Sampler rng(ctx.seed() + 11);
    const double eps = 1e-8;
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
      Point x = detail::random_point(rng, dim, 5.0, 0.0, 3.0);
      const int axis = static_cast<int>(rng.uniform_int(0, dim - 1));
      if (axis == dim - 1)
        x[axis] = 0.0;
      else
        x[axis] = 2.0 * static_cast<double>(rng.uniform_int(-3, 3)) + 1.0;
      Point a = x, b = x;
      a[axis] += eps;
      b[axis] -= eps;
      worst = std::max(worst, (f(a, p) - f(b, p)).norm());
    }
    return std::make_pair(worst <= 1e-6, "max one-sided jump " + detail::fmt(worst));
  });
}

inline Check check_boundary_seeds(VerifyContext& ctx, int dim = 2) {
  return detail::timed("shared-boundary orbits stay on x_d = 0 (d=" + std::to_string(dim) + ")",
                       [&] {
    const MapParams p = validate_params(dim, kLambdaFactor / ctx.beta(dim), ctx.beta(dim));
    Sampler rng(ctx.seed() + 13);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      Point x = detail::random_point(rng, dim, 5.0, 0.0, 3.0);
      if (i % 2 == 0)
        x[0] = 2.0 * static_cast<double>(rng.uniform_int(-3, 3)) + 1.0;
      else
        x[dim - 1] = 0.0;
      Point cur = x;
      for (int k = 1; k <= 6; ++k) {
        cur = f(cur, p);
        worst = std::max(worst, std::abs(height(cur)));
      }
    }
    return std::make_pair(worst <= 1e-9, "max |f^k(x)_d| for k = 1..6: " + detail::fmt(worst));
  });
}

inline Check check_nesting(VerifyContext& ctx, int dim = 2) {
  return detail::timed("pullback nesting (d=" + std::to_string(dim) + ")", [&] {
    const MapParams p = ctx.params(dim, kLambdaFactor);
    Sampler rng(ctx.seed() + 17);
    int bad = 0, total = 0;
    for (int i = 0; i < 200; ++i) {
      const Itinerary it = random_itinerary(dim, 12, 3, rng);
      const int depth = 10;
      const double t = std::expm1(rng.uniform(0.0, 5.0));
      const auto chain = pullback_chain(it, depth, hair_anchor(it, depth, t), p);
      for (int j = 0; j < depth; ++j, ++total)
        if (!it.at(static_cast<std::size_t>(j)).contains(chain[static_cast<std::size_t>(j)], 1e-9)) ++bad;
    }
    return std::make_pair(bad == 0, std::to_string(bad) + "/" + std::to_string(total) +
                                        " intermediates outside their tray");
  });
}

inline Check check_endpoint_minimality(VerifyContext& ctx, int dim = 2) {
  return detail::timed("endpoint minimality (d=" + std::to_string(dim) + ")", [&] {
    const MapParams p = ctx.params(dim, kStrongFactor);
    const auto s = hair_escape_stats(p, standard_itineraries(dim, ctx.seed() + 7), 8, 1e3, 201);
    return std::make_pair(s.less == s.samples, describe(s));
  });
}

inline Check check_omega_absorption(VerifyContext& ctx, int dim = 2) {
  return detail::timed("hair orbits end in Omega (d=" + std::to_string(dim) + ")", [&] {
    const MapParams p = ctx.params(dim, kStrongFactor);
    const auto s = hair_escape_stats(p, standard_itineraries(dim, ctx.seed() + 7), 8, 1e3, 201);
    return std::make_pair(s.omega_last3 == s.samples, describe(s));
  });
}

inline Check check_branch_contraction(VerifyContext& ctx, int dim) {
  return detail::timed("inverse-branch contraction (d=" + std::to_string(dim) + ")", [&] {
    const MapParams p = validate_params(dim, kLambdaFactor / ctx.beta(dim), ctx.beta(dim));
    Sampler rng(ctx.seed() + 19);
    double worst = 0.0;
    int used = 0;
    while (used < 1000) {
      const TrayIndex r = detail::random_tray(rng, dim, 3);
      Point y = detail::random_point(rng, dim, 1.0, 0.0, 1.0);
      y[dim - 1] = std::abs(y[dim - 1]) * r.image_sign();
      y *= p.lambda * std::exp(rng.uniform(0.0, 3.0)) / y.norm();
      if (smooth_margin(lambda_branch(r, y, p)) < 1e-3 || std::abs(height(y)) < 1e-3) continue;
      ++used;
      auto branch = [&](const Point& q) { return lambda_branch(r, q, p); };
      worst = std::max(worst, singular_range(central_jacobian(branch, y, 1e-6)).largest);
    }
    const double bound = 1.0 / p.alpha_hat * (1.0 + 1e-3);
    return std::make_pair(worst <= bound, "max |D Lambda| " + detail::fmt(worst) + " (bound " +
                                              detail::fmt(bound) + ")");
  });
}

inline Check check_expansion_consistency(VerifyContext& ctx, int dim) {
  return detail::timed("expansion consistency (d=" + std::to_string(dim) + ")", [&] {
    const MapParams p = validate_params(dim, kLambdaFactor / ctx.beta(dim), ctx.beta(dim));
    const double r = min_expansion_ratio(p, 10000, ctx.seed() + 23);
    const double bound = p.alpha_hat * (1.0 - 1e-3);
    return std::make_pair(r >= bound, "min same-tray ratio " + detail::fmt(r) + " (alpha_hat " +
                                          detail::fmt(p.alpha_hat) + ")");
  });
}

inline Check check_determinant_sign(VerifyContext& ctx, int dim) {
  return detail::timed("Jacobian determinant sign (d=" + std::to_string(dim) + ")", [&] {
    Sampler rng(ctx.seed() + 29);
    int used = 0, nonpositive = 0;
    while (used < 10000) {
      const Point x = detail::random_point(rng, dim, 6.0, 0.0, 3.0);
      if (smooth_margin(x) < 1e-4) continue;
      ++used;
      if (!(jacobian_fd(x).matrix.determinant() > 0.0)) ++nonpositive;
    }
    return std::make_pair(nonpositive == 0, std::to_string(nonpositive) + "/" +
                                                std::to_string(used) + " non-positive");
  });
}

inline Check check_box_monotonicity(VerifyContext& ctx) {
  return detail::timed("box-count monotonicity", [&] {
    Sampler rng(ctx.seed() + 31);
    std::vector<Point> cloud;
    for (int i = 0; i < 5000; ++i) cloud.push_back(rng.point_in_box(make_point({0, 0}), make_point({1, 1})));
    const MapParams p = ctx.params(2, kStrongFactor);
    const auto hairs = hair_union_points(p, standard_itineraries(2, ctx.seed() + 7), 3, 1e3, 500,
                                         std::ldexp(1.0, -12), 1e-3);
    int bad = 0;
    for (const auto& pts : {cloud, hairs}) {
      const auto est = box_count(pts, dyadic_scales(0.5, 9));
      for (std::size_t i = 1; i < est.counts.size(); ++i)
        if (est.counts[i] < est.counts[i - 1] || est.counts[i] > 4 * est.counts[i - 1]) ++bad;
    }
    return std::make_pair(bad == 0, std::to_string(bad) + " monotonicity violations");
  });
}

inline Check check_parity_stripes(VerifyContext& ctx) {
  return detail::timed("render parity stripes", [&] {
    const MapParams p = validate_params(2, kLambdaFactor / ctx.beta(2), ctx.beta(2));
    const SliceSpec spec = symmetry_slice(2, 16, 17);
    const ImageGrid g = render_slice(spec, p, 8);
    int bad = 0;
    for (int row = 0; row < g.height; ++row) {
      const double v = spec.pixel_point(0, row)[1];
      const int expect = v >= 0.0 ? 1 : -1;
      for (int col = 0; col < g.width; ++col) bad += g.at(col, row).first_tray.sign != expect;
    }
    return std::make_pair(bad == 0, std::to_string(bad) + " pixels with the wrong sign");
  });
}

// ---------------------------------------------------------------------------
// Suites and criteria by number

inline constexpr int kCriterionCount = 12;

inline std::vector<Check> run_criterion(VerifyContext& ctx, int n) {
  switch (n) {
    case 1: return {criterion_norm_identity(ctx, 2)};
    case 2: return {criterion_round_trip(ctx, 2)};
    case 3: return {criterion_parity(ctx, 2)};
    case 4: return {criterion_expansion(ctx, 2)};
    case 5: return {criterion_constant_stability(2)};
    case 6: return {criterion_derivative_scaling(2)};
    case 7: return {criterion_endpoint_convergence(ctx, 2)};
    case 8: return {criterion_hair_escape(ctx, 2)};
    case 9: return {criterion_dimension_proxy(ctx)};
    case 10: return {criterion_lemma1(ctx, 2)};
    case 11: return {criterion_render(ctx, 2)};
    case 12:
      return {criterion_norm_identity(ctx, 3), criterion_round_trip(ctx, 3),
              criterion_parity(ctx, 3), criterion_expansion(ctx, 3)};
    default: throw DomainError("unknown criterion " + std::to_string(n));
  }
}

inline std::vector<Check> run_suite(const std::string& suite, std::uint64_t seed) {
  VerifyContext ctx(seed);
  std::vector<Check> out;
  auto add = [&](Check c) { out.push_back(std::move(c)); };
  const bool all = suite == "all";
  if (!all && suite != "basemap" && suite != "dynamics" && suite != "analysis" && suite != "render")
    throw DomainError("unknown suite '" + suite + "' (expected all, basemap, dynamics, analysis)");
  if (all || suite == "basemap") {
    add(check_chain_examples());
    add(check_fold_exact(seed));
    for (int d : {2, 3}) {
      add(criterion_norm_identity(ctx, d));
      add(criterion_round_trip(ctx, d));
      add(criterion_parity(ctx, d));
      add(criterion_expansion(ctx, d));
      add(check_continuity(ctx, d));
    }
    add(criterion_derivative_scaling(2));
    add(criterion_derivative_scaling(3));
  }
  if (all || suite == "dynamics") {
    add(criterion_endpoint_convergence(ctx, 2));
    add(check_nesting(ctx, 2));
    add(check_boundary_seeds(ctx, 2));
    add(check_boundary_seeds(ctx, 3));
    add(check_endpoint_minimality(ctx, 2));
    add(check_omega_absorption(ctx, 2));
    add(criterion_lemma1(ctx, 2));
  }
  if (all || suite == "analysis") {
    add(criterion_constant_stability(2));
    for (int d : {2, 3}) {
      add(check_branch_contraction(ctx, d));
      add(check_expansion_consistency(ctx, d));
      add(check_determinant_sign(ctx, d));
    }
    add(check_box_monotonicity(ctx));
    add(criterion_dimension_proxy(ctx));
  }
  if (all || suite == "render") {
    add(criterion_render(ctx, 2));
    add(check_parity_stripes(ctx));
  }
  return out;
}

inline bool all_passed(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

inline std::string format_check(const Check& c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%7.2fs", c.seconds);
  return std::string(c.pass ? "PASS " : "FAIL ") + buf + "  " + c.name + ": " + c.detail;
}

}  // namespace qrtrig
