#pragma once

// Numerical estimates of the constants the construction leaves implicit
// (beta, alpha, delta, the dilatations, the ordering constant M) and a
// box-counting dimension estimator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SVD>

#include "qrtrig/basemap.hpp"
#include "qrtrig/core.hpp"
#include "qrtrig/dynamics.hpp"

namespace qrtrig {

inline constexpr double kDefaultFdStep = 1e-5;

// ---------------------------------------------------------------------------
// Distance to the non-smooth locus of F

/// Distance from x to the fold hyperplanes of its tray and to the seams
/// x_d in {0, 1} of the folded point.
inline double boundary_distance(const Point& x) {
  const auto d = x.size();
  const Point u = fold(x).folded;
  double dist = std::abs(u[d - 1]);
  dist = std::min(dist, std::abs(u[d - 1] - 1.0));
  for (Eigen::Index j = 0; j + 1 < d; ++j) dist = std::min(dist, 1.0 - std::abs(u[j]));
  return dist;
}

/// Distance-like margin to the ridges of the sup-norm inside h2, where two
/// coordinates tie for the largest modulus. Above the seam only the lateral
/// coordinates take part (h is evaluated at (x', 1)).
inline double ridge_distance(const Point& x) {
  const auto d = x.size();
  const Point u = fold(x).folded;
  std::vector<double> mags;
  for (Eigen::Index j = 0; j + 1 < d; ++j) mags.push_back(std::abs(u[j]));
  if (u[d - 1] < 1.0) mags.push_back(1.0 - u[d - 1]);
  if (mags.size() < 2) return std::numeric_limits<double>::infinity();
  std::partial_sort(mags.begin(), mags.begin() + 2, mags.end(), std::greater<>());
  return (mags[0] - mags[1]) / std::sqrt(2.0);
}

/// Margin to the whole non-smooth locus of F.
inline double smooth_margin(const Point& x) {
  return std::min(boundary_distance(x), ridge_distance(x));
}

// ---------------------------------------------------------------------------
// Jacobians and singular values

struct JacobianEstimate {
  Point at;
  Matrix matrix;
  double step;
  double boundary_distance;
};

/// Central-difference Jacobian of a map R^d -> R^d.
template <class Map>
Matrix central_jacobian(const Map& map, const Point& x, double h) {
  const auto d = x.size();
  Matrix J(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Point a = x, b = x;
    a[j] += h;
    b[j] -= h;
    J.col(j) = (map(a) - map(b)) / (2.0 * h);
  }
  return J;
}

/// Jacobian of F (not f; multiply by lambda for f).
inline JacobianEstimate jacobian_fd(const Point& x, double h = kDefaultFdStep) {
  if (!(h >= 1e-8 && h <= 1e-3)) throw DomainError("jacobian_fd: step must lie in [1e-8, 1e-3]");
  require_finite(x, "jacobian_fd");
  const double dist = boundary_distance(x);
  if (dist < 4.0 * h)
    throw TooCloseToFold(dist, "TooCloseToFold: distance " + std::to_string(dist) +
                                   " to the non-smooth locus is below 4h = " +
                                   std::to_string(4.0 * h));
  Matrix J = central_jacobian([](const Point& p) { return F_full(p); }, x, h);
  if (!J.allFinite()) throw DomainError("jacobian_fd: non-finite entries");
  return {x, std::move(J), h, dist};
}

struct SingularRange {
  double smallest;
  double largest;
};

inline SingularRange singular_range(const Matrix& m) {
  if (!m.allFinite()) throw DomainError("singular_range: non-finite matrix");
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  return {s[s.size() - 1], s[0]};
}

// ---------------------------------------------------------------------------
// Sampled constants

namespace detail {

/// Uniform point in the slab [-1,1]^{d-1} x [lo, hi].
inline Point slab_point(Sampler& rng, int dim, double lo, double hi) {
  Point x(dim);
  for (int j = 0; j + 1 < dim; ++j) x[j] = rng.uniform(-1.0, 1.0);
  x[dim - 1] = rng.uniform(lo, hi);
  return x;
}

}  // namespace detail

struct BetaEstimate {
  double beta_hat;
  Point argmin;
  int used;
};

/// Sample minimum of the smallest singular value of DF over [-1,1]^{d-1} x [0,2].
/// Reflections preserve singular values and above the seam they only grow with
/// the height, so this slab carries the global infimum.
inline BetaEstimate estimate_beta(int dim, int n_samples, std::uint64_t seed,
                                  double h = kDefaultFdStep) {
  if (dim < 2) throw DomainError("estimate_beta: dim must be >= 2");
  if (n_samples < 1) throw DomainError("estimate_beta: n_samples must be positive");
  Sampler rng(seed);
  BetaEstimate out{std::numeric_limits<double>::infinity(), Point::Zero(dim), 0};
  for (int i = 0; i < n_samples; ++i) {
    Point x = detail::slab_point(rng, dim, 0.0, 2.0);
    if (smooth_margin(x) < 4.0 * h) continue;
    const double l = singular_range(jacobian_fd(x, h).matrix).smallest;
    ++out.used;
    if (l < out.beta_hat) {
      out.beta_hat = l;
      out.argmin = x;
    }
  }
  return out;
}

struct DilatationEstimate {
  double k_hat = 1.0;    // max |DF| / l(DF)
  double k_o_hat = 1.0;  // max |DF|^d / J_F
  double k_i_hat = 1.0;  // max J_F / l(DF)^d
  /// k_hat <= (k_o_hat k_i_hat)^{1/d} * 1.05
  bool consistent = true;
  int nonpositive_jacobians = 0;
  int used = 0;
};

inline DilatationEstimate estimate_dilatation(int dim, int n_samples, std::uint64_t seed,
                                              double h = kDefaultFdStep) {
  if (dim < 2) throw DomainError("estimate_dilatation: dim must be >= 2");
  Sampler rng(seed);
  DilatationEstimate out;
  for (int i = 0; i < n_samples; ++i) {
    Point x = detail::slab_point(rng, dim, 0.0, 2.0);
    if (smooth_margin(x) < 4.0 * h) continue;
    const Matrix J = jacobian_fd(x, h).matrix;
    const auto [lo, hi] = singular_range(J);
    const double det = J.determinant();
    ++out.used;
    if (!(det > 0.0)) {
      ++out.nonpositive_jacobians;
      continue;
    }
    out.k_hat = std::max(out.k_hat, hi / lo);
    out.k_o_hat = std::max(out.k_o_hat, std::pow(hi, dim) / det);
    out.k_i_hat = std::max(out.k_i_hat, det / std::pow(lo, dim));
  }
  out.consistent = out.k_hat <= std::pow(out.k_o_hat * out.k_i_hat, 1.0 / dim) * 1.05;
  return out;
}

struct DeltaEstimate {
  double delta_hat;
  /// max over samples of |y| * |D Lambda(y)|, bounded by 1/beta.
  double max_norm_times_sigma_max;
  int used;
};

/// delta = min |y| l(D Lambda^r(y)) over |y| >= lambda. Samples y = f(x) for x
/// in [-1,1]^{d-1} x [1,2]; above the seam the product is height-invariant and
/// reflections make it tray-independent.
inline DeltaEstimate estimate_delta(const MapParams& params, int n_samples, std::uint64_t seed,
                                    double h = kDefaultFdStep) {
  const int dim = params.dim;
  Sampler rng(seed);
  const TrayIndex r0 = TrayIndex::origin(dim);
  auto branch = [&](const Point& y) { return lambda_branch(r0, y, params); };
  DeltaEstimate out{std::numeric_limits<double>::infinity(), 0.0, 0};
  for (int i = 0; i < n_samples; ++i) {
    Point x = detail::slab_point(rng, dim, 1.0, 2.0);
    if (smooth_margin(x) < 4.0 * h) continue;
    const Point y = f(x, params);
    const double ny = y.norm();
    if (ny < params.lambda) continue;
    const auto [lo, hi] = singular_range(central_jacobian(branch, y, h));
    ++out.used;
    out.delta_hat = std::min(out.delta_hat, ny * lo);
    out.max_norm_times_sigma_max = std::max(out.max_norm_times_sigma_max, ny * hi);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ordering constant

/// Two orbit segments x^0..x^depth and y^0..y^depth sharing one itinerary.
struct OrbitPair {
  std::vector<double> x_heights;
  std::vector<double> y_heights;
};

/// Pairs of points on a common hair: two anchors at heights t_x, t_y in the
/// tray s_depth are pulled back along a random admissible itinerary, and the
/// pullback chain supplies both orbits. Anchor heights are log-uniform up to
/// e^{max_log_height} so that large height gaps occur.
inline std::vector<OrbitPair> sample_orbit_pairs(const MapParams& params, int n_pairs, int depth,
                                                 std::uint64_t seed,
                                                 double max_log_height = 40.0) {
  if (depth < 1) throw DomainError("sample_orbit_pairs: depth must be >= 1");
  Sampler rng(seed);
  std::vector<OrbitPair> out;
  out.reserve(static_cast<std::size_t>(n_pairs));
  auto heights = [](const std::vector<Point>& chain) {
    std::vector<double> hs;
    hs.reserve(chain.size());
    for (const auto& p : chain) hs.push_back(std::abs(height(p)));
    return hs;
  };
  for (int i = 0; i < n_pairs; ++i) {
    const Itinerary it = random_itinerary(params.dim, depth + 1, 3, rng);
    const double tx = std::expm1(rng.uniform(0.0, max_log_height));
    const double ty = std::expm1(rng.uniform(0.0, max_log_height));
    out.push_back({heights(pullback_chain(it, depth, hair_anchor(it, depth, tx), params)),
                   heights(pullback_chain(it, depth, hair_anchor(it, depth, ty), params))});
  }
  return out;
}

struct Lemma1Violation {
  std::size_t pair;
  int step;
  double lhs;  // |y_d^{k+1}|
  double rhs;  // (lambda/3) exp|y_d^k| + M
};

/// Checks: whenever |y_d^k| > |x_d^k| + M (either orientation), then
/// |y_d^{k+1}| > (lambda/3) exp|y_d^k| + M.
inline std::vector<Lemma1Violation> lemma1_violations(const MapParams& params, double m,
                                                      const std::vector<OrbitPair>& pairs) {
  std::vector<Lemma1Violation> out;
  auto check = [&](std::size_t i, const std::vector<double>& lo,
                   const std::vector<double>& hi) {
    for (std::size_t k = 0; k + 1 < hi.size(); ++k) {
      if (!(hi[k] > lo[k] + m)) continue;
      const double rhs = params.lambda / 3.0 * std::exp(hi[k]) + m;
      if (!(hi[k + 1] > rhs)) out.push_back({i, static_cast<int>(k), hi[k + 1], rhs});
    }
  };
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    check(i, pairs[i].x_heights, pairs[i].y_heights);
    check(i, pairs[i].y_heights, pairs[i].x_heights);
  }
  return out;
}

/// Smallest M (to 0.1) with no sampled violation, floored at max{e, 4 lambda}.
inline double calibrate_M(const MapParams& params, int n_pairs, int k_steps, std::uint64_t seed) {
  if (n_pairs < 1) throw DomainError("calibrate_M: n_pairs must be positive");
  const auto pairs = sample_orbit_pairs(params, n_pairs, k_steps, seed);
  const double floor_m = params.m_floor();
  auto clean = [&](double m) { return lemma1_violations(params, m, pairs).empty(); };
  double lo = 0.0;
  double hi = floor_m;
  while (!clean(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw NoConvergence(hi, "calibrate_M: no violation-free M below 1e6");
  }
  if (clean(lo)) return std::max(floor_m, lo);
  while (hi - lo > 0.1) {
    const double mid = 0.5 * (lo + hi);
    (clean(mid) ? hi : lo) = mid;
  }
  return std::max(floor_m, hi);
}

// ---------------------------------------------------------------------------
// Box counting

struct DimensionEstimate {
  std::vector<double> scales;
  std::vector<std::int64_t> counts;
  double slope;
  double r2;
};

/// Number of occupied grid cells of side eps (grid anchored at the origin).
inline std::int64_t occupied_boxes(const std::vector<Point>& points, double eps) {
  std::vector<std::vector<std::int64_t>> cells;
  cells.reserve(points.size());
  for (const auto& p : points) {
    std::vector<std::int64_t> c(static_cast<std::size_t>(p.size()));
    for (Eigen::Index j = 0; j < p.size(); ++j)
      c[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(std::floor(p[j] / eps));
    cells.push_back(std::move(c));
  }
  std::sort(cells.begin(), cells.end());
  return static_cast<std::int64_t>(std::unique(cells.begin(), cells.end()) - cells.begin());
}

inline DimensionEstimate box_count(const std::vector<Point>& points,
                                   const std::vector<double>& scales) {
  if (points.size() < 100) throw DomainError("box_count: need at least 100 points");
  if (scales.size() < 4) throw DomainError("box_count: need at least 4 scales");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0)) throw DomainError("box_count: scales must be positive");
    if (i && !(scales[i] < scales[i - 1]))
      throw DomainError("box_count: scales must be strictly decreasing");
  }
  DimensionEstimate est{scales, {}, 0.0, 0.0};
  for (double eps : scales) est.counts.push_back(occupied_boxes(points, eps));
  if (std::all_of(est.counts.begin(), est.counts.end(),
                  [&](auto c) { return c == est.counts.front(); }))
    throw DegenerateFit("DegenerateFit: all box counts equal " +
                        std::to_string(est.counts.front()));

  // Least squares of log N against log(1/eps).
  const auto n = static_cast<double>(scales.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const double xi = -std::log(scales[i]);
    const double yi = std::log(static_cast<double>(est.counts[i]));
    sx += xi;
    sy += yi;
    sxx += xi * xi;
    sxy += xi * yi;
    syy += yi * yi;
  }
  const double cov = sxy - sx * sy / n;
  const double varx = sxx - sx * sx / n;
  const double vary = syy - sy * sy / n;
  est.slope = cov / varx;
  est.r2 = vary > 0.0 ? std::clamp(cov * cov / (varx * vary), 0.0, 1.0) : 1.0;
  return est;
}

/// Geometric sequence of n scales starting at `largest`, each half the previous.
inline std::vector<double> dyadic_scales(double largest, int n) {
  std::vector<double> s;
  for (int i = 0; i < n; ++i) s.push_back(std::ldexp(largest, -i));
  return s;
}

/// Resamples a polyline so consecutive points are at most `spacing` apart.
inline std::vector<Point> densify(const std::vector<Point>& polyline, double spacing) {
  std::vector<Point> out;
  if (polyline.empty()) return out;
  out.push_back(polyline.front());
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    const Point& a = polyline[i - 1];
    const Point& b = polyline[i];
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a).norm() / spacing)));
    for (int k = 1; k <= pieces; ++k) out.push_back(a + (b - a) * (double(k) / pieces));
  }
  return out;
}

}  // namespace qrtrig
