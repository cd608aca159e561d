#pragma once

// Explicit construction of the base map F on the half-beam
// [-1,1]^{d-1} x [0, inf), its extension to R^d by reflections, and the
// expanding map f = lambda F with its inverse branches.
//
// On the half-cube F = h3 o h2 o h1 where
//   h1: shift down by e_d           (half-cube B+ -> B-)
//   h2: x -> (|x|_inf / |x|_2) x    (B- -> lower half-ball U-)
//   h3: Cayley-type map built from T(z) = (z + i)/(i z + 1) acting on
//       z = |p(x)| + i x_d          (U- -> U+)
// Above the seam x_d = 1 the map is exp(x_d - 1) F(x', 1).

#include <algorithm>
#include <cmath>
#include <string>

#include "qrtrig/core.hpp"

namespace qrtrig {

inline constexpr double kDomainTol = 1e-12;
/// |x_d| beyond which exp(|x_d| - 1) would leave the double range.
inline constexpr double kMaxHeight = 700.0;

namespace detail {

inline void domain_fail(const char* who, const std::string& why) {
  throw DomainError(std::string(who) + ": " + why);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// h1 and its inverse

inline Point h1(const Point& x) {
  const auto d = x.size();
  if (d < 2) detail::domain_fail("h1", "dimension must be >= 2");
  if (x.head(d - 1).lpNorm<Eigen::Infinity>() > 1.0 + kDomainTol || x[d - 1] < -kDomainTol ||
      x[d - 1] > 1.0 + kDomainTol)
    detail::domain_fail("h1", "point outside the half-cube [-1,1]^{d-1} x [0,1]");
  Point y = x;
  y[d - 1] -= 1.0;
  return y;
}

inline Point h1_inv(const Point& y) {
  Point x = y;
  x[y.size() - 1] += 1.0;
  return x;
}

// ---------------------------------------------------------------------------
// h2: cube to ball, radial rescaling

inline Point h2(const Point& x) {
  const auto d = x.size();
  const double inf_norm = x.lpNorm<Eigen::Infinity>();
  if (inf_norm > 1.0 + kDomainTol || x[d - 1] > kDomainTol)
    detail::domain_fail("h2", "point outside the lower half-cube B-");
  const double two_norm = x.norm();
  if (two_norm < 1e-300) return Point::Zero(d);
  return (inf_norm / two_norm) * x;
}

inline Point h2_inv(const Point& y) {
  const auto d = y.size();
  if (y.norm() > 1.0 + kDomainTol || y[d - 1] > kDomainTol)
    detail::domain_fail("h2_inv", "point outside the lower half-ball U-");
  const double inf_norm = y.lpNorm<Eigen::Infinity>();
  if (inf_norm < 1e-300) return Point::Zero(d);
  return (y.norm() / inf_norm) * y;
}

// ---------------------------------------------------------------------------
// h3: lower half-ball to upper half-ball
//
// With a = |p(x)| and b = x_d, T(a + ib) = (2a + i(1 - a^2 - b^2)) / ((1-b)^2 + a^2),
// so the lateral part p/|p| Re T collapses to 2p / ((1-b)^2 + a^2), which is
// already the continuous extension at p = 0.

inline Point h3(const Point& x) {
  const auto d = x.size();
  if (x.norm() > 1.0 + kDomainTol || x[d - 1] > kDomainTol)
    detail::domain_fail("h3", "point outside the lower half-ball U-");
  const double b = x[d - 1];
  const double a2 = x.head(d - 1).squaredNorm();
  const double den = (1.0 - b) * (1.0 - b) + a2;
  Point y(d);
  y.head(d - 1) = (2.0 / den) * x.head(d - 1);
  y[d - 1] = (1.0 - a2 - b * b) / den;
  return y;
}

// T^{-1}(w) = (w - i)/(1 - i w) = (2c + i(|w|^2 - 1)) / ((1+e)^2 + c^2), w = c + ie.
inline Point h3_inv(const Point& y) {
  const auto d = y.size();
  if (y.norm() > 1.0 + kDomainTol || y[d - 1] < -kDomainTol)
    detail::domain_fail("h3_inv", "point outside the upper half-ball U+");
  const double e = y[d - 1];
  const double c2 = y.head(d - 1).squaredNorm();
  const double den = (1.0 + e) * (1.0 + e) + c2;
  Point x(d);
  x.head(d - 1) = (2.0 / den) * y.head(d - 1);
  x[d - 1] = (c2 + e * e - 1.0) / den;
  return x;
}

// ---------------------------------------------------------------------------
// Base map on the fundamental half-beam

inline bool in_half_beam(const Point& x, double tol = kDomainTol) {
  const auto d = x.size();
  return x.head(d - 1).lpNorm<Eigen::Infinity>() <= 1.0 + tol && x[d - 1] >= -tol;
}

/// h = h3 o h2 o h1 on the half-cube.
inline Point cube_to_ball(const Point& x) { return h3(h2(h1(x))); }

inline Point ball_to_cube(const Point& w) { return h1_inv(h2_inv(h3_inv(w))); }

inline Point base_F(const Point& x) {
  const auto d = x.size();
  if (d < 2) detail::domain_fail("base_F", "dimension must be >= 2");
  if (!x.allFinite() || !in_half_beam(x))
    detail::domain_fail("base_F", "point outside the half-beam [-1,1]^{d-1} x [0,inf)");
  const double xd = x[d - 1];
  if (xd <= 1.0) return cube_to_ball(x);
  if (xd - 1.0 > kMaxHeight) throw Overflow("base_F: height exceeds exponential range");
  Point top = x;
  top[d - 1] = 1.0;
  return std::exp(xd - 1.0) * cube_to_ball(top);
}

inline Point base_F_inv(const Point& w) {
  const auto d = w.size();
  if (!w.allFinite()) detail::domain_fail("base_F_inv", "non-finite input");
  if (w[d - 1] < -kDomainTol) detail::domain_fail("base_F_inv", "point below the plane x_d = 0");
  Point v = w;
  v[d - 1] = std::max(v[d - 1], 0.0);
  const double r = v.norm();
  Point x;
  if (r <= 1.0) {
    x = ball_to_cube(v);
  } else {
    Point unit = v / r;
    // Guard the unit sphere from rounding slightly outside the ball.
    if (unit.norm() > 1.0) unit /= unit.norm();
    x = ball_to_cube(unit);
    x[d - 1] = 1.0 + std::log(r);
  }
  // Snap rounding spill back into the closed half-beam.
  for (Eigen::Index j = 0; j + 1 < d; ++j) x[j] = std::clamp(x[j], -1.0, 1.0);
  x[d - 1] = std::max(x[d - 1], 0.0);
  return x;
}

// ---------------------------------------------------------------------------
// Reflection folding

struct FoldResult {
  Point folded;
  TrayIndex tray;
};

/// Folds x into the half-beam. Each lateral coordinate is shifted by the even
/// integer 2 r_j and possibly negated, which is exact in binary floating point.
inline FoldResult fold(const Point& x) {
  const auto d = x.size();
  FoldResult out;
  out.folded = x;
  out.tray.lateral.resize(static_cast<std::size_t>(d - 1));
  for (Eigen::Index j = 0; j + 1 < d; ++j) {
    // Beyond 2^53 doubles are spaced by at least 2, so the tray is not resolvable.
    if (!(std::abs(x[j]) < 0x1p53))
      throw Overflow("fold: |x_" + std::to_string(j + 1) + "| = " + std::to_string(std::abs(x[j])) +
                     " is beyond the resolvable tray range");
    const double rj = std::floor((x[j] + 1.0) / 2.0);
    double u = x[j] - 2.0 * rj;
    // x_j + 1 can round up across an odd integer; keep u in [-1, 1].
    if (u < -1.0) {
      u = x[j] - 2.0 * (rj - 1.0);
      out.tray.lateral[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(rj - 1.0);
    } else {
      out.tray.lateral[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(rj);
    }
    const bool odd = (out.tray.lateral[static_cast<std::size_t>(j)] % 2) != 0;
    out.folded[j] = odd ? -u : u;
  }
  out.tray.sign = x[d - 1] >= 0.0 ? 1 : -1;
  out.folded[d - 1] = out.tray.sign * x[d - 1];
  return out;
}

inline Point unfold(const Point& folded, const TrayIndex& r) {
  const auto d = folded.size();
  if (r.dim() != d) throw DomainError("unfold: tray dimension mismatch");
  Point x(d);
  for (Eigen::Index j = 0; j + 1 < d; ++j) {
    const auto rj = r.lateral[static_cast<std::size_t>(j)];
    const double u = (rj % 2 != 0) ? -folded[j] : folded[j];
    x[j] = 2.0 * static_cast<double>(rj) + u;
  }
  x[d - 1] = r.sign * folded[d - 1];
  return x;
}

inline TrayIndex tray_of(const Point& x) { return fold(x).tray; }

// ---------------------------------------------------------------------------
// Full map

/// F extended to R^d: fold, apply the base map, flip the height by (-1)^sigma.
inline Point F_full(const Point& x, double height_cap = kMaxHeight) {
  require_finite(x, "F");
  const auto d = x.size();
  if (std::abs(x[d - 1]) > height_cap)
    throw Overflow("F: |x_d| = " + std::to_string(std::abs(x[d - 1])) +
                   " exceeds height cap " + std::to_string(height_cap));
  auto [u, r] = fold(x);
  Point y = base_F(u);
  if (!r.sigma_even()) y[d - 1] = -y[d - 1];
  return y;
}

inline Point f(const Point& x, const MapParams& params, double height_cap = kMaxHeight) {
  if (x.size() != params.dim) throw DomainError("f: point dimension does not match params");
  return params.lambda * F_full(x, height_cap);
}

/// Inverse of f restricted to T(r).
inline Point lambda_branch(const TrayIndex& r, const Point& y, const MapParams& params) {
  const auto d = y.size();
  if (r.dim() != d || d != params.dim) throw DomainError("lambda_branch: dimension mismatch");
  require_finite(y, "lambda_branch");
  const int s = r.image_sign();
  if (s * y[d - 1] < -kDomainTol)
    throw WrongHalfSpace(-1, "WrongHalfSpace: tray " + to_string(r) + " maps onto H" +
                                 (s > 0 ? "+" : "-") + " but y_d = " + std::to_string(y[d - 1]));
  Point w = y / params.lambda;
  w[d - 1] = std::max(s * w[d - 1], 0.0);
  return unfold(base_F_inv(w), r);
}

}  // namespace qrtrig
