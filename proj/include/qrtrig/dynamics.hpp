#pragma once

// Orbits, itineraries, pullbacks along itineraries, hairs and their
// endpoints, the height ordering, and the absorbing region Omega.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qrtrig/basemap.hpp"
#include "qrtrig/core.hpp"

namespace qrtrig {

inline constexpr double kDefaultHeightCap = 300.0;

// ---------------------------------------------------------------------------
// Forward iteration

/// Tray label of an escaped point whose lateral coordinates exceed the
/// resolvable range; indices saturate at +-2^52.
inline TrayIndex clamped_tray(const Point& x) {
  const auto d = x.size();
  std::vector<std::int64_t> lat(static_cast<std::size_t>(d - 1));
  for (Eigen::Index j = 0; j + 1 < d; ++j)
    lat[static_cast<std::size_t>(j)] =
        static_cast<std::int64_t>(std::clamp(std::floor((x[j] + 1.0) / 2.0), -0x1p52, 0x1p52));
  return TrayIndex(std::move(lat), x[d - 1] >= 0.0 ? 1 : -1);
}

/// Iterates f up to n times. Escape is certified once |x_d| reaches the cap,
/// since then |f(x)| = lambda exp(|x_d| - 1) is astronomically large.
inline OrbitRecord iterate(const Point& x, int n, const MapParams& params,
                           double height_cap = kDefaultHeightCap) {
  if (n < 0) throw DomainError("iterate: n must be >= 0");
  if (!(height_cap >= params.lambda * std::numbers::e))
    throw DomainError("iterate: height_cap must be >= lambda*e");
  if (height_cap > kMaxHeight) throw DomainError("iterate: height_cap beyond exponential range");
  require_finite(x, "iterate");

  OrbitRecord rec;
  Point cur = x;
  for (int k = 0;; ++k) {
    const double h = std::abs(height(cur));
    TrayIndex r;
    try {
      r = tray_of(cur);
    } catch (const Overflow&) {
      if (h < height_cap) {
        // Lateral blow-up below the height cap: the orbit leaves the
        // resolvable range without an escape certificate.
        if (k == 0) throw;
        rec.status = Undecided{};
        return rec;
      }
      r = clamped_tray(cur);
    }
    rec.points.push_back(cur);
    rec.trays.push_back(std::move(r));
    rec.heights.push_back(h);
    if (h >= height_cap) {
      rec.status = Escaped{k};
      return rec;
    }
    if (k == n) break;
    cur = f(cur, params, height_cap);
  }
  if (n >= 1 && rec.points.back().norm() <= params.lambda)
    rec.status = Bounded{};
  else
    rec.status = Undecided{};
  return rec;
}

struct ItineraryPrefix {
  std::vector<TrayIndex> symbols;
  /// Set when the orbit hit the height cap before k symbols were produced.
  bool truncated = false;
};

inline ItineraryPrefix itinerary_of(const Point& x, int k, const MapParams& params,
                                    double height_cap = kDefaultHeightCap) {
  if (k < 0) throw DomainError("itinerary_of: k must be >= 0");
  ItineraryPrefix out;
  Point cur = x;
  for (int j = 0; j < k; ++j) {
    try {
      out.symbols.push_back(tray_of(cur));
    } catch (const Overflow&) {
      out.truncated = true;
      break;
    }
    if (j + 1 == k) break;
    if (std::abs(height(cur)) >= height_cap) {
      out.truncated = true;
      break;
    }
    cur = f(cur, params, height_cap);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pullbacks

/// Intermediates of Lambda^{s_0} o ... o Lambda^{s_{k-1}} applied to target:
/// chain[j] lies in T(s_j) for j < k, chain[k] is the target.
inline std::vector<Point> pullback_chain(const Itinerary& it, int depth, const Point& target,
                                         const MapParams& params) {
  if (depth < 1) throw DomainError("pullback: depth must be >= 1");
  if (target.size() != it.dim() || it.dim() != params.dim)
    throw DomainError("pullback: dimension mismatch");
  std::vector<Point> chain(static_cast<std::size_t>(depth) + 1);
  chain[static_cast<std::size_t>(depth)] = target;
  for (int j = depth - 1; j >= 0; --j) {
    const auto& r = it.at(static_cast<std::size_t>(j));
    try {
      chain[static_cast<std::size_t>(j)] =
          lambda_branch(r, chain[static_cast<std::size_t>(j) + 1], params);
    } catch (const WrongHalfSpace& e) {
      throw WrongHalfSpace(j, "pullback step " + std::to_string(j) + ": " + e.what());
    }
  }
  return chain;
}

inline Point pullback(const Itinerary& it, int depth, const Point& target,
                      const MapParams& params) {
  return pullback_chain(it, depth, target, params).front();
}

/// Anchor for depth k: centre of T(s_k) lifted to height t on the side of s_k.
inline Point hair_anchor(const Itinerary& it, int k, double t) {
  const auto& r = it.at(static_cast<std::size_t>(k));
  Point z = r.center();
  z[z.size() - 1] = r.sign * t;
  return z;
}

/// Random admissible itinerary: `length` prefix symbols with lateral entries
/// uniform in [-bound, bound], followed by a fixed symbol whose lateral sum is
/// even (so it is its own admissible successor).
inline Itinerary random_itinerary(int dim, int length, std::int64_t bound, Sampler& rng) {
  auto random_lateral = [&] {
    std::vector<std::int64_t> lat(static_cast<std::size_t>(dim - 1));
    for (auto& v : lat) v = rng.uniform_int(-bound, bound);
    return lat;
  };
  std::vector<TrayIndex> prefix;
  int sign = rng.uniform() < 0.5 ? 1 : -1;
  for (int i = 0; i < length; ++i) {
    prefix.emplace_back(random_lateral(), sign);
    sign = prefix.back().image_sign();
  }
  auto lat = random_lateral();
  std::int64_t sum = 0;
  for (auto v : lat) sum += v;
  if (sum % 2 != 0) lat[0] += (lat[0] < bound) ? 1 : -1;
  return Itinerary(dim, std::move(prefix), {TrayIndex(std::move(lat), sign)});
}

// ---------------------------------------------------------------------------
// Endpoints

struct EndpointResult {
  Point point;
  double residual = 0.0;
  int depth = 0;
  /// increments[k-1] = |p_k - p_{k-1}|, with p_0 the depth-0 anchor.
  std::vector<double> increments;
};

/// Whether the depth-k increment can be nonzero. When s_k has zero lateral
/// part its anchor is the origin, Lambda^{s_{k-1}}(0) is exactly the previous
/// anchor, and the increment vanishes identically.
inline bool informative_depth(const Itinerary& it, int k) {
  const auto& lat = it.at(static_cast<std::size_t>(k)).lateral;
  return std::any_of(lat.begin(), lat.end(), [](auto v) { return v != 0; });
}

/// True when every symbol from index k on has zero lateral part; the
/// height-0 pullbacks are then constant from depth k - 1 on.
inline bool zero_lateral_tail(const Itinerary& it, int k) {
  const std::size_t n = it.prefix().size() + it.cycle().size();
  const auto first = static_cast<std::size_t>(k);
  const std::size_t last = std::max(n, first) + it.cycle().size();
  for (std::size_t j = first; j < last; ++j)
    if (informative_depth(it, static_cast<int>(j))) return false;
  return true;
}

/// Pulls back height-0 tray centres at increasing depth until an informative
/// Cauchy increment drops below tol.
inline EndpointResult endpoint(const Itinerary& it, double tol, int max_depth,
                               const MapParams& params) {
  if (!(tol > 0.0)) throw DomainError("endpoint: tol must be > 0");
  if (max_depth < 1) throw DomainError("endpoint: max_depth must be >= 1");
  EndpointResult res;
  Point prev = hair_anchor(it, 0, 0.0);
  for (int k = 1; k <= max_depth; ++k) {
    Point cur = pullback(it, k, hair_anchor(it, k, 0.0), params);
    const double inc = (cur - prev).norm();
    res.increments.push_back(inc);
    res.point = cur;
    res.residual = inc;
    res.depth = k;
    if (zero_lateral_tail(it, k + 1)) return res;
    if (inc <= tol && informative_depth(it, k)) return res;
    prev = std::move(cur);
  }
  throw NoConvergence(res.residual, "NoConvergence: endpoint residual " +
                                        std::to_string(res.residual) + " > tol after depth " +
                                        std::to_string(max_depth));
}

/// Geometric decay rate of the increments: exp of the least-squares slope of
/// log(increment) against depth, over informative depths >= from_depth whose
/// increment is above the rounding floor. Returns NaN with fewer than two
/// usable depths.
inline double increment_decay_rate(const Itinerary& it, const std::vector<double>& increments,
                                   int from_depth, double floor = 1e-13) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < increments.size(); ++i) {
    const int k = static_cast<int>(i) + 1;
    if (k < from_depth || !informative_depth(it, k) || !(increments[i] > floor)) continue;
    pts.emplace_back(static_cast<double>(k), std::log(increments[i]));
  }
  if (pts.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  return std::exp((sxy - sx * sy / n) / (sxx - sx * sx / n));
}

// ---------------------------------------------------------------------------
// Hairs

struct HairSample {
  double t;
  Point point;
};

struct HairTrace {
  Itinerary itinerary;
  int depth;
  std::vector<HairSample> samples;
  Point endpoint_estimate;
  /// Cauchy increment of the height-0 pullbacks at the trace depth.
  double residual;
  /// Empirical constant with increment(k) <= C alpha^{-k} for all k <= depth.
  double contraction_constant;
};

inline HairTrace hair_trace(const Itinerary& it, int depth, double t_max, int n_samples,
                            const MapParams& params) {
  if (!(t_max > 0.0)) throw DomainError("hair_trace: t_max must be > 0");
  if (n_samples < 2) throw DomainError("hair_trace: n_samples must be >= 2");
  if (depth < 1) throw DomainError("hair_trace: depth must be >= 1");

  std::vector<HairSample> samples;
  samples.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    const double t = t_max * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    samples.push_back({t, pullback(it, depth, hair_anchor(it, depth, t), params)});
  }

  // Height-0 pullbacks past the trace depth until the increments reach the
  // rounding floor. The residual is the largest increment from the trace depth
  // on, which also covers depths whose increment vanishes identically.
  std::vector<double> incs;
  Point prev = hair_anchor(it, 0, 0.0);
  Point cur = prev;
  const int extra = 60;
  int quiet = 0;
  for (int k = 1; k <= depth + extra; ++k) {
    cur = pullback(it, k, hair_anchor(it, k, 0.0), params);
    const double inc = (cur - prev).norm();
    incs.push_back(inc);
    prev = cur;
    if (k <= depth) continue;
    if (informative_depth(it, k)) quiet = inc <= 1e-15 * std::max(1.0, cur.norm()) ? quiet + 1 : 0;
    if (quiet >= 3 || zero_lateral_tail(it, k + 1)) break;
  }
  double residual = 0.0;
  double c = 0.0;
  for (std::size_t i = 0; i < incs.size(); ++i) {
    const int k = static_cast<int>(i) + 1;
    if (k >= depth) residual = std::max(residual, incs[i]);
    c = std::max(c, incs[i] * std::pow(params.alpha_hat, k));
  }

  return HairTrace{it, depth, std::move(samples), cur, residual, c};
}

// ---------------------------------------------------------------------------
// Ordering

enum class Order { Less, Greater, Incomparable };

struct OrderResult {
  Order order = Order::Incomparable;
  /// Step at which the height gap first exceeded M (or k_max when incomparable).
  int step = 0;
  bool persistence_violation = false;
};

inline const char* to_string(Order o) {
  switch (o) {
    case Order::Less: return "Less";
    case Order::Greater: return "Greater";
    default: return "Incomparable";
  }
}

/// x < y when some iterate has |y_d^k| > |x_d^k| + M. An orbit that reaches
/// the height cap is treated as having height +inf from then on.
inline OrderResult order_compare(const Point& x, const Point& y, const MapParams& params,
                                 int k_max, double height_cap = kDefaultHeightCap) {
  const double m = params.m_hat;
  const double inf = std::numeric_limits<double>::infinity();
  Point a = x, b = y;
  bool a_esc = false, b_esc = false;
  auto advance = [&](Point& p, bool& esc) {
    if (esc) return;
    if (std::abs(height(p)) >= height_cap) {
      esc = true;
      return;
    }
    p = f(p, params, height_cap);
  };
  auto h = [&](const Point& p, bool esc) { return esc ? inf : std::abs(height(p)); };

  OrderResult res;
  res.step = k_max;
  int trigger = -1;
  for (int k = 0;; ++k) {
    const double ha = h(a, a_esc), hb = h(b, b_esc);
    if (trigger < 0) {
      if (k > k_max) break;
      if (hb > ha + m) res.order = Order::Less;
      if (ha > hb + m) res.order = Order::Greater;
      if (res.order != Order::Incomparable) {
        trigger = k;
        res.step = k;
      }
    } else {
      const bool holds = res.order == Order::Less ? hb > ha + m : ha > hb + m;
      if (!holds) res.persistence_violation = true;
    }
    if (trigger >= 0 && k >= trigger + 3) break;
    advance(a, a_esc);
    advance(b, b_esc);
    if (a_esc && b_esc) break;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Omega

inline double omega_profile(double t) { return std::exp(std::sqrt(std::log(t))); }

inline bool in_omega(const Point& x, const MapParams& params) {
  const double hd = std::abs(height(x));
  if (!(hd >= params.m_hat)) return false;
  return lateral(x).norm() <= omega_profile(hd);
}

}  // namespace qrtrig
