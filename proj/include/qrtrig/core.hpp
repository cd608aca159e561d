#pragma once

// Shared domain types for the trigonometric-analog map and its dynamics.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace qrtrig {

inline constexpr const char* kVersion = "0.1.0";

/// A point of R^d. Coordinates are indexed 0..d-1; the last one is the height.
using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NotExpanding : public Error {
 public:
  NotExpanding(double min_lambda, const std::string& what)
      : Error(what), min_lambda_(min_lambda) {}
  double min_lambda() const { return min_lambda_; }

 private:
  double min_lambda_;
};

class WrongHalfSpace : public Error {
 public:
  WrongHalfSpace(int step, const std::string& what) : Error(what), step_(step) {}
  /// Pullback step at which the parity precondition failed (-1 for a single branch).
  int step() const { return step_; }

 private:
  int step_;
};

class Overflow : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  NoConvergence(double residual, const std::string& what)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class TooCloseToFold : public Error {
 public:
  TooCloseToFold(double distance, const std::string& what)
      : Error(what), distance_(distance) {}
  double distance() const { return distance_; }

 private:
  double distance_;
};

class DegenerateFit : public Error {
 public:
  using Error::Error;
};

class InvalidItinerary : public Error {
 public:
  InvalidItinerary(std::size_t index, const std::string& what)
      : Error(what), index_(index) {}
  /// Position (along prefix·cycle) of the first element of the offending pair.
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

// ---------------------------------------------------------------------------
// Small helpers

inline Point make_point(std::initializer_list<double> coords) {
  Point p(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) p[i++] = c;
  return p;
}

inline int dim_of(const Point& x) { return static_cast<int>(x.size()); }

inline double height(const Point& x) { return x[x.size() - 1]; }

/// Lateral projection p(x) = (x_1, ..., x_{d-1}).
inline Eigen::VectorXd lateral(const Point& x) { return x.head(x.size() - 1); }

inline bool all_finite(const Point& x) { return x.allFinite(); }

inline void require_finite(const Point& x, const char* who) {
  if (!x.allFinite()) throw DomainError(std::string(who) + ": non-finite coordinate");
}

// ---------------------------------------------------------------------------
// TrayIndex

/// Label r = (r_1, ..., r_{d-1}, r_d) of the beam
/// T(r) = { |x_j - 2 r_j| <= 1 (j < d), r_d x_d >= 0 }.
struct TrayIndex {
  std::vector<std::int64_t> lateral;
  int sign = 1;

  TrayIndex() = default;
  TrayIndex(std::vector<std::int64_t> lat, int s) : lateral(std::move(lat)), sign(s) {
    if (s != 1 && s != -1) throw DomainError("TrayIndex: sign must be +1 or -1");
  }

  static TrayIndex origin(int dim) {
    return TrayIndex(std::vector<std::int64_t>(static_cast<std::size_t>(dim - 1), 0), 1);
  }

  int dim() const { return static_cast<int>(lateral.size()) + 1; }

  /// sigma(r) = sum of lateral entries + (r_d - 1)/2.
  std::int64_t sigma() const {
    std::int64_t s = 0;
    for (auto v : lateral) s += v;
    return s + (sign - 1) / 2;
  }

  bool sigma_even() const { return sigma() % 2 == 0; }

  /// +1 when f maps the tray onto the upper half-space, -1 for the lower one.
  int image_sign() const { return sigma_even() ? 1 : -1; }

  /// Tray centre on the plane x_d = 0.
  Point center() const {
    Point c = Point::Zero(dim());
    for (std::size_t j = 0; j < lateral.size(); ++j)
      c[static_cast<Eigen::Index>(j)] = 2.0 * static_cast<double>(lateral[j]);
    return c;
  }

  bool contains(const Point& x, double tol = 1e-12) const {
    for (std::size_t j = 0; j < lateral.size(); ++j) {
      double off = x[static_cast<Eigen::Index>(j)] - 2.0 * static_cast<double>(lateral[j]);
      if (std::abs(off) > 1.0 + tol) return false;
    }
    return sign * height(x) >= -tol;
  }

  friend bool operator==(const TrayIndex&, const TrayIndex&) = default;
  friend auto operator<=>(const TrayIndex&, const TrayIndex&) = default;
};

/// Parity rule for consecutive symbols: the successor lies in the half-space
/// that T(current) is mapped onto.
inline bool admissible_successor(const TrayIndex& current, const TrayIndex& next) {
  return next.sign == current.image_sign();
}

inline std::string to_string(const TrayIndex& r) {
  std::string s = "((";
  for (std::size_t j = 0; j < r.lateral.size(); ++j) {
    if (j) s += ",";
    s += std::to_string(r.lateral[j]);
  }
  s += r.sign > 0 ? "),+1)" : "),-1)";
  return s;
}

// ---------------------------------------------------------------------------
// Itinerary

/// Eventually periodic symbolic address prefix · cycle^infinity.
class Itinerary {
 public:
  Itinerary(int dim, std::vector<TrayIndex> prefix, std::vector<TrayIndex> cycle)
      : dim_(dim), prefix_(std::move(prefix)), cycle_(std::move(cycle)) {
    validate();
  }

  static Itinerary constant(const TrayIndex& r) { return Itinerary(r.dim(), {}, {r}); }

  int dim() const { return dim_; }
  const std::vector<TrayIndex>& prefix() const { return prefix_; }
  const std::vector<TrayIndex>& cycle() const { return cycle_; }

  /// Symbol s_k.
  const TrayIndex& at(std::size_t k) const {
    if (k < prefix_.size()) return prefix_[k];
    return cycle_[(k - prefix_.size()) % cycle_.size()];
  }

 private:
  void validate() const {
    if (dim_ < 2) throw InvalidItinerary(0, "itinerary: dim must be >= 2");
    if (cycle_.empty()) throw InvalidItinerary(0, "itinerary: cycle must be non-empty");
    auto check_dim = [&](const TrayIndex& r, std::size_t i) {
      if (r.dim() != dim_)
        throw InvalidItinerary(i, "itinerary: symbol " + std::to_string(i) +
                                      " has lateral length " +
                                      std::to_string(r.lateral.size()) + ", expected " +
                                      std::to_string(dim_ - 1));
    };
    const std::size_t n = prefix_.size() + cycle_.size();
    for (std::size_t i = 0; i < n; ++i) check_dim(at(i), i);
    // Pairs along prefix·cycle, then the wrap pair (last cycle -> first cycle).
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = (i + 1 < n) ? i + 1 : prefix_.size();
      if (!admissible_successor(at(i), at(j)))
        throw InvalidItinerary(
            i, "itinerary: parity violation between index " + std::to_string(i) + " " +
                   to_string(at(i)) + " and index " + std::to_string(j) + " " +
                   to_string(at(j)));
    }
  }

  int dim_;
  std::vector<TrayIndex> prefix_;
  std::vector<TrayIndex> cycle_;
};

// ---------------------------------------------------------------------------
// MapParams

struct MapParams {
  int dim = 2;
  double lambda = 1.0;
  double beta_hat = 1.0;
  double alpha_hat = 1.0;
  double m_hat = std::numbers::e;
  std::optional<double> delta_hat;
  std::optional<double> k_hat;

  /// Floor max{e, 4 lambda} for the ordering constant.
  double m_floor() const { return std::max(std::numbers::e, 4.0 * lambda); }
};

inline MapParams validate_params(int dim, double lambda, double beta_hat) {
  if (dim < 2) throw DomainError("validate_params: dim must be >= 2");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw DomainError("validate_params: lambda must be positive");
  if (!(beta_hat > 0.0) || !std::isfinite(beta_hat))
    throw DomainError("validate_params: beta_hat must be positive");
  const double alpha = lambda * beta_hat;
  if (!(alpha > 1.0)) {
    const double min_lambda = 1.0 / beta_hat;
    throw NotExpanding(min_lambda, "NotExpanding: lambda*beta_hat = " + std::to_string(alpha) +
                                       " <= 1; lambda must exceed " +
                                       std::to_string(min_lambda));
  }
  MapParams p;
  p.dim = dim;
  p.lambda = lambda;
  p.beta_hat = beta_hat;
  p.alpha_hat = alpha;
  p.m_hat = p.m_floor();
  return p;
}

/// Raises the ordering constant; never below max{e, 4 lambda}.
inline MapParams with_m_hat(MapParams p, double m) {
  p.m_hat = std::max(p.m_floor(), m);
  return p;
}

// ---------------------------------------------------------------------------
// OrbitRecord

struct Escaped {
  int step;
};
struct Bounded {};
struct Undecided {};
using OrbitStatus = std::variant<Escaped, Bounded, Undecided>;

struct OrbitRecord {
  std::vector<Point> points;
  std::vector<TrayIndex> trays;
  std::vector<double> heights;
  OrbitStatus status = Undecided{};

  bool escaped() const { return std::holds_alternative<Escaped>(status); }
  std::optional<int> escape_step() const {
    if (auto* e = std::get_if<Escaped>(&status)) return e->step;
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Seeded sampling

/// Deterministic uniform stream. mt19937_64 is fully specified by the
/// standard, and the 53-bit mantissa conversion below avoids the
/// implementation-defined distributions of <random>.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

  /// Uniform point in the box prod [lo_j, hi_j].
  Point point_in_box(const Point& lo, const Point& hi) {
    Point p(lo.size());
    for (Eigen::Index j = 0; j < lo.size(); ++j) p[j] = uniform(lo[j], hi[j]);
    return p;
  }

 private:
  std::mt19937_64 engine_;
};

inline Sampler seeded_sampler(std::uint64_t seed) { return Sampler(seed); }

}  // namespace qrtrig
