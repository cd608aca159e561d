#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "qrtrig/analysis.hpp"
#include "qrtrig/verify.hpp"

using namespace qrtrig;

namespace {

// Closed-form DF on the half-beam for d = 2. h2 is linear on each sector
// {|a| >= |b|} and {|a| < |b|}; h3 is the Moebius map T(z) = (z+i)/(iz+1)
// with T'(z) = 2/(iz+1)^2.
Matrix analytic_DF2(const Point& x) {
  const bool above = x[1] > 1.0;
  const double a = x[0], b = (above ? 1.0 : x[1]) - 1.0;
  const double r = std::hypot(a, b);
  const double s = std::max(std::abs(a), std::abs(b));
  Eigen::Vector2d grad_s = std::abs(a) >= std::abs(b) ? Eigen::Vector2d(a > 0 ? 1 : -1, 0)
                                                      : Eigen::Vector2d(0, b > 0 ? 1 : -1);
  const Eigen::Vector2d v(a, b);
  const Eigen::Vector2d grad_ratio = grad_s / r - s * v / (r * r * r);
  const Eigen::Matrix2d dh2 = (s / r) * Eigen::Matrix2d::Identity() + v * grad_ratio.transpose();
  const Eigen::Vector2d w = (s / r) * v;
  const std::complex<double> z(w[0], w[1]), i(0, 1);
  const std::complex<double> dt = 2.0 / ((i * z + 1.0) * (i * z + 1.0));
  Eigen::Matrix2d dh3;
  dh3 << dt.real(), -dt.imag(), dt.imag(), dt.real();
  Eigen::Matrix2d dh = dh3 * dh2;
  if (!above) return dh;
  const double g = std::exp(x[1] - 1.0);
  Matrix out(2, 2);
  out.col(0) = g * dh.col(0);
  out.col(1) = base_F(x);
  return out;
}

}  // namespace

TEST(SingularRange, Examples) {
  const auto id = singular_range(Matrix::Identity(3, 3));
  EXPECT_NEAR(id.smallest, 1.0, 1e-15);
  EXPECT_NEAR(id.largest, 1.0, 1e-15);
  Matrix d(2, 2);
  d << 2, 0, 0, 0.5;
  const auto sd = singular_range(d);
  EXPECT_NEAR(sd.smallest, 0.5, 1e-15);
  EXPECT_NEAR(sd.largest, 2.0, 1e-15);
  Sampler s(1);
  Matrix m(4, 4);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = s.uniform(-1, 1);
  const Matrix q = Eigen::HouseholderQR<Matrix>(m).householderQ();
  const auto sq = singular_range(q);
  EXPECT_NEAR(sq.smallest, 1.0, 1e-10);
  EXPECT_NEAR(sq.largest, 1.0, 1e-10);
}

TEST(JacobianFd, MatchesClosedFormInDimensionTwo) {
  Sampler s(2);
  int used = 0;
  while (used < 2000) {
    const Point x = make_point({s.uniform(-1, 1), s.uniform(0, 3)});
    if (smooth_margin(x) < 1e-3) continue;
    ++used;
    const Matrix fd = jacobian_fd(x).matrix;
    const Matrix an = analytic_DF2(x);
    EXPECT_LE((fd - an).norm(), 1e-7 * an.norm()) << "at " << x.transpose();
  }
}

TEST(JacobianFd, AxisRadialColumn) {
  for (int d = 2; d <= 3; ++d) {
    Point x = Point::Zero(d);
    x[d - 1] = 1.5;
    const Matrix j = jacobian_fd(x).matrix;
    const Point fx = base_F(x);
    EXPECT_LE((j.col(d - 1) - fx).norm(), 1e-5 * fx.norm());
  }
}

TEST(JacobianFd, SecondOrderRichardsonRatio) {
  const Point x = make_point({0.3, 0.4});
  const Matrix a = jacobian_fd(x, 1e-3).matrix;
  const Matrix b = jacobian_fd(x, 5e-4).matrix;
  const Matrix c = jacobian_fd(x, 2.5e-4).matrix;
  const double ratio = (a - b).norm() / (b - c).norm();
  EXPECT_NEAR(ratio, 4.0, 1.0);
}

TEST(JacobianFd, ExponentialScaling) {
  const Check c = criterion_derivative_scaling(2);
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(JacobianFd, Preconditions) {
  EXPECT_THROW(jacobian_fd(make_point({0.99999, 0.5})), TooCloseToFold);
  EXPECT_THROW(jacobian_fd(make_point({0.3, 1.0 + 1e-6})), TooCloseToFold);
  EXPECT_THROW(jacobian_fd(make_point({0.3, 0.5}), 1e-2), DomainError);
  try {
    jacobian_fd(make_point({0.3, 1e-6}));
    FAIL();
  } catch (const TooCloseToFold& e) {
    EXPECT_NEAR(e.distance(), 1e-6, 1e-12);
  }
}

TEST(EstimateBeta, PositiveAndAStableSampleMinimum) {
  const auto a = estimate_beta(2, 100000, 1);
  const auto oracle = estimate_beta(2, 1000000, 3);
  EXPECT_GT(a.beta_hat, 0.0);
  EXPECT_LE(std::abs(a.beta_hat - oracle.beta_hat), 0.05 * oracle.beta_hat);
  EXPECT_LE(oracle.beta_hat, a.beta_hat * (1 + 0.05));
}

TEST(EstimateBeta, MinimumOverASuperset) {
  // Same seed, more samples: the longer stream extends the shorter one, so
  // its minimum can only be lower.
  const auto small = estimate_beta(2, 10000, 4);
  const auto large = estimate_beta(2, 20000, 4);
  EXPECT_LE(large.beta_hat, small.beta_hat);
  EXPECT_EQ(small.beta_hat, singular_range(jacobian_fd(small.argmin).matrix).smallest);
  EXPECT_GT(large.used, 19000);
}

TEST(EstimateDilatation, FiniteAndAboveOne) {
  for (int d : {2, 3}) {
    const auto k = estimate_dilatation(d, 20000, 1);
    EXPECT_TRUE(std::isfinite(k.k_hat) && std::isfinite(k.k_o_hat) && std::isfinite(k.k_i_hat));
    EXPECT_GE(k.k_hat, 1.0);
    EXPECT_GE(k.k_o_hat, 1.0);
    EXPECT_GE(k.k_i_hat, 1.0);
    EXPECT_TRUE(k.consistent);
    EXPECT_EQ(k.nonpositive_jacobians, 0);
  }
}

TEST(EstimateDilatation, RatiosInvariantInExponentialZone) {
  for (double u : {0.0, 0.4, -0.7}) {
    const auto a = singular_range(jacobian_fd(make_point({u, 1.5})).matrix);
    const auto b = singular_range(jacobian_fd(make_point({u, 2.5})).matrix);
    EXPECT_NEAR(a.largest / a.smallest, b.largest / b.smallest, 1e-6 * a.largest / a.smallest);
  }
}

TEST(EstimateDelta, PositiveAndBoundedByInverseBeta) {
  const double beta = estimate_beta(2, 50000, 1).beta_hat;
  const MapParams p = validate_params(2, 1.1 / beta, beta);
  const auto d1 = estimate_delta(p, 20000, 1);
  const auto d2 = estimate_delta(p, 20000, 2);
  EXPECT_GT(d1.delta_hat, 0.0);
  EXPECT_LE(d1.max_norm_times_sigma_max, 1.0 / beta * 1.05);
  EXPECT_LE(std::abs(d1.delta_hat - d2.delta_hat), 0.1 * d1.delta_hat);
}

TEST(CalibrateM, FloorAndViolations) {
  const double beta = 0.256;
  const MapParams p = validate_params(2, 2.0 / beta, beta);
  const double m = calibrate_M(p, 1000, 6, 1);
  EXPECT_GE(m, p.m_floor());
  const auto fresh = sample_orbit_pairs(p, 1000, 6, 99);
  EXPECT_TRUE(lemma1_violations(p, m, fresh).empty());
  EXPECT_FALSE(lemma1_violations(p, 0.0, fresh).empty());
}

TEST(CalibrateM, GrowthConclusionHoldsOnSampledPairs) {
  const MapParams p = validate_params(3, 2.0 / 0.19, 0.19);
  const auto pairs = sample_orbit_pairs(p, 500, 6, 5);
  EXPECT_TRUE(lemma1_violations(p, p.m_floor(), pairs).empty());
}

TEST(BoxCount, Controls) {
  const auto seg = box_count(segment_points(10000), dyadic_scales(0.25, 8));
  EXPECT_NEAR(seg.slope, 1.0, 0.05);
  const auto sq = box_count(square_points(100), dyadic_scales(0.5, 6));
  EXPECT_NEAR(sq.slope, 2.0, 0.1);
  EXPECT_GE(sq.r2, 0.99);
}

TEST(BoxCount, AxisHairIsASegment) {
  const MapParams p = validate_params(2, 8.0, 0.25);
  const HairTrace h = hair_trace(Itinerary::constant(TrayIndex::origin(2)), 10, 1e3, 500, p);
  std::vector<Point> poly;
  for (const auto& s : h.samples) poly.push_back(s.point);
  Point lo = poly.front(), hi = poly.front();
  for (const auto& q : poly) {
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  const double extent = (hi - lo).maxCoeff();
  ASSERT_GT(extent, 0.0);
  EXPECT_EQ(hi[0], 0.0);
  EXPECT_EQ(lo[0], 0.0);
  const auto pts = densify(poly, extent * 1e-4);
  const double top = std::ldexp(1.0, static_cast<int>(std::floor(std::log2(extent / 8))));
  const auto est = box_count(pts, dyadic_scales(top, 6));
  EXPECT_NEAR(est.slope, 1.0, 0.15);
}

TEST(BoxCount, MonotoneCountsProperty) {
  Sampler s(9);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Point> pts;
    for (int i = 0; i < 2000; ++i) pts.push_back(make_point({s.uniform(0, 1), s.uniform(0, 1), s.uniform(0, 0.01)}));
    const auto est = box_count(pts, dyadic_scales(0.5, 8));
    for (std::size_t i = 1; i < est.counts.size(); ++i) {
      EXPECT_GE(est.counts[i], est.counts[i - 1]);
      EXPECT_LE(est.counts[i], 8 * est.counts[i - 1]);
    }
    EXPECT_GE(est.r2, 0.0);
    EXPECT_LE(est.r2, 1.0);
  }
}

TEST(BoxCount, Errors) {
  std::vector<Point> few(50, make_point({0, 0}));
  EXPECT_THROW(box_count(few, dyadic_scales(1, 5)), DomainError);
  std::vector<Point> same(200, make_point({0.1, 0.1}));
  EXPECT_THROW(box_count(same, dyadic_scales(1, 5)), DegenerateFit);
  EXPECT_THROW(box_count(segment_points(200), {0.5, 0.25, 0.25, 0.1}), DomainError);
  EXPECT_THROW(box_count(segment_points(200), {0.5, 0.25, 0.1}), DomainError);
}

TEST(Densify, SpacingBound) {
  const std::vector<Point> poly{make_point({0, 0}), make_point({1, 0}), make_point({1, 2})};
  const auto d = densify(poly, 0.01);
  for (std::size_t i = 1; i < d.size(); ++i) EXPECT_LE((d[i] - d[i - 1]).norm(), 0.01 + 1e-15);
  EXPECT_EQ(d.back(), poly.back());
}
