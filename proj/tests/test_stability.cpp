#include <cmath>
#include <limits>
#include <random>

#include <boost/math/tools/roots.hpp>
#include <gtest/gtest.h>

#include "mprk/stability.hpp"
#include "test_support.hpp"

using namespace mprk;
using mprk::test::code_of;
using mprk::test::open_closed;
using mprk::test::random_variant;
using mprk::test::vec;

namespace {

const SchemeParams kNcsHalf(0.5, StageVariant::NonConservativeStages);

// Independent root of R0(xi, .) = -1 on z_b < 0 by plain bisection.
double boundary_by_bisection(double xi, double alpha) {
  const auto g = [&](double zb) { return stability_r0({xi, zb}, alpha) + 1.0; };
  double lo = -1.0;
  while (g(lo) > 0.0) lo *= 2.0;
  const auto r = boost::math::tools::bisect(g, lo, 0.0, boost::math::tools::eps_tolerance<double>(52));
  return 0.5 * (r.first + r.second);
}

}  // namespace

TEST(StabilityR1, Examples) {
  for (double alpha : {0.5, 1.0, 3.0}) EXPECT_EQ(stability_r1({0, 0}, alpha), 1.0);
  EXPECT_NEAR(stability_r1({-0.5, -0.5}, 1.0), 0.375, 1e-15);
}

TEST(StabilityR1, BoundedAndSumDependent) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> z(-1e3, 0.0);
  std::uniform_real_distribution<double> al(0.5, 5.0);
  for (int i = 0; i < 100000; ++i) {
    const double za = z(rng), zb = z(rng), alpha = al(rng);
    if (za == 0.0 || zb == 0.0) continue;
    const double r = stability_r1({za, zb}, alpha);
    ASSERT_LT(std::abs(r), 1.0) << za << " " << zb << " " << alpha;
    ASSERT_EQ(r, stability_r1({za + zb, 0.0}, alpha));
  }
}

TEST(StabilityR0, Examples) {
  for (double alpha : {0.5, 1.0, 3.0}) EXPECT_EQ(stability_r0({0, 0}, alpha), 1.0);
  EXPECT_NEAR(stability_r0({-0.5, -0.5}, 1.0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(stability_r0({-1, -1}, 0.5), -1.0 / 9.0, 1e-15);
}

TEST(StabilityR0, BoundsAndSymmetry) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> z(-1e3, 0.0);
  std::uniform_real_distribution<double> al(0.5, 5.0);
  for (int i = 0; i < 100000; ++i) {
    const double za = z(rng), zb = z(rng), alpha = al(rng);
    if (za == 0.0 || zb == 0.0) continue;
    const double r = stability_r0({za, zb}, alpha);
    ASSERT_GT(r, -1.0 / alpha) << za << " " << zb << " " << alpha;
    ASSERT_LT(r, 1.0);
    ASSERT_EQ(r, stability_r0({zb, za}, alpha));
  }
}

TEST(StabilityR0, StrictlyIncreasingInEachArgument) {
  for (double alpha : {0.5, 0.8, 1.0, 2.0}) {
    for (double zb : {-0.01, -1.0, -7.0, -40.0}) {
      double prev = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < 500; ++k) {
        const double za = -50.0 + 0.1 * k;
        const double r = stability_r0({za, zb}, alpha);
        EXPECT_GT(r, prev) << "alpha " << alpha << " z_a " << za << " z_b " << zb;
        prev = r;
      }
    }
  }
}

TEST(BoundaryF, CrossesDiagonalAtClosedForms) {
  const double xi_half = -(3.0 + std::sqrt(17.0)) / 2.0;
  EXPECT_NEAR(boundary_f(xi_half, 0.5), xi_half, 1e-10);
  const double xi_08 = -(9.0 + std::sqrt(101.0)) / 2.0;
  EXPECT_NEAR(boundary_f(xi_08, 0.8), xi_08, 1e-10);
}

TEST(BoundaryF, SolvesBoundaryEquationAndMatchesBisection) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> xi_dist(-50.0, -0.1);
  std::uniform_real_distribution<double> al(0.5, 0.95);
  for (int i = 0; i < 100; ++i) {
    const double alpha = al(rng);
    const double xi_c = -(2.0 * alpha - 1.0) / (2.0 * alpha * (1.0 - alpha));
    const double xi = std::min(xi_dist(rng), 1.5 * xi_c);
    const double f = boundary_f(xi, alpha);
    EXPECT_LT(f, 0.0);
    EXPECT_LE(std::abs(stability_r0({xi, f}, alpha) + 1.0), 1e-10) << "xi " << xi << " alpha " << alpha;
    const double oracle = boundary_by_bisection(xi, alpha);
    EXPECT_LE(std::abs(f - oracle), 1e-10 * std::max(1.0, std::abs(oracle))) << "xi " << xi << " alpha " << alpha;
  }
}

TEST(BoundaryF, NoCrossingRightOfThreshold) {
  for (double alpha : {0.6, 0.8, 0.95}) {
    const double xi_c = -(2.0 * alpha - 1.0) / (2.0 * alpha * (1.0 - alpha));
    for (double xi : {0.5 * xi_c, 0.999 * xi_c}) {
      EXPECT_EQ(boundary_f(xi, alpha), -std::numeric_limits<double>::infinity());
      EXPECT_GT(stability_r0({xi, -1e12}, alpha), -1.0);
    }
    EXPECT_LT(stability_r0({1.01 * xi_c, -1e12}, alpha), -1.0);
    EXPECT_LT(boundary_f(1.01 * xi_c, alpha), 0.0);
  }
}

TEST(BoundaryF, DomainErrors) {
  EXPECT_EQ(code_of([] { boundary_f(-1.0, 1.0); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { boundary_f(-1.0, 0.4); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { boundary_f(0.0, 0.5); }), ErrorCode::DomainError);
}

TEST(CriticalTimeStep, ClosedForms) {
  EXPECT_NEAR(critical_time_step(25, 25, 0.5), (std::sqrt(17.0) + 3.0) / 50.0, 1e-10);
  EXPECT_NEAR(critical_time_step(25, 25, 0.8), (std::sqrt(101.0) + 9.0) / 50.0, 1e-10);
}

TEST(CriticalTimeStep, ScalesInverselyWithRates) {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> al(0.5, 0.95);
  for (int i = 0; i < 20; ++i) {
    const double a = 0.5 + open_closed(rng, 50), b = 0.5 + open_closed(rng, 50), alpha = al(rng);
    const double base = critical_time_step(a, b, alpha);
    EXPECT_NEAR(critical_time_step(10 * a, 10 * b, alpha), base / 10.0, 1e-11);
    // the crossing agrees with the boundary curve
    EXPECT_NEAR(boundary_f(-base * a, alpha), -base * b, 1e-9 * std::max(1.0, base * b));
  }
}

TEST(CriticalTimeStep, Errors) {
  EXPECT_EQ(code_of([] { critical_time_step(25, 25, 1.0); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { critical_time_step(0, 25, 0.5); }), ErrorCode::InvalidParameter);
}

TEST(Classify, Examples) {
  std::mt19937_64 rng(35);
  for (int i = 0; i < 1000; ++i) {
    const ScaledStepPoint pt{-open_closed(rng, 1e3), -open_closed(rng, 1e3)};
    EXPECT_TRUE(classify(pt, SchemeParams(0.5 + open_closed(rng, 3), StageVariant::ConservativeStages)).stable);
  }
  const StabilityVerdict bad = classify({-6.06, -6.06}, kNcsHalf);
  EXPECT_FALSE(bad.stable);
  EXPECT_FALSE(bad.on_boundary);
  EXPECT_LT(bad.r_value, -1.0);
  const StabilityVerdict good = classify({-1, -1}, kNcsHalf);
  EXPECT_TRUE(good.stable);
  EXPECT_NEAR(good.r_value, -1.0 / 9.0, 1e-15);
  EXPECT_EQ(code_of([] { classify({0.0, -1.0}, kNcsHalf); }), ErrorCode::InvalidParameter);
}

TEST(Classify, BoundaryPointsAreFlaggedAndNotStable) {
  const double xi = -(3.0 + std::sqrt(17.0)) / 2.0;
  const StabilityVerdict v = classify({xi, boundary_f(xi, 0.5)}, kNcsHalf);
  EXPECT_TRUE(v.on_boundary);
  EXPECT_FALSE(v.stable);
}

TEST(RasterRegion, AlphaOneIsAllStable) {
  const RegionRaster r = raster_region(1.0, -50.0, 100);
  EXPECT_EQ(r.stable_count(), 100u * 100u);
}

TEST(RasterRegion, ExamplesAndMonotoneColumns) {
  const RegionRaster r = raster_region(0.5, -50.0, 200);
  EXPECT_EQ(r.coordinate(100), -25.0);
  EXPECT_EQ(r.coordinate(196), -1.0);
  EXPECT_FALSE(r.stable(100, 100));
  EXPECT_TRUE(r.stable(196, 196));
  for (std::size_t ia = 0; ia < r.resolution(); ++ia) {
    std::size_t first = r.resolution();
    for (std::size_t ib = 0; ib < r.resolution(); ++ib) {
      if (r.stable(ia, ib)) {
        first = std::min(first, ib);
      } else {
        EXPECT_EQ(first, r.resolution()) << "unstable cell above a stable one in column " << ia;
      }
    }
    const double f = boundary_f(r.coordinate(ia), 0.5);
    if (f > r.z_min() && first < r.resolution()) {
      EXPECT_GE(r.coordinate(first), f - 1e-9);
      if (first > 0) {
        EXPECT_LE(r.coordinate(first - 1), f + 1e-9);
      }
    }
  }
}

TEST(RasterRegion, RejectsBadGrid) {
  EXPECT_EQ(code_of([] { raster_region(0.5, 1.0, 10); }), ErrorCode::InvalidParameter);
  EXPECT_EQ(code_of([] { raster_region(0.5, -1.0, 1); }), ErrorCode::InvalidParameter);
}

TEST(FiniteDifferenceJacobian, IdentityMap) {
  const Matrix jac = finite_difference_jacobian([](const StateVector& y) { return y; }, vec({1.0, 2.0}), 1e-3);
  EXPECT_LT((jac - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FiniteDifferenceJacobian, EigenvaluesOfMapAtSteadyState) {
  const Linear2x2PDS p(25, 7);
  for (auto v : {StageVariant::ConservativeStages, StageVariant::NonConservativeStages}) {
    const SchemeParams params(0.7, v);
    const double dt = 0.05;
    const StateVector ys = vec({7, 25}) / 32.0;
    const Matrix fd = finite_difference_jacobian([&](const StateVector& y) { return map_g(p, dt, params, y).output; }, ys,
                                                 1e-6 * ys.norm());
    const auto eig = eigenvalues_2x2(fd);
    EXPECT_NEAR(eig[0].real(), 1.0, 1e-5);
    EXPECT_NEAR(eig[1].real(), stability_function(ScaledStepPoint::from(p, dt), params), 1e-5);
    const SpectralCheck s = spectral_check(fd, ys);
    EXPECT_NEAR(s.eig_one, 1.0, 1e-5);
    EXPECT_NEAR(s.eig_r, stability_function(ScaledStepPoint::from(p, dt), params), 1e-5);
    EXPECT_LE(s.diag_residual, 1e-5);
  }
}

TEST(SpectralCheck, Examples) {
  const SpectralCheck id = spectral_check(Eigen::Matrix2d::Identity(), vec({1, 1}));
  EXPECT_NEAR(id.eig_one, 1.0, 1e-15);
  EXPECT_NEAR(id.eig_r, 1.0, 1e-15);
  EXPECT_NEAR(id.diag_residual, 0.0, 1e-15);

  const Linear2x2PDS p(25, 25);
  const SchemeParams params(1.0, StageVariant::ConservativeStages);
  const StateVector ys = vec({0.5, 0.5});
  const SpectralCheck s = spectral_check(jacobian_at_steady_state(p, 4.0, params, ys), ys);
  EXPECT_NEAR(s.eig_one, 1.0, 1e-10);
  EXPECT_NEAR(s.eig_r, stability_r1({-100, -100}, 1.0), 1e-10);
  EXPECT_LE(s.diag_residual, 1e-10);
}

TEST(SpectralCheck, JacobianSpectrumIsOneAndR) {
  std::mt19937_64 rng(36);
  std::uniform_real_distribution<double> rate(1.0, 50.0);
  std::uniform_real_distribution<double> step(0.01, 5.0);
  for (int i = 0; i < 100; ++i) {
    const Linear2x2PDS p(rate(rng), rate(rng));
    const SchemeParams params(0.5 + open_closed(rng, 2.5), random_variant(rng));
    const double dt = step(rng);
    const StateVector ys = vec({p.b(), p.a()});
    const Eigen::Matrix2d jac = jacobian_at_steady_state(p, dt, params, ys);
    const double r = stability_function(ScaledStepPoint::from(p, dt), params);
    const auto eig = eigenvalues_2x2(jac);
    EXPECT_NEAR(eig[0].real(), 1.0, 1e-10) << "case " << i;
    EXPECT_NEAR(eig[1].real(), r, 1e-10) << "case " << i;
    EXPECT_NEAR(eig[0].imag(), 0.0, 1e-10);
    const SpectralCheck s = spectral_check(jac, ys);
    EXPECT_NEAR(s.eig_one, 1.0, 1e-10);
    EXPECT_NEAR(s.eig_r, r, 1e-10);
    EXPECT_LE(s.diag_residual, 1e-10);
  }
}

TEST(Eigenvalues2x2, RealComplexAndNearlyDegenerate) {
  Eigen::Matrix2d m;
  m << 2, 1, 0, 1;
  auto e = eigenvalues_2x2(m);
  EXPECT_EQ(e[0], std::complex<double>(2, 0));
  EXPECT_EQ(e[1], std::complex<double>(1, 0));
  m << 0, -1, 1, 0;
  e = eigenvalues_2x2(m);
  EXPECT_EQ(e[0], std::complex<double>(0, 1));
  EXPECT_EQ(e[1], std::complex<double>(0, -1));
  // J at y* for a tiny step: eigenvalues 1 and R = 1 - O(1e-7)
  const Linear2x2PDS p(1e-3, 2e-3);
  const SchemeParams params(0.7, StageVariant::NonConservativeStages);
  const double dt = 1e-4;
  e = eigenvalues_2x2(jacobian_at_steady_state(p, dt, params, vec({2e-3, 1e-3})));
  EXPECT_NEAR(e[0].real(), 1.0, 1e-15);
  EXPECT_NEAR(e[1].real(), stability_r0(ScaledStepPoint::from(p, dt), 0.7), 1e-15);
}
