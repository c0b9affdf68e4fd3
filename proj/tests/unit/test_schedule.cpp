#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/rational.hpp>
#include <cmath>

#include "odebc/errors.hpp"
#include "odebc/schedule.hpp"

namespace odebc {
namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

TEST(Schedule, LinearBetasHitBothEndpoints) {
  const auto s = make_linear_vp_schedule(1000, 1e-4, 0.02);
  ASSERT_EQ(s.total_steps(), 1000);
  EXPECT_DOUBLE_EQ(s.betas()[0], 1e-4);
  EXPECT_NEAR(s.betas()[999], 0.02, 1e-17);
  for (int k = 1; k < 1000; ++k) {
    EXPECT_GT(s.betas()[k], s.betas()[k - 1]);
    EXPECT_LT(s.alpha_bar(k), s.alpha_bar(k - 1));
  }
  EXPECT_DOUBLE_EQ(s.alpha_bar(0), 1.0 - 1e-4);
}

TEST(Schedule, TwoStepProduct) {
  const auto s = make_linear_vp_schedule(2, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(s.alpha_bar(0), 0.5);
  EXPECT_DOUBLE_EQ(s.alpha_bar(1), 0.25);
}

TEST(Schedule, AlphaBarMatchesExtendedPrecisionProduct) {
  const auto s = default_schedule();
  Big prod = 1;
  for (int k = 0; k < s.total_steps(); ++k) {
    // Same beta grid, evaluated in 50-digit arithmetic.
    const Big beta = Big(1e-4) + Big(k) * (Big(0.02) - Big(1e-4)) / Big(999);
    prod *= Big(1) - beta;
    const double oracle = static_cast<double>(prod);
    EXPECT_NEAR(s.alpha_bar(k), oracle, 1e-14 * oracle) << "k=" << k;
  }
}

TEST(Schedule, RejectsInvalidParameters) {
  EXPECT_THROW(make_linear_vp_schedule(1, 1e-4, 0.02), ValidationError);
  EXPECT_THROW(make_linear_vp_schedule(10, 0.0, 0.02), ValidationError);
  EXPECT_THROW(make_linear_vp_schedule(10, 0.03, 0.02), ValidationError);
  EXPECT_THROW(make_linear_vp_schedule(10, 1e-4, 1.0), ValidationError);
}

TEST(Schedule, BoundaryCoefficientsMatchGrid) {
  const auto s = default_schedule();
  const auto c0 = s.at(0.0);
  EXPECT_DOUBLE_EQ(c0.alpha, std::sqrt(s.alpha_bar(0)));
  EXPECT_DOUBLE_EQ(c0.sigma, s.sigma(0));
  // sigma_0^2 = beta_1 exactly.
  EXPECT_NEAR(c0.sigma, 0.01, 1e-16);
  const auto c1 = s.at(1.0);
  EXPECT_DOUBLE_EQ(c1.alpha, s.alpha(999));
  EXPECT_DOUBLE_EQ(c1.sigma, s.sigma(999));
  for (int k : {0, 1, 250, 998, 999}) {
    const auto c = s.at(s.time_of(k));
    EXPECT_DOUBLE_EQ(c.alpha, s.alpha(k));
    EXPECT_DOUBLE_EQ(c.sigma, s.sigma(k));
  }
}

TEST(Schedule, VariancePreservingIdentity) {
  const auto s = default_schedule();
  for (int i = 0; i <= 1000; ++i) {
    const double t = i / 1000.0 + (i < 1000 ? 3.7e-5 : 0.0);
    const auto c = s.at(t);
    EXPECT_NEAR(c.alpha * c.alpha + c.sigma * c.sigma, 1.0, 1e-12) << "t=" << t;
  }
}

TEST(Schedule, DriftMatchesFiniteDifferenceOfLogAlpha) {
  const auto s = default_schedule();
  for (double t : {0.5, 0.1234, 0.9}) {
    const double h = 1e-7;
    const double fd = (std::log(s.at(t + h).alpha) - std::log(s.at(t - h).alpha)) / (2 * h);
    EXPECT_NEAR(s.at(t).f, fd, 1e-6 * std::abs(fd)) << "t=" << t;
  }
}

TEST(Schedule, DiffusionMatchesFiniteDifferenceOfVariance) {
  const auto s = default_schedule();
  for (double t : {0.5, 0.0421, 0.77}) {
    const double h = 1e-7;
    const auto var = [&](double u) { return s.at(u).sigma * s.at(u).sigma; };
    const auto c = s.at(t);
    const double fd = (var(t + h) - var(t - h)) / (2 * h) - 2 * c.f * c.sigma * c.sigma;
    EXPECT_NEAR(c.g2, fd, 1e-6 * std::abs(fd)) << "t=" << t;
  }
}

TEST(Schedule, TimeOutsideUnitIntervalThrows) {
  const auto s = default_schedule();
  EXPECT_THROW(s.at(-1e-9), ValidationError);
  EXPECT_THROW(s.at(1.0 + 1e-9), ValidationError);
  EXPECT_THROW(continuous_coeffs(s, std::nan("")), ValidationError);
}

TEST(Schedule, LambdaIsStrictlyDecreasingAndInvertible) {
  const auto s = default_schedule();
  double prev = s.lambda(0.0);
  for (int i = 1; i <= 2000; ++i) {
    const double l = s.lambda(i / 2000.0);
    EXPECT_LT(l, prev);
    prev = l;
  }
  const double lo = s.lambda(1.0), hi = s.lambda(0.0);
  for (int i = 0; i <= 100; ++i) {
    const double target = lo + (hi - lo) * i / 100.0;
    EXPECT_LT(std::abs(s.lambda(s.time_for_lambda(target)) - target), 1e-10) << target;
  }
}

/// Round-half-up evenly spaced indices in exact rational arithmetic.
std::vector<int> reference_segments(int T, const std::vector<int>& counts) {
  const int n = static_cast<int>(counts.size());
  std::vector<int> out;
  int start = 0;
  for (int j = 0; j < n; ++j) {
    const int size = T / n + (j < T % n ? 1 : 0);
    for (int i = 0; i < counts[j]; ++i) {
      const boost::rational<long> pos =
          counts[j] == 1 ? boost::rational<long>(0)
                         : boost::rational<long>(static_cast<long>(i) * (size - 1), counts[j] - 1);
      const boost::rational<long> r = pos + boost::rational<long>(1, 2);
      out.push_back(start + static_cast<int>(r.numerator() / r.denominator()));
    }
    start += size;
  }
  std::sort(out.rbegin(), out.rend());
  return out;
}

TEST(Resample, SegmentSpecsGiveExpectedPlanLengths) {
  const auto s = default_schedule();
  const std::vector<int> a{90, 60, 60, 20, 20};
  const std::vector<int> b{45, 20, 15, 10, 10};
  const auto pa = resample_timesteps(s, a);
  const auto pb = resample_timesteps(s, b);
  EXPECT_EQ(pa.steps.size(), 250u);
  EXPECT_EQ(pb.steps.size(), 100u);
  EXPECT_EQ(pa.steps, reference_segments(1000, a));
  EXPECT_EQ(pb.steps, reference_segments(1000, b));
  for (const auto* p : {&pa, &pb}) {
    EXPECT_EQ(p->steps.front(), 999);
    EXPECT_EQ(p->steps.back(), 0);
    for (std::size_t i = 1; i < p->steps.size(); ++i) EXPECT_LT(p->steps[i], p->steps[i - 1]);
  }
}

TEST(Resample, UniformFullCountIsIdentity) {
  const auto s = default_schedule();
  const auto p = resample_timesteps(s, 1000);
  ASSERT_EQ(p.steps.size(), 1000u);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(p.steps[i], 999 - i);
}

TEST(Resample, UniformPlansIncludeBothEnds) {
  const auto s = default_schedule();
  for (int n : {2, 3, 11, 51, 101, 999}) {
    const auto p = resample_timesteps(s, n);
    ASSERT_EQ(p.steps.size(), static_cast<std::size_t>(n));
    EXPECT_EQ(p.steps.front(), 999);
    EXPECT_EQ(p.steps.back(), 0);
    EXPECT_EQ(p.steps, reference_segments(1000, {n}));
  }
  EXPECT_EQ(uniform_steps(s, 50).transitions(), 50u);
  EXPECT_EQ(uniform_steps(s, 1).steps, (std::vector<int>{999, 0}));
}

TEST(Resample, RejectsImpossibleSpecs) {
  const auto s = default_schedule();
  EXPECT_THROW(resample_timesteps(s, std::vector<int>{201, 1, 1, 1, 1}), ValidationError);
  EXPECT_THROW(resample_timesteps(s, std::vector<int>{}), ValidationError);
  EXPECT_THROW(resample_timesteps(s, std::vector<int>{0, 5}), ValidationError);
  EXPECT_THROW(resample_timesteps(s, 1001), ValidationError);
  EXPECT_THROW(resample_timesteps(s, 1), ValidationError);
  // A single-point final segment cannot reach T-1.
  EXPECT_THROW(resample_timesteps(s, std::vector<int>{10, 1}), ValidationError);
}

TEST(Resample, ValidatePlanChecksShape) {
  const auto s = default_schedule();
  EXPECT_NO_THROW(validate_plan(s, uniform_steps(s, 10)));
  EXPECT_THROW(validate_plan(s, TimestepPlan{{999, 500, 500, 0}, {}}), ValidationError);
  EXPECT_THROW(validate_plan(s, TimestepPlan{{998, 0}, {}}), ValidationError);
  EXPECT_THROW(validate_plan(s, TimestepPlan{{999, 1}, {}}), ValidationError);
}

}  // namespace
}  // namespace odebc
