#include <gtest/gtest.h>

#include <cmath>

#include "vyoung/kernels.hpp"

using namespace vyoung;

// Reference values computed beforehand at 40 significant digits.
constexpr double kFbmValue = 0.9375919636980572333;       // K(1, 0.5), H = 0.75
constexpr double kFbmDerivative = 0.53482231751599516205;  // dK/dt(1, 0.5), H = 0.75
constexpr double kLn2 = 0.6931471805599453094;

// dK/dt = C (t/s)^(H-1/2) (t-s)^(H-3/2) with
//   H > 1/2: C = sqrt(H(2H-1) / B(2-2H, H-1/2))
//   H < 1/2: C = (H-1/2) sqrt(2H / ((1-2H) B(1-2H, H+1/2)))
struct DtConstant {
  double H;
  double c;
};
constexpr DtConstant kDtConstants[] = {{0.3, -0.14605658681598459},
                                       {0.4, -0.088072568336372672},
                                       {0.6, 0.10760051841318069},
                                       {0.75, 0.26741115875799758}};

TEST(Hyp2f1, TrivialArguments) {
  EXPECT_EQ(hyp2f1(0.3, 0.7, 1.4, 0.0), 1.0);
  EXPECT_EQ(hyp2f1(0.0, 0.7, 1.4, -5.0), 1.0);
}

TEST(Hyp2f1, LogarithmIdentity) { EXPECT_NEAR(hyp2f1(1, 1, 2, -1), kLn2, 1e-15); }

TEST(Hyp2f1, ReferenceValuesAcrossBranches) {
  EXPECT_NEAR(hyp2f1(0.3, 0.7, 1.4, -3.0), 0.7863139715166496109, 1e-14);
  EXPECT_NEAR(hyp2f1(0.3, 0.7, 1.4, 0.95), 1.3586314969329183698, 1e-13);
  EXPECT_NEAR(hyp2f1(0.2, -0.3, 0.7, -1e12) / 1995.152762407937991, 1.0, 1e-12);
}

TEST(Hyp2f1, ElementaryClosedForms) {
  // F(1,1;2;z) = -ln(1-z)/z and F(a,b;b;z) = (1-z)^-a
  for (double z : {-3.0, -0.7, -0.2, 0.3, 0.85})
    EXPECT_NEAR(hyp2f1(1, 1, 2, z), -std::log1p(-z) / z, 1e-12 * std::abs(std::log1p(-z) / z));
  for (double z : {-40.0, -3.0, -0.7, -0.2, 0.3, 0.85, 0.97})
    EXPECT_NEAR(hyp2f1(0.37, 1.3, 1.3, z), std::pow(1 - z, -0.37), 1e-12 * std::pow(1 - z, -0.37));
}

TEST(Hyp2f1, PfaffConsistency) {
  // Direct series and the Pfaff-transformed series agree on [-0.5, 0].
  for (double z : {-0.5, -0.4, -0.25, -0.1, -0.01}) {
    const double a = 0.25, b = -0.25, c = 1.25;
    const double direct = detail::hyp2f1_series(a, b, c, z, kHyp2f1MaxTerms);
    const double pfaff =
        std::pow(1 - z, -a) * detail::hyp2f1_series(a, c - b, c, z / (z - 1), kHyp2f1MaxTerms);
    EXPECT_NEAR(direct, pfaff, 1e-10 * std::abs(direct)) << z;
  }
}

TEST(Hyp2f1, Errors) {
  EXPECT_THROW(hyp2f1(0.5, 0.5, 0.0, 0.2), DomainError);
  EXPECT_THROW(hyp2f1(0.5, 0.5, -2.0, 0.2), DomainError);
  EXPECT_THROW(hyp2f1(0.5, 0.5, 1.5, 1.2), DomainError);
  // c - a - b = 0 at z close to 1: the plain series cannot converge in 5 terms
  EXPECT_THROW(hyp2f1(-0.25, 1.5, 1.25, 0.999, 5), SeriesDivergence);
}

TEST(FbmKernel, ReferenceValue) {
  EXPECT_NEAR(fbm_kernel_eval(0.75, 1.0, 0.5), kFbmValue, 1e-14);
}

TEST(FbmKernel, BrownianDegeneracy) {
  for (double s : {1e-6, 0.1, 0.5, 0.99})
    for (double t : {s + 1e-6, s + 0.005, 1.0})
      if (s < t) EXPECT_NEAR(fbm_kernel_eval(0.5, t, s), 1.0, 1e-12);
}

TEST(FbmKernel, VolterraPropertyAndDomain) {
  for (double H : {0.3, 0.5, 0.75}) {
    EXPECT_EQ(fbm_kernel_eval(H, 0.4, 0.4), 0.0);
    EXPECT_EQ(fbm_kernel_eval(H, 0.4, 0.9), 0.0);
  }
  EXPECT_THROW(fbm_kernel_eval(0.7, 1.0, 0.0), DomainError);
  EXPECT_THROW(fbm_kernel_eval(1.5, 1.0, 0.5), DomainError);
}

TEST(FbmKernel, DerivativeReference) {
  EXPECT_NEAR(fbm_kernel_dt(0.75, 1.0, 0.5), kFbmDerivative, 1e-10);
  EXPECT_NEAR(fbm_kernel_dt(0.5, 0.8, 0.3), 0.0, 1e-8);
  EXPECT_THROW(fbm_kernel_dt(0.3, 1.0, 1.0 - 1e-13), StepUnderflow);
}

TEST(FbmKernel, DerivativePowerFormIsConstantOnGrid) {
  const double H = 0.3;
  double lo = 1e300, hi = -1e300;
  for (int i = 1; i <= 5; ++i)
    for (int j = 1; j <= 5; ++j) {
      const double s = 0.15 * i;
      const double t = s + 0.04 * j * j;
      const double r =
          fbm_kernel_dt(H, t, s) / (std::pow(t / s, H - 0.5) * std::pow(t - s, H - 1.5));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  EXPECT_LT((hi - lo) / std::abs(lo), 1e-4);
}

TEST(FbmKernel, FittedDerivativeConstantMatchesClosedForm) {
  for (const auto& [H, c] : kDtConstants)
    EXPECT_NEAR(fit_fbm_dt_constant(H), c, 1e-9 * std::abs(c)) << H;
}

TEST(RlKernel, Values) {
  EXPECT_DOUBLE_EQ(rl_kernel_eval(0.5, 1.0, 0.3), 1.0);
  EXPECT_EQ(rl_kernel_eval(0.3, 0.3, 0.3), 0.0);
  EXPECT_NEAR(rl_kernel_eval(0.25, 1.0, 0.75), 1.1540674772329394, 1e-15);
  EXPECT_NEAR(rl_kernel_dt(0.7, 1.0, 0.2), rl_constant(0.7) * 0.2 * std::pow(0.8, -0.8), 1e-15);
}

TEST(VolterraKernelObject, LowerTriangularAndShared) {
  const auto k = make_fbm_kernel(0.4);
  EXPECT_EQ(k(0.3, 0.3), 0.0);
  EXPECT_EQ(k.dt(0.3, 0.7), 0.0);
  EXPECT_NEAR(k.alpha(), 0.1, 1e-15);
  EXPECT_TRUE(k.alpha_admissible());
  EXPECT_GT(k.bound_const(), 0.0);
  const auto copy = k;
  EXPECT_EQ(copy(0.9, 0.2), k(0.9, 0.2));
  EXPECT_EQ(make_rl_kernel(0.75).alpha(), 0.0);
  EXPECT_NEAR(make_rl_kernel(0.4).alpha(), 0.1, 1e-15);
}

TEST(Condition, RlKernelSatisfiesBothBounds) {
  const auto r = verify_condition(make_rl_kernel(0.4), 20);
  EXPECT_TRUE(r.value_bound.satisfied);
  EXPECT_TRUE(r.satisfied);
  EXPECT_TRUE(std::isfinite(r.fitted_const));
  EXPECT_GT(r.value_bound.headroom, 1.0);
}

TEST(Condition, FbmBelowHalfSatisfiesBothBounds) {
  for (double H : {0.3, 0.4}) {
    const auto r = verify_condition(make_fbm_kernel(H), 24);
    EXPECT_TRUE(r.satisfied) << H;
    EXPECT_NEAR(r.alpha, 0.5 - H, 1e-15);
  }
}

TEST(Condition, TooSmallAlphaViolatesDerivativeBound) {
  const auto r = verify_condition(make_fbm_kernel(0.3).with_alpha(0.05), 24);
  EXPECT_FALSE(r.derivative_bound.satisfied);
  // ratio ~ gap^(H - 3/2 + 1 + alpha) = gap^-0.15
  EXPECT_NEAR(r.derivative_bound.gap_exponent, -0.15, 0.01);
}

TEST(Condition, FbmAboveHalfDerivativeBoundBlowsUpInS) {
  // dK/dt carries (t/s)^(H-1/2), unbounded as s -> 0 against (t-s)^-(alpha+1).
  const auto r = verify_condition(make_fbm_kernel(0.6), 24);
  EXPECT_TRUE(r.value_bound.satisfied);
  EXPECT_FALSE(r.derivative_bound.satisfied);
  EXPECT_NEAR(r.derivative_bound.s_exponent, -0.1, 0.01);
}

TEST(Condition, RejectsTinySample) {
  EXPECT_THROW(verify_condition(make_rl_kernel(0.4), 5), std::invalid_argument);
}
