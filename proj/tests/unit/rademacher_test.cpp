#include <gtest/gtest.h>

#include <cmath>

#include "maebound/error.hpp"
#include "maebound/rademacher.hpp"
#include "maebound/suite.hpp"

using namespace maebound;

namespace {

FiniteFamily scalar_family(std::vector<std::function<double(double)>> fs, std::string label = "f") {
  FiniteFamily fam;
  fam.label = std::move(label);
  for (auto& f : fs) fam.hypotheses.push_back([f](const DenseVector& x) { return DenseVector{f(x[0])}; });
  return fam;
}

std::vector<DenseVector> points(std::initializer_list<double> xs) {
  std::vector<DenseVector> out;
  for (double x : xs) out.push_back(DenseVector{x});
  return out;
}

FiniteFamily plus_minus_x() { return scalar_family({[](double x) { return x; }, [](double x) { return -x; }}); }

FiniteFamily plus_minus_one() {
  return scalar_family({[](double) { return 1.0; }, [](double) { return -1.0; }});
}

}  // namespace

TEST(EmpiricalRademacher, KnownValues) {
  const auto exact = EstimationMode::exact();
  const auto single = scalar_family({[](double x) { return 3 * x + 1; }});
  EXPECT_EQ(empirical_rademacher(single, points({0.5, 1, 1.5, -2}), exact).value, 0.0);
  EXPECT_EQ(empirical_rademacher(plus_minus_one(), points({0, 0}), exact).value, 0.5);
  EXPECT_EQ(empirical_rademacher(plus_minus_x(), points({1, 2}), exact).value, 1.0);
}

TEST(EmpiricalRademacher, ExactModeSizeLimit) {
  std::vector<DenseVector> s(kMaxExactSamples + 1, DenseVector{1.0});
  try {
    (void)empirical_rademacher(plus_minus_x(), s, EstimationMode::exact());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Mode);
  }
}

TEST(EmpiricalRademacher, MonteCarloWithinThreeSigma) {
  const auto s = points({0.3, -1.2, 0.8, 2.0, -0.4, 1.1});
  const auto fam = scalar_family(
      {[](double x) { return x; }, [](double x) { return -x; }, [](double x) { return std::sin(x); },
       [](double x) { return x * x - 1; }});
  const Estimate exact = empirical_rademacher(fam, s, EstimationMode::exact());
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const Estimate mc = empirical_rademacher(fam, s, EstimationMode::monte_carlo(5000, seed));
    EXPECT_GT(mc.std_error, 0.0);
    EXPECT_LE(std::abs(mc.value - exact.value), 3 * mc.std_error);
  }
  const Estimate again = empirical_rademacher(fam, s, EstimationMode::monte_carlo(5000, 1));
  EXPECT_EQ(again.value, empirical_rademacher(fam, s, EstimationMode::monte_carlo(5000, 1)).value);
}

TEST(EmpiricalRademacher, NonnegativeAndScalesLinearly) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> slopes;
    for (int i = 0; i < 3; ++i) slopes.push_back(rng.normal());
    std::vector<std::function<double(double)>> fs, scaled;
    for (double a : slopes) {
      fs.push_back([a](double x) { return a * x; });
      fs.push_back([a](double x) { return -a * x; });
      scaled.push_back([a](double x) { return 2.5 * (a * x); });
      scaled.push_back([a](double x) { return 2.5 * (-a * x); });
    }
    std::vector<DenseVector> s;
    for (int i = 0; i < 6; ++i) s.push_back(DenseVector{rng.normal()});
    const double r = empirical_rademacher(scalar_family(fs), s, EstimationMode::exact()).value;
    EXPECT_GE(r, 0.0);
    EXPECT_NEAR(empirical_rademacher(scalar_family(scaled), s, EstimationMode::exact()).value, 2.5 * r,
                1e-12 * (1 + r));
  }
}

TEST(EmpiricalRademacher, VectorFamilyUsesAllOnesProjection) {
  FiniteFamily fam;
  fam.input_dim = 1;
  fam.output_dim = 2;
  fam.hypotheses.push_back([](const DenseVector& x) { return DenseVector{x[0], 2 * x[0]}; });
  fam.hypotheses.push_back([](const DenseVector& x) { return DenseVector{-x[0], -2 * x[0]}; });
  // same as the scalar family {3x, -3x}: 3 * 1
  EXPECT_DOUBLE_EQ(empirical_rademacher(fam, points({1, 2}), EstimationMode::exact()).value, 3.0);
}

TEST(Talagrand, IdentityIsExactEquality) {
  const auto s = points({1, 2, -0.5});
  std::vector<ScalarMap> id(3, [](double v) { return v; });
  const CheckResult r = check_talagrand(plus_minus_x(), s, id, 1.0, EstimationMode::exact());
  EXPECT_EQ(r.lhs, r.rhs);
  EXPECT_TRUE(r.holds);
}

TEST(Talagrand, AbsoluteValueOnSinglePoint) {
  std::vector<ScalarMap> abs_map(1, [](double v) { return std::abs(v); });
  const CheckResult r = check_talagrand(plus_minus_x(), points({1}), abs_map, 1.0, EstimationMode::exact());
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.rhs, 1.0);
  EXPECT_TRUE(r.holds);
}

TEST(Talagrand, HalfIdentity) {
  const auto s = points({1, 2});
  std::vector<ScalarMap> half(2, [](double v) { return 0.5 * v; });
  const CheckResult r = check_talagrand(plus_minus_x(), s, half, 0.5, EstimationMode::exact());
  EXPECT_EQ(r.lhs, 0.5);
  EXPECT_EQ(r.rhs, 0.5);
  EXPECT_TRUE(r.holds);
}

TEST(Talagrand, WrongLipschitzConstantRejected) {
  std::vector<ScalarMap> triple(1, [](double v) { return 3 * v; });
  EXPECT_THROW((void)check_talagrand(plus_minus_x(), points({1}), triple, 1.0, EstimationMode::exact()), Error);
}

TEST(LossDomination, Examples) {
  const auto zero = [](const DenseVector&) { return DenseVector{0.0}; };
  const CheckResult r = check_loss_domination(plus_minus_x(), zero, points({1, 2}), EstimationMode::exact());
  EXPECT_LE(r.lhs, r.rhs);
  EXPECT_EQ(r.rhs, 1.0);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_TRUE(r.holds);

  const auto target = [](const DenseVector& x) { return DenseVector{2 * x[0]}; };
  const auto alone = scalar_family({[](double x) { return 2 * x; }});
  const CheckResult self = check_loss_domination(alone, target, points({1, 3}), EstimationMode::exact());
  EXPECT_EQ(self.lhs, 0.0);
  EXPECT_GE(self.rhs, 0.0);

  const CheckResult one = check_loss_domination(plus_minus_x(), target, points({0.7}), EstimationMode::exact());
  EXPECT_TRUE(one.holds);
}

TEST(Additivity, Examples) {
  const auto s = points({0, 0});
  const auto single = scalar_family({[](double) { return 0.25; }});
  std::vector<FiniteFamily> two_singletons{single, single};
  CheckResult r = check_additivity(two_singletons, s, EstimationMode::exact());
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.rhs, 0.0);

  std::vector<FiniteFamily> pair{plus_minus_one(), plus_minus_one()};
  r = check_additivity(pair, s, EstimationMode::exact());
  EXPECT_EQ(r.lhs, 1.0);
  EXPECT_EQ(r.rhs, 1.0);
  EXPECT_TRUE(r.holds);

  std::vector<FiniteFamily> mixed{single, single, single, plus_minus_one()};
  r = check_additivity(mixed, s, EstimationMode::exact());
  EXPECT_EQ(r.lhs, 0.5);
  EXPECT_EQ(r.rhs, 0.5);
}

TEST(Symmetrization, ConstantLossAndTwoPointEnumeration) {
  DiscreteDistribution two_point{points({-1, 1}), {0.3, 0.7}};
  const auto constant = scalar_family({[](double) { return 0.4; }});
  CheckResult r = check_symmetrization(constant, two_point, 4, 0, EstimationMode::exact());
  EXPECT_NEAR(r.lhs, 0.0, 1e-15);
  EXPECT_EQ(r.rhs, 0.0);
  EXPECT_TRUE(r.holds);

  r = check_symmetrization(plus_minus_x(), two_point, 4, 0, EstimationMode::exact());
  EXPECT_TRUE(r.holds);
  EXPECT_GT(r.lhs, 0.0);
  EXPECT_LE(r.lhs, r.rhs);
}

TEST(Symmetrization, LargeSampleShrinksLhs) {
  DiscreteDistribution two_point{points({-1, 1}), {0.5, 0.5}};
  const CheckResult small = check_symmetrization(plus_minus_x(), two_point, 8, 300,
                                                 EstimationMode::monte_carlo(200, 4));
  const CheckResult large = check_symmetrization(plus_minus_x(), two_point, 256, 300,
                                                 EstimationMode::monte_carlo(200, 4));
  EXPECT_LT(large.lhs, small.lhs);
  EXPECT_GE(large.rhs, 0.0);
  EXPECT_TRUE(large.holds);
}

TEST(Symmetrization, OpaqueSamplerIsCapabilityError) {
  Sampler opaque = OpaqueSampler([](Rng& rng) { return DenseVector{rng.normal()}; });
  try {
    (void)check_symmetrization(plus_minus_x(), opaque, 4, 10, EstimationMode::exact());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Capability);
  }
}

TEST(Suite, TinyDrawsGivePositiveStdErrors) {
  SuiteConfig config;
  config.draws = 10;
  config.symmetrization_trials = 30;
  const auto results = run_rademacher_suite(config);
  std::size_t mc = 0;
  for (const auto& r : results) {
    if (r.params.value("exact", true)) continue;
    ++mc;
    EXPECT_GT(r.std_error, 0.0) << r.check << " " << r.params.dump();
  }
  EXPECT_GT(mc, 0u);
}

TEST(Suite, FixedSeedIsReproducible) {
  SuiteConfig config;
  config.draws = 200;
  config.symmetrization_trials = 30;
  EXPECT_EQ(to_json_lines(run_rademacher_suite(config)), to_json_lines(run_rademacher_suite(config)));
}
