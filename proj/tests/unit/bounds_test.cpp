#include <gtest/gtest.h>

#include <cmath>

#include "maebound/bounds.hpp"
#include "maebound/error.hpp"

using namespace maebound;

namespace {

BoundInputs mnist_scale_inputs() {
  BoundInputs in;
  in.q = 784;
  in.d = 784;
  in.N = 60000;
  in.k = 4;
  in.n_k = 2048;
  in.r = 1176;
  in.s = 1;
  in.lambda = 1;
  in.lambda_prime = 1;
  return in;
}

BoundInputs synthetic_inputs() {
  BoundInputs in;
  in.q = 1;
  in.d = 2;
  in.r = 1;
  in.N = 10000;
  in.s = 1;
  in.lambda = 1;
  in.lambda_prime = 1;
  in.validity_mode = false;
  return in;
}

}  // namespace

TEST(EstimationError, Oracles) {
  EXPECT_NEAR(estimation_error_bound(mnist_scale_inputs()), 2.0 * 784.0 / std::sqrt(60000.0), 1e-12);
  EXPECT_NEAR(estimation_error_bound(mnist_scale_inputs()), 6.40129, 1e-4);
  BoundInputs in = mnist_scale_inputs();
  in.lambda_prime = 0;
  EXPECT_EQ(estimation_error_bound(in), 0.0);
  in = BoundInputs{};
  in.q = 1;
  in.lambda = 2;
  in.k = 3;
  in.N = 4;
  EXPECT_DOUBLE_EQ(estimation_error_bound(in), 4.0);
  in.N = 0;
  EXPECT_THROW((void)estimation_error_bound(in), Error);
}

TEST(EstimationError, ScalingProperties) {
  const BoundInputs base = mnist_scale_inputs();
  const double ee = estimation_error_bound(base);
  BoundInputs in = base;
  in.lambda_prime = 3;
  EXPECT_NEAR(estimation_error_bound(in), 3 * ee, 1e-12 * ee);
  in = base;
  in.s = 0.5;
  EXPECT_NEAR(estimation_error_bound(in), 0.5 * ee, 1e-12 * ee);
  in = base;
  in.q = 392;
  EXPECT_NEAR(estimation_error_bound(in), 0.5 * ee, 1e-12 * ee);
  in = base;
  in.N = 4 * base.N;
  EXPECT_NEAR(estimation_error_bound(in), 0.5 * ee, 1e-12 * ee);
  in = base;
  in.n_k = 7;
  in.k = 9;
  EXPECT_EQ(estimation_error_bound(in), ee);
}

TEST(Hoeffding, OraclesAndMonotonicity) {
  EXPECT_NEAR(hoeffding_deviation(60000, 0.95), 5.5445e-3, 1e-7);
  EXPECT_NEAR(hoeffding_deviation(2, 0.5), std::sqrt(std::log(4.0) / 4.0), 1e-15);
  EXPECT_NEAR(hoeffding_deviation(2, 0.5), 0.58871, 1e-5);
  for (double d = 0.05; d < 0.9; d += 0.05) EXPECT_LT(hoeffding_deviation(100, d), hoeffding_deviation(100, d + 0.05));
  for (std::size_t n = 1; n < 1000; n *= 3) EXPECT_GT(hoeffding_deviation(n, 0.9), hoeffding_deviation(n + 1, 0.9));
  EXPECT_THROW((void)hoeffding_deviation(10, 1.0), Error);
  EXPECT_THROW((void)hoeffding_deviation(10, 0.0), Error);
  EXPECT_THROW((void)hoeffding_deviation(0, 0.5), Error);
}

TEST(ApproximationError, Oracles) {
  const double ae = approximation_error_bound(0.16810, mnist_scale_inputs());
  EXPECT_NEAR(ae, 0.16810 * 784 / std::pow(2051.0, 1.5), 1e-15);
  EXPECT_NEAR(ae / 1.4188e-3, 1.0, 1e-4);
  EXPECT_EQ(approximation_error_bound(0.0, mnist_scale_inputs()), 0.0);
  BoundInputs in;
  in.q = 1;
  in.n_k = 3;
  in.k = 2;
  in.r = 5;
  in.d = 5;
  EXPECT_DOUBLE_EQ(approximation_error_bound(1.0, in), 0.25);
}

TEST(ApproximationError, StrictlyDecreasingInWidthAndDepth) {
  BoundInputs in = mnist_scale_inputs();
  for (std::size_t k = 2; k < 8; ++k) {
    for (std::size_t n = 1; n < 4000; n = n * 2 + 1) {
      in.k = k;
      in.n_k = n;
      const double ae = approximation_error_bound(0.3, in);
      in.n_k = n + 1;
      EXPECT_GT(ae, approximation_error_bound(0.3, in));
      in.n_k = n;
      in.k = k + 1;
      EXPECT_GT(ae, approximation_error_bound(0.3, in));
    }
  }
}

TEST(OptimizationError, Oracles) {
  EXPECT_EQ(optimization_error_bound({0.02, 0.0, 1.0, 0.1}), 0.0);
  EXPECT_EQ(optimization_error_bound({0.02, 1.0, 1.0, 0.1}), 0.02 * 1.0 * 1.0 * 1.0 / (2.0 * 0.1));
  EXPECT_NEAR(optimization_error_bound({0.02, 1.0, 1.0, 0.1}), 0.1, 1e-16);
  EXPECT_DOUBLE_EQ(optimization_error_bound({0.1, 2.0, 3.0, 0.5}), 1.2);
  EXPECT_THROW((void)optimization_error_bound({0.1, 2.0, 3.0, 0.0}), Error);
}

TEST(ConvergenceEnvelope, LimitAndMonotonicity) {
  const double floor = optimization_error_bound({0.1, 2.0, 3.0, 0.1});
  EXPECT_NEAR(sgd_convergence_envelope(5.0, 0.1, 0.1, 3.0, 2.0, 1'000'000), floor, 1e-9);
  for (std::uint64_t t : {0ULL, 3ULL, 1000ULL}) EXPECT_EQ(sgd_convergence_envelope(0.0, 0.1, 0.1, 3.0, 2.0, t), floor);
  EXPECT_NEAR(sgd_convergence_envelope(1.0, 0.5, 1.0, 1.0, 0.0, 0), std::exp(-0.5), 1e-15);
  double prev = INFINITY;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const double v = sgd_convergence_envelope(2.0, 0.05, 0.2, 1.0, 1.0, t);
    EXPECT_LE(v, prev);
    prev = v;
  }
  EXPECT_THROW((void)sgd_convergence_envelope(1.0, 2.0, 0.5, 1.0, 1.0, 1), Error);
}

TEST(Calibrate, SyntheticAnchorSystem) {
  const Calibration cal = calibrate(0.9, 0.8, 4, 16, synthetic_inputs());
  EXPECT_NEAR(cal.c, 0.4, 1e-12);
  EXPECT_NEAR(cal.b, 0.68, 1e-12);
  EXPECT_FALSE(cal.b_clamped);
}

TEST(Calibrate, FlatAnchorsGiveZeroC) {
  EXPECT_EQ(calibrate(0.5, 0.5, 4, 16, synthetic_inputs()).c, 0.0);
}

TEST(Calibrate, DegenerateAnchorsRejected) {
  EXPECT_THROW((void)calibrate(0.9, 0.8, 4, 4, synthetic_inputs()), Error);
}

TEST(Calibrate, MnistScaleAnchorsClampB) {
  BoundInputs in = mnist_scale_inputs();
  const Calibration cal = calibrate(0.1318, 0.1292, 1024, 2048, in);
  EXPECT_NEAR(cal.c, 0.16810, 1e-4);
  EXPECT_EQ(cal.b, 0.0);
  EXPECT_TRUE(cal.b_clamped);
  EXPECT_LT(cal.b_unclamped, 0.0);
  in.k = 2;
  in.n_k = 1024;
  EXPECT_GE(mae_upper_bound(cal, in).mae_b, 0.1318);
}

TEST(MaeUpperBound, AnchorRoundTripAndDeeperExample) {
  const Calibration cal = calibrate(0.9, 0.8, 4, 16, synthetic_inputs());
  BoundInputs in = synthetic_inputs();
  in.k = 2;
  in.n_k = 4;
  EXPECT_NEAR(mae_upper_bound(cal, in).mae_b, 0.9, 0.9e-12);
  in.n_k = 16;
  EXPECT_NEAR(mae_upper_bound(cal, in).mae_b, 0.8, 0.8e-12);

  in.k = 3;
  in.n_k = 16;
  const BoundReport r = mae_upper_bound(cal, in);
  EXPECT_NEAR(r.ae, 0.4 / std::sqrt(18.0), 1e-12);
  EXPECT_NEAR(r.ee, 0.02, 1e-15);
  EXPECT_NEAR(r.oe, 0.68, 1e-12);
  EXPECT_NEAR(r.mae_b, 0.794281, 1e-6);
  EXPECT_EQ(r.mae_b, r.ae + r.ee + r.oe);
}

TEST(MaeUpperBound, AnchorRoundTripWithNonUnitBudgets) {
  BoundInputs in = synthetic_inputs();
  in.lambda = 2.5;
  in.lambda_prime = 0.5;
  in.s = 0.75;
  const Calibration cal = calibrate(0.9, 0.8, 4, 16, in);
  in.k = 2;
  in.n_k = 4;
  EXPECT_NEAR(mae_upper_bound(cal, in).mae_b, 0.9, 0.9e-12);
  in.n_k = 16;
  EXPECT_NEAR(mae_upper_bound(cal, in).mae_b, 0.8, 0.8e-12);
}

TEST(MaeUpperBound, ZeroBudgets) {
  Calibration cal;
  cal.c = 0;
  cal.b = 0;
  BoundInputs in = synthetic_inputs();
  cal.inputs = in;
  in.lambda_prime = 0;
  EXPECT_EQ(mae_upper_bound(cal, in).mae_b, 0.0);
}

TEST(MaeUpperBound, HoeffdingOnlyWhenRequested) {
  const Calibration cal = calibrate(0.9, 0.8, 4, 16, synthetic_inputs());
  BoundInputs in = synthetic_inputs();
  in.k = 3;
  in.n_k = 16;
  const BoundReport without = mae_upper_bound(cal, in);
  const BoundReport with = mae_upper_bound(cal, in, {true});
  EXPECT_FALSE(without.hoeffding_included);
  EXPECT_EQ(without.hoeffding, 0.0);
  EXPECT_TRUE(with.hoeffding_included);
  EXPECT_EQ(with.hoeffding, hoeffding_deviation(in.N, in.delta));
  EXPECT_EQ(with.mae_b, with.ae + with.ee + with.oe + with.hoeffding);
}

TEST(MaeUpperBound, ValidityViolationsReported) {
  BoundInputs in = mnist_scale_inputs();
  in.validity_mode = true;
  in.n_k = 128;
  in.k = 4;
  EXPECT_FALSE(in.violations().empty());
  in.n_k = 2048;
  in.min_hidden_width = 1024;
  EXPECT_TRUE(in.violations().empty());
  in.validity_mode = false;
  in.n_k = 10;
  EXPECT_TRUE(in.violations().empty());
}

TEST(BoundJson, RoundTripsAndRejectsTampering) {
  const Calibration cal = calibrate(0.9, 0.8, 4, 16, synthetic_inputs());
  BoundInputs in = synthetic_inputs();
  in.k = 3;
  in.n_k = 16;
  const BoundReport r = mae_upper_bound(cal, in);
  const nlohmann::json j = to_json(r);
  const BoundReport back = bound_report_from_json(j);
  EXPECT_EQ(back.mae_b, r.mae_b);
  EXPECT_EQ(back.ae, r.ae);
  EXPECT_EQ(back.inputs.n_k, 16u);

  nlohmann::json bad = j;
  bad["MAE_B"] = r.mae_b + 1e-9;
  EXPECT_THROW((void)bound_report_from_json(bad), Error);

  const Calibration cal_back = calibration_from_json(to_json(cal));
  EXPECT_EQ(cal_back.c, cal.c);
  EXPECT_EQ(cal_back.b, cal.b);
  EXPECT_EQ(cal_back.l2, 16u);
  EXPECT_EQ(bound_inputs_from_json(to_json(in)).r, in.r);
}
