#include <gtest/gtest.h>

#include <cmath>

#include "maebound/error.hpp"
#include "maebound/network.hpp"
#include "maebound/training.hpp"

using namespace maebound;

namespace {

Network scalar_net(double w1, double w2, double t) {
  NetworkSpec spec{1, 1, {1}, t, false};
  return Network(spec, {DenseMatrix(1, 1, {w1}), DenseMatrix(1, 1, {w2})});
}

NetworkSpec spec_of(std::size_t d, std::vector<std::size_t> widths, std::size_t q, double t = 50.0) {
  NetworkSpec spec;
  spec.input_dim = d;
  spec.output_dim = q;
  spec.hidden_widths = std::move(widths);
  spec.sharpness = t;
  return spec;
}

}  // namespace

TEST(SmoothRelu, ClosedFormValues) {
  EXPECT_NEAR(smooth_relu(0.0, 10.0), std::log(2.0) / 10.0, 1e-15);
  EXPECT_NEAR(smooth_relu(5.0, 20.0), 5.0, 1e-10);
  EXPECT_NEAR(smooth_relu(-5.0, 20.0), 0.0, 1e-10);
  EXPECT_EQ(smooth_relu_grad(0.0, 3.0), 0.5);
  EXPECT_NEAR(smooth_relu_grad(5.0, 20.0), 1.0, 1e-10);
  EXPECT_TRUE(std::isfinite(smooth_relu(1e6, 50.0)));
  EXPECT_TRUE(std::isfinite(smooth_relu(-1e6, 50.0)));
}

TEST(SmoothRelu, NonPositiveSharpnessRejected) {
  EXPECT_THROW((void)smooth_relu(1.0, 0.0), Error);
  EXPECT_THROW((void)smooth_relu_grad(1.0, -1.0), Error);
}

TEST(SmoothRelu, GapToReluBoundedOnGrid) {
  for (double t : {1.0, 10.0, 50.0, 500.0}) {
    double prev = -INFINITY;
    for (int i = -2000; i <= 2000; ++i) {
      const double x = i * 0.005;
      const double g = smooth_relu(x, t);
      const double gap = g - std::max(0.0, x);
      ASSERT_GE(gap, 0.0) << x;
      ASSERT_LE(gap, std::log(2.0) / t + 1e-15) << x;
      ASSERT_GE(g, prev);
      if (i > -2000) {
        ASSERT_LE(g - prev, 0.005 + 1e-15);
      }
      prev = g;
    }
  }
}

TEST(NetworkSpec, DepthCountsWeightMatrices) {
  const auto spec = spec_of(4, {6, 6}, 3);
  EXPECT_EQ(spec.depth(), 3u);
  EXPECT_EQ(spec.top_width(), 6u);
  EXPECT_EQ(spec.describe(), "4-6-6-3");
  EXPECT_EQ(parse_widths("64-64-128"), (std::vector<std::size_t>{64, 64, 128}));
  EXPECT_THROW((void)parse_widths("64--1"), Error);
  EXPECT_TRUE(spec.bound_violations().empty());
  EXPECT_FALSE(spec_of(4, {5, 6}, 3).bound_violations().empty());
  EXPECT_FALSE(spec_of(4, {}, 3).bound_violations().empty());
  EXPECT_TRUE(spec_of(2, {4}, 1).bound_violations().empty());
}

TEST(InitNetwork, ShapeChainAndDeterminism) {
  const auto spec = spec_of(4, {6, 6}, 3);
  Rng a(1), b(1);
  const Network net = init_network(spec, a);
  EXPECT_EQ(net, init_network(spec, b));
  ASSERT_EQ(net.depth(), 3u);
  EXPECT_EQ(net.weights()[0].rows(), 6u);
  EXPECT_EQ(net.weights()[0].cols(), 4u);
  EXPECT_EQ(net.weights()[1].rows(), 6u);
  EXPECT_EQ(net.weights()[1].cols(), 6u);
  EXPECT_EQ(net.weights()[2].rows(), 3u);
  EXPECT_EQ(net.weights()[2].cols(), 6u);
  const NormBudget budget = measure_norm_budget(net);
  EXPECT_NEAR(budget.lambda, 1.0, 1e-12);
  EXPECT_NEAR(budget.lambda_prime, 1.0, 1e-12);
}

TEST(Forward, HandEvaluation) {
  const Network net = scalar_net(2.0, 3.0, 20.0);
  EXPECT_NEAR(forward(net, DenseVector{1.0})[0], 6.0, 1e-8);
  EXPECT_NEAR(forward(net, DenseVector{0.0})[0], 3.0 * std::log(2.0) / 20.0, 1e-12);
  const Network zero = scalar_net(0.0, 0.0, 20.0);
  EXPECT_EQ(forward(zero, DenseVector{0.7})[0], 0.0);
  EXPECT_THROW((void)forward(net, DenseVector{1.0, 2.0}), Error);
}

TEST(Forward, TopLayerScaleCovariance) {
  Rng rng(5);
  Network net = init_network(spec_of(5, {7, 4}, 3), rng);
  DenseVector x(5);
  for (double& v : x.data) v = rng.normal();
  const DenseVector before = forward(net, x);
  for (double& w : net.weights().back().values()) w *= 2.0;
  const DenseVector after = forward(net, x);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(after[i], 2.0 * before[i]);
}

TEST(Forward, BatchMatchesPerSampleBitwise) {
  Rng rng(6);
  auto spec = spec_of(9, {13, 5}, 4, 10.0);
  spec.bias_enabled = true;
  Network net = init_network(spec, rng);
  for (auto& b : net.biases())
    for (double& v : b.data) v = rng.normal(0.0, 0.1);
  DenseMatrix inputs = gaussian_matrix(11, 9, 0.0, 1.0, rng);
  const DenseMatrix out = forward_batch(net, inputs);
  for (std::size_t b = 0; b < 11; ++b) {
    DenseVector x(std::vector<double>(inputs.row(b).begin(), inputs.row(b).end()));
    const DenseVector y = forward(net, x);
    for (std::size_t i = 0; i < 4; ++i) ASSERT_EQ(out(b, i), y[i]);
  }
}

TEST(Backprop, HandDifferentiatedLinearCase) {
  // one weight matrix: f(x) = W x
  NetworkSpec spec{1, 1, {}, 50.0, false};
  const std::vector<SamplePair> batch{{DenseVector{1.0}, DenseVector{0.0}, 1.0}};
  EXPECT_EQ(backprop_mae(Network(spec, {DenseMatrix(1, 1, {2.0})}), batch).weights[0](0, 0), 1.0);
  EXPECT_EQ(backprop_mae(Network(spec, {DenseMatrix(1, 1, {-2.0})}), batch).weights[0](0, 0), -1.0);
}

TEST(Backprop, PerfectFitGivesZeroGradient) {
  Rng rng(8);
  const Network net = init_network(spec_of(3, {5}, 2), rng);
  std::vector<SamplePair> batch;
  for (int i = 0; i < 4; ++i) {
    DenseVector x(3);
    for (double& v : x.data) v = rng.normal();
    batch.push_back({x, forward(net, x), 1.0});
  }
  const Gradients g = backprop_mae(net, batch);
  EXPECT_EQ(g.l2_norm(), 0.0);
}

TEST(Backprop, EmptyBatchRejected) {
  Rng rng(8);
  const Network net = init_network(spec_of(3, {5}, 2), rng);
  EXPECT_THROW((void)backprop_mae(net, {}), Error);
}

TEST(Backprop, MatchesFiniteDifferencesIncludingBiasAndMse) {
  Rng rng(21);
  for (bool bias : {false, true}) {
    for (LossKind loss : {LossKind::Mae, LossKind::Mse}) {
      auto spec = spec_of(3, {4, 5}, 2, 10.0);
      spec.bias_enabled = bias;
      Network net = init_network(spec, rng);
      std::vector<SamplePair> batch;
      for (int i = 0; i < 3; ++i) {
        DenseVector x(3), y(2);
        for (double& v : x.data) v = rng.normal();
        for (double& v : y.data) v = rng.normal(0.0, 2.0);
        batch.push_back({x, y, 1.0});
      }
      const Gradients g = backprop(net, batch, loss);
      const auto objective = [&](const Network& n) {
        std::vector<DenseVector> pred, tgt;
        for (const auto& p : batch) {
          pred.push_back(forward(n, p.x));
          tgt.push_back(p.y);
        }
        return loss == LossKind::Mae ? mae_loss(pred, tgt) : mse_loss(pred, tgt);
      };
      for (std::size_t l = 0; l < net.depth(); ++l) {
        auto values = net.weights()[l].values();
        for (std::size_t idx = 0; idx < values.size(); ++idx) {
          const double saved = values[idx];
          values[idx] = saved + 1e-6;
          const double up = objective(net);
          values[idx] = saved - 1e-6;
          const double down = objective(net);
          values[idx] = saved;
          const double numeric = (up - down) / 2e-6;
          EXPECT_NEAR(g.weights[l].values()[idx], numeric, 1e-6 + 1e-4 * std::abs(numeric));
        }
        if (!bias) continue;
        for (std::size_t i = 0; i < net.biases()[l].dim(); ++i) {
          double& b = net.biases()[l][i];
          const double saved = b;
          b = saved + 1e-6;
          const double up = objective(net);
          b = saved - 1e-6;
          const double down = objective(net);
          b = saved;
          const double numeric = (up - down) / 2e-6;
          EXPECT_NEAR(g.biases[l][i], numeric, 1e-6 + 1e-4 * std::abs(numeric));
        }
      }
    }
  }
}

TEST(Renormalize, HandRows) {
  NetworkSpec spec{2, 1, {2}, 50.0, false};
  Network net(spec, {DenseMatrix(2, 2, {3, 4, 0, 0}), DenseMatrix(1, 2, {1, -1})});
  renormalize(net, 1.0, TopMode::Normalize);
  EXPECT_DOUBLE_EQ(net.weights()[0](0, 0), 0.6);
  EXPECT_DOUBLE_EQ(net.weights()[0](0, 1), 0.8);
  EXPECT_EQ(net.weights()[0](1, 0), 0.0);
  EXPECT_EQ(net.weights()[0](1, 1), 0.0);
  EXPECT_EQ(net.weights()[1](0, 0), 0.5);
  EXPECT_EQ(net.weights()[1](0, 1), -0.5);
}

TEST(Renormalize, MeasureModeLeavesTopLayer) {
  NetworkSpec spec{2, 1, {2}, 50.0, false};
  Network net(spec, {DenseMatrix(2, 2, {3, 4, 0, 1}), DenseMatrix(1, 2, {2, -3})});
  renormalize(net, 2.0, TopMode::Measure);
  EXPECT_DOUBLE_EQ(net.weights()[0](0, 0), 1.2);
  EXPECT_EQ(net.weights()[1](0, 1), -3.0);
  const NormBudget b = measure_norm_budget(net);
  EXPECT_DOUBLE_EQ(b.lambda, 2.0);
  EXPECT_EQ(b.lambda_prime, 5.0);
}

TEST(Renormalize, IdempotentBitwise) {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    Network net = init_network(spec_of(6, {7, 3}, 5), rng);
    for (auto& w : net.weights())
      for (double& v : w.values()) v = rng.normal(0.0, 5.0);
    renormalize(net, 1.0, TopMode::Normalize);
    const Network once = net;
    renormalize(net, 1.0, TopMode::Normalize);
    ASSERT_EQ(net, once);
  }
}

TEST(NormBudget, HandValues) {
  NetworkSpec spec{2, 1, {2}, 50.0, false};
  const Network net(spec, {DenseMatrix(2, 2, {3, 4, 0, 1}), DenseMatrix(1, 2, {2, -3})});
  const NormBudget b = measure_norm_budget(net);
  EXPECT_EQ(b.lambda, 5.0);
  EXPECT_EQ(b.lambda_prime, 5.0);
  const Network zero(spec, {DenseMatrix(2, 2), DenseMatrix(1, 2)});
  EXPECT_EQ(measure_norm_budget(zero).lambda, 0.0);
  EXPECT_EQ(measure_norm_budget(zero).lambda_prime, 0.0);
}
