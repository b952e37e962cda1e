#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maebound/numerics.hpp"
#include "maebound/sample.hpp"

namespace maebound {

inline constexpr double kDefaultSharpness = 50.0;

/// Layer layout of a feed-forward regressor R^d -> R^q.
///
/// `hidden_widths` lists every hidden layer from the input side; its last
/// entry is the top hidden width n_k. The number of weight matrices is
/// `depth() == hidden_widths.size() + 1`, so a single-hidden-layer network has
/// depth 2.
struct NetworkSpec {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::vector<std::size_t> hidden_widths;
  double sharpness = kDefaultSharpness;
  bool bias_enabled = false;

  [[nodiscard]] std::size_t depth() const noexcept { return hidden_widths.size() + 1; }
  [[nodiscard]] std::size_t top_width() const noexcept {
    return hidden_widths.empty() ? input_dim : hidden_widths.back();
  }
  /// Fan-in of layer `layer` (0-based).
  [[nodiscard]] std::size_t layer_inputs(std::size_t layer) const;
  [[nodiscard]] std::size_t layer_outputs(std::size_t layer) const;

  /// Throws when the spec cannot describe a network at all.
  void validate() const;
  /// Conditions of the aggregated bound that this layout misses
  /// (depth < 2, hidden width < d + 2). Empty when none.
  [[nodiscard]] std::vector<std::string> bound_violations() const;
  /// "784-64-64-128-784"
  [[nodiscard]] std::string describe() const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Parses "64-64-128" into hidden widths.
std::vector<std::size_t> parse_widths(const std::string& text);

/// ln(1 + exp(t x)) / t, evaluated without overflow.
double smooth_relu(double x, double t);
/// Logistic function of t x; the derivative of smooth_relu.
double smooth_relu_grad(double x, double t);

class Network {
 public:
  Network(NetworkSpec spec, std::vector<DenseMatrix> weights, std::vector<DenseVector> biases = {});

  [[nodiscard]] const NetworkSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] std::size_t depth() const noexcept { return weights_.size(); }

  [[nodiscard]] const std::vector<DenseMatrix>& weights() const noexcept { return weights_; }
  [[nodiscard]] std::vector<DenseMatrix>& weights() noexcept { return weights_; }
  /// Empty unless the spec enables biases.
  [[nodiscard]] const std::vector<DenseVector>& biases() const noexcept { return biases_; }
  [[nodiscard]] std::vector<DenseVector>& biases() noexcept { return biases_; }

  [[nodiscard]] std::size_t parameter_count() const noexcept;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  NetworkSpec spec_;
  std::vector<DenseMatrix> weights_;
  std::vector<DenseVector> biases_;
};

/// Gaussian(0, 1/fan_in) weights followed by one renormalization to unit budgets.
Network init_network(const NetworkSpec& spec, Rng& rng);

/// Evaluates the network on one input.
DenseVector forward(const Network& net, const DenseVector& x);
/// Evaluates a batch stored sample-major (one input per row). Produces
/// bit-identical rows to calling forward() per sample.
DenseMatrix forward_batch(const Network& net, const DenseMatrix& inputs);

enum class LossKind { Mae, Mse };

/// Per-layer gradients; bias entries empty unless biases are enabled.
struct Gradients {
  std::vector<DenseMatrix> weights;
  std::vector<DenseVector> biases;

  /// L2 norm of all gradients flattened into one vector.
  [[nodiscard]] double l2_norm() const;
  [[nodiscard]] bool all_finite() const;
};

/// Gradient of (1/B) sum_i loss(f(x_i), y_i) for the chosen loss. The MAE
/// subgradient uses sign(0) = 0.
Gradients backprop(const Network& net, std::span<const SamplePair> batch, LossKind loss);
inline Gradients backprop_mae(const Network& net, std::span<const SamplePair> batch) {
  return backprop(net, batch, LossKind::Mae);
}

enum class TopMode { Normalize, Measure };

/// Rescales every row of the hidden-layer matrices to L2 norm
/// `lambda_hidden`; in Normalize mode every row of the top matrix is scaled
/// to L1 norm 1. Zero rows, and rows already at their target norm to within
/// 1e-12 relative, are left untouched, which makes the operation idempotent.
void renormalize(Network& net, double lambda_hidden, TopMode top_mode);

struct NormBudget {
  double lambda = 0.0;        ///< max row L2 norm over hidden-layer matrices
  double lambda_prime = 0.0;  ///< max row L1 norm of the top matrix
};

NormBudget measure_norm_budget(const Network& net);

}  // namespace maebound
