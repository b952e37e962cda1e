#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "maebound/network.hpp"
#include "maebound/sample.hpp"

namespace maebound {

/// (1/N) sum ||p_i - t_i||_1, optionally divided by the vector dimension.
double mae_loss(std::span<const DenseVector> predictions, std::span<const DenseVector> targets,
                bool per_dimension = false);
/// (1/N) sum ||p_i - t_i||_2^2
double mse_loss(std::span<const DenseVector> predictions, std::span<const DenseVector> targets);

enum class RenormSchedule { EveryStep, EveryEpoch };

struct TrainConfig {
  double learning_rate = 0.02;
  double momentum = 0.2;
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  double lambda_hidden = 1.0;
  TopMode top_mode = TopMode::Normalize;
  LossKind loss = LossKind::Mae;
  RenormSchedule renormalize = RenormSchedule::EveryStep;
  /// Report MAE per output coordinate instead of per vector.
  bool per_dimension_mae = false;

  void validate() const;
};

struct TrainLog {
  double initial_train_mae = 0.0;
  double initial_test_mae = 0.0;
  std::vector<double> train_mae;      // one entry per epoch
  std::vector<double> test_mae;
  std::vector<double> max_grad_norm;  // max flattened gradient L2 norm seen during the epoch
  std::vector<double> epoch_seconds;
  double lambda = 0.0;
  double lambda_prime = 0.0;
  double input_bound = 0.0;           // s: max ||x||_2 over the training inputs
  std::optional<std::size_t> onset_epoch;  // first epoch whose train MAE dips below the initial one
  std::uint64_t seed = 0;
  std::size_t steps = 0;

  [[nodiscard]] std::size_t epochs() const noexcept { return train_mae.size(); }
};

/// Momentum buffers shaped like the network parameters.
struct Velocity {
  std::vector<DenseMatrix> weights;
  std::vector<DenseVector> biases;

  static Velocity zeros_like(const Network& net);
};

/// v <- momentum * v + g; w <- w - lr * v. No renormalization.
void sgd_step(Network& net, const Gradients& grads, Velocity& velocity, double learning_rate, double momentum);

/// Mean loss of the network over a dataset.
double evaluate_mae(const Network& net, const Dataset& ds, bool per_dimension = false);

/// Maximum ||x||_2 over the dataset inputs.
double max_input_norm(const Dataset& ds);

/// Called after every optimizer step (post renormalization) with the 1-based
/// epoch and the global step index.
using StepObserver = std::function<void(std::size_t epoch, std::size_t step, const Network& net)>;

/// Mini-batch SGD with momentum over `config.epochs` epochs. Throws a numeric
/// error naming the epoch when gradients or losses stop being finite.
std::pair<Network, TrainLog> train(Network net, const Dataset& train_set, const Dataset& test_set,
                                   const TrainConfig& config, const StepObserver& observer = {});

/// Empirical gradient-norm bound M: max of the logged per-epoch maxima.
double grad_norm_bound(const TrainLog& log);

/// CSV with header `epoch,train_mae,test_mae,max_grad_norm`.
std::string trainlog_to_csv(const TrainLog& log);
/// Reads the per-epoch columns back. The CSV carries no pre-training row, so
/// the initial MAEs are taken from epoch 1.
TrainLog trainlog_from_csv(std::string_view csv);

/// Fixed-point decimal with ten significant digits.
std::string format_sig10(double v);

}  // namespace maebound
