#include "maebound/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "maebound/error.hpp"

namespace maebound {

namespace {

void check_pairs(std::span<const DenseVector> predictions, std::span<const DenseVector> targets) {
  require(!predictions.empty(), ErrorKind::Parameter, "loss of an empty sequence");
  require(predictions.size() == targets.size(), ErrorKind::Parameter,
          "loss: " + std::to_string(predictions.size()) + " predictions vs " + std::to_string(targets.size()) +
              " targets");
  for (std::size_t i = 0; i < predictions.size(); ++i)
    require(predictions[i].dim() == targets[i].dim(), ErrorKind::Parameter,
            "loss: dimension mismatch at pair " + std::to_string(i));
}

}  // namespace

double mae_loss(std::span<const DenseVector> predictions, std::span<const DenseVector> targets, bool per_dimension) {
  check_pairs(predictions, targets);
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < predictions[i].dim(); ++j) row += std::abs(predictions[i][j] - targets[i][j]);
    acc += row;
  }
  double mean = acc / static_cast<double>(predictions.size());
  if (per_dimension) mean /= static_cast<double>(predictions.front().dim());
  return mean;
}

double mse_loss(std::span<const DenseVector> predictions, std::span<const DenseVector> targets) {
  check_pairs(predictions, targets);
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < predictions[i].dim(); ++j) {
      const double r = predictions[i][j] - targets[i][j];
      row += r * r;
    }
    acc += row;
  }
  return acc / static_cast<double>(predictions.size());
}

void TrainConfig::validate() const {
  require(learning_rate >= 0.0 && std::isfinite(learning_rate), ErrorKind::Parameter,
          "learning rate must be finite and nonnegative");
  require(momentum >= 0.0 && momentum < 1.0, ErrorKind::Parameter, "momentum must lie in [0, 1)");
  require(batch_size > 0, ErrorKind::Parameter, "batch size must be positive");
  require(lambda_hidden > 0.0, ErrorKind::Parameter, "lambda_hidden must be positive");
}

Velocity Velocity::zeros_like(const Network& net) {
  Velocity v;
  for (const auto& w : net.weights()) v.weights.emplace_back(w.rows(), w.cols());
  for (const auto& b : net.biases()) v.biases.emplace_back(b.dim());
  return v;
}

void sgd_step(Network& net, const Gradients& grads, Velocity& velocity, double learning_rate, double momentum) {
  auto& weights = net.weights();
  require(grads.weights.size() == weights.size() && velocity.weights.size() == weights.size(), ErrorKind::Shape,
          "sgd_step: gradient/velocity layer count mismatch");
  require(grads.all_finite(), ErrorKind::Numeric, "sgd_step: non-finite gradient");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    auto w = weights[l].values();
    auto g = grads.weights[l].values();
    auto v = velocity.weights[l].values();
    require(g.size() == w.size() && v.size() == w.size(), ErrorKind::Shape, "sgd_step: layer shape mismatch");
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = momentum * v[i] + g[i];
      w[i] -= learning_rate * v[i];
    }
  }
  auto& biases = net.biases();
  for (std::size_t l = 0; l < biases.size(); ++l) {
    auto& b = biases[l].data;
    const auto& g = grads.biases.at(l).data;
    auto& v = velocity.biases.at(l).data;
    for (std::size_t i = 0; i < b.size(); ++i) {
      v[i] = momentum * v[i] + g[i];
      b[i] -= learning_rate * v[i];
    }
  }
}

double evaluate_mae(const Network& net, const Dataset& ds, bool per_dimension) {
  require(!ds.empty(), ErrorKind::Parameter, "evaluate_mae: empty dataset");
  constexpr std::size_t kChunk = 256;
  const std::size_t d = net.spec().input_dim;
  double acc = 0.0;
  for (std::size_t start = 0; start < ds.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, ds.size() - start);
    DenseMatrix in(n, d);
    for (std::size_t b = 0; b < n; ++b) {
      const auto& x = ds.pairs[start + b].x;
      require(x.dim() == d, ErrorKind::Shape, "evaluate_mae: input dimension mismatch");
      std::copy(x.data.begin(), x.data.end(), in.row(b).begin());
    }
    const DenseMatrix out = forward_batch(net, in);
    for (std::size_t b = 0; b < n; ++b) {
      const auto& y = ds.pairs[start + b].y;
      require(y.dim() == out.cols(), ErrorKind::Shape, "evaluate_mae: target dimension mismatch");
      double row = 0.0;
      for (std::size_t j = 0; j < y.dim(); ++j) row += std::abs(out(b, j) - y[j]);
      acc += row;
    }
  }
  double mean = acc / static_cast<double>(ds.size());
  if (per_dimension) mean /= static_cast<double>(net.spec().output_dim);
  return mean;
}

double max_input_norm(const Dataset& ds) {
  double s = 0.0;
  for (const auto& p : ds.pairs) s = std::max(s, vector_norm(p.x, NormOrder::L2));
  return s;
}

std::pair<Network, TrainLog> train(Network net, const Dataset& train_set, const Dataset& test_set,
                                   const TrainConfig& config, const StepObserver& observer) {
  config.validate();
  require(!train_set.empty() && !test_set.empty(), ErrorKind::Parameter, "train: datasets must be nonempty");
  const auto& spec = net.spec();
  require(train_set.input_dim == spec.input_dim && train_set.output_dim == spec.output_dim &&
              test_set.input_dim == spec.input_dim && test_set.output_dim == spec.output_dim,
          ErrorKind::Shape, "train: dataset dims do not match network " + spec.describe());

  TrainLog log;
  log.seed = config.seed;
  log.input_bound = max_input_norm(train_set);
  log.initial_train_mae = evaluate_mae(net, train_set, config.per_dimension_mae);
  log.initial_test_mae = evaluate_mae(net, test_set, config.per_dimension_mae);

  const Rng base(config.seed);
  Velocity velocity = Velocity::zeros_like(net);
  std::vector<std::size_t> order(train_set.size());
  std::vector<SamplePair> batch;
  batch.reserve(config.batch_size);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle = base.derive("shuffle", epoch);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.uniform_index(i)]);

    double epoch_max_grad = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set.pairs[order[i]]);
      const Gradients grads = backprop(net, batch, config.loss);
      const double norm = grads.l2_norm();
      require(std::isfinite(norm), ErrorKind::Numeric,
              "non-finite gradient in epoch " + std::to_string(epoch) + " at step " + std::to_string(log.steps + 1));
      epoch_max_grad = std::max(epoch_max_grad, norm);
      sgd_step(net, grads, velocity, config.learning_rate, config.momentum);
      if (config.renormalize == RenormSchedule::EveryStep) renormalize(net, config.lambda_hidden, config.top_mode);
      ++log.steps;
      if (observer) observer(epoch, log.steps, net);
    }
    if (config.renormalize == RenormSchedule::EveryEpoch) renormalize(net, config.lambda_hidden, config.top_mode);

    const double train_mae = evaluate_mae(net, train_set, config.per_dimension_mae);
    const double test_mae = evaluate_mae(net, test_set, config.per_dimension_mae);
    require(std::isfinite(train_mae) && std::isfinite(test_mae), ErrorKind::Numeric,
            "loss became non-finite in epoch " + std::to_string(epoch));
    log.train_mae.push_back(train_mae);
    log.test_mae.push_back(test_mae);
    log.max_grad_norm.push_back(epoch_max_grad);
    log.epoch_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
    if (!log.onset_epoch && train_mae < log.initial_train_mae) log.onset_epoch = epoch;
  }

  const auto budget = measure_norm_budget(net);
  log.lambda = budget.lambda;
  log.lambda_prime = budget.lambda_prime;
  return {std::move(net), std::move(log)};
}

double grad_norm_bound(const TrainLog& log) {
  require(!log.max_grad_norm.empty(), ErrorKind::Parameter, "grad_norm_bound: empty log");
  return *std::max_element(log.max_grad_norm.begin(), log.max_grad_norm.end());
}

std::string format_sig10(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  int decimals = 9;
  if (v != 0.0) {
    const int magnitude = static_cast<int>(std::floor(std::log10(std::abs(v))));
    decimals = std::max(0, 9 - magnitude);
  }
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string trainlog_to_csv(const TrainLog& log) {
  std::string out = "epoch,train_mae,test_mae,max_grad_norm\n";
  for (std::size_t e = 0; e < log.epochs(); ++e) {
    out += std::to_string(e + 1) + ',' + format_sig10(log.train_mae[e]) + ',' + format_sig10(log.test_mae[e]) + ',' +
           format_sig10(log.max_grad_norm[e]) + '\n';
  }
  return out;
}

TrainLog trainlog_from_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::Format, "train log CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "epoch,train_mae,test_mae,max_grad_norm", ErrorKind::Format, "unexpected CSV header '" + line + "'");
  TrainLog log;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(fields, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        require(used == cell.size(), ErrorKind::Format, "");
      } catch (const std::exception&) {
        fail(ErrorKind::Format, "bad CSV field '" + cell + "' on line " + std::to_string(lineno));
      }
    }
    require(values.size() == 4, ErrorKind::Format, "expected 4 CSV fields on line " + std::to_string(lineno));
    require(values[0] == static_cast<double>(log.epochs() + 1), ErrorKind::Format,
            "epochs out of order on line " + std::to_string(lineno));
    log.train_mae.push_back(values[1]);
    log.test_mae.push_back(values[2]);
    log.max_grad_norm.push_back(values[3]);
  }
  if (!log.train_mae.empty()) {
    log.initial_train_mae = log.train_mae.front();
    log.initial_test_mae = log.test_mae.front();
  }
  return log;
}

}  // namespace maebound
