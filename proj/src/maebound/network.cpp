#include "maebound/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "maebound/error.hpp"

namespace maebound {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Clean: return "clean";
    case Provenance::Corrupted: return "corrupted";
    case Provenance::Synthetic: return "synthetic";
  }
  return "unknown";
}

void Dataset::validate() const {
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    require(pairs[i].x.dim() == input_dim && pairs[i].y.dim() == output_dim, ErrorKind::Shape,
            "dataset pair " + std::to_string(i) + " does not match declared dims");
  }
}

std::size_t NetworkSpec::layer_inputs(std::size_t layer) const {
  return layer == 0 ? input_dim : hidden_widths[layer - 1];
}

std::size_t NetworkSpec::layer_outputs(std::size_t layer) const {
  return layer + 1 == depth() ? output_dim : hidden_widths[layer];
}

void NetworkSpec::validate() const {
  require(input_dim > 0 && output_dim > 0, ErrorKind::Shape, "network dims must be positive");
  for (std::size_t w : hidden_widths) require(w > 0, ErrorKind::Shape, "hidden widths must be positive");
  require(sharpness > 0.0 && std::isfinite(sharpness), ErrorKind::Parameter,
          "smooth ReLU sharpness must be positive");
}

std::vector<std::string> NetworkSpec::bound_violations() const {
  std::vector<std::string> out;
  if (depth() < 2) out.push_back("depth k=" + std::to_string(depth()) + " < 2");
  for (std::size_t j = 0; j < hidden_widths.size(); ++j) {
    if (hidden_widths[j] < input_dim + 2) {
      out.push_back("hidden width n_" + std::to_string(j + 1) + "=" + std::to_string(hidden_widths[j]) +
                    " < d+2=" + std::to_string(input_dim + 2));
    }
  }
  return out;
}

std::string NetworkSpec::describe() const {
  std::ostringstream os;
  os << input_dim;
  for (std::size_t w : hidden_widths) os << '-' << w;
  os << '-' << output_dim;
  return os.str();
}

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> widths;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, '-')) {
    const auto first = token.find_first_not_of(" \t");
    const auto last = token.find_last_not_of(" \t");
    require(first != std::string::npos, ErrorKind::Config, "empty width in '" + text + "'");
    token = token.substr(first, last - first + 1);
    std::size_t used = 0;
    unsigned long long value = 0;
    try {
      value = std::stoull(token, &used);
    } catch (const std::exception&) {
      fail(ErrorKind::Config, "bad width '" + token + "' in '" + text + "'");
    }
    require(used == token.size() && value > 0, ErrorKind::Config, "bad width '" + token + "' in '" + text + "'");
    widths.push_back(static_cast<std::size_t>(value));
  }
  require(!widths.empty(), ErrorKind::Config, "no widths in '" + text + "'");
  return widths;
}

double smooth_relu(double x, double t) {
  require(t > 0.0, ErrorKind::Parameter, "smooth_relu: sharpness must be positive");
  const double tx = t * x;
  if (tx > 0.0) return x + std::log1p(std::exp(-tx)) / t;
  return std::log1p(std::exp(tx)) / t;
}

double smooth_relu_grad(double x, double t) {
  require(t > 0.0, ErrorKind::Parameter, "smooth_relu_grad: sharpness must be positive");
  const double tx = t * x;
  if (tx >= 0.0) return 1.0 / (1.0 + std::exp(-tx));
  const double e = std::exp(tx);
  return e / (1.0 + e);
}

Network::Network(NetworkSpec spec, std::vector<DenseMatrix> weights, std::vector<DenseVector> biases)
    : spec_(std::move(spec)), weights_(std::move(weights)), biases_(std::move(biases)) {
  spec_.validate();
  require(weights_.size() == spec_.depth(), ErrorKind::Shape,
          "expected " + std::to_string(spec_.depth()) + " weight matrices, got " + std::to_string(weights_.size()));
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    require(weights_[l].rows() == spec_.layer_outputs(l) && weights_[l].cols() == spec_.layer_inputs(l),
            ErrorKind::Shape, "weight matrix " + std::to_string(l + 1) + " has shape " +
                                  std::to_string(weights_[l].rows()) + "x" + std::to_string(weights_[l].cols()));
  }
  if (spec_.bias_enabled) {
    if (biases_.empty()) {
      for (std::size_t l = 0; l < weights_.size(); ++l) biases_.emplace_back(spec_.layer_outputs(l));
    }
    require(biases_.size() == weights_.size(), ErrorKind::Shape, "one bias vector per layer required");
    for (std::size_t l = 0; l < biases_.size(); ++l)
      require(biases_[l].dim() == spec_.layer_outputs(l), ErrorKind::Shape, "bias vector has wrong length");
  } else {
    require(biases_.empty(), ErrorKind::Shape, "biases given for a network without bias terms");
  }
}

std::size_t Network::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& w : weights_) n += w.size();
  for (const auto& b : biases_) n += b.dim();
  return n;
}

Network init_network(const NetworkSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<DenseMatrix> weights;
  weights.reserve(spec.depth());
  for (std::size_t l = 0; l < spec.depth(); ++l) {
    const auto fan_in = static_cast<double>(spec.layer_inputs(l));
    weights.push_back(gaussian_matrix(spec.layer_outputs(l), spec.layer_inputs(l), 0.0, 1.0 / fan_in, rng));
  }
  Network net(spec, std::move(weights));
  renormalize(net, 1.0, TopMode::Normalize);
  return net;
}

namespace {

// z[i] += c[0] r_0[i] + c[1] r_1[i] + c[2] r_2[i] + c[3] r_3[i], terms added
// one at a time in index order.
inline void add_four_rows(double* __restrict z, std::size_t n, const double* c, const double* const* rows) {
  const double c0 = c[0], c1 = c[1], c2 = c[2], c3 = c[3];
  const double* __restrict r0 = rows[0];
  const double* __restrict r1 = rows[1];
  const double* __restrict r2 = rows[2];
  const double* __restrict r3 = rows[3];
  for (std::size_t i = 0; i < n; ++i) {
    double v = z[i];
    v += c0 * r0[i];
    v += c1 * r1[i];
    v += c2 * r2[i];
    v += c3 * r3[i];
    z[i] = v;
  }
}

inline void add_row(double* __restrict z, std::size_t n, double c, const double* __restrict r) {
  for (std::size_t i = 0; i < n; ++i) z[i] += c * r[i];
}

// z += sum_k c[k] r_k with k ascending. Four rows per pass keep z in
// registers; the association matches the plain loop, so the unrolling does
// not change any result.
void accumulate_rows(double* z, std::size_t n, const double* c, const double* const* rows, std::size_t m) {
  std::size_t k = 0;
  for (; k + 4 <= m; k += 4) add_four_rows(z, n, c + k, rows + k);
  for (; k < m; ++k) add_row(z, n, c[k], rows[k]);
}

std::vector<const double*> row_pointers(const DenseMatrix& m) {
  std::vector<const double*> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = m.row(r).data();
  return out;
}

// out (B x n_out) = in (B x n_in) * W^T, each entry accumulated over the
// input index in ascending order. The batch is transposed rather than the
// (much larger) weight matrix so the inner loop runs over samples.
void affine_rows(const DenseMatrix& in, const DenseMatrix& weights, const DenseVector* bias, DenseMatrix& out) {
  const std::size_t batch = in.rows();
  const std::size_t n_out = weights.rows();
  const DenseMatrix in_t = in.transposed();
  const auto in_rows = row_pointers(in_t);
  DenseMatrix out_t(n_out, batch);
  for (std::size_t i = 0; i < n_out; ++i)
    accumulate_rows(out_t.row(i).data(), batch, weights.row(i).data(), in_rows.data(), weights.cols());
  out = out_t.transposed();
  if (bias != nullptr) {
    for (std::size_t b = 0; b < batch; ++b) {
      double* z = out.row(b).data();
      for (std::size_t i = 0; i < n_out; ++i) z[i] += (*bias)[i];
    }
  }
}

struct ForwardTrace {
  std::vector<DenseMatrix> activations;    // input to each layer
  std::vector<DenseMatrix> preactivations; // output of each affine map
};

ForwardTrace trace_forward(const Network& net, DenseMatrix inputs) {
  require(inputs.cols() == net.spec().input_dim, ErrorKind::Shape,
          "input dimension " + std::to_string(inputs.cols()) + " does not match d=" +
              std::to_string(net.spec().input_dim));
  const double t = net.spec().sharpness;
  ForwardTrace trace;
  trace.activations.push_back(std::move(inputs));
  for (std::size_t l = 0; l < net.depth(); ++l) {
    DenseMatrix z;
    const DenseVector* bias = net.biases().empty() ? nullptr : &net.biases()[l];
    affine_rows(trace.activations.back(), net.weights()[l], bias, z);
    if (l + 1 < net.depth()) {
      DenseMatrix a(z.rows(), z.cols());
      auto zs = z.values();
      auto as = a.values();
      for (std::size_t i = 0; i < zs.size(); ++i) as[i] = smooth_relu(zs[i], t);
      trace.preactivations.push_back(std::move(z));
      trace.activations.push_back(std::move(a));
    } else {
      trace.preactivations.push_back(std::move(z));
    }
  }
  return trace;
}

DenseMatrix stack_inputs(std::span<const SamplePair> batch, std::size_t dim) {
  DenseMatrix m(batch.size(), dim);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    require(batch[b].x.dim() == dim, ErrorKind::Shape, "batch input " + std::to_string(b) + " has wrong dimension");
    std::copy(batch[b].x.data.begin(), batch[b].x.data.end(), m.row(b).begin());
  }
  return m;
}

}  // namespace

DenseMatrix forward_batch(const Network& net, const DenseMatrix& inputs) {
  auto trace = trace_forward(net, inputs);
  return std::move(trace.preactivations.back());
}

DenseVector forward(const Network& net, const DenseVector& x) {
  require(x.dim() == net.spec().input_dim, ErrorKind::Shape,
          "input dimension " + std::to_string(x.dim()) + " does not match d=" + std::to_string(net.spec().input_dim));
  DenseMatrix in(1, x.dim(), x.data);
  const DenseMatrix out = forward_batch(net, in);
  return DenseVector(std::vector<double>(out.values().begin(), out.values().end()));
}

double Gradients::l2_norm() const {
  double acc = 0.0;
  for (const auto& w : weights)
    for (double g : w.values()) acc += g * g;
  for (const auto& b : biases)
    for (double g : b.data) acc += g * g;
  return std::sqrt(acc);
}

bool Gradients::all_finite() const {
  for (const auto& w : weights)
    for (double g : w.values())
      if (!std::isfinite(g)) return false;
  for (const auto& b : biases)
    for (double g : b.data)
      if (!std::isfinite(g)) return false;
  return true;
}

Gradients backprop(const Network& net, std::span<const SamplePair> batch, LossKind loss) {
  require(!batch.empty(), ErrorKind::Parameter, "backprop: empty batch");
  const auto& spec = net.spec();
  const double t = spec.sharpness;
  const std::size_t k = net.depth();
  const auto trace = trace_forward(net, stack_inputs(batch, spec.input_dim));
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  // d loss / d output
  DenseMatrix delta(batch.size(), spec.output_dim);
  const DenseMatrix& out = trace.preactivations.back();
  for (std::size_t b = 0; b < batch.size(); ++b) {
    require(batch[b].y.dim() == spec.output_dim, ErrorKind::Shape,
            "batch target " + std::to_string(b) + " has wrong dimension");
    for (std::size_t i = 0; i < spec.output_dim; ++i) {
      const double r = out(b, i) - batch[b].y[i];
      double g = 0.0;
      if (loss == LossKind::Mae) {
        g = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
      } else {
        g = 2.0 * r;
      }
      delta(b, i) = g * inv_batch;
    }
  }

  Gradients grads;
  grads.weights.resize(k);
  if (spec.bias_enabled) grads.biases.resize(k);
  for (std::size_t step = 0; step < k; ++step) {
    const std::size_t l = k - 1 - step;
    const DenseMatrix& a = trace.activations[l];
    const DenseMatrix& w = net.weights()[l];
    // gw(i, j) = sum_b delta(b, i) a(b, j), summed over b in ascending order
    DenseMatrix gw(w.rows(), w.cols());
    const auto a_rows = row_pointers(a);
    std::vector<double> column(batch.size());
    for (std::size_t i = 0; i < w.rows(); ++i) {
      for (std::size_t b = 0; b < batch.size(); ++b) column[b] = delta(b, i);
      accumulate_rows(gw.row(i).data(), w.cols(), column.data(), a_rows.data(), batch.size());
    }
    if (spec.bias_enabled) {
      DenseVector gb(w.rows());
      for (std::size_t b = 0; b < batch.size(); ++b)
        for (std::size_t i = 0; i < w.rows(); ++i) gb[i] += delta(b, i);
      grads.biases[l] = std::move(gb);
    }
    grads.weights[l] = std::move(gw);
    if (l == 0) break;

    DenseMatrix prev(batch.size(), w.cols());
    const DenseMatrix& z = trace.preactivations[l - 1];
    // Same per-sample operation sequence as accumulate_rows, with the sample
    // loop inside so each block of weight rows is read once per batch.
    const auto w_rows = row_pointers(w);
    std::size_t k = 0;
    for (; k + 4 <= w.rows(); k += 4)
      for (std::size_t b = 0; b < batch.size(); ++b)
        add_four_rows(prev.row(b).data(), w.cols(), delta.row(b).data() + k, w_rows.data() + k);
    for (; k < w.rows(); ++k)
      for (std::size_t b = 0; b < batch.size(); ++b) add_row(prev.row(b).data(), w.cols(), delta(b, k), w_rows[k]);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      double* pb = prev.row(b).data();
      for (std::size_t j = 0; j < w.cols(); ++j) pb[j] *= smooth_relu_grad(z(b, j), t);
    }
    delta = std::move(prev);
  }
  return grads;
}

namespace {

void scale_row_to(std::span<double> row, NormOrder order, double target) {
  double norm = 0.0;
  if (order == NormOrder::L2) {
    for (double v : row) norm += v * v;
    norm = std::sqrt(norm);
  } else {
    for (double v : row) norm += std::abs(v);
  }
  if (norm == 0.0) return;
  if (std::abs(norm - target) <= 1e-12 * target) return;
  const double factor = target / norm;
  for (double& v : row) v *= factor;
}

}  // namespace

void renormalize(Network& net, double lambda_hidden, TopMode top_mode) {
  require(lambda_hidden > 0.0, ErrorKind::Parameter, "renormalize: lambda_hidden must be positive");
  auto& weights = net.weights();
  for (std::size_t l = 0; l + 1 < weights.size(); ++l) {
    for (std::size_t r = 0; r < weights[l].rows(); ++r) scale_row_to(weights[l].row(r), NormOrder::L2, lambda_hidden);
  }
  if (top_mode == TopMode::Normalize) {
    auto& top = weights.back();
    for (std::size_t r = 0; r < top.rows(); ++r) scale_row_to(top.row(r), NormOrder::L1, 1.0);
  }
}

NormBudget measure_norm_budget(const Network& net) {
  NormBudget budget;
  const auto& weights = net.weights();
  for (std::size_t l = 0; l + 1 < weights.size(); ++l) {
    for (std::size_t r = 0; r < weights[l].rows(); ++r)
      budget.lambda = std::max(budget.lambda, vector_norm(weights[l].row(r), NormOrder::L2));
  }
  const auto& top = weights.back();
  for (std::size_t r = 0; r < top.rows(); ++r)
    budget.lambda_prime = std::max(budget.lambda_prime, vector_norm(top.row(r), NormOrder::L1));
  return budget;
}

}  // namespace maebound
