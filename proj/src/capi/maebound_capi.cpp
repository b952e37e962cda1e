#include "maebound/maebound.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "maebound/bounds.hpp"
#include "maebound/curves.hpp"
#include "maebound/data.hpp"
#include "maebound/error.hpp"
#include "maebound/experiment.hpp"
#include "maebound/serialize.hpp"
#include "maebound/suite.hpp"
#include "maebound/training.hpp"

struct mb_network {
  maebound::Network net;
};
struct mb_dataset {
  maebound::Dataset ds;
};
struct mb_trainlog {
  maebound::TrainLog log;
};

namespace {

thread_local std::string last_error;

mb_status to_status(maebound::ErrorKind kind) {
  using maebound::ErrorKind;
  switch (kind) {
    case ErrorKind::Parameter: return MB_ERR_PARAMETER;
    case ErrorKind::Dimension: return MB_ERR_DIMENSION;
    case ErrorKind::Shape: return MB_ERR_SHAPE;
    case ErrorKind::Numeric: return MB_ERR_NUMERIC;
    case ErrorKind::Format: return MB_ERR_FORMAT;
    case ErrorKind::Io: return MB_ERR_IO;
    case ErrorKind::Mode: return MB_ERR_MODE;
    case ErrorKind::Capability: return MB_ERR_CAPABILITY;
    case ErrorKind::Config: return MB_ERR_CONFIG;
  }
  return MB_ERR_INTERNAL;
}

template <typename F>
mb_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return MB_OK;
  } catch (const maebound::Error& e) {
    last_error = e.what();
    return to_status(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return MB_ERR_INTERNAL;
}

template <typename... Ptrs>
bool any_null(Ptrs... ptrs) {
  return ((ptrs == nullptr) || ...);
}

mb_status null_argument() {
  last_error = "required pointer argument is NULL";
  return MB_ERR_NULL_ARGUMENT;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

maebound::BoundInputs to_inputs(const mb_bound_inputs& in) {
  maebound::BoundInputs b;
  b.q = in.q;
  b.d = in.d;
  b.N = in.N;
  b.k = in.k;
  b.n_k = in.n_k;
  b.r = in.r;
  b.lambda = in.lambda;
  b.lambda_prime = in.lambda_prime;
  b.s = in.s;
  b.delta = in.delta;
  b.min_hidden_width = in.min_hidden_width;
  b.validity_mode = in.validity_mode != 0;
  return b;
}

maebound::TrainConfig to_config(const mb_train_options& o) {
  maebound::TrainConfig c;
  c.learning_rate = o.learning_rate;
  c.momentum = o.momentum;
  c.epochs = o.epochs;
  c.batch_size = o.batch_size;
  c.seed = o.seed;
  c.lambda_hidden = o.lambda_hidden;
  c.top_mode = o.measure_top ? maebound::TopMode::Measure : maebound::TopMode::Normalize;
  c.loss = o.mse_loss ? maebound::LossKind::Mse : maebound::LossKind::Mae;
  c.renormalize = o.renormalize_per_epoch ? maebound::RenormSchedule::EveryEpoch : maebound::RenormSchedule::EveryStep;
  c.per_dimension_mae = o.per_dimension_mae != 0;
  return c;
}

nlohmann::json parse_json(const char* text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    maebound::fail(maebound::ErrorKind::Format, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

extern "C" {

const char* mb_version(void) { return "1.0.0"; }

const char* mb_last_error(void) { return last_error.c_str(); }

const char* mb_status_name(mb_status status) {
  switch (status) {
    case MB_OK: return "ok";
    case MB_ERR_PARAMETER: return "parameter error";
    case MB_ERR_DIMENSION: return "dimension error";
    case MB_ERR_SHAPE: return "shape error";
    case MB_ERR_NUMERIC: return "numeric error";
    case MB_ERR_FORMAT: return "format error";
    case MB_ERR_IO: return "I/O error";
    case MB_ERR_MODE: return "mode error";
    case MB_ERR_CAPABILITY: return "capability error";
    case MB_ERR_CONFIG: return "configuration error";
    case MB_ERR_NULL_ARGUMENT: return "null argument";
    case MB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void mb_string_free(char* s) { std::free(s); }

mb_status mb_network_create(size_t input_dim, size_t output_dim, const size_t* hidden_widths, size_t hidden_count,
                            double sharpness, int bias, uint64_t seed, mb_network** out) {
  if (any_null(out) || (hidden_count > 0 && hidden_widths == nullptr)) return null_argument();
  return guarded([&] {
    maebound::NetworkSpec spec;
    spec.input_dim = input_dim;
    spec.output_dim = output_dim;
    spec.hidden_widths.assign(hidden_widths, hidden_widths + hidden_count);
    spec.sharpness = sharpness;
    spec.bias_enabled = bias != 0;
    maebound::Rng rng(seed);
    *out = new mb_network{maebound::init_network(spec, rng)};
  });
}

mb_status mb_network_load(const char* path, mb_network** out) {
  if (any_null(path, out)) return null_argument();
  return guarded([&] { *out = new mb_network{maebound::load_network(path)}; });
}

mb_status mb_network_save(const mb_network* net, const char* path) {
  if (any_null(net, path)) return null_argument();
  return guarded([&] { maebound::save_network(net->net, path); });
}

void mb_network_free(mb_network* net) { delete net; }

mb_status mb_network_dims(const mb_network* net, size_t* input_dim, size_t* output_dim, size_t* depth) {
  if (any_null(net)) return null_argument();
  const auto& spec = net->net.spec();
  if (input_dim) *input_dim = spec.input_dim;
  if (output_dim) *output_dim = spec.output_dim;
  if (depth) *depth = spec.depth();
  last_error.clear();
  return MB_OK;
}

mb_status mb_network_describe(const mb_network* net, char** out) {
  if (any_null(net, out)) return null_argument();
  return guarded([&] { *out = copy_string(net->net.spec().describe()); });
}

mb_status mb_network_forward(const mb_network* net, const double* x, size_t x_len, double* y, size_t y_len) {
  if (any_null(net, x, y)) return null_argument();
  return guarded([&] {
    const auto& spec = net->net.spec();
    maebound::require(x_len == spec.input_dim, maebound::ErrorKind::Shape,
                      "forward: input has length " + std::to_string(x_len) + ", expected " +
                          std::to_string(spec.input_dim));
    maebound::require(y_len == spec.output_dim, maebound::ErrorKind::Shape,
                      "forward: output buffer has length " + std::to_string(y_len) + ", expected " +
                          std::to_string(spec.output_dim));
    const maebound::DenseVector out = maebound::forward(net->net, maebound::DenseVector(std::vector<double>(x, x + x_len)));
    std::memcpy(y, out.data.data(), y_len * sizeof(double));
  });
}

mb_status mb_network_renormalize(mb_network* net, double lambda_hidden, int measure_top) {
  if (any_null(net)) return null_argument();
  return guarded([&] {
    maebound::renormalize(net->net, lambda_hidden,
                          measure_top ? maebound::TopMode::Measure : maebound::TopMode::Normalize);
  });
}

mb_status mb_network_norm_budget(const mb_network* net, double* lambda, double* lambda_prime) {
  if (any_null(net, lambda, lambda_prime)) return null_argument();
  return guarded([&] {
    const auto b = maebound::measure_norm_budget(net->net);
    *lambda = b.lambda;
    *lambda_prime = b.lambda_prime;
  });
}

mb_status mb_dataset_synthetic(size_t d, size_t q, size_t n, uint64_t teacher_seed, uint64_t noise_seed,
                               double noise_variance, mb_dataset** out) {
  if (any_null(out)) return null_argument();
  return guarded([&] {
    auto synth = maebound::synth_smooth_dataset(d, q, n, teacher_seed, noise_seed, noise_variance);
    *out = new mb_dataset{std::move(synth.dataset)};
  });
}

mb_status mb_dataset_from_idx(const char* path, size_t first, size_t count, double noise_variance, uint64_t seed,
                              mb_dataset** out) {
  if (any_null(path, out)) return null_argument();
  return guarded([&] {
    const auto images = maebound::load_idx(path);
    maebound::require(first + count <= images.size(), maebound::ErrorKind::Parameter,
                      std::string(path) + " holds " + std::to_string(images.size()) + " images");
    maebound::ImageSet subset{images.rows, images.cols,
                              {images.images.begin() + static_cast<std::ptrdiff_t>(first),
                               images.images.begin() + static_cast<std::ptrdiff_t>(first + count)}};
    *out = new mb_dataset{maebound::corrupt_agrn(subset, noise_variance, maebound::Rng(seed))};
  });
}

mb_status mb_dataset_split(const mb_dataset* ds, double test_fraction, uint64_t seed, mb_dataset** train,
                           mb_dataset** test) {
  if (any_null(ds, train, test)) return null_argument();
  return guarded([&] {
    auto [a, b] = maebound::split(ds->ds, test_fraction, maebound::Rng(seed));
    auto* tr = new mb_dataset{std::move(a)};
    *test = new mb_dataset{std::move(b)};
    *train = tr;
  });
}

mb_status mb_dataset_load(const char* path, mb_dataset** out) {
  if (any_null(path, out)) return null_argument();
  return guarded([&] { *out = new mb_dataset{maebound::load_dataset(path)}; });
}

mb_status mb_dataset_save(const mb_dataset* ds, const char* path) {
  if (any_null(ds, path)) return null_argument();
  return guarded([&] { maebound::save_dataset(ds->ds, path); });
}

mb_status mb_dataset_shape(const mb_dataset* ds, size_t* count, size_t* input_dim, size_t* output_dim) {
  if (any_null(ds)) return null_argument();
  if (count) *count = ds->ds.size();
  if (input_dim) *input_dim = ds->ds.input_dim;
  if (output_dim) *output_dim = ds->ds.output_dim;
  last_error.clear();
  return MB_OK;
}

void mb_dataset_free(mb_dataset* ds) { delete ds; }

void mb_train_options_default(mb_train_options* options) {
  if (options == nullptr) return;
  const maebound::TrainConfig c;
  *options = mb_train_options{c.learning_rate, c.momentum, c.epochs, c.batch_size, c.seed, c.lambda_hidden, 0, 0, 0, 0};
}

mb_status mb_train(mb_network* net, const mb_dataset* train, const mb_dataset* test, const mb_train_options* options,
                   mb_trainlog** log) {
  if (any_null(net, train, test, options, log)) return null_argument();
  return guarded([&] {
    auto [trained, tlog] = maebound::train(net->net, train->ds, test->ds, to_config(*options));
    auto* out = new mb_trainlog{std::move(tlog)};
    net->net = std::move(trained);
    *log = out;
  });
}

mb_status mb_evaluate_mae(const mb_network* net, const mb_dataset* ds, int per_dimension, double* out) {
  if (any_null(net, ds, out)) return null_argument();
  return guarded([&] { *out = maebound::evaluate_mae(net->net, ds->ds, per_dimension != 0); });
}

mb_status mb_trainlog_to_csv(const mb_trainlog* log, char** out) {
  if (any_null(log, out)) return null_argument();
  return guarded([&] { *out = copy_string(maebound::trainlog_to_csv(log->log)); });
}

mb_status mb_trainlog_from_csv(const char* csv, mb_trainlog** out) {
  if (any_null(csv, out)) return null_argument();
  return guarded([&] { *out = new mb_trainlog{maebound::trainlog_from_csv(csv)}; });
}

mb_status mb_trainlog_summary(const mb_trainlog* log, size_t* epochs, double* initial_train_mae,
                              double* final_train_mae, double* final_test_mae) {
  if (any_null(log)) return null_argument();
  const auto& l = log->log;
  if (epochs) *epochs = l.epochs();
  if (initial_train_mae) *initial_train_mae = l.initial_train_mae;
  if (final_train_mae) *final_train_mae = l.train_mae.empty() ? l.initial_train_mae : l.train_mae.back();
  if (final_test_mae) *final_test_mae = l.test_mae.empty() ? l.initial_test_mae : l.test_mae.back();
  last_error.clear();
  return MB_OK;
}

mb_status mb_emit_curves(const mb_trainlog* log, const char* dir, const char* stem) {
  if (any_null(log, dir, stem)) return null_argument();
  return guarded([&] { maebound::emit_curves(log->log, dir, stem); });
}

void mb_trainlog_free(mb_trainlog* log) { delete log; }

void mb_bound_inputs_default(mb_bound_inputs* in) {
  if (in == nullptr) return;
  const maebound::BoundInputs b;
  *in = mb_bound_inputs{b.q, b.d, b.N, b.k, b.n_k, b.r, b.lambda, b.lambda_prime, b.s, b.delta,
                        b.min_hidden_width, b.validity_mode ? 1 : 0};
}

mb_status mb_estimation_error_bound(const mb_bound_inputs* in, double* out) {
  if (any_null(in, out)) return null_argument();
  return guarded([&] { *out = maebound::estimation_error_bound(to_inputs(*in)); });
}

mb_status mb_hoeffding_deviation(size_t N, double delta, double* out) {
  if (any_null(out)) return null_argument();
  return guarded([&] { *out = maebound::hoeffding_deviation(N, delta); });
}

mb_status mb_approximation_error_bound(double c, const mb_bound_inputs* in, double* out) {
  if (any_null(in, out)) return null_argument();
  return guarded([&] { *out = maebound::approximation_error_bound(c, to_inputs(*in)); });
}

mb_status mb_optimization_error_bound(double mu, double M, double beta, double gamma, double* out) {
  if (any_null(out)) return null_argument();
  return guarded([&] { *out = maebound::optimization_error_bound({mu, M, beta, gamma}); });
}

mb_status mb_calibrate(double mae1, double mae2, size_t l1, size_t l2, const mb_bound_inputs* in,
                       char** calibration_json) {
  if (any_null(in, calibration_json)) return null_argument();
  return guarded([&] {
    const auto cal = maebound::calibrate(mae1, mae2, l1, l2, to_inputs(*in));
    *calibration_json = copy_string(maebound::to_json(cal).dump());
  });
}

mb_status mb_bound_report(const char* calibration_json, const mb_bound_inputs* in, int include_hoeffding,
                          char** report_json) {
  if (any_null(calibration_json, in, report_json)) return null_argument();
  return guarded([&] {
    const auto cal = maebound::calibration_from_json(parse_json(calibration_json));
    const auto report = maebound::mae_upper_bound(cal, to_inputs(*in), {include_hoeffding != 0});
    *report_json = copy_string(maebound::to_json(report).dump());
  });
}

mb_status mb_experiment_run(const char* config_path, const uint64_t* seed_override, const char* out_dir,
                            char** report_json) {
  if (any_null(config_path)) return null_argument();
  return guarded([&] {
    auto config = maebound::ExperimentConfig::load(config_path);
    if (seed_override) config.set_seed(*seed_override);
    if (out_dir) config.output_dir = out_dir;
    const auto report = maebound::run_experiment(config);
    if (report_json) *report_json = copy_string(report.json.dump(2));
  });
}

mb_status mb_rademacher_suite(uint64_t seed, size_t draws, char** jsonl) {
  if (any_null(jsonl)) return null_argument();
  return guarded([&] {
    maebound::SuiteConfig config;
    config.seed = seed;
    config.draws = draws;
    *jsonl = copy_string(maebound::to_json_lines(maebound::run_rademacher_suite(config)));
  });
}

}  // extern "C"
