#include "maebound/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <thread>

#include "maebound/curves.hpp"
#include "maebound/data.hpp"
#include "maebound/error.hpp"
#include "maebound/serialize.hpp"

namespace maebound {

namespace {

// Keys describing where and how fast a run happens, not what it computes.
// They are left out of the echoed config and its hash.
bool is_location_key(const std::string& key) { return key == "output.dir" || key == "threads"; }

bool valid_model_name(const std::string& name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
           c == '.';
  });
}

TopMode parse_top_mode(const std::string& s) {
  if (s == "normalize") return TopMode::Normalize;
  if (s == "measure") return TopMode::Measure;
  fail(ErrorKind::Config, "train.top_mode must be 'normalize' or 'measure', got '" + s + "'");
}

LossKind parse_loss(const std::string& s) {
  if (s == "mae") return LossKind::Mae;
  if (s == "mse") return LossKind::Mse;
  fail(ErrorKind::Config, "train.loss must be 'mae' or 'mse', got '" + s + "'");
}

RenormSchedule parse_schedule(const std::string& s) {
  if (s == "step") return RenormSchedule::EveryStep;
  if (s == "epoch") return RenormSchedule::EveryEpoch;
  fail(ErrorKind::Config, "train.renormalize must be 'step' or 'epoch', got '" + s + "'");
}

KeyValueConfig echoed(const KeyValueConfig& cfg) {
  KeyValueConfig out;
  for (const auto& [k, v] : cfg.entries())
    if (!is_location_key(k)) out.set(k, v);
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

nlohmann::json row_json(const ModelRow& row) {
  nlohmann::json j = row.failed ? nlohmann::json::object() : to_json(row.bound);
  j["name"] = row.name;
  j["role"] = row.anchor ? "anchor" : "dnn";
  j["structure"] = row.spec.describe();
  j["k"] = row.spec.depth();
  j["n_k"] = row.spec.top_width();
  j["init_seed"] = row.init_seed;
  j["train_seed"] = row.train_seed;
  j["status"] = row.failed ? "failed" : "ok";
  if (row.failed) {
    j["error"] = row.error;
    return j;
  }
  j["parameters"] = row.parameters;
  j["initial_train_mae"] = row.log.initial_train_mae;
  j["initial_test_mae"] = row.log.initial_test_mae;
  j["train_mae"] = row.train_mae();
  j["test_mae"] = row.test_mae();
  j["lambda"] = row.budget.lambda;
  j["lambda_prime"] = row.budget.lambda_prime;
  j["epochs"] = row.log.epochs();
  j["steps"] = row.log.steps;
  j["max_grad_norm"] = grad_norm_bound(row.log);
  j["bound_holds"] = row.bound.mae_b >= row.test_mae();
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const KeyValueConfig& cfg, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  c.source = echoed(cfg);
  c.seed = cfg.get_u64("seed", 0);
  c.output_dir = cfg.get_string("output.dir", "");
  c.threads = cfg.get_u64("threads", 1);

  const std::string source = cfg.get_string("data.source", "synthetic");
  if (source == "synthetic") {
    c.data_source = DataSource::Synthetic;
    c.synth_d = cfg.get_u64("data.synth.d", c.synth_d);
    c.synth_q = cfg.get_u64("data.synth.q", c.synth_q);
    c.synth_n = cfg.get_u64("data.synth.n", c.synth_n);
    c.synth_noise_variance = cfg.get_double("data.synth.noise_variance", c.synth_noise_variance);
    c.test_fraction = cfg.get_double("data.test_fraction", c.test_fraction);
  } else if (source == "idx") {
    c.data_source = DataSource::Idx;
    std::filesystem::path p = cfg.require_string("data.idx_images");
    c.idx_images = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    c.train_count = cfg.get_u64("data.train_count", c.train_count);
    c.test_count = cfg.get_u64("data.test_count", c.test_count);
    c.agrn_variance = cfg.get_double("data.agrn_variance", c.agrn_variance);
  } else {
    fail(ErrorKind::Config, "data.source must be 'synthetic' or 'idx', got '" + source + "'");
  }
  c.nominal_s = cfg.get_double("data.nominal_s", c.nominal_s);

  c.anchor_l1 = cfg.get_u64("roster.anchor_l1", 0);
  c.anchor_l2 = cfg.get_u64("roster.anchor_l2", 0);
  for (const auto& [name, widths] : cfg.with_prefix("roster.dnn.")) {
    try {
      c.dnns.push_back({name, parse_widths(widths)});
    } catch (const Error& e) {
      fail(ErrorKind::Config, "roster.dnn." + name + ": " + e.what());
    }
  }

  TrainConfig& t = c.train;
  t.learning_rate = cfg.get_double("train.learning_rate", t.learning_rate);
  t.momentum = cfg.get_double("train.momentum", t.momentum);
  t.epochs = cfg.get_u64("train.epochs", t.epochs);
  t.batch_size = cfg.get_u64("train.batch_size", t.batch_size);
  t.lambda_hidden = cfg.get_double("train.lambda_hidden", t.lambda_hidden);
  t.top_mode = parse_top_mode(cfg.get_string("train.top_mode", "normalize"));
  t.loss = parse_loss(cfg.get_string("train.loss", "mae"));
  t.renormalize = parse_schedule(cfg.get_string("train.renormalize", "step"));
  c.sharpness = cfg.get_double("train.sharpness", c.sharpness);
  c.bias_enabled = cfg.get_bool("train.bias", false);

  c.r = cfg.require_double("bound.r");
  c.delta = cfg.get_double("bound.delta", c.delta);
  c.include_hoeffding = cfg.get_bool("bound.include_hoeffding", false);
  c.per_dimension = cfg.get_bool("bound.per_dimension", false);
  c.validity_mode = cfg.get_bool("bound.validity", true);
  t.per_dimension_mae = c.per_dimension;

  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  return from_config(KeyValueConfig::parse(text), path.parent_path());
}

void ExperimentConfig::set_seed(std::uint64_t new_seed) {
  seed = new_seed;
  source.set("seed", std::to_string(new_seed));
}

void ExperimentConfig::validate() const {
  require(anchor_l1 >= 1 && anchor_l2 > anchor_l1, ErrorKind::Config,
          "roster needs two anchors with roster.anchor_l2 > roster.anchor_l1 >= 1");
  for (const auto& m : dnns) {
    require(valid_model_name(m.name), ErrorKind::Config,
            "model name '" + m.name + "' may only use letters, digits, '-', '_' and '.'");
    require(!m.hidden_widths.empty(), ErrorKind::Config, "roster.dnn." + m.name + " needs at least one hidden layer");
  }
  const auto models = roster();
  for (std::size_t i = 0; i < models.size(); ++i)
    for (std::size_t j = i + 1; j < models.size(); ++j)
      require(models[i].name != models[j].name, ErrorKind::Config, "duplicate model name '" + models[i].name + "'");
  require(r > 0.0, ErrorKind::Config, "bound.r must be positive");
  require(delta > 0.0 && delta < 1.0, ErrorKind::Config, "bound.delta must lie in (0, 1)");
  require(sharpness > 0.0, ErrorKind::Config, "train.sharpness must be positive");
  require(threads >= 1, ErrorKind::Config, "threads must be at least 1");
  if (data_source == DataSource::Synthetic) {
    require(synth_d >= 1 && synth_q >= 1 && synth_n >= 2, ErrorKind::Config, "synthetic data needs d, q >= 1, n >= 2");
    require(test_fraction > 0.0 && test_fraction < 1.0, ErrorKind::Config, "data.test_fraction must lie in (0, 1)");
  } else {
    require(train_count >= 1 && test_count >= 1, ErrorKind::Config, "idx data needs positive train and test counts");
    require(agrn_variance >= 0.0, ErrorKind::Config, "data.agrn_variance must be nonnegative");
  }
  try {
    train.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
}

std::vector<ModelEntry> ExperimentConfig::roster() const {
  std::vector<ModelEntry> out{{"anchor-" + std::to_string(anchor_l1), {anchor_l1}},
                              {"anchor-" + std::to_string(anchor_l2), {anchor_l2}}};
  out.insert(out.end(), dnns.begin(), dnns.end());
  return out;
}

NetworkSpec ExperimentConfig::network_spec(const std::vector<std::size_t>& hidden_widths) const {
  NetworkSpec spec;
  if (data_source == DataSource::Synthetic) {
    spec.input_dim = synth_d;
    spec.output_dim = synth_q;
  } else {
    spec.input_dim = 0;  // filled once the images are loaded
    spec.output_dim = 0;
  }
  spec.hidden_widths = hidden_widths;
  spec.sharpness = sharpness;
  spec.bias_enabled = bias_enabled;
  return spec;
}

ExperimentData build_experiment_data(const ExperimentConfig& config) {
  const Rng root(config.seed);
  if (config.data_source == DataSource::Synthetic) {
    auto synth = synth_smooth_dataset(config.synth_d, config.synth_q, config.synth_n, root.derive("teacher").seed(),
                                      root.derive("target-noise").seed(), config.synth_noise_variance);
    auto [train, test] = split(synth.dataset, config.test_fraction, root.derive("data"));
    return {std::move(train), std::move(test)};
  }
  const ImageSet images = load_idx(config.idx_images);
  const std::size_t needed = config.train_count + config.test_count;
  require(images.size() >= needed, ErrorKind::Config,
          config.idx_images.string() + " holds " + std::to_string(images.size()) + " images, need " +
              std::to_string(needed));
  const Dataset all = corrupt_agrn(images, config.agrn_variance, root.derive("agrn"));
  return {slice(all, 0, config.train_count), slice(all, config.train_count, config.test_count)};
}

const ModelRow& ExperimentReport::row(const std::string& name) const {
  for (const auto& r : rows)
    if (r.name == name) return r;
  fail(ErrorKind::Parameter, "no model named '" + name + "' in the report");
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const ExperimentData data = build_experiment_data(config);
  const Rng root(config.seed);

  ExperimentReport report;
  report.train_size = data.train.size();
  report.test_size = data.test.size();
  report.s_measured = max_input_norm(data.train);
  report.s_nominal = config.nominal_s;
  report.config_hash = config.source.fingerprint();

  const auto roster = config.roster();
  report.rows.resize(roster.size());
  for (std::size_t i = 0; i < roster.size(); ++i) {
    ModelRow& row = report.rows[i];
    row.name = roster[i].name;
    row.anchor = i < 2;
    row.spec = config.network_spec(roster[i].hidden_widths);
    row.spec.input_dim = data.train.input_dim;
    row.spec.output_dim = data.train.output_dim;
    row.init_seed = root.derive("init:" + row.name).seed();
    row.train_seed = root.derive("train:" + row.name).seed();
  }

  auto train_row = [&](ModelRow& row) {
    Rng init(row.init_seed);
    TrainConfig tc = config.train;
    tc.seed = row.train_seed;
    auto [net, log] = train(init_network(row.spec, init), data.train, data.test, tc);
    row.budget = measure_norm_budget(net);
    row.parameters = net.parameter_count();
    row.log = std::move(log);
  };

  // Anchors: a failure here leaves nothing to calibrate against.
  for (std::size_t i = 0; i < 2; ++i) train_row(report.rows[i]);

  // DNNs: failures are recorded per row.
  std::atomic<std::size_t> next{2};
  auto worker = [&] {
    for (std::size_t i = next++; i < report.rows.size(); i = next++) {
      ModelRow& row = report.rows[i];
      try {
        train_row(row);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Numeric) throw;
        row.failed = true;
        row.error = e.what();
      }
    }
  };
  const std::size_t workers = std::min(config.threads, report.rows.size() - 2);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          worker();
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  const std::size_t q_bound = config.per_dimension ? 1 : data.train.output_dim;
  auto inputs_for = [&](const NetworkSpec& spec, const NormBudget& budget) {
    BoundInputs in;
    in.q = q_bound;
    in.d = data.train.input_dim;
    in.N = data.train.size();
    in.k = spec.depth();
    in.n_k = spec.top_width();
    in.r = config.r;
    in.lambda = budget.lambda;
    in.lambda_prime = budget.lambda_prime;
    in.s = report.s_measured;
    in.delta = config.delta;
    in.min_hidden_width = *std::min_element(spec.hidden_widths.begin(), spec.hidden_widths.end());
    in.validity_mode = config.validity_mode;
    return in;
  };

  const ModelRow& a1 = report.rows[0];
  const ModelRow& a2 = report.rows[1];
  NormBudget anchor_budget{std::max(a1.budget.lambda, a2.budget.lambda),
                           std::max(a1.budget.lambda_prime, a2.budget.lambda_prime)};
  BoundInputs cal_inputs = inputs_for(a1.spec, anchor_budget);
  report.calibration = calibrate(a1.test_mae(), a2.test_mae(), config.anchor_l1, config.anchor_l2, cal_inputs);

  const BoundOptions options{config.include_hoeffding};
  for (auto& row : report.rows) {
    if (row.failed) continue;
    row.bound = mae_upper_bound(report.calibration, inputs_for(row.spec, row.budget), options);
  }

  nlohmann::json& j = report.json;
  j["format"] = "maebound-experiment-report";
  j["version"] = 1;
  j["config_hash"] = report.config_hash;
  nlohmann::json echo = nlohmann::json::object();
  for (const auto& [k, v] : config.source.entries()) echo[k] = v;
  j["config"] = echo;
  j["seed"] = config.seed;
  j["data"] = {{"source", config.data_source == DataSource::Synthetic ? "synthetic" : "idx"},
               {"provenance", to_string(data.train.provenance)},
               {"train_size", report.train_size},
               {"test_size", report.test_size},
               {"input_dim", data.train.input_dim},
               {"output_dim", data.train.output_dim},
               {"s_measured", report.s_measured},
               {"s_nominal", report.s_nominal},
               {"targets_scaled_with_inputs", config.data_source == DataSource::Idx}};
  if (config.data_source == DataSource::Idx) j["data"]["agrn_variance"] = config.agrn_variance;
  j["flags"] = {{"validity_waived", !config.validity_mode},
                {"hoeffding_included", config.include_hoeffding},
                {"per_dimension_mae", config.per_dimension},
                {"top_mode", config.train.top_mode == TopMode::Normalize ? "normalize" : "measure"}};
  j["calibration"] = to_json(report.calibration);
  j["measured"] = {{"lambda", anchor_budget.lambda},
                   {"lambda_prime", anchor_budget.lambda_prime},
                   {"s", report.s_measured}};
  j["rows"] = nlohmann::json::array();
  for (const auto& row : report.rows) j["rows"].push_back(row_json(row));

  if (!config.output_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    require(!ec, ErrorKind::Io, "cannot create '" + config.output_dir.string() + "': " + ec.message());
    for (const auto& row : report.rows)
      if (!row.failed && row.log.epochs() > 0) emit_curves(row.log, config.output_dir, row.name);
    write_file_atomic(config.output_dir / "table.md", render_table_markdown(report));
    write_file_atomic(config.output_dir / "report.json", j.dump(2) + '\n');
  }
  return report;
}

std::string render_table_markdown(const ExperimentReport& report) {
  std::string out = "| model | structure | test MAE | AE | EE | OE | MAE_B | b_clamped |\n";
  out += "|---|---|---|---|---|---|---|---|\n";
  for (const auto& row : report.rows) {
    out += "| " + row.name + " | " + row.spec.describe() + " | ";
    if (row.failed) {
      out += "failed | | | | | |\n";
      continue;
    }
    out += fmt(row.test_mae()) + " | " + fmt(row.bound.ae) + " | " + fmt(row.bound.ee) + " | " + fmt(row.bound.oe) +
           " | " + fmt(row.bound.mae_b) + " | " + (row.bound.b_clamped ? "yes" : "no") + " |\n";
  }
  const auto& cal = report.calibration;
  out += "\nc = " + fmt(cal.c) + ", b = " + fmt(cal.b) + (cal.b_clamped ? " (clamped)" : "") +
         ", s = " + fmt(report.s_measured) + ", N = " + std::to_string(report.train_size) + "\n";
  return out;
}

void verify_report_json(const nlohmann::json& report) {
  try {
    KeyValueConfig cfg;
    for (const auto& [k, v] : report.at("config").items()) cfg.set(k, v.get<std::string>());
    require(cfg.fingerprint() == report.at("config_hash").get<std::string>(), ErrorKind::Format,
            "report: config_hash does not match the echoed config");
    for (const auto& row : report.at("rows")) {
      if (row.at("status") == "ok") (void)bound_report_from_json(row);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("report: ") + e.what());
  }
}

}  // namespace maebound
