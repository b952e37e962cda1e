// maebound command-line front end. Links only the C API.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "maebound/maebound.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;

struct Failure {
  int code;
  std::string message;
};

[[noreturn]] void fail_with(int code, std::string message) { throw Failure{code, std::move(message)}; }

void check(mb_status status, const std::string& context) {
  if (status == MB_OK) return;
  const int code = status == MB_ERR_NUMERIC ? kExitNumeric : kExitConfig;
  fail_with(code, context + ": " + mb_status_name(status) + ": " + mb_last_error());
}

std::string take(char* s) {
  std::string out(s);
  mb_string_free(s);
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_with(kExitConfig, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) fail_with(kExitConfig, "cannot write '" + path.string() + "'");
}

/// Prints to stdout, or writes `name` under the output directory.
void emit(const std::string& out_dir, const std::string& name, const std::string& text) {
  if (out_dir.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    spill(std::filesystem::path(out_dir) / name, text + (text.empty() || text.back() == '\n' ? "" : "\n"));
  }
}

std::vector<size_t> parse_widths(const std::string& text) {
  std::vector<size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, '-')) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(item, &used);
      if (used != item.size() || v == 0) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      fail_with(kExitConfig, "bad width list '" + text + "'");
    }
  }
  return out;
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
};
using NetworkHandle = Handle<mb_network, mb_network_free>;
using DatasetHandle = Handle<mb_dataset, mb_dataset_free>;
using LogHandle = Handle<mb_trainlog, mb_trainlog_free>;

struct Globals {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
};

struct BoundArgs {
  size_t q = 0, d = 0, N = 0, k = 2, n_k = 0, min_width = 0;
  double r = 0.0, lambda = 1.0, lambda_prime = 1.0, s = 1.0, delta = 0.95;
  bool waive_validity = false;
};

void add_bound_options(CLI::App* cmd, BoundArgs& b, bool architecture) {
  cmd->add_option("--q", b.q, "Output dimension");
  cmd->add_option("--d", b.d, "Input dimension");
  cmd->add_option("--N", b.N, "Training-set size");
  cmd->add_option("--r", b.r, "Differential order r of the target");
  cmd->add_option("--lambda", b.lambda, "Hidden-layer row L2 budget");
  cmd->add_option("--lambda-prime", b.lambda_prime, "Top-layer row L1 budget");
  cmd->add_option("--s", b.s, "Input L2 bound");
  cmd->add_option("--delta", b.delta, "Confidence level");
  cmd->add_flag("--waive-validity", b.waive_validity, "Do not report width/depth violations");
  if (architecture) {
    cmd->add_option("--k", b.k, "Number of weight matrices");
    cmd->add_option("--n-k", b.n_k, "Top hidden width");
    cmd->add_option("--min-width", b.min_width, "Narrowest hidden width (default n_k)");
  }
}

mb_bound_inputs to_inputs(const BoundArgs& b) {
  mb_bound_inputs in;
  mb_bound_inputs_default(&in);
  in.q = b.q;
  in.d = b.d;
  in.N = b.N;
  in.k = b.k;
  in.n_k = b.n_k;
  in.r = b.r;
  in.lambda = b.lambda;
  in.lambda_prime = b.lambda_prime;
  in.s = b.s;
  in.delta = b.delta;
  in.min_hidden_width = b.min_width;
  in.validity_mode = b.waive_validity ? 0 : 1;
  return in;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Norm-constrained vector-to-vector regression with calibrated MAE bounds"};
  app.require_subcommand(1);
  Globals g;
  uint64_t seed_value = 0;
  app.add_option("--config", g.config, "Key-value configuration file");
  auto* seed_opt = app.add_option("--seed", seed_value, "Master seed");
  app.add_option("--out", g.out, "Output directory");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Anchors, calibration, DNNs and the decomposition table");

  // rademacher
  auto* rademacher = app.add_subcommand("rademacher", "Run the Rademacher-complexity check suite");
  size_t draws = 10000;
  rademacher->add_option("--draws", draws, "Monte-Carlo sign draws per estimate");

  // synth-data
  auto* synth = app.add_subcommand("synth-data", "Generate a dataset and write train/test containers");
  size_t sd_d = 16, sd_q = 16, sd_n = 2000, idx_first = 0, idx_count = 0;
  double sd_noise = 0.01, test_fraction = 0.2, agrn = 1.0;
  std::string idx_path;
  synth->add_option("--d", sd_d, "Input dimension");
  synth->add_option("--q", sd_q, "Output dimension");
  synth->add_option("--n", sd_n, "Number of pairs");
  synth->add_option("--noise-variance", sd_noise, "Target noise variance");
  synth->add_option("--idx", idx_path, "Build from an IDX image file instead (noisy input, clean target)");
  synth->add_option("--first", idx_first, "First image index");
  synth->add_option("--count", idx_count, "Number of images");
  synth->add_option("--agrn-variance", agrn, "Additive Gaussian noise variance for IDX images");
  synth->add_option("--test-fraction", test_fraction, "Fraction of pairs held out");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one network on dataset containers");
  std::string train_path, test_path, widths = "64";
  mb_train_options topt;
  mb_train_options_default(&topt);
  double sharpness = 50.0;
  bool measure_top = false, mse = false, per_epoch = false, per_dim = false;
  train_cmd->add_option("--train", train_path, "Training dataset container")->required();
  train_cmd->add_option("--test", test_path, "Test dataset container")->required();
  train_cmd->add_option("--widths", widths, "Hidden widths, e.g. 64-64-128");
  train_cmd->add_option("--learning-rate", topt.learning_rate, "SGD step size");
  train_cmd->add_option("--momentum", topt.momentum, "Momentum coefficient");
  train_cmd->add_option("--epochs", topt.epochs, "Epochs");
  train_cmd->add_option("--batch-size", topt.batch_size, "Mini-batch size");
  train_cmd->add_option("--lambda-hidden", topt.lambda_hidden, "Hidden-layer row L2 norm");
  train_cmd->add_option("--sharpness", sharpness, "Smooth ReLU sharpness t");
  train_cmd->add_flag("--measure-top", measure_top, "Leave the top layer unnormalized");
  train_cmd->add_flag("--mse", mse, "Train on MSE");
  train_cmd->add_flag("--renormalize-per-epoch", per_epoch, "Renormalize once per epoch");
  train_cmd->add_flag("--per-dimension", per_dim, "Report MAE per output coordinate");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Solve c and b from two anchor MAEs");
  double mae1 = 0.0, mae2 = 0.0;
  size_t l1 = 0, l2 = 0;
  BoundArgs cal_args;
  calibrate->add_option("--mae1", mae1, "MAE of the narrower anchor")->required();
  calibrate->add_option("--mae2", mae2, "MAE of the wider anchor")->required();
  calibrate->add_option("--l1", l1, "Narrower anchor width")->required();
  calibrate->add_option("--l2", l2, "Wider anchor width")->required();
  add_bound_options(calibrate, cal_args, false);

  // bound
  auto* bound = app.add_subcommand("bound", "AE/EE/OE decomposition from a calibration record");
  std::string calibration_path;
  BoundArgs bound_args;
  bool hoeffding = false;
  bound->add_option("--calibration", calibration_path, "Calibration JSON from `calibrate`")->required();
  add_bound_options(bound, bound_args, true);
  bound->add_flag("--include-hoeffding", hoeffding, "Add the Hoeffding deviation term");

  // emit-curves
  auto* curves = app.add_subcommand("emit-curves", "Render a train log CSV as an SVG chart");
  std::string log_path, stem = "model";
  curves->add_option("--log", log_path, "Train log CSV")->required();
  curves->add_option("--stem", stem, "File name stem");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  if (*seed_opt) g.seed = seed_value;

  try {
    if (*experiment) {
      if (g.config.empty()) fail_with(kExitConfig, "experiment needs --config");
      char* json = nullptr;
      check(mb_experiment_run(g.config.c_str(), g.seed ? &*g.seed : nullptr, g.out.empty() ? nullptr : g.out.c_str(),
                              &json),
            "experiment");
      const auto report = nlohmann::json::parse(take(json));
      for (const auto& row : report.at("rows")) {
        if (row.at("status") != "ok") {
          std::cerr << row.at("name").get<std::string>() << ": failed: " << row.at("error").get<std::string>()
                    << '\n';
          continue;
        }
        std::printf("%-24s test MAE %.6g  AE %.6g  EE %.6g  OE %.6g  MAE_B %.6g\n",
                    row.at("name").get<std::string>().c_str(), row.at("test_mae").get<double>(),
                    row.at("AE").get<double>(), row.at("EE").get<double>(), row.at("OE").get<double>(),
                    row.at("MAE_B").get<double>());
      }
      if (g.out.empty()) std::cout << report.dump(2) << '\n';
    } else if (*rademacher) {
      char* lines = nullptr;
      check(mb_rademacher_suite(g.seed.value_or(0), draws, &lines), "rademacher");
      const std::string text = take(lines);
      std::size_t failed = 0, total = 0;
      std::istringstream in(text);
      for (std::string line; std::getline(in, line);) {
        ++total;
        if (!nlohmann::json::parse(line).at("holds").get<bool>()) ++failed;
      }
      emit(g.out, "rademacher.jsonl", text);
      std::cerr << total - failed << "/" << total << " checks hold\n";
    } else if (*synth) {
      if (g.out.empty()) fail_with(kExitConfig, "synth-data needs --out");
      const uint64_t seed = g.seed.value_or(0);
      DatasetHandle all, tr, te;
      if (!idx_path.empty()) {
        if (idx_count == 0) fail_with(kExitConfig, "--idx needs --count");
        check(mb_dataset_from_idx(idx_path.c_str(), idx_first, idx_count, agrn, seed, &all.ptr), "synth-data");
      } else {
        check(mb_dataset_synthetic(sd_d, sd_q, sd_n, seed, seed + 1, sd_noise, &all.ptr), "synth-data");
      }
      check(mb_dataset_split(all.ptr, test_fraction, seed, &tr.ptr, &te.ptr), "synth-data");
      std::filesystem::create_directories(g.out);
      const auto train_file = (std::filesystem::path(g.out) / "train.maed").string();
      const auto test_file = (std::filesystem::path(g.out) / "test.maed").string();
      check(mb_dataset_save(tr.ptr, train_file.c_str()), "synth-data");
      check(mb_dataset_save(te.ptr, test_file.c_str()), "synth-data");
      size_t n_train = 0, n_test = 0;
      mb_dataset_shape(tr.ptr, &n_train, nullptr, nullptr);
      mb_dataset_shape(te.ptr, &n_test, nullptr, nullptr);
      std::cout << train_file << " (" << n_train << " pairs)\n" << test_file << " (" << n_test << " pairs)\n";
    } else if (*train_cmd) {
      if (g.out.empty()) fail_with(kExitConfig, "train needs --out");
      DatasetHandle tr, te;
      check(mb_dataset_load(train_path.c_str(), &tr.ptr), "train");
      check(mb_dataset_load(test_path.c_str(), &te.ptr), "train");
      size_t d = 0, q = 0;
      mb_dataset_shape(tr.ptr, nullptr, &d, &q);
      const auto hidden = parse_widths(widths);
      topt.seed = g.seed.value_or(0);
      topt.measure_top = measure_top;
      topt.mse_loss = mse;
      topt.renormalize_per_epoch = per_epoch;
      topt.per_dimension_mae = per_dim;
      NetworkHandle net;
      check(mb_network_create(d, q, hidden.data(), hidden.size(), sharpness, 0, topt.seed, &net.ptr), "train");
      LogHandle log;
      check(mb_train(net.ptr, tr.ptr, te.ptr, &topt, &log.ptr), "train");
      std::filesystem::create_directories(g.out);
      const auto net_file = (std::filesystem::path(g.out) / "network.maeb").string();
      check(mb_network_save(net.ptr, net_file.c_str()), "train");
      check(mb_emit_curves(log.ptr, g.out.c_str(), "model"), "train");
      size_t epochs = 0;
      double first = 0, last_train = 0, last_test = 0;
      mb_trainlog_summary(log.ptr, &epochs, &first, &last_train, &last_test);
      std::printf("epochs %zu  train MAE %.6g -> %.6g  test MAE %.6g\n", epochs, first, last_train, last_test);
    } else if (*calibrate) {
      const auto in = to_inputs(cal_args);
      char* json = nullptr;
      check(mb_calibrate(mae1, mae2, l1, l2, &in, &json), "calibrate");
      emit(g.out, "calibration.json", nlohmann::json::parse(take(json)).dump(2));
    } else if (*bound) {
      const auto cal = nlohmann::json::parse(slurp(calibration_path), nullptr, false);
      if (cal.is_discarded() || !cal.contains("inputs")) fail_with(kExitConfig, "bad calibration file");
      const auto& ci = cal["inputs"];
      // Dimensions default to those the calibration was solved for.
      if (bound_args.q == 0) bound_args.q = ci.value("q", size_t{1});
      if (bound_args.d == 0) bound_args.d = ci.value("d", size_t{1});
      if (bound_args.N == 0) bound_args.N = ci.value("N", size_t{1});
      if (bound_args.r == 0.0) bound_args.r = ci.value("r", 1.0);
      auto in = to_inputs(bound_args);
      char* json = nullptr;
      check(mb_bound_report(cal.dump().c_str(), &in, hoeffding ? 1 : 0, &json), "bound");
      emit(g.out, "bound.json", nlohmann::json::parse(take(json)).dump(2));
    } else if (*curves) {
      if (g.out.empty()) fail_with(kExitConfig, "emit-curves needs --out");
      LogHandle log;
      check(mb_trainlog_from_csv(slurp(log_path).c_str(), &log.ptr), "emit-curves");
      check(mb_emit_curves(log.ptr, g.out.c_str(), stem.c_str()), "emit-curves");
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
