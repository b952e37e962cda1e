#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "maebound/bounds.hpp"
#include "maebound/config.hpp"
#include "maebound/network.hpp"
#include "maebound/sample.hpp"
#include "maebound/training.hpp"

namespace maebound {

enum class DataSource { Synthetic, Idx };

struct ModelEntry {
  std::string name;
  std::vector<std::size_t> hidden_widths;
};

/// Everything an experiment run needs, read from a KeyValueConfig.
///
/// Recognised keys (defaults in brackets):
///   seed [0], output.dir, threads [1]
///   data.source = synthetic | idx
///   data.idx_images, data.train_count [2000], data.test_count [500],
///   data.agrn_variance [1]
///   data.synth.d, data.synth.q, data.synth.n, data.synth.noise_variance [0.01],
///   data.test_fraction [0.2]
///   data.nominal_s [1]
///   roster.anchor_l1, roster.anchor_l2, roster.dnn.<name> = 64-64-128
///   train.learning_rate, train.momentum, train.epochs, train.batch_size,
///   train.lambda_hidden, train.top_mode = normalize | measure,
///   train.loss = mae | mse, train.renormalize = step | epoch,
///   train.sharpness [50], train.bias [false]
///   bound.r (required), bound.delta [0.95], bound.include_hoeffding [false],
///   bound.per_dimension [false], bound.validity [true]
struct ExperimentConfig {
  KeyValueConfig source;

  DataSource data_source = DataSource::Synthetic;
  std::filesystem::path idx_images;
  std::size_t train_count = 2000;
  std::size_t test_count = 500;
  double agrn_variance = 1.0;
  std::size_t synth_d = 16;
  std::size_t synth_q = 16;
  std::size_t synth_n = 2000;
  double synth_noise_variance = 0.01;
  double test_fraction = 0.2;
  double nominal_s = 1.0;

  std::size_t anchor_l1 = 0;
  std::size_t anchor_l2 = 0;
  std::vector<ModelEntry> dnns;

  TrainConfig train;
  double sharpness = kDefaultSharpness;
  bool bias_enabled = false;

  double r = 0.0;
  double delta = 0.95;
  bool include_hoeffding = false;
  bool per_dimension = false;
  bool validity_mode = true;

  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  std::size_t threads = 1;

  /// Relative data paths resolve against `base_dir`.
  static ExperimentConfig from_config(const KeyValueConfig& cfg, const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Replaces the master seed, keeping the echoed config in sync.
  void set_seed(std::uint64_t new_seed);

  void validate() const;
  /// Anchors first, then DNNs in file order.
  [[nodiscard]] std::vector<ModelEntry> roster() const;
  [[nodiscard]] NetworkSpec network_spec(const std::vector<std::size_t>& hidden_widths) const;
};

struct ExperimentData {
  Dataset train;
  Dataset test;
};

/// Builds the train/test split; noise and splits derive from the master seed.
ExperimentData build_experiment_data(const ExperimentConfig& config);

struct ModelRow {
  std::string name;
  bool anchor = false;
  NetworkSpec spec;
  bool failed = false;
  std::string error;
  TrainLog log;
  NormBudget budget;
  std::size_t parameters = 0;
  BoundReport bound;
  std::uint64_t init_seed = 0;
  std::uint64_t train_seed = 0;

  [[nodiscard]] double test_mae() const { return log.test_mae.empty() ? log.initial_test_mae : log.test_mae.back(); }
  [[nodiscard]] double train_mae() const {
    return log.train_mae.empty() ? log.initial_train_mae : log.train_mae.back();
  }
};

struct ExperimentReport {
  std::vector<ModelRow> rows;
  Calibration calibration;
  double s_measured = 0.0;
  double s_nominal = 1.0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::string config_hash;
  nlohmann::json json;

  [[nodiscard]] const ModelRow& row(const std::string& name) const;
};

/// Trains the anchors, calibrates, trains every DNN and assembles the
/// report. Writes report.json, table.md and per-model CSV/SVG files when the
/// config names an output directory.
ExperimentReport run_experiment(const ExperimentConfig& config);

std::string render_table_markdown(const ExperimentReport& report);

/// Checks row arithmetic (MAE_B equal to the sum of its terms) and the echoed
/// config hash of a parsed report.
void verify_report_json(const nlohmann::json& report);

}  // namespace maebound
