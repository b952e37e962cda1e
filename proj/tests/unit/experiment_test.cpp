#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "maebound/curves.hpp"
#include "maebound/error.hpp"
#include "maebound/experiment.hpp"
#include "maebound/serialize.hpp"

using namespace maebound;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig =
    "seed = 3\n"
    "data.source = synthetic\n"
    "data.synth.d = 4\n"
    "data.synth.q = 3\n"
    "data.synth.n = 200\n"
    "data.test_fraction = 0.25\n"
    "roster.anchor_l1 = 6\n"
    "roster.anchor_l2 = 12\n"
    "roster.dnn.deep = 6-6-12\n"
    "train.learning_rate = 0.05\n"
    "train.epochs = 4\n"
    "train.batch_size = 16\n"
    "bound.r = 6\n";

ExperimentConfig small_config(const std::string& extra = "") {
  return ExperimentConfig::from_config(KeyValueConfig::parse(std::string(kSmallConfig) + extra));
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("maebound_experiment_" + name);
  fs::remove_all(dir);
  return dir;
}

TrainLog log_of(std::vector<double> train, std::vector<double> test) {
  TrainLog log;
  log.initial_train_mae = train.front();
  log.initial_test_mae = test.front();
  log.train_mae.assign(train.begin() + 1, train.end());
  log.test_mae.assign(test.begin() + 1, test.end());
  log.max_grad_norm.assign(log.train_mae.size(), 1.0);
  return log;
}

}  // namespace

TEST(ExperimentConfig, ValidatesRoster) {
  EXPECT_NO_THROW(small_config().validate());
  auto swapped = ExperimentConfig::from_config(
      KeyValueConfig::parse(std::string(kSmallConfig) + "roster.anchor_l1x = 1\n"));
  swapped.anchor_l1 = 12;
  swapped.anchor_l2 = 6;
  EXPECT_THROW(swapped.validate(), Error);
  auto no_r = small_config();
  no_r.r = 0;
  EXPECT_THROW(no_r.validate(), Error);
  auto bad_name = small_config();
  bad_name.dnns.push_back({"a b", {3}});
  EXPECT_THROW(bad_name.validate(), Error);
  const auto roster = small_config().roster();
  ASSERT_EQ(roster.size(), 3u);
  EXPECT_EQ(roster[0].name, "anchor-6");
  EXPECT_EQ(roster[1].name, "anchor-12");
  EXPECT_EQ(roster[2].name, "deep");
}

TEST(ExperimentConfig, BundledConfigsLoad) {
  for (const char* name : {"synthetic.cfg", "mnist_desk.cfg"}) {
    const auto cfg = ExperimentConfig::load(fs::path(MAEBOUND_TEST_CONFIGS) / name);
    EXPECT_NO_THROW(cfg.validate()) << name;
  }
  const auto mnist = ExperimentConfig::load(fs::path(MAEBOUND_TEST_CONFIGS) / "mnist_desk.cfg");
  EXPECT_TRUE(fs::exists(mnist.idx_images));
}

TEST(Experiment, ReportArithmeticAndFiles) {
  auto config = small_config();
  config.output_dir = scratch("files");
  const ExperimentReport report = run_experiment(config);
  ASSERT_EQ(report.rows.size(), 3u);
  for (const auto& row : report.rows) {
    EXPECT_FALSE(row.failed);
    EXPECT_EQ(row.bound.mae_b, row.bound.ae + row.bound.ee + row.bound.oe);
    EXPECT_TRUE(fs::exists(config.output_dir / (row.name + "_trainlog.csv")));
    EXPECT_TRUE(fs::exists(config.output_dir / (row.name + "_curves.svg")));
  }
  EXPECT_LE(report.s_measured, 1.0);
  const auto parsed = nlohmann::json::parse(read_file(config.output_dir / "report.json"));
  EXPECT_NO_THROW(verify_report_json(parsed));
  EXPECT_EQ(parsed["rows"].size(), 3u);
  EXPECT_TRUE(fs::exists(config.output_dir / "table.md"));

  auto tampered = parsed;
  tampered["config"]["train.epochs"] = "5";
  EXPECT_THROW(verify_report_json(tampered), Error);
  tampered = parsed;
  tampered["rows"][2]["AE"] = tampered["rows"][2]["AE"].get<double>() * 2;
  EXPECT_THROW(verify_report_json(tampered), Error);
  fs::remove_all(config.output_dir);
}

TEST(Experiment, AnchorsOnlyRoster) {
  auto config = small_config();
  config.dnns.clear();
  const ExperimentReport report = run_experiment(config);
  EXPECT_EQ(report.rows.size(), 2u);
  EXPECT_GE(report.calibration.b, 0.0);
}

TEST(Experiment, DeterministicAcrossRunsAndThreads) {
  auto config = small_config();
  const std::string first = run_experiment(config).json.dump();
  EXPECT_EQ(first, run_experiment(config).json.dump());
  config.threads = 3;
  EXPECT_EQ(first, run_experiment(config).json.dump());
  config.set_seed(4);
  EXPECT_NE(first, run_experiment(config).json.dump());
}

TEST(Experiment, AnchorDivergenceAborts) {
  auto config = small_config("train.loss = mse\ntrain.top_mode = measure\n");
  config.train.learning_rate = 1e300;
  try {
    (void)run_experiment(config);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Numeric);
  }
}

TEST(Curves, CsvRowsAndTwoSeries) {
  const TrainLog log = log_of({3, 2, 1.5, 1.2}, {3.1, 2.2, 1.7, 1.6});
  const fs::path dir = scratch("curves");
  const CurveFiles files = emit_curves(log, dir, "m");
  const std::string csv = read_file(files.csv);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  const std::string svg = read_file(files.svg);
  EXPECT_NE(svg.find("data-series=\"train_mae\""), std::string::npos);
  EXPECT_NE(svg.find("data-series=\"test_mae\""), std::string::npos);
  EXPECT_NE(svg.find(">epoch<"), std::string::npos);
  EXPECT_NE(svg.find(">MAE<"), std::string::npos);
  std::size_t polylines = 0;
  for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1))
    ++polylines;
  EXPECT_EQ(polylines, 2u);
  fs::remove_all(dir);
}

TEST(Curves, ConstantLogDrawsHorizontalLines) {
  const std::string svg = render_curves_svg(log_of({2, 2, 2}, {2, 2, 2}), "flat");
  const auto pos = svg.find("data-series=\"train_mae\"");
  ASSERT_NE(pos, std::string::npos);
  const auto points_at = svg.find("points=\"", pos) + 8;
  std::istringstream pts(svg.substr(points_at, svg.find('"', points_at) - points_at));
  std::string pair;
  std::set<std::string> ys;
  while (pts >> pair) ys.insert(pair.substr(pair.find(',') + 1));
  EXPECT_EQ(ys.size(), 1u);
}

TEST(Curves, EmptyLogAndBadDirectory) {
  EXPECT_THROW((void)emit_curves(TrainLog{}, fs::temp_directory_path(), "x"), Error);
  try {
    (void)emit_curves(log_of({1, 1}, {1, 1}), "/proc/no/such/dir", "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}
