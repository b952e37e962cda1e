#include "maebound/curves.hpp"

#include <algorithm>
#include <cstdio>
#include <vector>

#include "maebound/error.hpp"
#include "maebound/serialize.hpp"

namespace maebound {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_curves_svg(const TrainLog& log, const std::string& title) {
  require(log.epochs() > 0, ErrorKind::Parameter, "emit_curves: empty train log");
  std::vector<double> train{log.initial_train_mae};
  std::vector<double> test{log.initial_test_mae};
  train.insert(train.end(), log.train_mae.begin(), log.train_mae.end());
  test.insert(test.end(), log.test_mae.begin(), log.test_mae.end());

  double lo = std::min(*std::min_element(train.begin(), train.end()), *std::min_element(test.begin(), test.end()));
  double hi = std::max(*std::max_element(train.begin(), train.end()), *std::max_element(test.begin(), test.end()));
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto epochs = static_cast<double>(log.epochs());
  auto x_of = [&](std::size_t e) { return kLeft + plot_w * static_cast<double>(e) / epochs; };
  auto y_of = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };
  auto polyline = [&](const std::vector<double>& series, const char* color, const char* name) {
    std::string pts;
    for (std::size_t e = 0; e < series.size(); ++e) {
      if (e) pts += ' ';
      pts += num(x_of(e)) + ',' + num(y_of(series[e]));
    }
    return std::string("  <polyline class=\"series\" data-series=\"") + name + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" viewBox=\"0 0 " + num(kWidth) + ' ' + num(kHeight) + "\">\n";
  svg += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "  <text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + escape(title) +
         "</text>\n";
  svg += "  <line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + plot_h) + "\" x2=\"" + num(kLeft + plot_w) +
         "\" y2=\"" + num(kTop + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "  <line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
         num(kTop + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "  <text x=\"" + num(kLeft + plot_w / 2) + "\" y=\"" + num(kHeight - 10) +
         "\" text-anchor=\"middle\" font-size=\"13\">epoch</text>\n";
  svg += "  <text x=\"18\" y=\"" + num(kTop + plot_h / 2) + "\" text-anchor=\"middle\" font-size=\"13\" "
         "transform=\"rotate(-90 18 " + num(kTop + plot_h / 2) + ")\">MAE</text>\n";
  svg += "  <text x=\"" + num(kLeft - 6) + "\" y=\"" + num(kTop + 4) + "\" text-anchor=\"end\" font-size=\"11\">" +
         format_sig10(hi).substr(0, 8) + "</text>\n";
  svg += "  <text x=\"" + num(kLeft - 6) + "\" y=\"" + num(kTop + plot_h) +
         "\" text-anchor=\"end\" font-size=\"11\">" + format_sig10(lo).substr(0, 8) + "</text>\n";
  svg += "  <text x=\"" + num(kLeft + plot_w) + "\" y=\"" + num(kTop + plot_h + 16) +
         "\" text-anchor=\"end\" font-size=\"11\">" + std::to_string(log.epochs()) + "</text>\n";
  svg += polyline(train, "#1f77b4", "train_mae");
  svg += polyline(test, "#d62728", "test_mae");
  svg += "  <text x=\"" + num(kLeft + plot_w - 4) + "\" y=\"" + num(kTop + 14) +
         "\" text-anchor=\"end\" font-size=\"12\" fill=\"#1f77b4\">train MAE</text>\n";
  svg += "  <text x=\"" + num(kLeft + plot_w - 4) + "\" y=\"" + num(kTop + 30) +
         "\" text-anchor=\"end\" font-size=\"12\" fill=\"#d62728\">test MAE</text>\n";
  svg += "</svg>\n";
  return svg;
}

CurveFiles emit_curves(const TrainLog& log, const std::filesystem::path& dir, const std::string& stem) {
  require(log.epochs() > 0, ErrorKind::Parameter, "emit_curves: empty train log");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorKind::Io, "cannot create '" + dir.string() + "': " + ec.message());
  CurveFiles files{dir / (stem + "_trainlog.csv"), dir / (stem + "_curves.svg")};
  write_file_atomic(files.csv, trainlog_to_csv(log));
  write_file_atomic(files.svg, render_curves_svg(log, stem));
  return files;
}

}  // namespace maebound
