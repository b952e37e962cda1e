#pragma once

#include <filesystem>
#include <string>

#include "maebound/training.hpp"

namespace maebound {

/// Standalone SVG line chart with two polylines (train MAE, test MAE) over
/// epochs. The pre-training evaluation is drawn at epoch 0.
std::string render_curves_svg(const TrainLog& log, const std::string& title);

struct CurveFiles {
  std::filesystem::path csv;
  std::filesystem::path svg;
};

/// Writes `<stem>_trainlog.csv` and `<stem>_curves.svg` into `dir`.
CurveFiles emit_curves(const TrainLog& log, const std::filesystem::path& dir, const std::string& stem);

}  // namespace maebound
