#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "maebound/numerics.hpp"

namespace maebound {

/// One regression example. `scale` is the factor that was applied to both
/// vectors during normalization (1 when untouched).
struct SamplePair {
  DenseVector x;
  DenseVector y;
  double scale = 1.0;

  friend bool operator==(const SamplePair&, const SamplePair&) = default;
};

enum class Provenance : std::uint32_t { Clean = 0, Corrupted = 1, Synthetic = 2 };

std::string to_string(Provenance p);

struct Dataset {
  std::vector<SamplePair> pairs;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  Provenance provenance = Provenance::Synthetic;

  [[nodiscard]] std::size_t size() const noexcept { return pairs.size(); }
  [[nodiscard]] bool empty() const noexcept { return pairs.empty(); }

  /// Throws a shape error when any pair disagrees with the declared dims.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace maebound
