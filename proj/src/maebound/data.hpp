#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "maebound/network.hpp"
#include "maebound/numerics.hpp"
#include "maebound/sample.hpp"

namespace maebound {

/// Images decoded from an IDX3 file, pixels scaled to [0, 1].
struct ImageSet {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<DenseVector> images;

  [[nodiscard]] std::size_t size() const noexcept { return images.size(); }
  [[nodiscard]] std::size_t pixel_count() const noexcept { return rows * cols; }
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;

/// Parses big-endian IDX3 unsigned-byte images. Gzip-compressed input
/// (as distributed for MNIST) is recognised by its header and inflated first.
ImageSet parse_idx(std::string_view bytes);
ImageSet load_idx(const std::filesystem::path& path);

/// Encodes images as IDX3, quantizing each pixel to round(255 v) clamped to
/// [0, 255].
std::string encode_idx(const ImageSet& images);

/// x = clean + Gaussian(0, variance) noise per pixel; both x and the clean
/// target are multiplied by 1 / max(1, ||x||_2). Noise for image i comes from
/// the stream (rng seed, i), so any sharding of the work gives the same data.
Dataset corrupt_agrn(const ImageSet& clean, double variance, const Rng& rng);

struct SyntheticData {
  Dataset dataset;
  Network teacher;
};

/// Smooth teacher regression: a single-hidden-layer smooth-ReLU network with
/// hidden width max(32, d + 2) and norm-constrained weights; inputs uniform on
/// the unit L2 ball; targets teacher(x) plus Gaussian(0, noise_variance).
SyntheticData synth_smooth_dataset(std::size_t d, std::size_t q, std::size_t n, std::uint64_t teacher_seed,
                                   std::uint64_t noise_seed, double noise_variance);

/// Seeded permutation split; ceil(N * test_fraction) pairs go to the test set.
std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, const Rng& rng);

/// Contiguous index range [first, first + count) as its own dataset.
Dataset slice(const Dataset& ds, std::size_t first, std::size_t count);

}  // namespace maebound
