#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace maebound {

/// Real vector with owned storage. Dimension is the length of `data`.
struct DenseVector {
  std::vector<double> data;

  DenseVector() = default;
  explicit DenseVector(std::size_t dim, double fill = 0.0) : data(dim, fill) {}
  DenseVector(std::initializer_list<double> init) : data(init) {}
  explicit DenseVector(std::vector<double> values) : data(std::move(values)) {}

  [[nodiscard]] std::size_t dim() const noexcept { return data.size(); }
  [[nodiscard]] std::span<const double> view() const noexcept { return data; }
  [[nodiscard]] std::span<double> view() noexcept { return data; }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  friend bool operator==(const DenseVector&, const DenseVector&) = default;
};

/// Row-major real matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  [[nodiscard]] std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  [[nodiscard]] std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  [[nodiscard]] std::span<double> values() noexcept { return data_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return data_; }

  [[nodiscard]] DenseMatrix transposed() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class NormOrder { L1 = 1, L2 = 2 };

/// Sum of magnitudes (L1) or Euclidean length (L2), accumulated left to right.
double vector_norm(std::span<const double> v, NormOrder p);
inline double vector_norm(const DenseVector& v, NormOrder p) { return vector_norm(v.view(), p); }

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Seeded generator with a fixed algorithm: the engine is std::mt19937_64
/// (whose output sequence is pinned by the C++ standard) and every
/// distribution is computed here rather than through <random> distributions,
/// whose algorithms are implementation-defined. Child streams derive from
/// (seed, tag, index) via SplitMix64 so each purpose gets its own sequence.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  /// Independent generator for a named purpose and index.
  [[nodiscard]] Rng derive(std::string_view tag, std::uint64_t index = 0) const;

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound) without modulo bias.
  std::uint64_t uniform_index(std::uint64_t bound);
  /// Standard normal via the Box-Muller transform (pairs cached).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// +1 or -1 with equal probability.
  int sign();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Matrix of i.i.d. Gaussian(mean, variance) entries, filled row-major.
DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, double mean, double variance, Rng& rng);

/// Central-difference gradient of `f` at `x`.
DenseVector finite_diff_grad(const std::function<double(const DenseVector&)>& f, const DenseVector& x,
                             double h);

/// Left-to-right dot product.
double dot(std::span<const double> a, std::span<const double> b);

/// Stable 64-bit FNV-1a hash, used for config fingerprints.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace maebound
