#include "maebound/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "maebound/error.hpp"

namespace maebound {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  require(data_.size() == rows_ * cols_, ErrorKind::Shape,
          "matrix data length " + std::to_string(data_.size()) + " does not match " +
              std::to_string(rows_) + "x" + std::to_string(cols_));
}

DenseMatrix DenseMatrix::transposed() const {
  constexpr std::size_t kTile = 32;
  DenseMatrix t(cols_, rows_);
  for (std::size_t r0 = 0; r0 < rows_; r0 += kTile)
    for (std::size_t c0 = 0; c0 < cols_; c0 += kTile)
      for (std::size_t r = r0; r < std::min(rows_, r0 + kTile); ++r)
        for (std::size_t c = c0; c < std::min(cols_, c0 + kTile); ++c) t(c, r) = (*this)(r, c);
  return t;
}

double vector_norm(std::span<const double> v, NormOrder p) {
  require(!v.empty(), ErrorKind::Dimension, "norm of an empty vector");
  double acc = 0.0;
  if (p == NormOrder::L1) {
    for (double x : v) acc += std::abs(x);
    return acc;
  }
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorKind::Dimension, "dot product of mismatched lengths");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

Rng Rng::derive(std::string_view tag, std::uint64_t index) const {
  return Rng(mix_seed(mix_seed(seed_ ^ fnv1a64(tag)) + index));
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
  require(bound > 0, ErrorKind::Parameter, "uniform_index bound must be positive");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % bound;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

int Rng::sign() { return (engine_() >> 63) != 0 ? 1 : -1; }

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, double mean, double variance, Rng& rng) {
  require(variance >= 0.0 && std::isfinite(variance), ErrorKind::Parameter,
          "gaussian_matrix: variance must be finite and nonnegative");
  DenseMatrix m(rows, cols);
  const double stddev = std::sqrt(variance);
  for (double& v : m.values()) v = rng.normal(mean, stddev);
  return m;
}

DenseVector finite_diff_grad(const std::function<double(const DenseVector&)>& f, const DenseVector& x,
                             double h) {
  require(h > 0.0, ErrorKind::Parameter, "finite_diff_grad: step must be positive");
  DenseVector grad(x.dim());
  DenseVector probe = x;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    require(std::isfinite(up) && std::isfinite(down), ErrorKind::Numeric,
            "finite_diff_grad: non-finite function value at coordinate " + std::to_string(i));
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace maebound
