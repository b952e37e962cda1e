#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "maebound/numerics.hpp"

namespace maebound {

using Hypothesis = std::function<DenseVector(const DenseVector&)>;

/// Finite hypothesis family; every member maps R^input_dim -> R^output_dim.
/// Scalar families have output_dim == 1.
struct FiniteFamily {
  std::vector<Hypothesis> hypotheses;
  std::size_t input_dim = 1;
  std::size_t output_dim = 1;
  std::string label;

  [[nodiscard]] std::size_t size() const noexcept { return hypotheses.size(); }
  [[nodiscard]] bool scalar() const noexcept { return output_dim == 1; }
};

/// Exact enumeration of all 2^N sign patterns, or a Monte-Carlo average over
/// `draws` patterns whose signs come from (seed, draw index).
struct EstimationMode {
  enum class Kind { Exact, MonteCarlo };
  Kind kind = Kind::Exact;
  std::size_t draws = 0;
  std::uint64_t seed = 0;

  static EstimationMode exact() { return {}; }
  static EstimationMode monte_carlo(std::size_t draws, std::uint64_t seed) {
    return {Kind::MonteCarlo, draws, seed};
  }
  [[nodiscard]] bool is_exact() const noexcept { return kind == Kind::Exact; }
};

inline constexpr std::size_t kMaxExactSamples = 20;

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// One check outcome; serialized as a JSON line.
struct CheckResult {
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
  double std_error = 0.0;
  bool holds = false;
  std::uint64_t seed = 0;
  nlohmann::json params = nlohmann::json::object();
};

nlohmann::json to_json(const CheckResult& r);

/// E_sigma[(1/N) max_h sum_i sigma_i 1^T h(x_i)]. For scalar families this is
/// the usual empirical Rademacher complexity; vector families use the
/// all-ones projection, with one sign per sample.
Estimate empirical_rademacher(const FiniteFamily& family, std::span<const DenseVector> samples,
                              const EstimationMode& mode);

/// Sign-correlation complexity of a precomputed table values[h][i].
/// All tables passed together share the same sign draws.
std::vector<Estimate> table_complexities(const std::vector<std::vector<std::vector<double>>>& tables,
                                         std::size_t n_samples, const EstimationMode& mode);

using ScalarMap = std::function<double(double)>;

/// Contraction check: composing a scalar family with L-Lipschitz maps
/// (one per sample) does not raise its complexity above L times the original.
/// Each map is spot-checked for the Lipschitz constant first.
CheckResult check_talagrand(const FiniteFamily& family, std::span<const DenseVector> samples,
                            std::span<const ScalarMap> phi, double lipschitz, const EstimationMode& mode);

/// Compares the complexity of the L1-loss family {x -> ||f(x) - target(x)||_1}
/// with the all-ones complexity of the family itself.
CheckResult check_loss_domination(const FiniteFamily& family, const Hypothesis& target,
                                  std::span<const DenseVector> samples, const EstimationMode& mode);

inline constexpr std::size_t kMaxFamilyProduct = 1'000'000;

/// Complexity of the sum family {f_1 + ... + f_m} against the sum of the
/// individual complexities (equality expected).
CheckResult check_additivity(std::span<const FiniteFamily> families, std::span<const DenseVector> samples,
                             const EstimationMode& mode);

/// Finite-support distribution; expectations are computed exactly.
struct DiscreteDistribution {
  std::vector<DenseVector> support;
  std::vector<double> probabilities;

  [[nodiscard]] std::size_t draw_index(Rng& rng) const;
  [[nodiscard]] DenseVector draw(Rng& rng) const;
};

/// A sampler without a known support; accepted by the API but rejected by
/// checks that need exact expectations.
using OpaqueSampler = std::function<DenseVector(Rng&)>;
using Sampler = std::variant<DiscreteDistribution, OpaqueSampler>;

/// E_S[max_f |L(f) - L_S(f)|] against 2 E_S[R_S(F)] for a scalar family,
/// where L(f) is the exact mean of f under the distribution and L_S the
/// sample mean over N draws. Exact mode enumerates every sample tuple;
/// Monte-Carlo mode averages over `trials` drawn sample sets.
CheckResult check_symmetrization(const FiniteFamily& family, const Sampler& sampler, std::size_t n_samples,
                                 std::size_t trials, const EstimationMode& mode);

}  // namespace maebound
