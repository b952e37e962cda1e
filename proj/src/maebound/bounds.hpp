#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace maebound {

/// Quantities entering the aggregated MAE bound.
struct BoundInputs {
  std::size_t q = 1;        ///< output dimension
  std::size_t d = 1;        ///< input dimension
  std::size_t N = 1;        ///< training-set size
  std::size_t k = 2;        ///< number of weight matrices
  std::size_t n_k = 1;      ///< top hidden width
  double r = 1.0;           ///< differential order of the target
  double lambda = 1.0;      ///< hidden-layer row L2 budget
  double lambda_prime = 1.0;///< top-layer row L1 budget
  double s = 1.0;           ///< input L2 bound
  double delta = 0.95;      ///< confidence level in (0, 1)
  /// Smallest hidden width of the architecture; 0 means "same as n_k".
  std::size_t min_hidden_width = 0;
  /// When set, width/depth conditions of the bound are checked and reported.
  bool validity_mode = true;

  [[nodiscard]] double r_over_d() const { return r / static_cast<double>(d); }
  /// Conditions the bound assumes but these inputs miss.
  [[nodiscard]] std::vector<std::string> violations() const;
};

struct OptErrorInputs {
  double mu = 0.0;
  double M = 0.0;
  double beta = 1.0;
  double gamma = 1.0;
};

/// Constants c, b solved from two single-hidden-layer anchor runs.
struct Calibration {
  double c = 0.0;
  double b = 0.0;
  double b_unclamped = 0.0;  ///< value before max(., 0)
  bool b_clamped = false;
  std::size_t l1 = 0;
  std::size_t l2 = 0;
  double mae1 = 0.0;
  double mae2 = 0.0;
  BoundInputs inputs;
};

struct BoundOptions {
  /// Adds the Hoeffding deviation term to MAE_B.
  bool include_hoeffding = false;
};

struct BoundReport {
  std::string architecture;
  double ae = 0.0;
  double ee = 0.0;
  double oe = 0.0;
  double hoeffding = 0.0;  ///< zero unless included
  bool hoeffding_included = false;
  double mae_b = 0.0;
  bool b_clamped = false;
  std::vector<std::string> violations;
  BoundInputs inputs;
};

/// 2 q Lambda' Lambda^(k-1) s / sqrt(N)
double estimation_error_bound(const BoundInputs& in);
/// sqrt(ln(2 / (1 - delta)) / (2 N))
double hoeffding_deviation(std::size_t N, double delta);
/// c q / (n_k + k - 1)^(r/d)
double approximation_error_bound(double c, const BoundInputs& in);
/// mu M^2 beta / (2 gamma)
double optimization_error_bound(const OptErrorInputs& in);
/// exp(-mu gamma (T + 1)) * initial_gap + mu M^2 beta / (2 gamma); requires 0 < mu gamma < 1.
double sgd_convergence_envelope(double initial_gap, double mu, double gamma, double beta, double M, std::uint64_t T);

/// Solves the two-anchor system for c and b (b clamped at zero, flagged).
/// Uses q, d, r, N, s and lambda_prime from `in`.
Calibration calibrate(double mae1, double mae2, std::size_t l1, std::size_t l2, const BoundInputs& in);

/// AE + EE + OE decomposition for the architecture in `in`.
///
/// Depth-2 (single hidden layer) architectures use the anchor form
/// c q / n_k^(r/d), the same term the calibration system solves, so the
/// anchors are reproduced exactly. Deeper architectures use
/// approximation_error_bound. OE is the calibrated b.
BoundReport mae_upper_bound(const Calibration& cal, const BoundInputs& in, const BoundOptions& options = {});

nlohmann::json to_json(const BoundInputs& in);
BoundInputs bound_inputs_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Calibration& cal);
Calibration calibration_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BoundReport& report);
/// Parses a report and checks MAE_B against the sum of its terms exactly.
BoundReport bound_report_from_json(const nlohmann::json& j);

}  // namespace maebound
