#include "maebound/bounds.hpp"

#include <cmath>

#include "maebound/error.hpp"

namespace maebound {

std::vector<std::string> BoundInputs::violations() const {
  std::vector<std::string> out;
  if (!validity_mode) return out;
  if (k < 2) out.push_back("depth k=" + std::to_string(k) + " < 2");
  const std::size_t narrowest = min_hidden_width == 0 ? n_k : std::min(min_hidden_width, n_k);
  if (narrowest < d + 2) {
    out.push_back("hidden width " + std::to_string(narrowest) + " < d+2=" + std::to_string(d + 2));
  }
  return out;
}

double estimation_error_bound(const BoundInputs& in) {
  require(in.N >= 1, ErrorKind::Parameter, "estimation_error_bound: N must be positive");
  const double depth_factor = std::pow(in.lambda, static_cast<double>(in.k) - 1.0);
  return 2.0 * static_cast<double>(in.q) * in.lambda_prime * depth_factor * in.s /
         std::sqrt(static_cast<double>(in.N));
}

double hoeffding_deviation(std::size_t N, double delta) {
  require(N >= 1, ErrorKind::Parameter, "hoeffding_deviation: N must be positive");
  require(delta > 0.0 && delta < 1.0, ErrorKind::Parameter, "hoeffding_deviation: delta must lie in (0, 1)");
  return std::sqrt(std::log(2.0 / (1.0 - delta)) / (2.0 * static_cast<double>(N)));
}

double approximation_error_bound(double c, const BoundInputs& in) {
  require(in.d >= 1, ErrorKind::Parameter, "approximation_error_bound: d must be positive");
  require(in.n_k + in.k >= 2, ErrorKind::Parameter, "approximation_error_bound: n_k + k - 1 must be positive");
  const double base = static_cast<double>(in.n_k + in.k - 1);
  return c * static_cast<double>(in.q) / std::pow(base, in.r_over_d());
}

double optimization_error_bound(const OptErrorInputs& in) {
  require(in.gamma > 0.0, ErrorKind::Parameter, "optimization_error_bound: gamma must be positive");
  return in.mu * in.M * in.M * in.beta / (2.0 * in.gamma);
}

double sgd_convergence_envelope(double initial_gap, double mu, double gamma, double beta, double M,
                                std::uint64_t T) {
  const double rate = mu * gamma;
  require(rate > 0.0 && rate < 1.0, ErrorKind::Parameter,
          "sgd_convergence_envelope: requires 0 < mu*gamma < 1, got " + std::to_string(rate));
  const double floor = optimization_error_bound({mu, M, beta, gamma});
  return std::exp(-rate * (static_cast<double>(T) + 1.0)) * initial_gap + floor;
}

Calibration calibrate(double mae1, double mae2, std::size_t l1, std::size_t l2, const BoundInputs& in) {
  require(l1 != l2, ErrorKind::Parameter, "calibrate: degenerate anchors l1 == l2");
  require(l1 >= 1 && l2 > l1, ErrorKind::Parameter, "calibrate: anchors must satisfy l2 > l1 >= 1");
  require(in.r > 0.0 && in.d >= 1, ErrorKind::Parameter, "calibrate: r/d must be positive");
  require(in.N >= 1, ErrorKind::Parameter, "calibrate: N must be positive");
  require(mae1 >= 0.0 && mae2 >= 0.0, ErrorKind::Parameter, "calibrate: anchor MAEs must be nonnegative");

  const double e = in.r_over_d();
  const double a1 = std::pow(static_cast<double>(l1), e);
  const double a2 = std::pow(static_cast<double>(l2), e);
  const double q = static_cast<double>(in.q);
  const double gap = mae1 - mae2;

  Calibration cal;
  cal.c = gap * a1 * a2 / (q * (a2 - a1));
  // both anchors have one hidden layer, so their EE is the k = 2 value
  BoundInputs anchor = in;
  anchor.k = 2;
  cal.b_unclamped = mae1 - gap * a2 / (a2 - a1) - estimation_error_bound(anchor);
  cal.b_clamped = cal.b_unclamped < 0.0;
  cal.b = cal.b_clamped ? 0.0 : cal.b_unclamped;
  cal.l1 = l1;
  cal.l2 = l2;
  cal.mae1 = mae1;
  cal.mae2 = mae2;
  cal.inputs = in;
  return cal;
}

BoundReport mae_upper_bound(const Calibration& cal, const BoundInputs& in, const BoundOptions& options) {
  require(cal.inputs.q == in.q && cal.inputs.d == in.d && cal.inputs.r == in.r && cal.inputs.N == in.N,
          ErrorKind::Parameter, "mae_upper_bound: calibration was solved for different q, d, r or N");
  BoundReport report;
  report.inputs = in;
  if (in.k == 2) {
    require(in.n_k >= 1, ErrorKind::Parameter, "mae_upper_bound: n_k must be positive");
    report.ae = cal.c * static_cast<double>(in.q) / std::pow(static_cast<double>(in.n_k), in.r_over_d());
  } else {
    report.ae = approximation_error_bound(cal.c, in);
  }
  report.ee = estimation_error_bound(in);
  report.oe = cal.b;
  report.b_clamped = cal.b_clamped;
  report.hoeffding_included = options.include_hoeffding;
  report.hoeffding = options.include_hoeffding ? hoeffding_deviation(in.N, in.delta) : 0.0;
  report.mae_b = report.ae + report.ee + report.oe;
  if (options.include_hoeffding) report.mae_b += report.hoeffding;
  report.violations = in.violations();
  report.architecture = "k=" + std::to_string(in.k) + ",n_k=" + std::to_string(in.n_k);
  return report;
}

nlohmann::json to_json(const BoundInputs& in) {
  return {{"q", in.q},
          {"d", in.d},
          {"N", in.N},
          {"k", in.k},
          {"n_k", in.n_k},
          {"r", in.r},
          {"r_over_d", in.r_over_d()},
          {"lambda", in.lambda},
          {"lambda_prime", in.lambda_prime},
          {"s", in.s},
          {"delta", in.delta},
          {"min_hidden_width", in.min_hidden_width},
          {"validity_mode", in.validity_mode}};
}

BoundInputs bound_inputs_from_json(const nlohmann::json& j) {
  BoundInputs in;
  try {
    in.q = j.at("q").get<std::size_t>();
    in.d = j.at("d").get<std::size_t>();
    in.N = j.at("N").get<std::size_t>();
    in.k = j.at("k").get<std::size_t>();
    in.n_k = j.at("n_k").get<std::size_t>();
    in.r = j.at("r").get<double>();
    in.lambda = j.at("lambda").get<double>();
    in.lambda_prime = j.at("lambda_prime").get<double>();
    in.s = j.at("s").get<double>();
    in.delta = j.at("delta").get<double>();
    in.min_hidden_width = j.value("min_hidden_width", std::size_t{0});
    in.validity_mode = j.value("validity_mode", true);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("bound inputs: ") + e.what());
  }
  return in;
}

nlohmann::json to_json(const Calibration& cal) {
  return {{"c", cal.c},
          {"b", cal.b},
          {"b_unclamped", cal.b_unclamped},
          {"b_clamped", cal.b_clamped},
          {"l1", cal.l1},
          {"l2", cal.l2},
          {"MAE_1", cal.mae1},
          {"MAE_2", cal.mae2},
          {"inputs", to_json(cal.inputs)}};
}

Calibration calibration_from_json(const nlohmann::json& j) {
  Calibration cal;
  try {
    cal.c = j.at("c").get<double>();
    cal.b = j.at("b").get<double>();
    cal.b_unclamped = j.value("b_unclamped", cal.b);
    cal.b_clamped = j.at("b_clamped").get<bool>();
    cal.l1 = j.at("l1").get<std::size_t>();
    cal.l2 = j.at("l2").get<std::size_t>();
    cal.mae1 = j.at("MAE_1").get<double>();
    cal.mae2 = j.at("MAE_2").get<double>();
    cal.inputs = bound_inputs_from_json(j.at("inputs"));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("calibration: ") + e.what());
  }
  return cal;
}

nlohmann::json to_json(const BoundReport& report) {
  return {{"architecture", report.architecture},
          {"AE", report.ae},
          {"EE", report.ee},
          {"OE", report.oe},
          {"hoeffding", report.hoeffding},
          {"hoeffding_included", report.hoeffding_included},
          {"MAE_B", report.mae_b},
          {"b_clamped", report.b_clamped},
          {"violations", report.violations},
          {"inputs", to_json(report.inputs)}};
}

BoundReport bound_report_from_json(const nlohmann::json& j) {
  BoundReport r;
  try {
    r.architecture = j.at("architecture").get<std::string>();
    r.ae = j.at("AE").get<double>();
    r.ee = j.at("EE").get<double>();
    r.oe = j.at("OE").get<double>();
    r.hoeffding = j.value("hoeffding", 0.0);
    r.hoeffding_included = j.value("hoeffding_included", false);
    r.mae_b = j.at("MAE_B").get<double>();
    r.b_clamped = j.at("b_clamped").get<bool>();
    r.violations = j.at("violations").get<std::vector<std::string>>();
    r.inputs = bound_inputs_from_json(j.at("inputs"));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("bound report: ") + e.what());
  }
  double sum = r.ae + r.ee + r.oe;
  if (r.hoeffding_included) sum += r.hoeffding;
  require(sum == r.mae_b, ErrorKind::Format, "bound report: MAE_B does not equal the sum of its terms");
  return r;
}

}  // namespace maebound
