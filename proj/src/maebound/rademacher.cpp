#include "maebound/rademacher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "maebound/error.hpp"

namespace maebound {

namespace {

using Table = std::vector<std::vector<double>>;  // [hypothesis][sample]

constexpr double kExactSlack = 1e-12;
constexpr double kSigmaSlack = 3.0;

void check_mode(const EstimationMode& mode, std::size_t n) {
  require(n >= 1, ErrorKind::Parameter, "rademacher: sample set must be nonempty");
  if (mode.is_exact()) {
    require(n <= kMaxExactSamples, ErrorKind::Mode,
            "exact enumeration needs N <= " + std::to_string(kMaxExactSamples) + ", got N=" + std::to_string(n));
  } else {
    require(mode.draws >= 1, ErrorKind::Mode, "Monte-Carlo estimation needs at least one draw");
  }
}

double component_sum(const DenseVector& v) {
  double acc = 0.0;
  for (double x : v.data) acc += x;
  return acc;
}

DenseVector evaluate(const FiniteFamily& family, std::size_t h, const DenseVector& x) {
  DenseVector y = family.hypotheses[h](x);
  require(y.dim() == family.output_dim, ErrorKind::Dimension,
          "hypothesis " + std::to_string(h) + " of family '" + family.label + "' returned dimension " +
              std::to_string(y.dim()) + ", expected " + std::to_string(family.output_dim));
  return y;
}

Table ones_projection_table(const FiniteFamily& family, std::span<const DenseVector> samples) {
  require(family.size() >= 1, ErrorKind::Parameter, "family '" + family.label + "' is empty");
  Table t(family.size(), std::vector<double>(samples.size()));
  for (std::size_t h = 0; h < family.size(); ++h)
    for (std::size_t i = 0; i < samples.size(); ++i) t[h][i] = component_sum(evaluate(family, h, samples[i]));
  return t;
}

double max_correlation(const Table& table, std::span<const int> signs) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& row : table) {
    double acc = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) acc += signs[i] * row[i];
    best = std::max(best, acc);
  }
  return best;
}

double combined_error(std::initializer_list<double> errors) {
  double acc = 0.0;
  for (double e : errors) acc += e * e;
  return std::sqrt(acc);
}

}  // namespace

nlohmann::json to_json(const CheckResult& r) {
  return {{"check", r.check}, {"lhs", r.lhs},   {"rhs", r.rhs},  {"std_error", r.std_error},
          {"holds", r.holds}, {"seed", r.seed}, {"params", r.params}};
}

std::vector<Estimate> table_complexities(const std::vector<Table>& tables, std::size_t n_samples,
                                         const EstimationMode& mode) {
  check_mode(mode, n_samples);
  for (const auto& t : tables) {
    require(!t.empty(), ErrorKind::Parameter, "rademacher: empty hypothesis table");
    for (const auto& row : t) require(row.size() == n_samples, ErrorKind::Dimension, "rademacher: ragged table");
  }
  const double inv_n = 1.0 / static_cast<double>(n_samples);
  std::vector<int> signs(n_samples);
  std::vector<Estimate> out(tables.size());

  if (mode.is_exact()) {
    const std::uint64_t patterns = std::uint64_t{1} << n_samples;
    std::vector<double> totals(tables.size(), 0.0);
    // Each pattern is summed together with its negation, so a singleton
    // family contributes s + (-s) = 0 exactly whatever its values.
    std::vector<int> negated(n_samples);
    for (std::uint64_t mask = 0; mask < patterns / 2; ++mask) {
      for (std::size_t i = 0; i < n_samples; ++i) {
        signs[i] = ((mask >> i) & 1u) != 0 ? 1 : -1;
        negated[i] = -signs[i];
      }
      for (std::size_t t = 0; t < tables.size(); ++t)
        totals[t] += max_correlation(tables[t], signs) * inv_n + max_correlation(tables[t], negated) * inv_n;
    }
    for (std::size_t t = 0; t < tables.size(); ++t) out[t].value = totals[t] / static_cast<double>(patterns);
    return out;
  }

  const Rng base(mode.seed);
  std::vector<double> sum(tables.size(), 0.0);
  std::vector<double> sum_sq(tables.size(), 0.0);
  for (std::size_t m = 0; m < mode.draws; ++m) {
    Rng rng = base.derive("rademacher-signs", m);
    for (auto& s : signs) s = rng.sign();
    for (std::size_t t = 0; t < tables.size(); ++t) {
      const double v = max_correlation(tables[t], signs) * inv_n;
      sum[t] += v;
      sum_sq[t] += v * v;
    }
  }
  const auto draws = static_cast<double>(mode.draws);
  for (std::size_t t = 0; t < tables.size(); ++t) {
    const double mean = sum[t] / draws;
    out[t].value = mean;
    if (mode.draws > 1) {
      const double var = std::max(0.0, (sum_sq[t] - draws * mean * mean) / (draws - 1.0));
      out[t].std_error = std::sqrt(var / draws);
    }
  }
  return out;
}

Estimate empirical_rademacher(const FiniteFamily& family, std::span<const DenseVector> samples,
                              const EstimationMode& mode) {
  check_mode(mode, samples.size());
  return table_complexities({ones_projection_table(family, samples)}, samples.size(), mode).front();
}

CheckResult check_talagrand(const FiniteFamily& family, std::span<const DenseVector> samples,
                            std::span<const ScalarMap> phi, double lipschitz, const EstimationMode& mode) {
  check_mode(mode, samples.size());
  require(family.scalar(), ErrorKind::Parameter, "check_talagrand: family must be scalar-valued");
  require(lipschitz > 0.0, ErrorKind::Parameter, "check_talagrand: Lipschitz constant must be positive");
  require(phi.size() == samples.size(), ErrorKind::Parameter, "check_talagrand: need one map per sample");

  const Table base = ones_projection_table(family, samples);
  Table composed = base;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& row : base) {
      lo = std::min(lo, row[i]);
      hi = std::max(hi, row[i]);
    }
    // spot check on the attained values plus an evenly spaced grid around them
    std::vector<double> probes;
    for (const auto& row : base) probes.push_back(row[i]);
    const double pad = 1.0 + (hi - lo);
    for (int g = 0; g <= 16; ++g) probes.push_back(lo - pad + (hi - lo + 2.0 * pad) * g / 16.0);
    for (std::size_t a = 0; a < probes.size(); ++a) {
      for (std::size_t b = a + 1; b < probes.size(); ++b) {
        const double gap = std::abs(phi[i](probes[a]) - phi[i](probes[b]));
        const double allowed = lipschitz * std::abs(probes[a] - probes[b]);
        require(gap <= allowed * (1.0 + 1e-9) + 1e-12, ErrorKind::Parameter,
                "check_talagrand: map " + std::to_string(i) + " is not " + std::to_string(lipschitz) +
                    "-Lipschitz on the spot-check grid");
      }
    }
    for (auto& row : composed) row[i] = phi[i](row[i]);
  }

  const auto est = table_complexities({composed, base}, samples.size(), mode);
  CheckResult r;
  r.check = "talagrand";
  r.lhs = est[0].value;
  r.rhs = lipschitz * est[1].value;
  r.std_error = combined_error({est[0].std_error, lipschitz * est[1].std_error});
  r.holds = r.lhs <= r.rhs + kSigmaSlack * r.std_error + kExactSlack * std::max(1.0, std::abs(r.rhs));
  r.seed = mode.seed;
  r.params = {{"family", family.label}, {"N", samples.size()}, {"L", lipschitz}, {"exact", mode.is_exact()}};
  return r;
}

CheckResult check_loss_domination(const FiniteFamily& family, const Hypothesis& target,
                                  std::span<const DenseVector> samples, const EstimationMode& mode) {
  check_mode(mode, samples.size());
  const Table family_table = ones_projection_table(family, samples);
  Table loss_table(family.size(), std::vector<double>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const DenseVector t = target(samples[i]);
    require(t.dim() == family.output_dim, ErrorKind::Dimension, "check_loss_domination: target has wrong dimension");
    for (std::size_t h = 0; h < family.size(); ++h) {
      const DenseVector y = evaluate(family, h, samples[i]);
      double l1 = 0.0;
      for (std::size_t j = 0; j < y.dim(); ++j) l1 += std::abs(y[j] - t[j]);
      loss_table[h][i] = l1;
    }
  }
  const auto est = table_complexities({loss_table, family_table}, samples.size(), mode);
  CheckResult r;
  r.check = "loss_domination";
  r.lhs = est[0].value;
  r.rhs = est[1].value;
  r.std_error = combined_error({est[0].std_error, est[1].std_error});
  r.holds = r.lhs <= r.rhs + kSigmaSlack * r.std_error + kExactSlack * std::max(1.0, std::abs(r.rhs));
  r.seed = mode.seed;
  r.params = {{"family", family.label}, {"N", samples.size()}, {"q", family.output_dim}, {"exact", mode.is_exact()}};
  return r;
}

CheckResult check_additivity(std::span<const FiniteFamily> families, std::span<const DenseVector> samples,
                             const EstimationMode& mode) {
  check_mode(mode, samples.size());
  require(!families.empty(), ErrorKind::Parameter, "check_additivity: no families");
  std::size_t combos = 1;
  std::vector<Table> tables;
  for (const auto& f : families) {
    require(f.input_dim == families.front().input_dim && f.output_dim == families.front().output_dim,
            ErrorKind::Dimension, "check_additivity: families disagree on dims");
    require(f.size() >= 1 && combos <= kMaxFamilyProduct / f.size(), ErrorKind::Parameter,
            "check_additivity: product of family sizes exceeds " + std::to_string(kMaxFamilyProduct));
    combos *= f.size();
    tables.push_back(ones_projection_table(f, samples));
  }
  if (mode.is_exact()) {
    const double work = static_cast<double>(combos) * std::ldexp(1.0, static_cast<int>(samples.size())) *
                        static_cast<double>(samples.size());
    require(work <= 2e8, ErrorKind::Mode, "check_additivity: exact enumeration too large; use Monte-Carlo");
  }

  // Sum family, enumerated explicitly in mixed-radix order.
  Table sum_table(combos, std::vector<double>(samples.size(), 0.0));
  std::vector<std::size_t> digit(families.size(), 0);
  for (std::size_t c = 0; c < combos; ++c) {
    for (std::size_t f = 0; f < families.size(); ++f)
      for (std::size_t i = 0; i < samples.size(); ++i) sum_table[c][i] += tables[f][digit[f]][i];
    for (std::size_t f = 0; f < families.size(); ++f) {
      if (++digit[f] < families[f].size()) break;
      digit[f] = 0;
    }
  }

  std::vector<Table> all{std::move(sum_table)};
  for (auto& t : tables) all.push_back(std::move(t));
  const auto est = table_complexities(all, samples.size(), mode);

  CheckResult r;
  r.check = "additivity";
  r.lhs = est[0].value;
  double var = est[0].std_error * est[0].std_error;
  nlohmann::json parts = nlohmann::json::array();
  for (std::size_t f = 1; f < est.size(); ++f) {
    r.rhs += est[f].value;
    var += est[f].std_error * est[f].std_error;
    parts.push_back(est[f].value);
  }
  r.std_error = std::sqrt(var);
  r.holds = std::abs(r.lhs - r.rhs) <= kSigmaSlack * r.std_error + kExactSlack * std::max(1.0, std::abs(r.rhs));
  r.seed = mode.seed;
  r.params = {{"families", families.size()}, {"combinations", combos}, {"N", samples.size()},
              {"parts", parts}, {"exact", mode.is_exact()}};
  return r;
}

std::size_t DiscreteDistribution::draw_index(Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t p = 0; p < support.size(); ++p) {
    acc += probabilities[p];
    if (u < acc) return p;
  }
  return support.size() - 1;
}

DenseVector DiscreteDistribution::draw(Rng& rng) const { return support[draw_index(rng)]; }

namespace {

struct SymmetrizationTerms {
  double deviation = 0.0;   // max_f |L(f) - L_S(f)|
  double complexity = 0.0;  // R_S(F)
};

SymmetrizationTerms symmetrization_terms(const Table& support_values, std::span<const double> population,
                                         std::span<const std::size_t> picks, const EstimationMode& inner) {
  const std::size_t n = picks.size();
  Table sample_table(support_values.size(), std::vector<double>(n));
  SymmetrizationTerms out;
  for (std::size_t h = 0; h < support_values.size(); ++h) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sample_table[h][i] = support_values[h][picks[i]];
      mean += sample_table[h][i];
    }
    mean /= static_cast<double>(n);
    out.deviation = std::max(out.deviation, std::abs(population[h] - mean));
  }
  out.complexity = table_complexities({sample_table}, n, inner).front().value;
  return out;
}

}  // namespace

CheckResult check_symmetrization(const FiniteFamily& family, const Sampler& sampler, std::size_t n_samples,
                                 std::size_t trials, const EstimationMode& mode) {
  const auto* dist = std::get_if<DiscreteDistribution>(&sampler);
  require(dist != nullptr, ErrorKind::Capability,
          "check_symmetrization: sampler has no enumerable support, so L(f) has no closed form");
  require(!dist->support.empty() && dist->support.size() == dist->probabilities.size(), ErrorKind::Parameter,
          "check_symmetrization: support and probabilities must be nonempty and aligned");
  double total = 0.0;
  for (double p : dist->probabilities) {
    require(p >= 0.0, ErrorKind::Parameter, "check_symmetrization: negative probability");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorKind::Parameter, "check_symmetrization: probabilities must sum to 1");
  require(family.scalar(), ErrorKind::Parameter, "check_symmetrization: family must be scalar-valued");
  require(n_samples >= 1, ErrorKind::Parameter, "check_symmetrization: N must be positive");

  // f evaluated on every support point, and its exact population mean
  const std::size_t m = dist->support.size();
  Table support_values = ones_projection_table(family, dist->support);
  std::vector<double> population(family.size(), 0.0);
  for (std::size_t h = 0; h < family.size(); ++h)
    for (std::size_t p = 0; p < m; ++p) population[h] += dist->probabilities[p] * support_values[h][p];

  CheckResult r;
  r.check = "symmetrization";
  r.seed = mode.seed;
  std::vector<std::size_t> picks(n_samples, 0);

  if (mode.is_exact()) {
    check_mode(mode, n_samples);
    const double tuples = std::pow(static_cast<double>(m), static_cast<double>(n_samples));
    require(tuples * std::ldexp(1.0, static_cast<int>(n_samples)) * static_cast<double>(family.size()) <= 5e8,
            ErrorKind::Mode, "check_symmetrization: exact enumeration too large; use Monte-Carlo");
    const auto count = static_cast<std::uint64_t>(tuples);
    double lhs = 0.0;
    double rhs = 0.0;
    for (std::uint64_t t = 0; t < count; ++t) {
      double weight = 1.0;
      std::uint64_t rest = t;
      for (std::size_t i = 0; i < n_samples; ++i) {
        picks[i] = static_cast<std::size_t>(rest % m);
        rest /= m;
        weight *= dist->probabilities[picks[i]];
      }
      if (weight == 0.0) continue;
      const auto terms = symmetrization_terms(support_values, population, picks, mode);
      lhs += weight * terms.deviation;
      rhs += weight * 2.0 * terms.complexity;
    }
    r.lhs = lhs;
    r.rhs = rhs;
    r.holds = r.lhs <= r.rhs + kExactSlack * std::max(1.0, std::abs(r.rhs));
  } else {
    require(trials >= 30, ErrorKind::Parameter, "check_symmetrization: Monte-Carlo mode needs at least 30 trials");
    require(mode.draws >= 1, ErrorKind::Mode, "Monte-Carlo estimation needs at least one draw");
    const Rng base(mode.seed);
    double sum_dev = 0.0, sq_dev = 0.0, sum_rad = 0.0, sq_rad = 0.0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
      Rng draw = base.derive("symmetrization-sample", trial);
      for (auto& p : picks) p = dist->draw_index(draw);
      const auto inner = n_samples <= 12 ? EstimationMode::exact()
                                         : EstimationMode::monte_carlo(mode.draws, base.derive("inner", trial).seed());
      const auto terms = symmetrization_terms(support_values, population, picks, inner);
      sum_dev += terms.deviation;
      sq_dev += terms.deviation * terms.deviation;
      const double rad2 = 2.0 * terms.complexity;
      sum_rad += rad2;
      sq_rad += rad2 * rad2;
    }
    const auto n = static_cast<double>(trials);
    r.lhs = sum_dev / n;
    r.rhs = sum_rad / n;
    const double var_dev = std::max(0.0, (sq_dev - n * r.lhs * r.lhs) / (n - 1.0));
    const double var_rad = std::max(0.0, (sq_rad - n * r.rhs * r.rhs) / (n - 1.0));
    r.std_error = std::sqrt(var_dev / n + var_rad / n);
    r.holds = r.lhs <= r.rhs + kSigmaSlack * r.std_error;
  }
  r.params = {{"family", family.label}, {"N", n_samples}, {"support", m},
              {"trials", mode.is_exact() ? 0 : trials}, {"exact", mode.is_exact()}};
  return r;
}

}  // namespace maebound
