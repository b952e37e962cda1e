#include "maebound/suite.hpp"

#include <cmath>
#include <memory>

#include "maebound/error.hpp"
#include "maebound/network.hpp"

namespace maebound {

namespace {

constexpr double kExactTolerance = 1e-12;

DenseVector scalar(double v) { return DenseVector(std::vector<double>{v}); }

std::vector<DenseVector> scalar_samples(std::initializer_list<double> values) {
  std::vector<DenseVector> out;
  for (double v : values) out.push_back(scalar(v));
  return out;
}

Hypothesis constant(double c) {
  return [c](const DenseVector&) { return scalar(c); };
}

Hypothesis linear(double a) {
  return [a](const DenseVector& x) { return scalar(a * x[0]); };
}

FiniteFamily linear_family(std::initializer_list<double> slopes, std::string label) {
  FiniteFamily f;
  for (double a : slopes) f.hypotheses.push_back(linear(a));
  f.label = std::move(label);
  return f;
}

/// Scalar-output smooth-ReLU networks on R^2, one hidden layer of 3 units.
FiniteFamily tiny_networks(std::size_t count, const Rng& rng, bool with_negations, std::string label) {
  NetworkSpec spec;
  spec.input_dim = 2;
  spec.output_dim = 1;
  spec.hidden_widths = {3};
  spec.sharpness = 10.0;
  FiniteFamily f;
  f.input_dim = 2;
  f.label = std::move(label);
  for (std::size_t n = 0; n < count; ++n) {
    Rng init = rng.derive("tiny-net", n);
    auto net = std::make_shared<const Network>(init_network(spec, init));
    f.hypotheses.push_back([net](const DenseVector& x) { return forward(*net, x); });
    if (with_negations) {
      f.hypotheses.push_back([net](const DenseVector& x) {
        DenseVector y = forward(*net, x);
        y[0] = -y[0];
        return y;
      });
    }
  }
  return f;
}

std::vector<DenseVector> plane_points(std::size_t n, const Rng& rng) {
  Rng r = rng.derive("plane-points");
  std::vector<DenseVector> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(DenseVector(std::vector<double>{r.normal(), r.normal()}));
  return out;
}

class Suite {
 public:
  explicit Suite(const SuiteConfig& config) : config_(config), root_(config.seed) {}

  EstimationMode mc(const std::string& instance) const {
    return EstimationMode::monte_carlo(config_.draws, root_.derive(instance).seed());
  }

  void add(CheckResult r, const std::string& instance) {
    r.params["instance"] = instance;
    results_.push_back(std::move(r));
  }

  /// Exact value against a closed form, then Monte-Carlo against the exact value.
  void known_value(const FiniteFamily& family, const std::vector<DenseVector>& samples, double expected,
                   const std::string& instance) {
    const Estimate exact = empirical_rademacher(family, samples, EstimationMode::exact());
    CheckResult e;
    e.check = "complexity_value";
    e.lhs = exact.value;
    e.rhs = expected;
    e.holds = std::abs(exact.value - expected) <= kExactTolerance;
    e.params = {{"family", family.label}, {"N", samples.size()}, {"exact", true}};
    add(std::move(e), instance);
    agreement(family, samples, exact.value, instance);
  }

  void agreement(const FiniteFamily& family, const std::vector<DenseVector>& samples, double exact_value,
                 const std::string& instance) {
    const auto mode = mc(instance);
    const Estimate est = empirical_rademacher(family, samples, mode);
    CheckResult m;
    m.check = "mc_agreement";
    m.lhs = est.value;
    m.rhs = exact_value;
    m.std_error = est.std_error;
    m.seed = mode.seed;
    m.holds = std::abs(est.value - exact_value) <= 3.0 * est.std_error + kExactTolerance;
    m.params = {{"family", family.label}, {"N", samples.size()}, {"draws", mode.draws}, {"exact", false}};
    add(std::move(m), instance + "/mc");
  }

  void both_modes(const std::string& instance, const std::function<CheckResult(const EstimationMode&)>& run) {
    add(run(EstimationMode::exact()), instance);
    add(run(mc(instance)), instance + "/mc");
  }

  std::vector<CheckResult> take() { return std::move(results_); }
  const Rng& root() const { return root_; }
  const SuiteConfig& config() const { return config_; }

 private:
  SuiteConfig config_;
  Rng root_;
  std::vector<CheckResult> results_;
};

}  // namespace

std::vector<CheckResult> run_rademacher_suite(const SuiteConfig& config) {
  require(config.draws >= 2, ErrorKind::Parameter, "rademacher suite: need at least 2 Monte-Carlo draws");
  require(config.symmetrization_trials >= 30, ErrorKind::Parameter,
          "rademacher suite: need at least 30 symmetrization trials");
  Suite suite(config);

  // Closed-form complexities.
  const auto line = scalar_samples({0.5, 1.0, 1.5, -2.0});
  suite.known_value(linear_family({1.0}, "singleton{x}"), line, 0.0, "singleton");
  FiniteFamily two_constants{{constant(1.0), constant(-1.0)}, 1, 1, "{+1,-1}"};
  suite.known_value(two_constants, scalar_samples({0.0, 0.0}), 0.5, "two-constant");
  suite.known_value(linear_family({1.0, -1.0}, "{x,-x}"), scalar_samples({1.0, 2.0}), 1.0, "plus-minus-x");

  const auto nets = tiny_networks(4, suite.root(), false, "tiny-nets");
  const auto points = plane_points(10, suite.root());
  suite.agreement(nets, points, empirical_rademacher(nets, points, EstimationMode::exact()).value, "tiny-nets");

  // Contraction.
  const FiniteFamily slopes = linear_family({-1.0, -0.5, 0.25, 1.0, 2.0}, "slopes");
  const auto grid = scalar_samples({-1.5, -0.7, -0.2, 0.3, 0.9, 1.4, 2.0, -2.5});
  struct Contraction {
    std::string name;
    ScalarMap map;
    double lipschitz;
    bool equality;
  };
  const std::vector<Contraction> maps{
      {"identity", [](double v) { return v; }, 1.0, true},
      {"abs", [](double v) { return std::abs(v); }, 1.0, false},
      {"half", [](double v) { return 0.5 * v; }, 0.5, false},
      {"tanh", [](double v) { return std::tanh(v); }, 1.0, false},
  };
  for (const auto& c : maps) {
    const std::vector<ScalarMap> phi(grid.size(), c.map);
    suite.both_modes("talagrand-" + c.name, [&](const EstimationMode& mode) {
      CheckResult r = check_talagrand(slopes, grid, phi, c.lipschitz, mode);
      r.params["map"] = c.name;
      if (c.equality && mode.is_exact()) r.holds = r.holds && r.lhs == r.rhs;
      return r;
    });
  }
  const std::vector<ScalarMap> net_phi(points.size(), [](double v) { return std::abs(v - 0.1); });
  suite.both_modes("talagrand-tiny-nets", [&](const EstimationMode& mode) {
    CheckResult r = check_talagrand(nets, points, net_phi, 1.0, mode);
    r.params["map"] = "abs-shift";
    return r;
  });

  // Loss domination with scalar outputs.
  suite.both_modes("loss-domination-slopes", [&](const EstimationMode& mode) {
    return check_loss_domination(slopes, linear(0.3), grid, mode);
  });
  suite.both_modes("loss-domination-tiny-nets", [&](const EstimationMode& mode) {
    return check_loss_domination(nets, [](const DenseVector& x) { return scalar(0.2 * x[0] - 0.1 * x[1]); },
                                 points, mode);
  });

  // Additivity.
  const std::vector<FiniteFamily> constant_pair{two_constants, two_constants};
  suite.both_modes("additivity-constants", [&](const EstimationMode& mode) {
    return check_additivity(constant_pair, scalar_samples({0.0, 0.0}), mode);
  });
  const std::vector<FiniteFamily> net_pair{tiny_networks(3, suite.root().derive("first"), false, "nets-a"),
                                           tiny_networks(3, suite.root().derive("second"), false, "nets-b")};
  suite.both_modes("additivity-tiny-nets", [&](const EstimationMode& mode) {
    return check_additivity(net_pair, points, mode);
  });

  // Symmetrization over negation-closed families.
  const DiscreteDistribution two_point{scalar_samples({-1.0, 1.0}), {0.3, 0.7}};
  const FiniteFamily pm_x = linear_family({1.0, -1.0}, "{x,-x}");
  suite.add(check_symmetrization(pm_x, two_point, 4, 0, EstimationMode::exact()), "symmetrization-two-point");
  DiscreteDistribution plane{plane_points(3, suite.root().derive("support")), {0.2, 0.5, 0.3}};
  const auto signed_nets = tiny_networks(2, suite.root(), true, "tiny-nets+-");
  suite.add(check_symmetrization(signed_nets, plane, 4, 0, EstimationMode::exact()), "symmetrization-tiny-nets");
  suite.add(check_symmetrization(pm_x, two_point, 8, config.symmetrization_trials, suite.mc("symmetrization-two-point")),
            "symmetrization-two-point/mc");
  suite.add(check_symmetrization(signed_nets, plane, 8, config.symmetrization_trials,
                                 suite.mc("symmetrization-tiny-nets")),
            "symmetrization-tiny-nets/mc");

  return suite.take();
}

std::string to_json_lines(const std::vector<CheckResult>& results) {
  std::string out;
  for (const auto& r : results) out += to_json(r).dump() + '\n';
  return out;
}

}  // namespace maebound
