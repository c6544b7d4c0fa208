#include <doctest.h>

#include <cmath>

#include "ergmkit/powerdesign.hpp"
#include "support.hpp"

using namespace ergmkit;
using testing::log_choose;

namespace {

ModelTerm term(StatTerm s, Modifier m, std::string label) { return {std::move(s), std::move(m), std::move(label)}; }

// Same-gender edge count on n = 8 (4 F, 4 M) with m = 20 edges: 12 same-gender
// dyads out of 28, weight C(12,k) C(16,20-k) exp(theta k).
std::pair<double, double> tilted_hypergeometric(double theta, int same, int diff, int m) {
  std::vector<double> lw;
  std::vector<int> ks;
  for (int k = std::max(0, m - diff); k <= std::min(same, m); ++k) {
    lw.push_back(log_choose(same, k) + log_choose(diff, m - k) + theta * k);
    ks.push_back(k);
  }
  const double mx = *std::max_element(lw.begin(), lw.end());
  double z = 0, s1 = 0, s2 = 0;
  for (std::size_t i = 0; i < lw.size(); ++i) {
    const double w = std::exp(lw[i] - mx);
    z += w;
    s1 += w * ks[i];
    s2 += w * ks[i] * ks[i];
  }
  const double mean = s1 / z;
  return {mean, s2 / z - mean * mean};
}

PowerScenario small_scenario() {
  PowerScenario sc;
  sc.s_grid = {2, 5};
  sc.n = 6;
  sc.m = 7;
  sc.theta_homophily = 1.0;
  sc.replicates = 30;
  sc.seed = 99;
  return sc;
}

}  // namespace

TEST_CASE("scenario model and template") {
  PowerScenario sc;
  const ModelSpec model = power_model(sc);
  CHECK(model.labels() == std::vector<std::string>{"homophily"});
  const Network tmpl = power_template(sc);
  CHECK(tmpl.size() == 8);
  CHECK(tmpl.edge_count() == 20);
  int females = 0;
  for (const auto& node : tmpl.nodes()) females += node.gender == "F";
  CHECK(females == 4);
  sc.conditional = false;
  CHECK(power_model(sc).labels() == std::vector<std::string>{"edges", "homophily"});
  CHECK(power_template(sc).edge_count() == 20);
  sc.m.reset();
  sc.theta_edges = -1.0;
  CHECK(power_template(sc).edge_count() == 0);
  sc.gender_split = 3;
  CHECK(power_template(sc).nodes()[3].gender == "M");

  PowerScenario bad;
  bad.m.reset();
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad = PowerScenario{};
  bad.m = 29;
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad = PowerScenario{};
  bad.alpha = 1.5;
  CHECK_THROWS_AS(bad.validate(), InputError);
  CHECK(parse_fit_method("mple") == FitMethod::Mple);
  CHECK_THROWS_AS(parse_fit_method("bayes"), InputError);
}

TEST_CASE("conditional homophily distribution is a tilted hypergeometric") {
  PowerScenario sc;
  const ModelSpec model = power_model(sc);
  const Network tmpl = power_template(sc);
  for (double theta : {0.0, 1.1, -0.7}) {
    const ExactMoments m = exact_moments(model, tmpl, Eigen::VectorXd::Constant(1, theta), Constraint::fixed_edges(20));
    const auto [mean, var] = tilted_hypergeometric(theta, 12, 16, 20);
    CHECK(m.mean[0] == doctest::Approx(mean).epsilon(1e-10));
    CHECK(m.cov(0, 0) == doctest::Approx(var).epsilon(1e-10));
    const FisherInfo fi = fisher_info(model, tmpl, Eigen::VectorXd::Constant(1, theta), Constraint::fixed_edges(20));
    CHECK(fi.exact);
    CHECK(fi.info(0, 0) == doctest::Approx(var).epsilon(1e-10));
  }
}

TEST_CASE("Fisher information of the edge count") {
  ModelSpec model;
  model.terms = {term(StatTerm::edges(), Modifier::one(), "edges")};
  for (int n : {4, 8, 12}) {
    const Network tmpl = testing::make_net(n, {});
    const FisherInfo fi = fisher_info(model, tmpl, Eigen::VectorXd::Zero(1), Constraint::free());
    CHECK(fi.exact);
    CHECK(fi.info(0, 0) == doctest::Approx(dyad_count(n) / 4.0));
    const FisherInfo fixed = fisher_info(model, tmpl, Eigen::VectorXd::Zero(1), Constraint::fixed_edges(3));
    CHECK(fixed.info(0, 0) == doctest::Approx(0.0));
  }
  const auto at = [&](int n) {
    return fisher_info(model, testing::make_net(n, {}), Eigen::VectorXd::Zero(1), Constraint::free()).info(0, 0);
  };
  CHECK(at(8) / at(4) == doctest::Approx(28.0 / 6.0));

  // Dependent model on a non-enumerable space falls back to simulation.
  ModelSpec tri = model;
  tri.terms.push_back(term(StatTerm::triangle(), Modifier::one(), "triangle"));
  Eigen::VectorXd theta(2);
  theta << -1.0, 0.1;
  const FisherInfo mc = fisher_info(tri, testing::make_net(10, {}), theta, Constraint::free());
  CHECK_FALSE(mc.exact);
  REQUIRE(mc.mcse.has_value());
  CHECK(mc.info(0, 0) > 0);
  CHECK((mc.info - mc.info.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  // Enumerable dependent case matches the exact covariance.
  const Network small = testing::make_net(5, {});
  const FisherInfo ex = fisher_info(tri, small, theta, Constraint::free());
  CHECK(ex.exact);
  CHECK((ex.info - exact_moments(tri, small, theta, Constraint::free()).cov).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("size-scaling offsets") {
  CHECK(parse_scaling_regime("mean-degree") == ScalingRegime::MeanDegree);
  CHECK(scaling_regime_offsets(ScalingRegime::Density).empty());
  const auto md = scaling_regime_offsets(ScalingRegime::MeanDegree);
  REQUIRE(md.size() == 1);
  CHECK(md[0].coef == -1.0);
  CHECK(md[0].term.stat.kind == StatKind::Edges);
  CHECK(md[0].term.modifier.kind == ModifierKind::LogN);
  CHECK(scaling_regime_offsets(ScalingRegime::EdgeCount)[0].coef == -2.0);

  // Under the mean-degree offset the expected degree barely moves with n.
  ModelSpec model;
  model.terms = {term(StatTerm::edges(), Modifier::one(), "edges")};
  model.offsets = md;
  std::vector<double> degree;
  for (int n = 4; n <= 12; ++n) {
    const Eigen::VectorXd p = dyad_probabilities(model, Eigen::VectorXd::Constant(1, -2.0), testing::make_net(n, {}));
    degree.push_back(2.0 * p.sum() / n);
  }
  const auto [lo, hi] = std::minmax_element(degree.begin(), degree.end());
  CHECK((*hi - *lo) / *hi < 0.25);
  // Without it the expected degree grows linearly in n.
  ModelSpec plain;
  plain.terms = model.terms;
  const Eigen::VectorXd p4 = dyad_probabilities(plain, Eigen::VectorXd::Constant(1, -2.0), testing::make_net(4, {}));
  const Eigen::VectorXd p12 = dyad_probabilities(plain, Eigen::VectorXd::Constant(1, -2.0), testing::make_net(12, {}));
  CHECK((2.0 * p12.sum() / 12) / (2.0 * p4.sum() / 4) == doctest::Approx(11.0 / 3.0));
}

TEST_CASE("edge calibration hits the target mean") {
  PowerScenario sc;
  sc.conditional = false;
  const ModelSpec model = power_model(sc);
  const Network tmpl = power_template(sc);
  Eigen::VectorXd theta(2);
  theta << 0.0, 1.1;
  theta[0] = calibrate_edges(model, tmpl, theta, 20.0);
  CHECK(dyad_probabilities(model, theta, tmpl).sum() == doctest::Approx(20.0).epsilon(1e-6));

  ModelSpec dep = model;
  dep.terms.push_back(term(StatTerm::triangle(), Modifier::one(), "triangle"));
  const Network six = testing::make_net(6, {});
  Eigen::VectorXd t3(3);
  t3 << 0.0, 0.5, 0.2;
  t3[0] = calibrate_edges(dep, six, t3, 6.0);
  CHECK(exact_moments(dep, six, t3, Constraint::free()).mean[0] == doctest::Approx(6.0).epsilon(1e-6));
  CHECK_THROWS_AS(calibrate_edges(model, tmpl, theta, 40.0), InputError);
}

TEST_CASE("power simulation is reproducible and worker independent") {
  const PowerScenario sc = small_scenario();
  const PowerCurve a = empirical_power(sc, 1);
  const PowerCurve b = empirical_power(sc, 3);
  REQUIRE(a.rows.size() == 2);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].rejects == b.rows[i].rejects);
    CHECK(a.rows[i].failures == b.rows[i].failures);
    CHECK(a.rows[i].fits + a.rows[i].failures == sc.replicates);
    CHECK(a.rows[i].p_hat == doctest::Approx(double(a.rows[i].rejects) / a.rows[i].fits));
    const double p = a.rows[i].p_hat;
    CHECK(a.rows[i].mcse == doctest::Approx(std::sqrt(p * (1 - p) / a.rows[i].fits)));
  }
  CHECK(a.rows[1].p_hat >= a.rows[0].p_hat - 2 * (a.rows[0].mcse + a.rows[1].mcse));
  PowerScenario other = sc;
  other.seed = 100;
  const PowerCurve c = empirical_power(other, 1);
  bool differs = false;
  for (std::size_t i = 0; i < c.rows.size(); ++i) differs = differs || c.rows[i].rejects != a.rows[i].rejects;
  CHECK(differs);
}

TEST_CASE("power with free simulation and MPLE fits") {
  PowerScenario sc = small_scenario();
  sc.conditional = false;
  sc.s_grid = {4};
  const PowerCurve curve = empirical_power(sc, 1);
  CHECK(curve.labels == std::vector<std::string>{"edges", "homophily"});
  CHECK(curve.theta[1] == 1.0);
  CHECK(curve.rows[0].fits + curve.rows[0].failures == sc.replicates);
  CHECK(curve.rows[0].fits > 0);
}
