#include <doctest.h>

#include <cmath>

#include "ergmkit/diagnostics.hpp"
#include "support.hpp"

using namespace ergmkit;

namespace {

ModelTerm term(StatTerm s, Modifier m, std::string label) { return {std::move(s), std::move(m), std::move(label)}; }

NetworkSample random_sample(std::uint64_t seed, int count, int n, double p) {
  Rng rng = make_rng(seed);
  std::vector<Network> nets;
  for (int s = 0; s < count; ++s) nets.push_back(testing::random_network(rng, n, p, {"A"}, "n" + std::to_string(s)));
  return NetworkSample({"A"}, std::move(nets));
}

ModelSpec edges_model() {
  ModelSpec m;
  m.terms = {term(StatTerm::edges(), Modifier::one(), "edges")};
  return m;
}

}  // namespace

TEST_CASE("type 7 quantiles") {
  CHECK(quantile({4, 1, 3, 2}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({4, 1, 3, 2}, 0.025) == doctest::Approx(1.075));
  CHECK(quantile({4, 1, 3, 2}, 0.975) == doctest::Approx(3.925));
  CHECK(quantile({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(quantile({7}, 0.3) == 7.0);
  CHECK(std::isnan(quantile({}, 0.5)));
}

TEST_CASE("simulated residuals of the edge count") {
  const NetworkSample sample = random_sample(1, 12, 6, 0.4);
  const ModelSpec model = edges_model();
  const FitResult fit = exact_mle(model, sample);
  const StatTerm stats[] = {StatTerm::edges(), StatTerm::triangle()};
  const ResidualTable table = simulated_residuals(fit, model, sample, {}, stats, 3000, 5);
  REQUIRE(table.rows.size() == 24);
  CHECK(table.excluded.empty());
  const double p = 1.0 / (1.0 + std::exp(-fit.theta[0]));
  for (const ResidualRow& row : table.rows) {
    if (row.statistic != "edges") continue;
    const auto it = std::find_if(sample.begin(), sample.end(), [&](const Network& n) { return n.id() == row.network; });
    REQUIRE(it != sample.end());
    CHECK(row.observed == it->edge_count());
    CHECK(row.sim_mean == doctest::Approx(15 * p).epsilon(0.03));
    CHECK(row.sim_sd == doctest::Approx(std::sqrt(15 * p * (1 - p))).epsilon(0.06));
    CHECK(row.residual == doctest::Approx((row.observed - row.sim_mean) / row.sim_sd));
  }
  CHECK_THROWS_AS(simulated_residuals(fit, model, sample, {}, stats, 1, 5), InputError);

  // Conditioning fixes the edge count: every edges row has zero spread.
  std::vector<Constraint> cons;
  for (const Network& net : sample) cons.push_back(Constraint::fixed_edges(net.edge_count()));
  ModelSpec tri;
  tri.terms = {term(StatTerm::triangle(), Modifier::one(), "triangle")};
  const FitResult cfit = exact_mle(tri, sample, cons);
  const ResidualTable ct = simulated_residuals(cfit, tri, sample, cons, stats, 50, 5);
  CHECK(ct.excluded.size() >= sample.size());
  for (const ResidualRow& row : ct.excluded) CHECK(std::isnan(row.residual));
}

TEST_CASE("residual regression is ordinary least squares") {
  ResidualTable table;
  const std::vector<double> x = {0, 1, 2, 3, 4, 5};
  const std::vector<double> y = {0.1, 0.9, 2.3, 2.8, 4.2, 4.9};
  std::map<std::string, double> cov;
  for (std::size_t i = 0; i < x.size(); ++i) {
    table.rows.push_back({"g" + std::to_string(i), "edges", 0, 0, 1, y[i]});
    cov["g" + std::to_string(i)] = x[i];
  }
  table.rows.push_back({"g9", "twostar", 0, 0, 1, 100.0});
  const double n = 6, mx = 2.5, my = (0.1 + 0.9 + 2.3 + 2.8 + 4.2 + 4.9) / 6;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - my - slope * (x[i] - mx);
    rss += r * r;
  }
  const double se = std::sqrt(rss / (n - 2) / sxx);
  const TestResult t = residual_regression(table, "edges", cov, "x");
  CHECK(*t.estimate == doctest::Approx(slope).epsilon(1e-12));
  CHECK(*t.se == doctest::Approx(se).epsilon(1e-12));
  CHECK(t.statistic == doctest::Approx(slope / se).epsilon(1e-12));
  CHECK(*t.df == 4);
  CHECK(t.pvalue == doctest::Approx(t_pvalue(slope / se, 4, Tail::TwoSided)));

  std::map<std::string, double> flat;
  for (const auto& [k, v] : cov) flat[k] = 1.0;
  CHECK_THROWS_AS(residual_regression(table, "edges", flat, "flat"), InputError);
  std::map<std::string, double> two{{"g0", 0.0}, {"g1", 1.0}};
  CHECK_THROWS_AS(residual_regression(table, "edges", two, "two"), InputError);
  CHECK_THROWS_AS(residual_regression(table, "triangle", cov, "none"), InputError);
}

TEST_CASE("residuals under the fitted model do not track an unrelated covariate") {
  const NetworkSample sample = random_sample(2, 60, 6, 0.35);
  const ModelSpec model = edges_model();
  const FitResult fit = exact_mle(model, sample);
  const StatTerm stats[] = {StatTerm::edges()};
  const ResidualTable table = simulated_residuals(fit, model, sample, {}, stats, 400, 8);
  std::map<std::string, double> noise;
  Rng rng = make_rng(3);
  for (const Network& net : sample) noise[net.id()] = uniform01(rng);
  const TestResult t = residual_regression(table, "edges", noise, "noise");
  CHECK(*t.df == 58);
  CHECK(t.pvalue > 0.001);
}

TEST_CASE("goodness-of-fit summaries") {
  const NetworkSample sample = random_sample(4, 8, 5, 0.5);
  const ModelSpec model = edges_model();
  const FitResult fit = exact_mle(model, sample);
  const StatTerm stats[] = {StatTerm::edges(), StatTerm::two_star(), StatTerm::triangle()};
  DiagnosticOptions one, three;
  three.workers = 3;
  const GofTable a = gof_summary(fit, model, sample, {}, stats, 200, 21, one);
  const GofTable b = gof_summary(fit, model, sample, {}, stats, 200, 21, three);
  REQUIRE(a.rows.size() == 3 * (1 + sample.size()));
  double observed_edges = 0;
  for (const Network& net : sample) observed_edges += net.edge_count();
  CHECK(a.rows[0].scope == "pooled");
  CHECK(a.rows[0].statistic == "edges");
  CHECK(a.rows[0].observed == observed_edges);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].q025 <= a.rows[i].q50);
    CHECK(a.rows[i].q50 <= a.rows[i].q975);
    CHECK(a.rows[i].tail >= 0.0);
    CHECK(a.rows[i].tail <= 1.0);
    CHECK(a.rows[i].q50 == b.rows[i].q50);
    CHECK(a.rows[i].tail == b.rows[i].tail);
  }
  // The fitted edge total sits in the middle of its simulated distribution.
  CHECK(a.rows[0].tail > 0.05);
  CHECK(a.rows[0].tail < 0.95);
  const GofTable c = gof_summary(fit, model, sample, {}, stats, 200, 22, one);
  bool differs = false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) differs = differs || a.rows[i].q50 != c.rows[i].q50 || a.rows[i].tail != c.rows[i].tail;
  CHECK(differs);
}
