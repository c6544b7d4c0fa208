#include "ergmkit/powerdesign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ergmkit/error.hpp"
#include "ergmkit/inference.hpp"
#include "ergmkit/parallel.hpp"

namespace ergmkit {

std::string to_string(FitMethod method) {
  switch (method) {
    case FitMethod::Exact: return "exact";
    case FitMethod::Mple: return "mple";
    case FitMethod::Mcmc: return "mcmc";
  }
  return "";
}

FitMethod parse_fit_method(const std::string& s) {
  if (s == "exact") return FitMethod::Exact;
  if (s == "mple") return FitMethod::Mple;
  if (s == "mcmc") return FitMethod::Mcmc;
  throw InputError("unknown fit method '" + s + "' (expected exact, mple or mcmc)");
}

void PowerScenario::validate() const {
  if (s_grid.empty()) throw InputError("power scenario: S_grid is empty");
  for (std::size_t k = 0; k < s_grid.size(); ++k) {
    if (s_grid[k] < 1) throw InputError("power scenario: S values must be positive");
    if (k > 0 && s_grid[k] <= s_grid[k - 1]) throw InputError("power scenario: S_grid must be increasing");
  }
  if (n < 2 || n > kMaxNodes) throw InputError("power scenario: n outside [2, 16]");
  if (m && (*m < 0 || *m > dyad_count(n))) throw InputError("power scenario: m outside [0, n(n-1)/2]");
  if (conditional && !m) throw InputError("power scenario: conditional simulation needs m");
  if (!conditional && !m && !theta_edges) {
    throw InputError("power scenario: free simulation needs m (to calibrate) or theta_edges");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("power scenario: alpha must lie in (0, 1)");
  if (replicates < 1) throw InputError("power scenario: replicates must be >= 1");
  if (females() < 0 || females() > n) throw InputError("power scenario: gender split outside [0, n]");
  if (!std::isfinite(theta_homophily)) throw InputError("power scenario: theta_homophily must be finite");
}

std::vector<std::string> power_taxonomy() { return {"all"}; }

ModelSpec power_model(const PowerScenario& scenario) {
  ModelSpec model;
  if (!scenario.conditional) model.terms.push_back({StatTerm::edges(), Modifier::one(), "edges"});
  model.terms.push_back({StatTerm::match("gender"), Modifier::one(), "homophily"});
  return model;
}

Network power_template(const PowerScenario& scenario, std::string id) {
  std::vector<NodeAttributes> nodes(scenario.n);
  for (int v = 0; v < scenario.n; ++v) {
    nodes[v].group = "all";
    nodes[v].gender = v < scenario.females() ? "F" : "M";
  }
  std::vector<Dyad> edges;
  const int m = scenario.m.value_or(0);
  for (int i = 0; i < scenario.n && static_cast<int>(edges.size()) < m; ++i) {
    for (int j = i + 1; j < scenario.n && static_cast<int>(edges.size()) < m; ++j) edges.emplace_back(i, j);
  }
  NetworkAttributes attrs;
  attrs.id = std::move(id);
  attrs.n_s = scenario.n;
  return Network(std::move(nodes), edges, std::move(attrs));
}

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Analytic moments of a dyad-independent model on the free graph space.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> independent_moments(const ModelSpec& model, const Network& tmpl,
                                                                const Eigen::VectorXd& theta) {
  BoundModel bound(model, tmpl);
  const int p = model.dim();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd change(p);
  const Adjacency empty(tmpl.size());
  for (int i = 0; i < tmpl.size(); ++i) {
    for (int j = i + 1; j < tmpl.size(); ++j) {
      bound.change(empty, i, j, std::span<double>(change.data(), p));
      double pr = logistic(theta.dot(change) + bound.offset_change(empty, i, j));
      mean += pr * change;
      cov += pr * (1.0 - pr) * change * change.transpose();
    }
  }
  return {mean, cov};
}

}  // namespace

double calibrate_edges(const ModelSpec& model, const Network& tmpl, Eigen::VectorXd theta, double target,
                       const SimConfig& sim) {
  validate_model(model, tmpl);
  const int e = model.find(StatTerm::edges(), Modifier::one());
  if (e < 0) throw InputError("calibrate_edges: model has no Edges x One term");
  const int d = dyad_count(tmpl.size());
  if (!(target > 0.0 && target < d)) {
    throw InputError("calibrate_edges: target edge count must lie strictly between 0 and " + std::to_string(d));
  }
  ModelSpec counting;
  counting.terms.push_back({StatTerm::edges(), Modifier::one(), "edges"});
  BoundModel edge_counter(counting, tmpl);
  BoundModel bound(model, tmpl);

  std::unique_ptr<StatSpace> space;
  if (!model.dyad_independent() && enumerable(tmpl.size(), Constraint::free())) {
    space = std::make_unique<StatSpace>(StatSpace::build(bound, Constraint::free()));
  }
  int evaluations = 0;
  auto mean_edges = [&](double coef) {
    theta[e] = coef;
    ++evaluations;
    if (model.dyad_independent()) {
      auto [mean, cov] = independent_moments(model, tmpl, theta);
      // Edges x One has unit change, so its mean is the expected edge count.
      return mean[e];
    }
    if (space) return space->moments(theta).mean[e];
    Rng rng = make_rng(sim.seed, {static_cast<std::uint64_t>(evaluations)});
    double total = 0.0;
    const int n = tmpl.size();
    run_chain(bound, tmpl.adjacency(), theta, Constraint::free(), sim.burnin_for(n), sim.interval_for(n),
              sim.draws, rng, [&](const Adjacency& adj) { total += adj.edge_count(); });
    return total / sim.draws;
  };
  double lo = -30.0, hi = 30.0;
  for (int it = 0; it < 100 && hi - lo > 1e-10; ++it) {
    double mid = 0.5 * (lo + hi);
    (mean_edges(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

PowerCurve empirical_power(const PowerScenario& scenario, int workers,
                           std::shared_ptr<StatSpaceCache> cache) {
  scenario.validate();
  const ModelSpec model = power_model(scenario);
  if (model.find(scenario.test_term) < 0) {
    throw InputError("test term '" + scenario.test_term + "' is not in the fit model (terms: " +
                     [&] {
                       std::string s;
                       for (const auto& l : model.labels()) s += (s.empty() ? "" : ", ") + l;
                       return s;
                     }() +
                     ")");
  }
  const Network tmpl = power_template(scenario);
  const Constraint constraint =
      scenario.conditional ? Constraint::fixed_edges(*scenario.m) : Constraint::free();

  PowerCurve curve;
  curve.scenario = scenario;
  curve.labels = model.labels();
  curve.theta = Eigen::VectorXd::Zero(model.dim());
  curve.theta[model.find("homophily")] = scenario.theta_homophily;
  if (!scenario.conditional) {
    const int e = model.find("edges");
    curve.theta[e] = scenario.theta_edges
                         ? *scenario.theta_edges
                         : calibrate_edges(model, tmpl, curve.theta, static_cast<double>(*scenario.m));
  }

  if (!cache) cache = std::make_shared<StatSpaceCache>();
  const BoundModel bound(model, tmpl);
  SimConfig sim;
  sim.burnin = scenario.burnin;
  sim.interval = scenario.interval;
  const long burnin = sim.burnin_for(scenario.n);
  const FitMethod method = scenario.method();

  struct Outcome {
    bool failed = false;
    bool reject = false;
  };
  struct Task {
    std::size_t row;
    int s;
    int replicate;
  };
  std::vector<Task> tasks;
  for (std::size_t g = 0; g < scenario.s_grid.size(); ++g) {
    for (int r = 0; r < scenario.replicates; ++r) tasks.push_back({g, scenario.s_grid[g], r});
  }
  std::vector<Outcome> outcomes(tasks.size());

  parallel_for(tasks.size(), workers, [&](std::size_t k) {
    const Task& task = tasks[k];
    const auto s_key = static_cast<std::uint64_t>(task.s);
    const auto r_key = static_cast<std::uint64_t>(task.replicate);
    std::vector<Network> nets;
    nets.reserve(task.s);
    for (int net = 0; net < task.s; ++net) {
      Rng rng = make_rng(scenario.seed, {s_key, r_key, static_cast<std::uint64_t>(net)});
      MhChain chain(bound, tmpl.adjacency(), curve.theta, constraint);
      chain.run(burnin, rng);
      nets.push_back(tmpl.with_adjacency(chain.state()).with_id("s" + std::to_string(net)));
    }
    NetworkSample sample(power_taxonomy(), std::move(nets));
    const std::vector<Constraint> cons{constraint};
    try {
      FitResult fit;
      switch (method) {
        case FitMethod::Exact: {
          FitOptions opt;
          opt.cache = cache;
          fit = exact_mle(model, sample, cons, opt);
          break;
        }
        case FitMethod::Mple: fit = mple(model, sample, cons); break;
        case FitMethod::Mcmc: {
          McmcOptions opt;
          opt.sim.seed = derive_seed(scenario.seed, {s_key, r_key, 0xf17ULL});
          opt.sim.draws = 200;
          fit = mcmc_mle(model, sample, cons, opt);
          break;
        }
      }
      const int t = fit.find(scenario.test_term);
      const double se = t < 0 ? 0.0 : std::sqrt(fit.sigma(t, t));
      if (!std::isfinite(se) || !(se > 0.0)) {
        outcomes[k].failed = true;
        return;
      }
      outcomes[k].reject = normal_pvalue(fit.theta[t] / se, Tail::TwoSided) <= scenario.alpha;
    } catch (const NonConvergenceError&) {
      outcomes[k].failed = true;
    }
  });

  curve.rows.resize(scenario.s_grid.size());
  for (std::size_t g = 0; g < scenario.s_grid.size(); ++g) curve.rows[g].s = scenario.s_grid[g];
  int total_fits = 0;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    PowerRow& row = curve.rows[tasks[k].row];
    if (outcomes[k].failed) {
      ++row.failures;
    } else {
      ++row.fits;
      ++total_fits;
      if (outcomes[k].reject) ++row.rejects;
    }
  }
  if (total_fits == 0) throw NonConvergenceError("power: every replicate fit failed");
  for (auto& row : curve.rows) {
    if (row.fits == 0) {
      row.p_hat = row.mcse = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    row.p_hat = static_cast<double>(row.rejects) / row.fits;
    row.mcse = std::sqrt(row.p_hat * (1.0 - row.p_hat) / row.fits);
  }
  return curve;
}

FisherInfo fisher_info(const ModelSpec& model, const Network& tmpl, const Eigen::VectorXd& theta,
                       const Constraint& constraint, const EnumerationLimits& limits, const SimConfig& sim) {
  validate_model(model, tmpl);
  if (theta.size() != model.dim()) throw InputError("theta length does not match the model");
  constraint.check(tmpl.size());
  FisherInfo out;
  if (!constraint.conditional() && model.dyad_independent()) {
    out.info = independent_moments(model, tmpl, theta).second;
    return out;
  }
  if (enumerable(tmpl.size(), constraint, limits)) {
    out.info = exact_moments(model, tmpl, theta, constraint, limits).cov;
    return out;
  }
  // Monte-Carlo: covariance of draws, with batch-to-batch spread as its error.
  sim.check();
  BoundModel bound(model, tmpl);
  Adjacency start = tmpl.adjacency();
  if (!constraint.admits(start)) {
    start = Adjacency(tmpl.size());
    int placed = 0;
    for (int i = 0; i < tmpl.size() && placed < constraint.edges; ++i) {
      for (int j = i + 1; j < tmpl.size() && placed < constraint.edges; ++j, ++placed) start.set(i, j, true);
    }
  }
  const int p = model.dim();
  Eigen::MatrixXd draws(sim.draws, p);
  Eigen::Index row = 0;
  Rng rng = make_rng(sim.seed);
  run_chain(bound, start, theta, constraint, sim.burnin_for(tmpl.size()), sim.interval_for(tmpl.size()),
            sim.draws, rng, [&](const Adjacency& adj) { draws.row(row++) = bound.stats(adj).transpose(); });
  auto cov_of = [](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
    return Eigen::MatrixXd(c.transpose() * c / std::max<Eigen::Index>(x.rows() - 1, 1));
  };
  out.info = cov_of(draws);
  out.exact = false;
  const Eigen::Index batches = std::max<Eigen::Index>(2, static_cast<Eigen::Index>(std::sqrt(double(sim.draws))));
  const Eigen::Index size = sim.draws / batches;
  if (size >= 2) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p), sq = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index b = 0; b < batches; ++b) {
      Eigen::MatrixXd c = cov_of(draws.middleRows(b * size, size));
      sum += c;
      sq += c.cwiseProduct(c);
    }
    Eigen::MatrixXd mean = sum / batches;
    Eigen::MatrixXd var = (sq / batches - mean.cwiseProduct(mean)) * (double(batches) / (batches - 1));
    out.mcse = (var.cwiseMax(0.0) / batches).cwiseSqrt();
  }
  return out;
}

ScalingRegime parse_scaling_regime(const std::string& s) {
  if (s == "edge-count" || s == "edges") return ScalingRegime::EdgeCount;
  if (s == "mean-degree" || s == "degree") return ScalingRegime::MeanDegree;
  if (s == "density") return ScalingRegime::Density;
  throw InputError("unknown scaling regime '" + s + "' (expected edge-count, mean-degree or density)");
}

std::vector<OffsetTerm> scaling_regime_offsets(ScalingRegime regime) {
  const ModelTerm edges_logn{StatTerm::edges(), Modifier::log_n(), "offset.edges.logn"};
  switch (regime) {
    case ScalingRegime::Density: return {};
    case ScalingRegime::MeanDegree: return {{edges_logn, -1.0}};
    case ScalingRegime::EdgeCount: return {{edges_logn, -2.0}};
  }
  return {};
}

}  // namespace ergmkit
