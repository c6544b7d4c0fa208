#include "ergmkit/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <unordered_map>

#include "ergmkit/linalg.hpp"
#include "ergmkit/parallel.hpp"

namespace ergmkit {

std::string to_string(LoglikKind kind) {
  switch (kind) {
    case LoglikKind::Exact: return "exact";
    case LoglikKind::Pseudo: return "pseudo";
    case LoglikKind::McApprox: return "mc-approx";
  }
  return "";
}

LoglikKind parse_loglik_kind(const std::string& s) {
  if (s == "exact") return LoglikKind::Exact;
  if (s == "pseudo") return LoglikKind::Pseudo;
  if (s == "mc-approx") return LoglikKind::McApprox;
  throw InputError("unknown loglik_kind '" + s + "'");
}

int FitResult::find(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

std::vector<Constraint> resolve_constraints(const NetworkSample& sample,
                                            std::span<const Constraint> constraints) {
  if (constraints.empty()) return std::vector<Constraint>(sample.size(), Constraint::free());
  if (constraints.size() == 1) return std::vector<Constraint>(sample.size(), constraints[0]);
  if (constraints.size() != sample.size()) {
    throw InputError("got " + std::to_string(constraints.size()) + " constraints for " +
                     std::to_string(sample.size()) + " networks");
  }
  return {constraints.begin(), constraints.end()};
}

ModelSpec estimable_model(const ModelSpec& model, std::span<const Constraint> constraints,
                          std::vector<std::string>* dropped) {
  bool all_conditional =
      !constraints.empty() &&
      std::all_of(constraints.begin(), constraints.end(), [](const Constraint& c) { return c.conditional(); });
  if (!all_conditional) return model;
  ModelSpec out;
  out.offsets = model.offsets;
  for (const auto& t : model.terms) {
    if (t.stat.kind == StatKind::Edges) {
      if (dropped) dropped->push_back(t.label);
    } else {
      out.terms.push_back(t);
    }
  }
  if (out.terms.empty()) {
    throw InputError("no estimable terms: edge-count terms are constant when every network is "
                     "conditioned on its edge count");
  }
  return out;
}

Eigen::VectorXd expand_theta(const ModelSpec& model, const FitResult& fit) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(model.dim());
  for (int k = 0; k < model.dim(); ++k) {
    int j = fit.find(model.terms[k].label);
    if (j >= 0) {
      full[k] = fit.theta[j];
    } else if (std::find(fit.dropped.begin(), fit.dropped.end(), model.terms[k].label) ==
               fit.dropped.end()) {
      throw InputError("fit has no parameter for model term '" + model.terms[k].label + "'");
    }
  }
  return full;
}

namespace {

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double logistic(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

// Coordinates beyond the threshold whose magnitude has grown by a
// non-vanishing amount on each of the last few iterations. A converging
// Newton sequence with a large but finite limit stops growing; one running
// off to infinity (separation, boundary MLE) keeps taking unit-size steps.
class DivergenceMonitor {
 public:
  DivergenceMonitor(std::vector<std::string> labels, double threshold)
      : labels_(std::move(labels)), threshold_(threshold), runs_(labels_.size(), 0) {}

  std::vector<std::string> update(const Eigen::VectorXd& theta) {
    std::vector<std::string> out;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      const double a = std::abs(theta[k]);
      const bool growing = previous_.size() == theta.size() && a > std::abs(previous_[k]) + kMinGrowth;
      runs_[k] = a > threshold_ && growing ? runs_[k] + 1 : 0;
      if (!std::isfinite(a) || runs_[k] >= kRun) out.push_back(labels_[k]);
    }
    previous_ = theta;
    return out;
  }

  // Coordinates beyond the threshold at a point the optimizer accepted as
  // converged: the objective is flat there because it is still rising.
  std::vector<std::string> beyond(const Eigen::VectorXd& theta) const {
    std::vector<std::string> out;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      if (!(std::abs(theta[k]) <= threshold_)) out.push_back(labels_[k]);
    }
    return out;
  }

 private:
  static constexpr int kRun = 3;
  static constexpr double kMinGrowth = 0.1;
  std::vector<std::string> labels_;
  double threshold_;
  std::vector<int> runs_;
  Eigen::VectorXd previous_;
};

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "'" : ", '") + x + "'";
  return s;
}

void finish(FitResult& fit, int extra_params = 0) {
  fit.aic = -2.0 * fit.loglik + 2.0 * (fit.dim() + extra_params);
}

// Start for likelihood fits: MPLE if it succeeds, else zero with any
// Edges x One term at the pooled logit density of the free networks.
Eigen::VectorXd initial_theta(const ModelSpec& model, const ModelSpec& reduced,
                              const NetworkSample& sample, const std::vector<Constraint>& cons,
                              double threshold) {
  try {
    FitOptions o;
    o.divergence_threshold = threshold;
    return mple(model, sample, cons, o).theta;
  } catch (const NonConvergenceError&) {
  }
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(reduced.dim());
  int e = reduced.find(StatTerm::edges(), Modifier::one());
  if (e >= 0) {
    double edges = 0, dyads = 0;
    for (std::size_t s = 0; s < sample.size(); ++s) {
      if (cons[s].conditional()) continue;
      edges += sample[s].edge_count();
      dyads += dyad_count(sample[s].size());
    }
    if (dyads > 0) {
      double lim = threshold - 1.0;
      theta[e] = edges <= 0     ? -lim
                 : edges >= dyads ? lim
                                  : std::clamp(std::log(edges / (dyads - edges)), -lim, lim);
    }
  }
  return theta;
}

}  // namespace

// MPLE -----------------------------------------------------------------------

FitResult mple(const ModelSpec& model, const NetworkSample& sample,
               std::span<const Constraint> constraints, const FitOptions& options) {
  validate_model(model, sample);
  const auto cons = resolve_constraints(sample, constraints);
  FitResult fit;
  const ModelSpec fm = estimable_model(model, cons, &fit.dropped);
  const int p = fm.dim();

  std::vector<std::string> labels = fm.labels();
  std::vector<int> nuisance(sample.size(), -1);
  int q = 0;
  for (std::size_t s = 0; s < sample.size(); ++s) {
    if (!cons[s].conditional()) continue;
    const int d = dyad_count(sample[s].size());
    cons[s].check(sample[s].size());
    if (sample[s].edge_count() != cons[s].edges) {
      throw InputError("network '" + sample[s].id() + "' violates " + to_string(cons[s]));
    }
    if (cons[s].edges == 0 || cons[s].edges == d) continue;  // single admissible graph
    nuisance[s] = p + q++;
    labels.push_back("intercept[" + sample[s].id() + "]");
  }
  const int cols = p + q;

  // Aggregate identical dyad rows into binomial counts.
  std::unordered_map<std::string, int> index;
  std::vector<double> x_rows, offsets, trials, successes;
  std::vector<double> change(p);
  std::string key(sizeof(double) * (p + 1) + sizeof(int), '\0');
  bool any_row = false;
  for (std::size_t s = 0; s < sample.size(); ++s) {
    const Network& net = sample[s];
    if (cons[s].conditional() && nuisance[s] < 0) continue;
    BoundModel bound(fm, net);
    const Adjacency& adj = net.adjacency();
    for (int i = 0; i < net.size(); ++i) {
      for (int j = i + 1; j < net.size(); ++j) {
        bound.change(adj, i, j, change);
        double off = bound.has_offsets() ? bound.offset_change(adj, i, j) : 0.0;
        std::memcpy(key.data(), change.data(), sizeof(double) * p);
        std::memcpy(key.data() + sizeof(double) * p, &off, sizeof(double));
        std::memcpy(key.data() + sizeof(double) * (p + 1), &nuisance[s], sizeof(int));
        auto [it, inserted] = index.try_emplace(key, static_cast<int>(trials.size()));
        if (inserted) {
          x_rows.insert(x_rows.end(), change.begin(), change.end());
          for (int c = 0; c < q; ++c) x_rows.push_back(nuisance[s] == p + c ? 1.0 : 0.0);
          offsets.push_back(off);
          trials.push_back(0.0);
          successes.push_back(0.0);
        }
        trials[it->second] += 1.0;
        successes[it->second] += adj.has(i, j) ? 1.0 : 0.0;
        any_row = true;
      }
    }
  }
  if (!any_row) throw InputError("pseudolikelihood has no informative dyads");

  const auto rows = static_cast<Eigen::Index>(trials.size());
  const Eigen::MatrixXd x =
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          x_rows.data(), rows, cols);
  const Eigen::Map<const Eigen::VectorXd> off(offsets.data(), rows);
  const Eigen::Map<const Eigen::VectorXd> n(trials.data(), rows);
  const Eigen::Map<const Eigen::VectorXd> y(successes.data(), rows);

  auto objective = [&](const Eigen::VectorXd& beta) {
    Eigen::VectorXd eta = x * beta + off;
    double l = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) l += y[r] * eta[r] - n[r] * softplus(eta[r]);
    return l;
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(cols);
  if (options.initial && options.initial->size() == p) beta.head(p) = *options.initial;

  fit.labels = fm.labels();
  fit.loglik_kind = LoglikKind::Pseudo;
  fit.sigma_naive = true;
  fit.nuisance = q;
  auto partial = [&] {
    FitResult r = fit;
    r.theta = beta.head(p);
    r.sigma = Eigen::MatrixXd::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
    r.loglik = objective(beta);
    r.converged = false;
    finish(r, q);
    return r;
  };

  Eigen::MatrixXd info;
  double current = objective(beta);
  bool converged = false;
  int it = 0;
  DivergenceMonitor monitor(labels, options.divergence_threshold);
  for (; it < options.max_iter; ++it) {
    Eigen::VectorXd eta = x * beta + off;
    Eigen::VectorXd mu = eta.unaryExpr([](double e) { return logistic(e); });
    Eigen::VectorXd w = n.array() * mu.array() * (1.0 - mu.array());
    Eigen::VectorXd score = x.transpose() * (y - n.cwiseProduct(mu));
    info = x.transpose() * w.asDiagonal() * x;
    if (score.cwiseAbs().maxCoeff() < options.tolerance) {
      converged = true;
      break;
    }
    Eigen::VectorXd step;
    try {
      step = spd_solve(info, score, labels, "pseudolikelihood information");
    } catch (const NonConvergenceError& e) {
      throw FitError(e.what(), e.terms(), partial());
    }
    double t = 1.0;
    Eigen::VectorXd next;
    double value = -INFINITY;
    for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
      next = beta + t * step;
      value = objective(next);
      if (value >= current - 1e-12 * std::max(1.0, std::abs(current))) break;
    }
    bool small = (t * step).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + beta.cwiseAbs().maxCoeff());
    beta = next;
    current = value;
    auto far = monitor.update(beta);
    if (!far.empty()) {
      throw FitError("separation: pseudolikelihood increases without bound along " + join(far) +
                         " (|theta| > " + std::to_string(options.divergence_threshold) + ")",
                     far, partial());
    }
    if (small) {
      converged = true;
      ++it;
      break;
    }
  }
  if (!converged) {
    throw FitError("MPLE did not converge in " + std::to_string(options.max_iter) + " iterations",
                   {}, partial());
  }
  if (auto far = monitor.beyond(beta.head(p)); !far.empty()) {
    throw FitError("separation: pseudolikelihood maximized at |theta| > " +
                       std::to_string(options.divergence_threshold) + " along " + join(far),
                   far, partial());
  }
  // Refresh the information at the final estimate.
  {
    Eigen::VectorXd eta = x * beta + off;
    Eigen::VectorXd mu = eta.unaryExpr([](double e) { return logistic(e); });
    Eigen::VectorXd w = n.array() * mu.array() * (1.0 - mu.array());
    info = x.transpose() * w.asDiagonal() * x;
  }
  Eigen::MatrixXd inv;
  try {
    inv = spd_inverse(info, labels, "pseudolikelihood information");
  } catch (const NonConvergenceError& e) {
    throw FitError(e.what(), e.terms(), partial());
  }
  fit.theta = beta.head(p);
  fit.sigma = inv.topLeftCorner(p, p);
  fit.loglik = current;
  fit.converged = true;
  fit.iterations = it;
  fit.message = "sigma is the naive inverse pseudolikelihood information";
  finish(fit, q);
  return fit;
}

// Exact likelihood -----------------------------------------------------------

ExactLikelihood::ExactLikelihood(const ModelSpec& model, const NetworkSample& sample,
                                 std::span<const Constraint> constraints, const FitOptions& options)
    : workers_(options.workers) {
  validate_model(model, sample);
  const auto cons = resolve_constraints(sample, constraints);
  auto cache = options.cache ? options.cache : std::make_shared<StatSpaceCache>(options.limits);

  const int p = model.dim();
  observed_ = Eigen::VectorXd::Zero(p);
  std::vector<std::shared_ptr<const StatSpace>> spaces(sample.size());
  for (std::size_t s = 0; s < sample.size(); ++s) {
    const Network& net = sample[s];
    cons[s].check(net.size());
    if (!cons[s].admits(net.adjacency())) {
      throw InputError("network '" + net.id() + "' violates " + to_string(cons[s]));
    }
    check_enumerable(net.size(), cons[s], cache->limits(), net.id());
  }
  parallel_for(sample.size(), options.workers, [&](std::size_t s) {
    spaces[s] = cache->get(BoundModel(model, sample[s]), cons[s]);
  });
  std::map<const StatSpace*, std::size_t> group_of;
  for (std::size_t s = 0; s < sample.size(); ++s) {
    BoundModel bound(model, sample[s]);
    observed_ += bound.stats(sample[s].adjacency());
    observed_offset_ += bound.offset(sample[s].adjacency());
    auto [it, inserted] = group_of.try_emplace(spaces[s].get(), groups_.size());
    if (inserted) groups_.push_back({spaces[s], 0.0});
    groups_[it->second].multiplicity += 1.0;
  }
}

double ExactLikelihood::value(const Eigen::VectorXd& theta) const {
  double l = theta.dot(observed_) + observed_offset_;
  for (const auto& g : groups_) l -= g.multiplicity * g.space->log_kappa(theta);
  return l;
}

ExactLikelihood::Value ExactLikelihood::evaluate(const Eigen::VectorXd& theta) const {
  std::vector<ExactMoments> m(groups_.size());
  parallel_for(groups_.size(), workers_, [&](std::size_t g) { m[g] = groups_[g].space->moments(theta); });
  Value v;
  const int p = dim();
  v.expected = Eigen::VectorXd::Zero(p);
  v.info = Eigen::MatrixXd::Zero(p, p);
  v.loglik = theta.dot(observed_) + observed_offset_;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    v.expected += groups_[g].multiplicity * m[g].mean;
    v.info += groups_[g].multiplicity * m[g].cov;
    v.loglik -= groups_[g].multiplicity * m[g].log_kappa;
  }
  v.score = observed_ - v.expected;
  return v;
}

double loglik(const ModelSpec& model, const NetworkSample& sample,
              std::span<const Constraint> constraints, const Eigen::VectorXd& theta,
              const FitOptions& options) {
  return ExactLikelihood(model, sample, constraints, options).value(theta);
}

FitResult exact_mle(const ModelSpec& model, const NetworkSample& sample,
                    std::span<const Constraint> constraints, const FitOptions& options) {
  validate_model(model, sample);
  const auto cons = resolve_constraints(sample, constraints);
  FitResult fit;
  const ModelSpec fm = estimable_model(model, cons, &fit.dropped);
  const int p = fm.dim();
  fit.labels = fm.labels();
  fit.loglik_kind = LoglikKind::Exact;

  ExactLikelihood lik(fm, sample, cons, options);
  Eigen::VectorXd theta = options.initial && options.initial->size() == p
                              ? *options.initial
                              : initial_theta(model, fm, sample, cons, options.divergence_threshold);

  auto partial = [&](const Eigen::VectorXd& at) {
    FitResult r = fit;
    r.theta = at;
    r.sigma = Eigen::MatrixXd::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
    r.loglik = lik.value(at);
    r.converged = false;
    finish(r);
    return r;
  };

  ExactLikelihood::Value v;
  bool converged = false;
  int it = 0;
  DivergenceMonitor monitor(fit.labels, options.divergence_threshold);
  for (; it <= options.max_iter; ++it) {
    v = lik.evaluate(theta);
    if (v.score.cwiseAbs().maxCoeff() < options.tolerance) {
      converged = true;
      break;
    }
    if (it == options.max_iter) break;
    Eigen::VectorXd step;
    try {
      step = spd_solve(v.info, v.score, fit.labels, "Fisher information");
    } catch (const NonConvergenceError& e) {
      throw FitError(std::string(e.what()) + " (MLE may not exist)", e.terms(), partial(theta));
    }
    double t = 1.0;
    Eigen::VectorXd next;
    bool improved = false;
    for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
      next = theta + t * step;
      if (lik.value(next) >= v.loglik - 1e-12 * std::max(1.0, std::abs(v.loglik))) {
        improved = true;
        break;
      }
    }
    if (!improved) {
      // No ascent direction left at working precision.
      if (v.score.cwiseAbs().maxCoeff() < 1e3 * options.tolerance) {
        converged = true;
        break;
      }
      throw FitError("step halving exhausted without likelihood increase", {}, partial(theta));
    }
    theta = next;
    auto far = monitor.update(theta);
    if (!far.empty()) {
      throw FitError("MLE does not exist: observed statistics on the boundary of their support; "
                     "estimates diverge along " + join(far),
                     far, partial(theta));
    }
  }
  if (!converged) {
    throw FitError("exact MLE did not converge in " + std::to_string(options.max_iter) +
                       " iterations",
                   {}, partial(theta));
  }
  if (auto far = monitor.beyond(theta); !far.empty()) {
    throw FitError("MLE does not exist: observed statistics on the boundary of their support; "
                   "estimates reach |theta| > " + std::to_string(options.divergence_threshold) +
                       " along " + join(far),
                   far, partial(theta));
  }
  try {
    fit.sigma = spd_inverse(v.info, fit.labels, "Fisher information");
  } catch (const NonConvergenceError& e) {
    throw FitError(e.what(), e.terms(), partial(theta));
  }
  fit.theta = theta;
  fit.loglik = v.loglik;
  fit.converged = true;
  fit.iterations = it;
  finish(fit);
  return fit;
}

// MCMC MLE -------------------------------------------------------------------

namespace {

struct NetworkDraws {
  Eigen::MatrixXd stats;  // draws x p
  Eigen::VectorXd offsets;
};

struct McMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;       // summed statistic covariance (Fisher information)
  Eigen::MatrixXd mean_var;  // batch-means covariance of the summed mean
};

McMoments summarize(const std::vector<NetworkDraws>& draws, int p) {
  McMoments m{Eigen::VectorXd::Zero(p), Eigen::MatrixXd::Zero(p, p), Eigen::MatrixXd::Zero(p, p)};
  for (const auto& d : draws) {
    const Eigen::Index k = d.stats.rows();
    Eigen::VectorXd mean = d.stats.colwise().mean();
    Eigen::MatrixXd c = d.stats.rowwise() - mean.transpose();
    m.mean += mean;
    m.cov += c.transpose() * c / std::max<Eigen::Index>(k - 1, 1);
    const Eigen::Index b = std::max<Eigen::Index>(2, static_cast<Eigen::Index>(std::sqrt(double(k))));
    const Eigen::Index size = k / b;
    if (size < 1) continue;
    Eigen::MatrixXd batch(b, p);
    for (Eigen::Index j = 0; j < b; ++j) batch.row(j) = d.stats.middleRows(j * size, size).colwise().mean();
    Eigen::MatrixXd bc = batch.rowwise() - batch.colwise().mean();
    m.mean_var += bc.transpose() * bc / double(b - 1) / double(b);
  }
  return m;
}

std::vector<NetworkDraws> simulate_draws(const ModelSpec& model, const NetworkSample& sample,
                                         const std::vector<Constraint>& cons,
                                         const Eigen::VectorXd& theta, const SimConfig& sim,
                                         std::uint64_t stream, int workers) {
  std::vector<NetworkDraws> out(sample.size());
  parallel_for(sample.size(), workers, [&](std::size_t s) {
    const Network& net = sample[s];
    BoundModel bound(model, net);
    Rng rng = make_rng(sim.seed, {stream, s});
    const int n = net.size();
    NetworkDraws d{Eigen::MatrixXd(sim.draws, model.dim()), Eigen::VectorXd(sim.draws)};
    Eigen::Index row = 0;
    run_chain(bound, net.adjacency(), theta, cons[s], sim.burnin_for(n), sim.interval_for(n), sim.draws,
              rng, [&](const Adjacency& adj) {
                d.stats.row(row) = bound.stats(adj).transpose();
                d.offsets[row] = bound.offset(adj);
                ++row;
              });
    out[s] = std::move(d);
  });
  return out;
}

// Importance-sampling estimate of l(theta + delta) - l(theta) from draws at theta.
double log_ratio_estimate(const std::vector<NetworkDraws>& draws, const Eigen::VectorXd& observed,
                          const Eigen::VectorXd& delta) {
  double l = delta.dot(observed);
  for (const auto& d : draws) {
    Eigen::VectorXd w = d.stats * delta;
    double mx = w.maxCoeff();
    l -= mx + std::log((w.array() - mx).exp().mean());
  }
  return l;
}

}  // namespace

FitResult mcmc_mle(const ModelSpec& model, const NetworkSample& sample,
                   std::span<const Constraint> constraints, const McmcOptions& options) {
  validate_model(model, sample);
  options.sim.check();
  if (options.sim.draws < 4) throw InputError("mcmc_mle needs at least 4 draws per network");
  const auto cons = resolve_constraints(sample, constraints);
  for (std::size_t s = 0; s < sample.size(); ++s) {
    cons[s].check(sample[s].size());
    if (!cons[s].admits(sample[s].adjacency())) {
      throw InputError("network '" + sample[s].id() + "' violates " + to_string(cons[s]));
    }
  }
  FitResult fit;
  const ModelSpec fm = estimable_model(model, cons, &fit.dropped);
  const int p = fm.dim();
  fit.labels = fm.labels();
  fit.loglik_kind = LoglikKind::McApprox;

  Eigen::VectorXd observed = Eigen::VectorXd::Zero(p);
  double observed_offset = 0.0;
  for (const Network& net : sample) {
    BoundModel bound(fm, net);
    observed += bound.stats(net.adjacency());
    observed_offset += bound.offset(net.adjacency());
  }

  Eigen::VectorXd theta = initial_theta(model, fm, sample, cons, options.divergence_threshold);
  auto partial = [&] {
    FitResult r = fit;
    r.theta = theta;
    r.sigma = Eigen::MatrixXd::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
    r.loglik = std::numeric_limits<double>::quiet_NaN();
    r.aic = r.loglik;
    return r;
  };

  McMoments m;
  std::vector<NetworkDraws> draws;
  bool converged = false;
  int it = 0;
  DivergenceMonitor monitor(fit.labels, options.divergence_threshold);
  for (; it < options.max_iter; ++it) {
    draws = simulate_draws(fm, sample, cons, theta, options.sim, static_cast<std::uint64_t>(it), options.workers);
    m = summarize(draws, p);
    std::vector<std::string> flat;
    for (int k = 0; k < p; ++k) {
      if (!(m.cov(k, k) > 0.0)) flat.push_back(fit.labels[k]);
    }
    if (!flat.empty()) {
      FitResult r = partial();
      throw FitError("degenerate simulation: zero variance of simulated " + join(flat) +
                         " at the current estimate",
                     flat, r);
    }
    Eigen::VectorXd diff = observed - m.mean;
    Eigen::VectorXd mcse = m.mean_var.diagonal().cwiseMax(0.0).cwiseSqrt();
    bool inside = true;
    for (int k = 0; k < p; ++k) inside = inside && std::abs(diff[k]) <= options.tol_in_mcse * mcse[k];
    if (inside && it > 0) {
      converged = true;
      break;
    }
    Eigen::VectorXd step;
    try {
      step = spd_solve(m.cov, diff, fit.labels, "simulated Fisher information");
    } catch (const NonConvergenceError& e) {
      throw FitError(e.what(), e.terms(), partial());
    }
    double t = 1.0;
    for (int h = 0; h < options.step_halving; ++h, t *= 0.5) {
      if (log_ratio_estimate(draws, observed, t * step) >= 0.0) break;
    }
    theta += t * step;
    auto far = monitor.update(theta);
    if (!far.empty()) {
      throw FitError("MCMC MLE diverges along " + join(far) + "; the MLE may not exist", far, partial());
    }
  }
  if (!converged) {
    throw FitError("MCMC MLE did not converge in " + std::to_string(options.max_iter) + " iterations",
                   {}, partial());
  }
  if (auto far = monitor.beyond(theta); !far.empty()) {
    throw FitError("MCMC MLE diverges along " + join(far) + "; the MLE may not exist", far, partial());
  }

  Eigen::MatrixXd info_inv;
  try {
    info_inv = spd_inverse(m.cov, fit.labels, "simulated Fisher information");
  } catch (const NonConvergenceError& e) {
    throw FitError(e.what(), e.terms(), partial());
  }
  fit.theta = theta;
  fit.sigma = info_inv;
  fit.mcse = (info_inv * m.mean_var * info_inv).diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.converged = true;
  fit.iterations = it;

  // Path sampling: log kappa(theta) = log |Y| + int_0^1 E_t[theta . g + offset] dt
  // along theta_t = t theta with offset coefficients scaled by t.
  double log_kappa = 0.0;
  for (std::size_t s = 0; s < sample.size(); ++s) log_kappa += std::log(space_size(sample[s].size(), cons[s]));
  const int bridges = std::max(1, options.bridges);
  for (int b = 0; b < bridges; ++b) {
    const double t = (b + 0.5) / bridges;
    ModelSpec scaled = fm;
    for (auto& o : scaled.offsets) o.coef *= t;
    auto bd = simulate_draws(scaled, sample, cons, t * theta, options.sim,
                             0x10000ULL + static_cast<std::uint64_t>(b), options.workers);
    double integrand = 0.0;
    for (std::size_t s = 0; s < sample.size(); ++s) {
      const Eigen::VectorXd energy = bd[s].stats * theta;
      // Offsets simulated at scale t report t * offset; rescale to full.
      integrand += energy.mean() + (t > 0 ? bd[s].offsets.mean() / t : 0.0);
    }
    log_kappa += integrand / bridges;
  }
  fit.loglik = theta.dot(observed) + observed_offset - log_kappa;
  finish(fit);
  return fit;
}

Eigen::VectorXd dyad_probabilities(const ModelSpec& model, const Eigen::VectorXd& theta,
                                   const Network& net) {
  validate_model(model, net);
  if (theta.size() != model.dim()) throw InputError("theta length does not match the model");
  BoundModel bound(model, net);
  const int n = net.size();
  Eigen::VectorXd out(dyad_count(n));
  std::vector<double> change(model.dim());
  int k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++k) {
      bound.change(net.adjacency(), i, j, change);
      double eta = bound.offset_change(net.adjacency(), i, j);
      for (int c = 0; c < model.dim(); ++c) eta += theta[c] * change[c];
      out[k] = logistic(eta);
    }
  }
  return out;
}

}  // namespace ergmkit
