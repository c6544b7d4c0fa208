#include "ergmkit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ergmkit/error.hpp"
#include "ergmkit/parallel.hpp"

namespace ergmkit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Draws {
  // Per network: observed statistics and an M x q matrix of draws.
  std::vector<Eigen::VectorXd> observed;
  std::vector<Eigen::MatrixXd> draws;
  std::vector<std::string> labels;
};

Draws simulate_statistics(const FitResult& fit, const ModelSpec& model, const NetworkSample& sample,
                          std::span<const Constraint> constraints, std::span<const StatTerm> statistics,
                          long m, std::uint64_t seed, const DiagnosticOptions& options) {
  if (m < 2) throw InputError("diagnostics need at least 2 simulation draws per network (got " + std::to_string(m) + ")");
  if (statistics.empty()) throw InputError("diagnostics need at least one statistic");
  if (sample.empty()) throw InputError("diagnostics need a nonempty sample");
  validate_model(model, sample);
  const std::vector<Constraint> cons = resolve_constraints(sample, constraints);
  const Eigen::VectorXd theta = expand_theta(model, fit);

  ModelSpec raw;
  for (const auto& stat : statistics) raw.terms.push_back({stat, Modifier::one(), stat_label(stat)});
  validate_model(raw, sample);

  Draws out;
  out.labels = raw.labels();
  out.observed.resize(sample.size());
  out.draws.resize(sample.size());
  options.sim.check();
  parallel_for(sample.size(), options.workers, [&](std::size_t s) {
    const Network& net = sample[s];
    const BoundModel bound(model, net);
    const BoundModel counter(raw, net);
    out.observed[s] = counter.stats(net.adjacency());
    Eigen::MatrixXd d(m, raw.dim());
    Eigen::Index row = 0;
    Rng rng = make_rng(seed, {static_cast<std::uint64_t>(s)});
    run_chain(bound, net.adjacency(), theta, cons[s], options.sim.burnin_for(net.size()),
              options.sim.interval_for(net.size()), m, rng,
              [&](const Adjacency& adj) { d.row(row++) = counter.stats(adj).transpose(); });
    out.draws[s] = std::move(d);
  });
  return out;
}

}  // namespace

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double h = q * (values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - lo) * (values[hi] - values[lo]);
}

ResidualTable simulated_residuals(const FitResult& fit, const ModelSpec& model, const NetworkSample& sample,
                                  std::span<const Constraint> constraints, std::span<const StatTerm> statistics,
                                  long draws, std::uint64_t seed, const DiagnosticOptions& options) {
  const Draws sim = simulate_statistics(fit, model, sample, constraints, statistics, draws, seed, options);
  ResidualTable table;
  table.draws = draws;
  table.seed = seed;
  for (std::size_t s = 0; s < sample.size(); ++s) {
    const Eigen::MatrixXd& d = sim.draws[s];
    for (Eigen::Index k = 0; k < d.cols(); ++k) {
      ResidualRow row;
      row.network = sample[s].id();
      row.statistic = sim.labels[k];
      row.observed = sim.observed[s][k];
      row.sim_mean = d.col(k).mean();
      row.sim_sd = std::sqrt((d.col(k).array() - row.sim_mean).square().sum() / (d.rows() - 1));
      if (row.sim_sd > 0.0) {
        row.residual = (row.observed - row.sim_mean) / row.sim_sd;
        table.rows.push_back(row);
      } else {
        row.residual = kNaN;
        table.excluded.push_back(row);
      }
    }
  }
  return table;
}

TestResult residual_regression(const ResidualTable& table, const std::string& statistic,
                               const std::map<std::string, double>& covariate, std::string label) {
  std::vector<double> x, y;
  bool known = false;
  for (const auto& row : table.rows) {
    if (row.statistic != statistic) continue;
    known = true;
    auto it = covariate.find(row.network);
    if (it == covariate.end() || !std::isfinite(it->second) || !std::isfinite(row.residual)) continue;
    x.push_back(it->second);
    y.push_back(row.residual);
  }
  if (!known) {
    bool excluded_only = std::any_of(table.excluded.begin(), table.excluded.end(),
                                     [&](const ResidualRow& r) { return r.statistic == statistic; });
    throw InputError("residual table has no usable rows for statistic '" + statistic + "'" +
                     (excluded_only ? " (all draws constant)" : ""));
  }
  const auto n = static_cast<int>(x.size());
  if (n < 3) {
    throw InputError("residual regression needs at least 3 networks with a covariate value (got " +
                     std::to_string(n) + ")");
  }
  double mx = 0.0, my = 0.0;
  for (int k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (!(sxx > 1e-12 * std::max(1.0, mx * mx) * n)) {
    throw InputError("covariate '" + label + "' is constant across the networks in the regression");
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0.0;
  for (int k = 0; k < n; ++k) {
    const double e = y[k] - intercept - slope * x[k];
    rss += e * e;
  }
  const int df = n - 2;
  const double se = std::sqrt(rss / df / sxx);
  TestResult out;
  out.label = std::move(label);
  out.kind = TestKind::StudentT;
  out.df = df;
  out.tail = Tail::TwoSided;
  out.estimate = slope;
  out.se = se;
  if (se > 0.0) {
    out.statistic = slope / se;
    out.pvalue = t_pvalue(out.statistic, df, Tail::TwoSided);
  } else {
    // Perfect fit: infinite t unless the slope is exactly zero.
    out.statistic = slope == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), slope);
    out.pvalue = slope == 0.0 ? 1.0 : 0.0;
  }
  return out;
}

GofTable gof_summary(const FitResult& fit, const ModelSpec& model, const NetworkSample& sample,
                     std::span<const Constraint> constraints, std::span<const StatTerm> statistics, long draws,
                     std::uint64_t seed, const DiagnosticOptions& options) {
  const Draws sim = simulate_statistics(fit, model, sample, constraints, statistics, draws, seed, options);
  GofTable table;
  table.draws = draws;
  table.seed = seed;
  auto summarize = [](std::string scope, std::string statistic, double observed, const Eigen::VectorXd& col) {
    std::vector<double> v(col.data(), col.data() + col.size());
    GofRow row{std::move(scope), std::move(statistic), observed, quantile(v, 0.025), quantile(v, 0.5),
               quantile(v, 0.975), 0.0};
    row.tail = static_cast<double>(std::count_if(v.begin(), v.end(), [&](double x) { return x >= observed; })) /
               static_cast<double>(v.size());
    return row;
  };
  const auto q = static_cast<Eigen::Index>(sim.labels.size());
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(draws, q);
  Eigen::VectorXd pooled_obs = Eigen::VectorXd::Zero(q);
  for (std::size_t s = 0; s < sample.size(); ++s) {
    pooled += sim.draws[s];
    pooled_obs += sim.observed[s];
  }
  for (Eigen::Index k = 0; k < q; ++k) {
    table.rows.push_back(summarize("pooled", sim.labels[k], pooled_obs[k], pooled.col(k)));
  }
  for (std::size_t s = 0; s < sample.size(); ++s) {
    for (Eigen::Index k = 0; k < q; ++k) {
      table.rows.push_back(summarize(sample[s].id(), sim.labels[k], sim.observed[s][k], sim.draws[s].col(k)));
    }
  }
  return table;
}

}  // namespace ergmkit
