#pragma once

// Simulation-based lack-of-fit checks: standardized residuals of raw network
// statistics, residual-on-covariate regressions and goodness-of-fit summaries.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ergmkit/estimation.hpp"
#include "ergmkit/inference.hpp"
#include "ergmkit/modelstats.hpp"
#include "ergmkit/sampling.hpp"

namespace ergmkit {

struct ResidualRow {
  std::string network;
  std::string statistic;
  double observed = 0.0;
  double sim_mean = 0.0;
  double sim_sd = 0.0;
  double residual = 0.0;
};

struct ResidualTable {
  std::vector<ResidualRow> rows;
  // Rows whose draws were all identical (sim_sd = 0); residual left at NaN.
  std::vector<ResidualRow> excluded;
  long draws = 0;
  std::uint64_t seed = 0;
};

// Draw settings shared by the diagnostics; sim.draws and sim.seed are
// overridden by the explicit arguments.
struct DiagnosticOptions {
  SimConfig sim;
  int workers = 1;
};

// For each network, M draws at the fitted parameters under that network's
// constraint, started from the observed graph on substream (seed, s).
ResidualTable simulated_residuals(const FitResult& fit, const ModelSpec& model, const NetworkSample& sample,
                                  std::span<const Constraint> constraints, std::span<const StatTerm> statistics,
                                  long draws, std::uint64_t seed, const DiagnosticOptions& options = {});

// OLS of the residuals of one statistic on a per-network covariate, with
// intercept; two-sided t test on the slope with S' - 2 degrees of freedom.
// Networks absent from `covariate` are skipped.
TestResult residual_regression(const ResidualTable& table, const std::string& statistic,
                               const std::map<std::string, double>& covariate, std::string label);

struct GofRow {
  // Network id, or "pooled" for sums over the sample.
  std::string scope;
  std::string statistic;
  double observed = 0.0;
  double q025 = 0.0;
  double q50 = 0.0;
  double q975 = 0.0;
  // Fraction of draws >= observed.
  double tail = 0.0;
};

struct GofTable {
  std::vector<GofRow> rows;
  long draws = 0;
  std::uint64_t seed = 0;
};

GofTable gof_summary(const FitResult& fit, const ModelSpec& model, const NetworkSample& sample,
                     std::span<const Constraint> constraints, std::span<const StatTerm> statistics, long draws,
                     std::uint64_t seed, const DiagnosticOptions& options = {});

// Linear-interpolation sample quantile (type 7); sorts a copy. NaN when empty.
double quantile(std::vector<double> values, double q);

}  // namespace ergmkit
