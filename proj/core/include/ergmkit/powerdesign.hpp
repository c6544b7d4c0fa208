#pragma once

// Study design: Monte-Carlo power curves for a homophily effect and
// per-network Fisher information under different size-scaling regimes.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ergmkit/estimation.hpp"
#include "ergmkit/modelstats.hpp"
#include "ergmkit/sampling.hpp"

namespace ergmkit {

enum class FitMethod { Exact, Mple, Mcmc };

std::string to_string(FitMethod method);
FitMethod parse_fit_method(const std::string& s);

struct PowerScenario {
  std::vector<int> s_grid;
  int n = 8;
  // Edges per network. With `conditional` the networks are simulated on the
  // fixed-edge-count space; otherwise freely, with the edges coefficient
  // calibrated so that the expected edge count is m unless theta_edges is set.
  std::optional<int> m = 20;
  bool conditional = true;
  double theta_homophily = 1.1;
  // Free mode only; calibrated when absent.
  std::optional<double> theta_edges;
  // Nodes labelled "F"; the rest are "M". Default: n/2 rounded down.
  std::optional<int> gender_split;
  std::string test_term = "homophily";
  double alpha = 0.05;
  int replicates = 500;
  std::uint64_t seed = 1;
  // Default: exact when conditioning on m, mple otherwise.
  std::optional<FitMethod> fit_method;
  std::optional<long> burnin;
  std::optional<long> interval;

  void validate() const;
  FitMethod method() const {
    return fit_method.value_or(conditional ? FitMethod::Exact : FitMethod::Mple);
  }
  int females() const { return gender_split.value_or(n / 2); }
};

struct PowerRow {
  int s = 0;
  double p_hat = 0.0;
  double mcse = 0.0;
  int rejects = 0;
  int failures = 0;
  int fits = 0;
};

struct PowerCurve {
  std::vector<PowerRow> rows;
  PowerScenario scenario;
  // Generating parameters, labelled as in power_model.
  std::vector<std::string> labels;
  Eigen::VectorXd theta;
};

// Match(gender) x One labelled "homophily", preceded by Edges x One labelled
// "edges" when the scenario simulates freely.
ModelSpec power_model(const PowerScenario& scenario);
// n nodes, the first females() of them "F", all in group "all"; edges are the
// first m dyads in row-major order (none when m is unset).
Network power_template(const PowerScenario& scenario, std::string id = "t");
std::vector<std::string> power_taxonomy();

// Edges x One coefficient giving E[edge count] = target with the other
// parameters held fixed, by bisection on the mean. Exact for dyad-independent
// or enumerable models, otherwise Monte-Carlo with `sim`.
double calibrate_edges(const ModelSpec& model, const Network& tmpl, Eigen::VectorXd theta,
                       double target, const SimConfig& sim = {std::nullopt, std::nullopt, 2000, 7});

PowerCurve empirical_power(const PowerScenario& scenario, int workers = 1,
                           std::shared_ptr<StatSpaceCache> cache = nullptr);

struct FisherInfo {
  Eigen::MatrixXd info;
  // Entrywise Monte-Carlo standard errors when not computed exactly.
  std::optional<Eigen::MatrixXd> mcse;
  bool exact = true;
};

// Var_theta(g) for one network: analytic for dyad-independent free models,
// by enumeration when enumerable, else Monte-Carlo with `sim`.
FisherInfo fisher_info(const ModelSpec& model, const Network& tmpl, const Eigen::VectorXd& theta,
                       const Constraint& constraint, const EnumerationLimits& limits = {},
                       const SimConfig& sim = {std::nullopt, std::nullopt, 4000, 11});

enum class ScalingRegime { EdgeCount, MeanDegree, Density };

ScalingRegime parse_scaling_regime(const std::string& s);

// Offsets making the named feature asymptotically invariant to network size:
// density none, mean degree Edges x LogN at -1, edge count Edges x LogN at -2.
std::vector<OffsetTerm> scaling_regime_offsets(ScalingRegime regime);

}  // namespace ergmkit
