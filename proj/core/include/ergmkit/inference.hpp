#pragma once

// Wald inference on fitted models: coefficient tables, omnibus tests,
// contrasts, estimate correlations, means/effects reparametrization,
// variance inflation factors and network-size effect curves.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ergmkit/estimation.hpp"
#include "ergmkit/modelstats.hpp"

namespace ergmkit {

enum class Tail { TwoSided, Upper, Lower };

std::string to_string(Tail tail);
Tail parse_tail(const std::string& s);

enum class TestKind { WaldChi2, WaldZ, StudentT };

std::string to_string(TestKind kind);

struct TestResult {
  std::string label;
  TestKind kind = TestKind::WaldChi2;
  double statistic = 0.0;
  // Degrees of freedom for chi-square and t tests.
  std::optional<int> df;
  // Tail for z and t tests.
  std::optional<Tail> tail;
  double pvalue = 1.0;
  // Contrast and regression tests also carry the estimate and its SE.
  std::optional<double> estimate;
  std::optional<double> se;
};

// Reference tail probabilities.
double normal_pvalue(double z, Tail tail);
double chi2_upper_pvalue(double statistic, int df);
double t_pvalue(double t, int df, Tail tail);

// Three decimals, or "<0.001" when that rounds to 0.000.
std::string format_pvalue(double p);
// "***" for p <= 0.001, "**" for p <= 0.01, "*" for p <= 0.05, else "".
std::string significance_stars(double p);

struct CoefRow {
  std::string label;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
  double pvalue = 1.0;
  std::string stars;
};

CoefRow coef_row(std::string label, double estimate, double se);
std::vector<CoefRow> coef_table(const FitResult& fit);

TestResult omnibus_wald(const FitResult& fit, std::span<const int> subset, std::string label);
TestResult omnibus_wald(const FitResult& fit, const std::vector<std::string>& terms,
                        std::string label);

struct Contrast {
  Eigen::VectorXd coeffs;
  Tail tail = Tail::TwoSided;
  std::string label;
};

TestResult contrast_test(const FitResult& fit, const Contrast& contrast);
// z test of an estimate with a given standard error.
TestResult z_test(double estimate, double se, Tail tail, std::string label = {});

Eigen::MatrixXd cor_matrix(const FitResult& fit);

struct Reparametrization {
  ModelSpec model;
  FitResult fit;
  // theta_means = transform * theta_effects.
  Eigen::MatrixXd transform;
  std::string baseline;
};

// Mix x One term with the largest number of dyads across the sample; ties go
// to the lexicographically smallest label.
std::string choose_baseline(const ModelSpec& model, const NetworkSample& sample);

// Replaces a full set of Mix x One cells (means parametrization) by an
// Edges x One intercept plus deviations from the baseline cell. The intercept
// becomes the first term; remaining terms keep their order. The baseline is
// chosen by choose_baseline when not given, which needs `sample`.
Reparametrization to_effects_parametrization(const ModelSpec& model, const FitResult& fit,
                                             std::optional<std::string> baseline,
                                             const NetworkSample* sample = nullptr);

struct VifResult {
  std::vector<std::string> labels;  // non-intercept parameters
  Eigen::VectorXd vif;
  Eigen::VectorXd root_vif;
  // Set when the correlation matrix is singular; those two entries are
  // infinite and the remaining ones undefined (NaN).
  std::optional<std::pair<std::string, std::string>> collinear;
};

// Diagonal of the inverse correlation matrix of the non-intercept estimates.
// Requires an Edges x One term.
VifResult vif(const FitResult& fit, const ModelSpec& model);

struct EffectCurve {
  StatKind feature = StatKind::Edges;
  std::vector<int> grid;
  Eigen::VectorXd value;
  Eigen::VectorXd se;
  std::optional<int> reference_n;
};

// c(n) . theta with c_j(n) = phi_j(n) - phi_j(reference_n) over the feature's
// One/LogN/LogN2 terms, and its delta-method standard error.
EffectCurve size_effect_curve(const FitResult& fit, const ModelSpec& model, StatKind feature,
                              std::vector<int> grid, std::optional<int> reference_n = std::nullopt);

struct KsResult {
  double statistic = 0.0;
  double pvalue = 1.0;
};

// One-sample Kolmogorov-Smirnov test against a continuous CDF, asymptotic
// Kolmogorov distribution with Stephens' small-sample correction.
KsResult ks_test(std::vector<double> values, const std::function<double(double)>& cdf);
double chi2_cdf(double x, int df);

}  // namespace ergmkit
