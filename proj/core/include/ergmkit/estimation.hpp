#pragma once

// Parameter estimation: maximum pseudolikelihood, exact maximum likelihood by
// enumeration, and Monte-Carlo MLE.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ergmkit/error.hpp"
#include "ergmkit/modelstats.hpp"
#include "ergmkit/sampling.hpp"

namespace ergmkit {

enum class LoglikKind { Exact, Pseudo, McApprox };

std::string to_string(LoglikKind kind);
LoglikKind parse_loglik_kind(const std::string& s);

struct FitResult {
  std::vector<std::string> labels;
  Eigen::VectorXd theta;
  Eigen::MatrixXd sigma;
  LoglikKind loglik_kind = LoglikKind::Exact;
  double loglik = 0.0;
  double aic = 0.0;
  bool converged = false;
  int iterations = 0;
  // Per-parameter Monte-Carlo standard errors (mcmc_mle only).
  std::optional<Eigen::VectorXd> mcse;
  // Model terms left out because they are not identifiable, e.g. edge terms
  // when every network is conditioned on its edge count.
  std::vector<std::string> dropped;
  // Estimated parameters not reported in theta (per-network intercepts of the
  // conditional pseudolikelihood). Counted in the AIC.
  int nuisance = 0;
  // Sigma is the inverse pseudolikelihood information, not a likelihood-based
  // covariance.
  bool sigma_naive = false;
  std::string message;

  int dim() const noexcept { return static_cast<int>(theta.size()); }
  int find(const std::string& label) const;
  Eigen::VectorXd se() const { return sigma.diagonal().cwiseMax(0.0).cwiseSqrt(); }
};

// Thrown on statistical nonconvergence; carries the state reached so far
// with converged = false.
class FitError : public NonConvergenceError {
 public:
  FitError(const std::string& what, std::vector<std::string> terms, FitResult partial)
      : NonConvergenceError(what, std::move(terms)), partial_(std::move(partial)) {}
  const FitResult& partial() const noexcept { return partial_; }

 private:
  FitResult partial_;
};

struct FitOptions {
  int max_iter = 100;
  // Newton convergence: max |score| below this.
  double tolerance = 1e-8;
  int max_halvings = 30;
  // |theta_k| beyond this while the objective is still improving is read as
  // separation (MPLE) or a nonexistent MLE (exact).
  double divergence_threshold = 20.0;
  EnumerationLimits limits;
  // Optional shared memo of enumerated graph spaces.
  std::shared_ptr<StatSpaceCache> cache;
  std::optional<Eigen::VectorXd> initial;
  int workers = 1;
};

struct McmcOptions {
  SimConfig sim{std::nullopt, std::nullopt, 400, 0};
  int max_iter = 40;
  int step_halving = 30;
  double tol_in_mcse = 1.0;
  // Quadrature points for the path-sampling log-likelihood estimate.
  int bridges = 16;
  double divergence_threshold = 20.0;
  int workers = 1;
};

// Per-network constraints: empty means all free, one element is broadcast.
std::vector<Constraint> resolve_constraints(const NetworkSample& sample,
                                            std::span<const Constraint> constraints);

// Terms estimable under the constraints: edge-count terms are dropped when
// every network is conditioned on its edge count.
ModelSpec estimable_model(const ModelSpec& model, std::span<const Constraint> constraints,
                          std::vector<std::string>* dropped = nullptr);

// Full-length parameter vector for `model`, zero at terms absent from the fit.
Eigen::VectorXd expand_theta(const ModelSpec& model, const FitResult& fit);

FitResult mple(const ModelSpec& model, const NetworkSample& sample,
               std::span<const Constraint> constraints = {}, const FitOptions& options = {});

FitResult exact_mle(const ModelSpec& model, const NetworkSample& sample,
                    std::span<const Constraint> constraints = {}, const FitOptions& options = {});

FitResult mcmc_mle(const ModelSpec& model, const NetworkSample& sample,
                   std::span<const Constraint> constraints, const McmcOptions& options);

// Exact log-likelihood sum_s [theta . g_s + offset_s - log kappa_s(theta)].
double loglik(const ModelSpec& model, const NetworkSample& sample,
              std::span<const Constraint> constraints, const Eigen::VectorXd& theta,
              const FitOptions& options = {});

// Exact log-likelihood with its derivatives, with graph spaces enumerated
// once per distinct network class.
class ExactLikelihood {
 public:
  ExactLikelihood(const ModelSpec& model, const NetworkSample& sample,
                  std::span<const Constraint> constraints, const FitOptions& options = {});

  struct Value {
    double loglik = 0.0;
    Eigen::VectorXd score;  // observed minus expected statistics
    Eigen::MatrixXd info;   // summed statistic covariance
    Eigen::VectorXd expected;
  };

  int dim() const noexcept { return static_cast<int>(observed_.size()); }
  const Eigen::VectorXd& observed() const noexcept { return observed_; }
  double value(const Eigen::VectorXd& theta) const;
  Value evaluate(const Eigen::VectorXd& theta) const;

 private:
  struct Group {
    std::shared_ptr<const StatSpace> space;
    double multiplicity = 0.0;
  };
  std::vector<Group> groups_;
  Eigen::VectorXd observed_;
  double observed_offset_ = 0.0;
  int workers_ = 1;
};

// Conditional probability of each dyad (i < j, row-major) being an edge given
// the rest of the network: logistic(theta . change + offset change).
Eigen::VectorXd dyad_probabilities(const ModelSpec& model, const Eigen::VectorXd& theta,
                                   const Network& net);

}  // namespace ergmkit
