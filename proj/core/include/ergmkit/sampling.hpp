#pragma once

// Exact enumeration of small graph spaces and Metropolis-Hastings simulation,
// free or conditional on the edge count.

#include <cstdint>
#include <functional>
#include <iterator>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "ergmkit/modelstats.hpp"
#include "ergmkit/netcore.hpp"
#include "ergmkit/rng.hpp"

namespace ergmkit {

struct Constraint {
  enum class Kind { Free, FixedEdgeCount };
  Kind kind = Kind::Free;
  int edges = 0;

  static Constraint free() { return {}; }
  static Constraint fixed_edges(int m) { return {Kind::FixedEdgeCount, m}; }

  bool conditional() const noexcept { return kind == Kind::FixedEdgeCount; }
  bool admits(const Adjacency& adj) const noexcept {
    return !conditional() || adj.edge_count() == edges;
  }
  // Throws InputError when m is outside [0, n(n-1)/2].
  void check(int n) const;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

std::string to_string(const Constraint& c);

struct EnumerationLimits {
  std::uint64_t max_free_states = std::uint64_t{1} << 21;
  std::uint64_t max_constrained_states = 100'000'000;
};

// Number of admissible adjacency states, as a double (may exceed 2^64).
double space_size(int n, const Constraint& constraint);
bool enumerable(int n, const Constraint& constraint, const EnumerationLimits& limits = {});
// Throws EnumerationBoundError when the space exceeds the limits.
void check_enumerable(int n, const Constraint& constraint, const EnumerationLimits& limits,
                      const std::string& id = {});

// Input range over every admissible adjacency state of a template's node set.
class GraphSpace {
 public:
  GraphSpace(const Network& tmpl, Constraint constraint, EnumerationLimits limits = {});

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Adjacency;
    using difference_type = std::ptrdiff_t;
    using pointer = void;
    using reference = Adjacency;

    iterator() = default;
    Adjacency operator*() const { return Adjacency::from_mask(n_, mask_); }
    iterator& operator++();
    iterator operator++(int) {
      iterator old = *this;
      ++*this;
      return old;
    }
    bool operator==(const iterator& o) const noexcept { return remaining_ == o.remaining_; }

   private:
    friend class GraphSpace;
    int n_ = 0;
    bool conditional_ = false;
    DyadMask mask_ = 0;
    std::uint64_t remaining_ = 0;
  };

  iterator begin() const;
  iterator end() const { return {}; }
  std::uint64_t size() const noexcept { return size_; }
  const Network& network_template() const noexcept { return template_; }
  Network network(const Adjacency& adj) const { return template_.with_adjacency(adj); }

 private:
  Network template_;
  Constraint constraint_;
  std::uint64_t size_ = 0;
};

struct ExactMoments {
  double log_kappa = 0.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// The distinct (statistic, offset) values of a graph space with their
// multiplicities. Once built, exponential-family moments at any theta cost
// O(support size) rather than O(number of graphs).
class StatSpace {
 public:
  static StatSpace build(const BoundModel& bound, const Constraint& constraint,
                         const EnumerationLimits& limits = {});

  int dim() const noexcept { return static_cast<int>(values_.cols()); }
  std::size_t support_size() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const Eigen::VectorXd& offsets() const noexcept { return offsets_; }
  const Eigen::VectorXd& log_counts() const noexcept { return log_counts_; }

  double log_kappa(const Eigen::VectorXd& theta) const;
  ExactMoments moments(const Eigen::VectorXd& theta) const;

 private:
  Eigen::MatrixXd values_;
  Eigen::VectorXd offsets_;
  Eigen::VectorXd log_counts_;
};

// Thread-safe memo of StatSpaces keyed by bound model and constraint. Each
// key is built once even under concurrent requests.
class StatSpaceCache {
 public:
  explicit StatSpaceCache(EnumerationLimits limits = {}) : limits_(limits) {}

  std::shared_ptr<const StatSpace> get(const BoundModel& bound, const Constraint& constraint);
  const EnumerationLimits& limits() const noexcept { return limits_; }
  std::size_t size() const;

 private:
  EnumerationLimits limits_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::shared_future<std::shared_ptr<const StatSpace>>> entries_;
};

ExactMoments exact_moments(const ModelSpec& model, const Network& tmpl,
                           const Eigen::VectorXd& theta, const Constraint& constraint,
                           const EnumerationLimits& limits = {});

struct SimConfig {
  std::optional<long> burnin;    // default 20 n^2
  std::optional<long> interval;  // default n^2
  long draws = 1;
  std::uint64_t seed = 0;

  long burnin_for(int n) const { return burnin.value_or(20L * n * n); }
  long interval_for(int n) const { return interval.value_or(static_cast<long>(n) * n); }
  void check() const;
};

struct ChainStats {
  long proposals = 0;
  long accepted = 0;
  double acceptance_rate() const { return proposals ? double(accepted) / proposals : 0.0; }
};

// Metropolis-Hastings chain on one network's graph space. Free chains propose
// a uniformly chosen dyad toggle; conditional chains propose swapping a
// uniformly chosen edge with a uniformly chosen non-edge. Both proposals are
// symmetric, so acceptance is min(1, exp(theta . dg + d offset)).
// With m = 0 or m = D the space is a single graph and the chain never moves.
class MhChain {
 public:
  MhChain(const BoundModel& bound, const Adjacency& initial, const Eigen::VectorXd& theta,
          const Constraint& constraint);

  // One proposal; returns whether it was accepted.
  bool step(Rng& rng);
  void run(long steps, Rng& rng) {
    for (long s = 0; s < steps; ++s) step(rng);
  }

  const Adjacency& state() const noexcept { return state_; }
  const ChainStats& stats() const noexcept { return stats_; }

  // Log acceptance ratio of toggling dyad (i, j) from `adj`.
  double toggle_log_ratio(const Adjacency& adj, NodeIndex i, NodeIndex j) const;
  // Log acceptance ratio of removing edge `off` and adding non-edge `on`.
  double swap_log_ratio(const Adjacency& adj, Dyad off, Dyad on) const;

 private:
  double log_odds(const Adjacency& adj, NodeIndex i, NodeIndex j) const;

  const BoundModel* bound_;
  Eigen::VectorXd theta_;
  Constraint constraint_;
  Adjacency state_;
  std::vector<Dyad> dyads_;
  // Conditional chains: dyad ids partitioned into present/absent lists.
  std::vector<int> present_, absent_;
  std::vector<int> position_;
  mutable std::vector<double> change_;
  ChainStats stats_;
};

// Exact one-step transition matrix of the chain over an enumerable space,
// rows and columns in GraphSpace order. For verification on tiny graphs.
Eigen::MatrixXd transition_kernel(const ModelSpec& model, const Network& tmpl,
                                  const Eigen::VectorXd& theta, const Constraint& constraint);

// Runs burnin, then calls visit on `draws` states spaced `interval` apart.
ChainStats run_chain(const BoundModel& bound, const Adjacency& initial,
                     const Eigen::VectorXd& theta, const Constraint& constraint,
                     long burnin, long interval, long draws, Rng& rng,
                     const std::function<void(const Adjacency&)>& visit);

std::vector<Network> mh_sample(const ModelSpec& model, const Network& tmpl,
                               const Eigen::VectorXd& theta, const Constraint& constraint,
                               const SimConfig& config, ChainStats* report = nullptr);

struct SimTemplate {
  Network network;
  Constraint constraint;
};

// One independent chain per template, each on substream (seed, index).
// With draws > 1 the ids of retained networks get a ".k" suffix.
NetworkSample simulate_sample(const ModelSpec& model, std::span<const SimTemplate> templates,
                              const Eigen::VectorXd& theta, const SimConfig& config,
                              std::vector<std::string> taxonomy, int workers = 1);

}  // namespace ergmkit
