#include "ergmkit/sampling.hpp"

#include <cmath>
#include <cstring>
#include <map>

#include "ergmkit/error.hpp"
#include "ergmkit/parallel.hpp"

namespace ergmkit {

void Constraint::check(int n) const {
  if (conditional() && (edges < 0 || edges > dyad_count(n))) {
    throw InputError("edge-count constraint m = " + std::to_string(edges) + " outside [0, " +
                     std::to_string(dyad_count(n)) + "] for n = " + std::to_string(n));
  }
}

std::string to_string(const Constraint& c) {
  return c.conditional() ? "edges=" + std::to_string(c.edges) : "free";
}

double space_size(int n, const Constraint& constraint) {
  const int d = dyad_count(n);
  if (!constraint.conditional()) return std::ldexp(1.0, d);
  const int m = constraint.edges;
  if (m < 0 || m > d) return 0.0;
  return std::round(std::exp(std::lgamma(d + 1.0) - std::lgamma(m + 1.0) - std::lgamma(d - m + 1.0)));
}

bool enumerable(int n, const Constraint& constraint, const EnumerationLimits& limits) {
  double size = space_size(n, constraint);
  double bound = constraint.conditional() ? static_cast<double>(limits.max_constrained_states)
                                          : static_cast<double>(limits.max_free_states);
  return size <= bound;
}

void check_enumerable(int n, const Constraint& constraint, const EnumerationLimits& limits,
                      const std::string& id) {
  constraint.check(n);
  if (!enumerable(n, constraint, limits)) {
    std::string where = id.empty() ? "" : "network '" + id + "': ";
    throw EnumerationBoundError(
        where + "graph space of n = " + std::to_string(n) + " (" + to_string(constraint) +
        ") has " + std::to_string(space_size(n, constraint)) + " states, over the enumeration bound of " +
        std::to_string(constraint.conditional() ? limits.max_constrained_states
                                                : limits.max_free_states) +
        "; raise the bound explicitly or use MCMC");
  }
}

// GraphSpace -----------------------------------------------------------------

namespace {

int ctz128(DyadMask x) {
  auto lo = static_cast<std::uint64_t>(x);
  if (lo) return std::countr_zero(lo);
  return 64 + std::countr_zero(static_cast<std::uint64_t>(x >> 64));
}

// Next mask with the same popcount (Gosper's hack).
DyadMask next_combination(DyadMask mask) {
  DyadMask c = mask & (~mask + 1);
  DyadMask r = mask + c;
  return r | (((r ^ mask) >> 2) >> ctz128(mask));
}

}  // namespace

GraphSpace::GraphSpace(const Network& tmpl, Constraint constraint, EnumerationLimits limits)
    : template_(tmpl), constraint_(constraint) {
  check_enumerable(tmpl.size(), constraint, limits, tmpl.id());
  size_ = static_cast<std::uint64_t>(space_size(tmpl.size(), constraint));
}

GraphSpace::iterator GraphSpace::begin() const {
  iterator it;
  it.n_ = template_.size();
  it.conditional_ = constraint_.conditional();
  it.remaining_ = size_;
  it.mask_ = it.conditional_ && constraint_.edges > 0
                 ? (DyadMask{1} << constraint_.edges) - 1
                 : DyadMask{0};
  return it;
}

GraphSpace::iterator& GraphSpace::iterator::operator++() {
  if (--remaining_ == 0) return *this;
  mask_ = conditional_ ? next_combination(mask_) : mask_ + 1;
  return *this;
}

// StatSpace ------------------------------------------------------------------

StatSpace StatSpace::build(const BoundModel& bound, const Constraint& constraint,
                           const EnumerationLimits& limits) {
  const int n = bound.size();
  check_enumerable(n, constraint, limits);
  const int p = bound.dim();

  std::unordered_map<std::string, std::size_t> index;
  std::vector<double> rows;
  std::vector<double> offsets;
  std::vector<double> counts;
  std::vector<double> buffer(p + 1);
  std::string key(sizeof(double) * (p + 1), '\0');

  auto visit = [&](DyadMask mask) {
    Adjacency adj = Adjacency::from_mask(n, mask);
    bound.stats(adj, std::span<double>(buffer.data(), p));
    buffer[p] = bound.has_offsets() ? bound.offset(adj) : 0.0;
    std::memcpy(key.data(), buffer.data(), key.size());
    auto [it, inserted] = index.try_emplace(key, counts.size());
    if (inserted) {
      rows.insert(rows.end(), buffer.begin(), buffer.begin() + p);
      offsets.push_back(buffer[p]);
      counts.push_back(1.0);
    } else {
      counts[it->second] += 1.0;
    }
  };

  const int d = dyad_count(n);
  if (!constraint.conditional()) {
    const std::uint64_t total = std::uint64_t{1} << d;
    for (std::uint64_t m = 0; m < total; ++m) visit(static_cast<DyadMask>(m));
  } else {
    auto total = static_cast<std::uint64_t>(space_size(n, constraint));
    DyadMask mask = constraint.edges > 0 ? (DyadMask{1} << constraint.edges) - 1 : DyadMask{0};
    for (std::uint64_t k = 0; k < total; ++k) {
      visit(mask);
      if (k + 1 < total) mask = next_combination(mask);
    }
  }

  StatSpace space;
  const auto k = static_cast<Eigen::Index>(counts.size());
  space.values_ = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      rows.data(), k, p);
  space.offsets_ = Eigen::Map<Eigen::VectorXd>(offsets.data(), k);
  space.log_counts_ = Eigen::Map<Eigen::VectorXd>(counts.data(), k).array().log();
  return space;
}

namespace {

Eigen::VectorXd log_weights(const StatSpace& s, const Eigen::VectorXd& theta) {
  if (theta.size() != s.dim()) {
    throw InputError("theta has length " + std::to_string(theta.size()) + ", model has " +
                     std::to_string(s.dim()) + " terms");
  }
  Eigen::VectorXd w = s.log_counts() + s.offsets();
  if (s.dim() > 0) w.noalias() += s.values() * theta;
  if (!w.allFinite()) throw NonConvergenceError("non-finite graph weights at this theta");
  return w;
}

}  // namespace

double StatSpace::log_kappa(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd w = log_weights(*this, theta);
  double mx = w.maxCoeff();
  return mx + std::log((w.array() - mx).exp().sum());
}

ExactMoments StatSpace::moments(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd w = log_weights(*this, theta);
  double mx = w.maxCoeff();
  Eigen::ArrayXd prob = (w.array() - mx).exp();
  double z = prob.sum();
  prob /= z;

  ExactMoments out;
  out.log_kappa = mx + std::log(z);
  out.mean = values_.transpose() * prob.matrix();
  Eigen::MatrixXd centred = values_.rowwise() - out.mean.transpose();
  out.cov = centred.transpose() * (centred.array().colwise() * prob).matrix();
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

std::shared_ptr<const StatSpace> StatSpaceCache::get(const BoundModel& bound,
                                                     const Constraint& constraint) {
  std::string key = bound.key();
  key.push_back(static_cast<char>(constraint.kind));
  key.append(reinterpret_cast<const char*>(&constraint.edges), sizeof constraint.edges);

  std::promise<std::shared_ptr<const StatSpace>> promise;
  std::shared_future<std::shared_ptr<const StatSpace>> future;
  bool builder = false;
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      future = promise.get_future().share();
      entries_.emplace(key, future);
      builder = true;
    } else {
      future = it->second;
    }
  }
  if (builder) {
    try {
      promise.set_value(std::make_shared<const StatSpace>(StatSpace::build(bound, constraint, limits_)));
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::lock_guard lock(mutex_);
      entries_.erase(key);
    }
  }
  return future.get();
}

std::size_t StatSpaceCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

ExactMoments exact_moments(const ModelSpec& model, const Network& tmpl,
                           const Eigen::VectorXd& theta, const Constraint& constraint,
                           const EnumerationLimits& limits) {
  validate_model(model, tmpl);
  BoundModel bound(model, tmpl);
  return StatSpace::build(bound, constraint, limits).moments(theta);
}

// MH -------------------------------------------------------------------------

void SimConfig::check() const {
  if (burnin && *burnin < 0) throw InputError("burnin must be nonnegative");
  if (interval && *interval < 1) throw InputError("interval must be positive");
  if (draws < 1) throw InputError("draws must be positive");
}

MhChain::MhChain(const BoundModel& bound, const Adjacency& initial, const Eigen::VectorXd& theta,
                 const Constraint& constraint)
    : bound_(&bound), theta_(theta), constraint_(constraint), state_(initial),
      change_(bound.dim()) {
  const int n = initial.size();
  if (theta.size() != bound.dim()) {
    throw InputError("theta has length " + std::to_string(theta.size()) + ", model has " +
                     std::to_string(bound.dim()) + " terms");
  }
  if (!theta.allFinite()) throw InputError("theta must be finite");
  constraint.check(n);
  if (!constraint.admits(initial)) {
    throw InputError("initial network has " + std::to_string(initial.edge_count()) +
                     " edges, violating " + to_string(constraint));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) dyads_.emplace_back(i, j);
  }
  if (constraint.conditional()) {
    const int d = static_cast<int>(dyads_.size());
    position_.resize(d);
    for (int k = 0; k < d; ++k) {
      auto& list = state_.has(dyads_[k].i, dyads_[k].j) ? present_ : absent_;
      position_[k] = static_cast<int>(list.size());
      list.push_back(k);
    }
  }
}

double MhChain::log_odds(const Adjacency& adj, NodeIndex i, NodeIndex j) const {
  bound_->change(adj, i, j, change_);
  double s = bound_->has_offsets() ? bound_->offset_change(adj, i, j) : 0.0;
  for (int k = 0; k < bound_->dim(); ++k) s += theta_[k] * change_[k];
  return s;
}

double MhChain::toggle_log_ratio(const Adjacency& adj, NodeIndex i, NodeIndex j) const {
  double lo = log_odds(adj, i, j);
  return adj.has(i, j) ? -lo : lo;
}

double MhChain::swap_log_ratio(const Adjacency& adj, Dyad off, Dyad on) const {
  Adjacency tmp = adj;
  double out = -log_odds(tmp, off.i, off.j);
  tmp.flip(off.i, off.j);
  return out + log_odds(tmp, on.i, on.j);
}

namespace {

bool accept(double log_ratio, Rng& rng) {
  return log_ratio >= 0.0 || uniform01(rng) < std::exp(log_ratio);
}

}  // namespace

bool MhChain::step(Rng& rng) {
  ++stats_.proposals;
  if (!constraint_.conditional()) {
    const Dyad d = dyads_[uniform_below(rng, dyads_.size())];
    if (!accept(toggle_log_ratio(state_, d.i, d.j), rng)) return false;
    state_.flip(d.i, d.j);
  } else {
    // m = 0 or m = D: the space is a single graph and the chain stays put.
    if (present_.empty() || absent_.empty()) return false;
    const std::size_t pe = uniform_below(rng, present_.size());
    const std::size_t pa = uniform_below(rng, absent_.size());
    const int e = present_[pe];
    const int a = absent_[pa];
    if (!accept(swap_log_ratio(state_, dyads_[e], dyads_[a]), rng)) return false;
    state_.flip(dyads_[e].i, dyads_[e].j);
    state_.flip(dyads_[a].i, dyads_[a].j);
    present_[pe] = a;
    absent_[pa] = e;
    position_[a] = static_cast<int>(pe);
    position_[e] = static_cast<int>(pa);
  }
  ++stats_.accepted;
  return true;
}

Eigen::MatrixXd transition_kernel(const ModelSpec& model, const Network& tmpl,
                                  const Eigen::VectorXd& theta, const Constraint& constraint) {
  validate_model(model, tmpl);
  BoundModel bound(model, tmpl);
  GraphSpace space(tmpl, constraint);
  std::vector<Adjacency> states(space.begin(), space.end());
  std::map<std::pair<std::uint64_t, std::uint64_t>, int> index;
  auto key = [](const Adjacency& a) {
    DyadMask m = a.to_mask();
    return std::pair{static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(m >> 64)};
  };
  for (std::size_t s = 0; s < states.size(); ++s) index[key(states[s])] = static_cast<int>(s);

  const auto size = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(size, size);
  const int n = tmpl.size();
  for (Eigen::Index a = 0; a < size; ++a) {
    const Adjacency& from = states[a];
    MhChain chain(bound, from, theta, constraint);
    std::vector<Dyad> present, absent;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) (from.has(i, j) ? present : absent).emplace_back(i, j);
    }
    auto move = [&](Adjacency to, double proposal, double log_ratio) {
      double acc = std::min(1.0, std::exp(log_ratio));
      kernel(a, index.at(key(to))) += proposal * acc;
      kernel(a, a) += proposal * (1.0 - acc);
    };
    if (!constraint.conditional()) {
      const double q = 1.0 / dyad_count(n);
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          Adjacency to = from;
          to.flip(i, j);
          move(to, q, chain.toggle_log_ratio(from, i, j));
        }
      }
    } else if (present.empty() || absent.empty()) {
      kernel(a, a) = 1.0;
    } else {
      const double q = 1.0 / (static_cast<double>(present.size()) * absent.size());
      for (const Dyad& off : present) {
        for (const Dyad& on : absent) {
          Adjacency to = from;
          to.flip(off.i, off.j);
          to.flip(on.i, on.j);
          move(to, q, chain.swap_log_ratio(from, off, on));
        }
      }
    }
  }
  return kernel;
}

ChainStats run_chain(const BoundModel& bound, const Adjacency& initial,
                     const Eigen::VectorXd& theta, const Constraint& constraint, long burnin,
                     long interval, long draws, Rng& rng,
                     const std::function<void(const Adjacency&)>& visit) {
  MhChain chain(bound, initial, theta, constraint);
  chain.run(burnin, rng);
  for (long d = 0; d < draws; ++d) {
    if (d > 0) chain.run(interval, rng);
    visit(chain.state());
  }
  return chain.stats();
}

std::vector<Network> mh_sample(const ModelSpec& model, const Network& tmpl,
                               const Eigen::VectorXd& theta, const Constraint& constraint,
                               const SimConfig& config, ChainStats* report) {
  config.check();
  validate_model(model, tmpl);
  BoundModel bound(model, tmpl);
  Rng rng = make_rng(config.seed);
  std::vector<Network> out;
  out.reserve(config.draws);
  const int n = tmpl.size();
  ChainStats stats = run_chain(bound, tmpl.adjacency(), theta, constraint, config.burnin_for(n),
                               config.interval_for(n), config.draws, rng,
                               [&](const Adjacency& adj) { out.push_back(tmpl.with_adjacency(adj)); });
  if (report) *report = stats;
  return out;
}

NetworkSample simulate_sample(const ModelSpec& model, std::span<const SimTemplate> templates,
                              const Eigen::VectorXd& theta, const SimConfig& config,
                              std::vector<std::string> taxonomy, int workers) {
  config.check();
  for (const auto& t : templates) validate_model(model, t.network);
  std::vector<std::vector<Network>> draws(templates.size());
  parallel_for(templates.size(), workers, [&](std::size_t t) {
    const Network& tmpl = templates[t].network;
    BoundModel bound(model, tmpl);
    Rng rng = make_rng(config.seed, {t});
    const int n = tmpl.size();
    run_chain(bound, tmpl.adjacency(), theta, templates[t].constraint, config.burnin_for(n),
              config.interval_for(n), config.draws, rng, [&](const Adjacency& adj) {
                std::string id = tmpl.id();
                if (config.draws > 1) id += "." + std::to_string(draws[t].size());
                draws[t].push_back(tmpl.with_adjacency(adj).with_id(std::move(id)));
              });
  });
  std::vector<Network> all;
  for (auto& d : draws) {
    for (auto& net : d) all.push_back(std::move(net));
  }
  return NetworkSample(std::move(taxonomy), std::move(all));
}

}  // namespace ergmkit
