#pragma once

// Builders and brute-force reference computations shared by the unit tests.

#include <cmath>
#include <string>
#include <vector>

#include "ergmkit/modelstats.hpp"
#include "ergmkit/netcore.hpp"
#include "ergmkit/rng.hpp"

namespace testing {

using namespace ergmkit;

inline Network make_net(int n, std::vector<Dyad> edges, std::vector<std::string> groups = {},
                        std::vector<std::string> genders = {}, std::string id = "g") {
  std::vector<NodeAttributes> nodes(n);
  for (int v = 0; v < n; ++v) {
    nodes[v].group = groups.empty() ? "A" : groups[v];
    nodes[v].gender = genders.empty() ? (v % 2 ? "M" : "F") : genders[v];
  }
  NetworkAttributes attrs;
  attrs.id = std::move(id);
  attrs.n_s = n;
  return Network(std::move(nodes), edges, std::move(attrs));
}

// Random attributed network: groups drawn from `taxonomy`, genders F/M,
// dyads present with probability p, random flags and a real covariate.
inline Network random_network(Rng& rng, int n, double p, const std::vector<std::string>& taxonomy,
                              std::string id) {
  std::vector<NodeAttributes> nodes(n);
  for (auto& node : nodes) {
    node.group = taxonomy[uniform_below(rng, taxonomy.size())];
    node.gender = uniform01(rng) < 0.5 ? "F" : "M";
  }
  std::vector<Dyad> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (uniform01(rng) < p) edges.emplace_back(i, j);
    }
  }
  NetworkAttributes attrs;
  attrs.id = std::move(id);
  attrs.n_s = n;
  attrs.weekend = uniform01(rng) < 0.5;
  attrs.brussels = uniform01(rng) < 0.3;
  attrs.log_pop_density = 4.0 + 4.0 * uniform01(rng);
  attrs.child_absent = uniform01(rng) < 0.5;
  return Network(std::move(nodes), edges, std::move(attrs));
}

using Matrix01 = std::vector<std::vector<int>>;

inline Matrix01 dense(const Network& net) {
  Matrix01 a(net.size(), std::vector<int>(net.size(), 0));
  for (int i = 0; i < net.size(); ++i) {
    for (int j = 0; j < net.size(); ++j) a[i][j] = i != j && net.has_edge(i, j);
  }
  return a;
}

// Reference statistic counts straight from the definitions.
inline double brute_edges(const Matrix01& a) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) s += a[i][j];
  }
  return s;
}

inline double brute_two_stars(const Matrix01& a) {
  // Unordered pairs of edges sharing a centre.
  double s = 0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = i + 1; j < a.size(); ++j) s += (i != c && j != c) ? a[c][i] * a[c][j] : 0;
    }
  }
  return s;
}

inline double brute_triangles(const Matrix01& a) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      for (std::size_t k = j + 1; k < a.size(); ++k) s += a[i][j] * a[j][k] * a[i][k];
    }
  }
  return s;
}

inline double brute_mix(const Network& net, const Matrix01& a, const StatTerm& t) {
  double s = 0;
  for (int i = 0; i < net.size(); ++i) {
    for (int j = i + 1; j < net.size(); ++j) {
      if (!a[i][j]) continue;
      const std::string& gi = *node_attribute(net.nodes()[i], t.attr);
      const std::string& gj = *node_attribute(net.nodes()[j], t.attr);
      const bool ab = t.cell_a.count(gi) && t.cell_b.count(gj);
      const bool ba = t.cell_a.count(gj) && t.cell_b.count(gi);
      s += (ab || ba) ? 1 : 0;
    }
  }
  return s;
}

inline double brute_match(const Network& net, const Matrix01& a, const std::string& attr) {
  double s = 0;
  for (int i = 0; i < net.size(); ++i) {
    for (int j = i + 1; j < net.size(); ++j) {
      s += a[i][j] && *node_attribute(net.nodes()[i], attr) == *node_attribute(net.nodes()[j], attr);
    }
  }
  return s;
}

inline double brute_stat(const Network& net, const StatTerm& t) {
  const Matrix01 a = dense(net);
  switch (t.kind) {
    case StatKind::Edges: return brute_edges(a);
    case StatKind::TwoStar: return brute_two_stars(a);
    case StatKind::Triangle: return brute_triangles(a);
    case StatKind::Mix: return brute_mix(net, a, t);
    case StatKind::Match: return brute_match(net, a, t.attr);
  }
  return NAN;
}

inline double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace testing
