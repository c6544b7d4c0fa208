#pragma once

// Model vocabulary: within-network statistics, network-level modifiers,
// offsets, sufficient statistics and change statistics.

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ergmkit/netcore.hpp"

namespace ergmkit {

enum class StatKind { Edges, TwoStar, Triangle, Mix, Match };

struct StatTerm {
  StatKind kind = StatKind::Edges;
  // Node attribute for Mix and Match; "group" by default for Mix.
  std::string attr;
  // Mix cell label sets. The cell is the unordered pair {cell_a, cell_b}.
  std::set<std::string> cell_a;
  std::set<std::string> cell_b;

  static StatTerm edges() { return {StatKind::Edges, {}, {}, {}}; }
  static StatTerm two_star() { return {StatKind::TwoStar, {}, {}, {}}; }
  static StatTerm triangle() { return {StatKind::Triangle, {}, {}, {}}; }
  static StatTerm match(std::string attr) { return {StatKind::Match, std::move(attr), {}, {}}; }
  static StatTerm mix(std::set<std::string> a, std::set<std::string> b,
                      std::string attr = "group") {
    return {StatKind::Mix, std::move(attr), std::move(a), std::move(b)};
  }

  bool dyad_dependent() const noexcept {
    return kind == StatKind::TwoStar || kind == StatKind::Triangle;
  }

  friend bool operator==(const StatTerm&, const StatTerm&) = default;
};

// Canonical short name: edges, twostar, triangle, match.gender, mix.group.YC+PA-OF.
std::string stat_label(const StatTerm& stat);
// Inverse of stat_label for the non-Mix kinds plus "match:<attr>".
StatTerm parse_stat_name(const std::string& name);

enum class ModifierKind { One, LogN, LogN2, Flag, Real };

struct Modifier {
  ModifierKind kind = ModifierKind::One;
  std::string name;  // Flag / Real attribute

  static Modifier one() { return {ModifierKind::One, {}}; }
  static Modifier log_n() { return {ModifierKind::LogN, {}}; }
  static Modifier log_n2() { return {ModifierKind::LogN2, {}}; }
  static Modifier flag(std::string name) { return {ModifierKind::Flag, std::move(name)}; }
  static Modifier real(std::string name) { return {ModifierKind::Real, std::move(name)}; }

  friend bool operator==(const Modifier&, const Modifier&) = default;
};

struct ModelTerm {
  StatTerm stat;
  Modifier modifier;
  std::string label;

  friend bool operator==(const ModelTerm&, const ModelTerm&) = default;
};

struct OffsetTerm {
  ModelTerm term;
  double coef = 0.0;

  friend bool operator==(const OffsetTerm&, const OffsetTerm&) = default;
};

struct ModelSpec {
  std::vector<ModelTerm> terms;
  std::vector<OffsetTerm> offsets;

  int dim() const noexcept { return static_cast<int>(terms.size()); }
  std::vector<std::string> labels() const;
  // Index of the term with this label, or -1.
  int find(const std::string& label) const;
  // Index of the first term with this statistic and modifier, or -1.
  int find(const StatTerm& stat, const Modifier& modifier) const;
  bool dyad_independent() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Label to use when a term is given without one: "<stat>" or "<stat>.<mod>".
std::string default_label(const StatTerm& stat, const Modifier& modifier);

// Structural checks: p >= 1, unique labels, no duplicate (stat, modifier),
// nonempty Mix cells, no overlapping Mix cells sharing attribute and modifier.
void validate_model(const ModelSpec& model);
// Structural checks plus taxonomy membership of Mix labels and, for every
// network, presence of the node and network attributes the model references.
void validate_model(const ModelSpec& model, const NetworkSample& sample);
void validate_model(const ModelSpec& model, const Network& net);

double eval_stat(const StatTerm& stat, const Network& net);
double change_stat(const StatTerm& stat, const Network& net, Dyad dyad);
double modifier_value(const Modifier& modifier, const NetworkAttributes& attrs);

Eigen::VectorXd design_vector(const ModelSpec& model, const Network& net);
Eigen::VectorXd change_vector(const ModelSpec& model, const Network& net, Dyad dyad);
double offset_change(const ModelSpec& model, const Network& net, Dyad dyad);
// Sum of offset coefficient x statistic x modifier.
double offset_value(const ModelSpec& model, const Network& net);
Eigen::VectorXd sample_statistic(const ModelSpec& model, const NetworkSample& sample);

// A model resolved against one network's node and network attributes.
// Evaluates statistics on bare adjacency states, which lets samplers and
// enumerators avoid attribute lookups in their inner loops.
class BoundModel {
 public:
  BoundModel(const ModelSpec& model, const Network& net);

  int dim() const noexcept { return static_cast<int>(free_.size()); }
  int size() const noexcept { return n_; }
  bool has_offsets() const noexcept { return !offsets_.empty(); }

  void stats(const Adjacency& adj, std::span<double> out) const;
  Eigen::VectorXd stats(const Adjacency& adj) const;
  double offset(const Adjacency& adj) const;

  void change(const Adjacency& adj, NodeIndex i, NodeIndex j, std::span<double> out) const;
  double offset_change(const Adjacency& adj, NodeIndex i, NodeIndex j) const;

  // Change statistics depend on the rest of the graph.
  bool dyad_dependent() const noexcept { return dyad_dependent_; }

  // Byte string identifying everything the graph-space distribution depends
  // on; equal keys imply identical statistic distributions.
  const std::string& key() const noexcept { return key_; }

 private:
  struct Kernel {
    StatKind kind;
    double weight;  // modifier value, times the coefficient for offsets
    // For Mix/Match: bit j of eligible[i] marks dyads counted by the term.
    std::array<std::uint16_t, kMaxNodes> eligible{};
  };

  static double raw_stat(const Kernel& k, const Adjacency& adj);
  static double raw_change(const Kernel& k, const Adjacency& adj, NodeIndex i, NodeIndex j);
  Kernel compile(const ModelTerm& term, const Network& net, double coef) const;

  int n_ = 0;
  bool dyad_dependent_ = false;
  std::vector<Kernel> free_;
  std::vector<Kernel> offsets_;
  std::string key_;
};

}  // namespace ergmkit
