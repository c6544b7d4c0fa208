#pragma once

// Small undirected networks with node- and network-level attributes.

#include <array>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ergmkit {

inline constexpr int kMaxNodes = 16;
inline constexpr int kMaxDyads = kMaxNodes * (kMaxNodes - 1) / 2;

using NodeIndex = int;

// Unordered node pair, stored with i < j.
struct Dyad {
  NodeIndex i = 0;
  NodeIndex j = 0;

  Dyad() = default;
  Dyad(NodeIndex a, NodeIndex b) : i(a < b ? a : b), j(a < b ? b : a) {}

  friend bool operator==(const Dyad&, const Dyad&) = default;
};

inline constexpr int dyad_count(int n) { return n * (n - 1) / 2; }

// Position of dyad (i, j), i < j, in row-major upper-triangle order.
inline constexpr int dyad_index(int n, int i, int j) {
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

// Dyad set as one bit per upper-triangle position; 120 bits cover n = 16.
__extension__ typedef unsigned __int128 DyadMask;

inline int popcount(DyadMask m) {
  return std::popcount(static_cast<std::uint64_t>(m)) +
         std::popcount(static_cast<std::uint64_t>(m >> 64));
}

// Symmetric adjacency stored as one 16-bit neighbour row per node.
class Adjacency {
 public:
  Adjacency() = default;
  explicit Adjacency(int n);

  int size() const noexcept { return n_; }
  bool has(NodeIndex i, NodeIndex j) const noexcept { return (rows_[i] >> j) & 1U; }
  void set(NodeIndex i, NodeIndex j, bool on) noexcept;
  void flip(NodeIndex i, NodeIndex j) noexcept {
    rows_[i] ^= static_cast<std::uint16_t>(1U << j);
    rows_[j] ^= static_cast<std::uint16_t>(1U << i);
  }

  std::uint16_t row(NodeIndex i) const noexcept { return rows_[i]; }
  int degree(NodeIndex i) const noexcept { return std::popcount(rows_[i]); }
  int common_neighbours(NodeIndex i, NodeIndex j) const noexcept {
    return std::popcount(static_cast<std::uint16_t>(rows_[i] & rows_[j]));
  }
  int edge_count() const noexcept;

  DyadMask to_mask() const noexcept;
  static Adjacency from_mask(int n, DyadMask mask) noexcept;

  std::vector<Dyad> edges() const;

  friend bool operator==(const Adjacency&, const Adjacency&) = default;

 private:
  int n_ = 0;
  std::array<std::uint16_t, kMaxNodes> rows_{};
};

using AttrValue = std::variant<std::string, double>;

struct NodeAttributes {
  std::string group;
  std::string gender;
  std::map<std::string, AttrValue> extra;

  friend bool operator==(const NodeAttributes&, const NodeAttributes&) = default;
};

struct NetworkAttributes {
  std::string id;
  int n_s = 0;
  bool weekend = false;
  bool brussels = false;
  std::optional<double> log_pop_density;
  std::optional<bool> child_absent;
  std::map<std::string, double> extra;

  friend bool operator==(const NetworkAttributes&, const NetworkAttributes&) = default;
};

// Categorical value of a node attribute ("group", "gender" or an extra name),
// rendered as a string. Returns nullopt when the node lacks the attribute.
std::optional<std::string> node_attribute(const NodeAttributes& node, const std::string& name);

// Flag-valued network attribute: weekend, brussels, child_absent or an extra.
std::optional<bool> network_flag(const NetworkAttributes& attrs, const std::string& name);
// Real-valued network attribute: log_pop_density, n_s or an extra.
std::optional<double> network_real(const NetworkAttributes& attrs, const std::string& name);

class Network {
 public:
  // Validates indices, rejects self-loops and duplicate pairs, and requires
  // attrs.n_s == nodes.size(). Throws InputError.
  Network(std::vector<NodeAttributes> nodes, std::span<const Dyad> edges,
          NetworkAttributes attrs);
  Network(std::vector<NodeAttributes> nodes, Adjacency adjacency, NetworkAttributes attrs);

  int size() const noexcept { return adjacency_.size(); }
  const Adjacency& adjacency() const noexcept { return adjacency_; }
  const std::vector<NodeAttributes>& nodes() const noexcept { return nodes_; }
  const NetworkAttributes& attrs() const noexcept { return attrs_; }
  const std::string& id() const noexcept { return attrs_.id; }

  bool has_edge(NodeIndex i, NodeIndex j) const noexcept { return adjacency_.has(i, j); }
  int edge_count() const noexcept { return adjacency_.edge_count(); }

  // Copy with the dyad (i, j) flipped. Throws InputError when i == j.
  Network toggle_edge(NodeIndex i, NodeIndex j) const;
  // Copy with the same nodes and attributes but a different edge set.
  Network with_adjacency(const Adjacency& adjacency) const;
  Network with_id(std::string id) const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  std::vector<NodeAttributes> nodes_;
  Adjacency adjacency_;
  NetworkAttributes attrs_;
};

Network build_network(std::vector<NodeAttributes> nodes, std::span<const Dyad> edges,
                      NetworkAttributes attrs);

class NetworkSample {
 public:
  NetworkSample() = default;
  // Checks group labels against the taxonomy and id uniqueness.
  NetworkSample(std::vector<std::string> taxonomy, std::vector<Network> networks);

  const std::vector<std::string>& taxonomy() const noexcept { return taxonomy_; }
  const std::vector<Network>& networks() const noexcept { return networks_; }
  std::size_t size() const noexcept { return networks_.size(); }
  bool empty() const noexcept { return networks_.empty(); }
  const Network& operator[](std::size_t s) const { return networks_[s]; }

  auto begin() const noexcept { return networks_.begin(); }
  auto end() const noexcept { return networks_.end(); }

  bool in_taxonomy(const std::string& label) const;

  friend bool operator==(const NetworkSample&, const NetworkSample&) = default;

 private:
  std::vector<std::string> taxonomy_;
  std::vector<Network> networks_;
};

// The seven age-gender groups of the Flemish household survey, short codes.
//   YC Young Child, PA Preadolescent, AD Adolescent, YA Young Adult,
//   OF Older Female Adult, OM Older Male Adult, SN Senior
const std::vector<std::string>& household_taxonomy();
const std::map<std::string, std::string>& household_group_names();

}  // namespace ergmkit
