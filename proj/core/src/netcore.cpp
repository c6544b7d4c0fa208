#include "ergmkit/netcore.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "ergmkit/error.hpp"

namespace ergmkit {

Adjacency::Adjacency(int n) : n_(n) {
  if (n < 0 || n > kMaxNodes) {
    throw InputError("network size " + std::to_string(n) + " outside [0, " +
                     std::to_string(kMaxNodes) + "]");
  }
}

void Adjacency::set(NodeIndex i, NodeIndex j, bool on) noexcept {
  if (has(i, j) != on) flip(i, j);
}

int Adjacency::edge_count() const noexcept {
  int twice = 0;
  for (int i = 0; i < n_; ++i) twice += degree(i);
  return twice / 2;
}

DyadMask Adjacency::to_mask() const noexcept {
  DyadMask mask = 0;
  int k = 0;
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j, ++k) {
      if (has(i, j)) mask |= DyadMask{1} << k;
    }
  }
  return mask;
}

Adjacency Adjacency::from_mask(int n, DyadMask mask) noexcept {
  Adjacency adj;
  adj.n_ = n;
  int k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++k) {
      if ((mask >> k) & 1U) {
        adj.rows_[i] |= static_cast<std::uint16_t>(1U << j);
        adj.rows_[j] |= static_cast<std::uint16_t>(1U << i);
      }
    }
  }
  return adj;
}

std::vector<Dyad> Adjacency::edges() const {
  std::vector<Dyad> out;
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      if (has(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

std::optional<std::string> node_attribute(const NodeAttributes& node, const std::string& name) {
  if (name == "group") return node.group.empty() ? std::nullopt : std::optional{node.group};
  if (name == "gender") return node.gender.empty() ? std::nullopt : std::optional{node.gender};
  auto it = node.extra.find(name);
  if (it == node.extra.end()) return std::nullopt;
  if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
  std::ostringstream os;
  os.precision(17);
  os << std::get<double>(it->second);
  return os.str();
}

std::optional<bool> network_flag(const NetworkAttributes& attrs, const std::string& name) {
  if (name == "weekend") return attrs.weekend;
  if (name == "brussels") return attrs.brussels;
  if (name == "child_absent") return attrs.child_absent;
  auto it = attrs.extra.find(name);
  if (it == attrs.extra.end()) return std::nullopt;
  return it->second != 0.0;
}

std::optional<double> network_real(const NetworkAttributes& attrs, const std::string& name) {
  if (name == "log_pop_density") return attrs.log_pop_density;
  if (name == "n_s") return static_cast<double>(attrs.n_s);
  auto it = attrs.extra.find(name);
  if (it == attrs.extra.end()) return std::nullopt;
  return it->second;
}

namespace {

void check_size(std::size_t nodes, const NetworkAttributes& attrs) {
  if (nodes < 2 || nodes > static_cast<std::size_t>(kMaxNodes)) {
    throw InputError("network '" + attrs.id + "': node count " + std::to_string(nodes) +
                     " outside [2, " + std::to_string(kMaxNodes) + "]");
  }
  if (attrs.n_s != static_cast<int>(nodes)) {
    throw InputError("network '" + attrs.id + "': n_s = " + std::to_string(attrs.n_s) +
                     " but " + std::to_string(nodes) + " nodes given");
  }
}

Adjacency adjacency_from_edges(int n, std::span<const Dyad> edges, const std::string& id) {
  Adjacency adj(n);
  for (const Dyad& d : edges) {
    if (d.i < 0 || d.j >= n) {
      throw InputError("network '" + id + "': node index out of range in pair (" +
                       std::to_string(d.i) + "," + std::to_string(d.j) + ")");
    }
    if (d.i == d.j) {
      throw InputError("network '" + id + "': self-loop at node " + std::to_string(d.i));
    }
    if (adj.has(d.i, d.j)) {
      throw InputError("network '" + id + "': duplicate pair (" + std::to_string(d.i) + "," +
                       std::to_string(d.j) + ")");
    }
    adj.set(d.i, d.j, true);
  }
  return adj;
}

}  // namespace

Network::Network(std::vector<NodeAttributes> nodes, std::span<const Dyad> edges,
                 NetworkAttributes attrs)
    : nodes_(std::move(nodes)), attrs_(std::move(attrs)) {
  check_size(nodes_.size(), attrs_);
  adjacency_ = adjacency_from_edges(static_cast<int>(nodes_.size()), edges, attrs_.id);
}

Network::Network(std::vector<NodeAttributes> nodes, Adjacency adjacency, NetworkAttributes attrs)
    : nodes_(std::move(nodes)), adjacency_(adjacency), attrs_(std::move(attrs)) {
  check_size(nodes_.size(), attrs_);
  if (adjacency_.size() != static_cast<int>(nodes_.size())) {
    throw InputError("network '" + attrs_.id + "': adjacency size mismatch");
  }
}

Network Network::toggle_edge(NodeIndex i, NodeIndex j) const {
  if (i == j) throw InputError("toggle_edge: i == j (" + std::to_string(i) + ")");
  if (i < 0 || j < 0 || i >= size() || j >= size()) {
    throw InputError("toggle_edge: index out of range");
  }
  Network out = *this;
  out.adjacency_.flip(i, j);
  return out;
}

Network Network::with_adjacency(const Adjacency& adjacency) const {
  return Network(nodes_, adjacency, attrs_);
}

Network Network::with_id(std::string id) const {
  Network out = *this;
  out.attrs_.id = std::move(id);
  return out;
}

Network build_network(std::vector<NodeAttributes> nodes, std::span<const Dyad> edges,
                      NetworkAttributes attrs) {
  return Network(std::move(nodes), edges, std::move(attrs));
}

NetworkSample::NetworkSample(std::vector<std::string> taxonomy, std::vector<Network> networks)
    : taxonomy_(std::move(taxonomy)), networks_(std::move(networks)) {
  std::set<std::string> ids;
  for (const Network& net : networks_) {
    if (!ids.insert(net.id()).second) throw InputError("duplicate network id '" + net.id() + "'");
    for (const NodeAttributes& node : net.nodes()) {
      if (!in_taxonomy(node.group)) {
        throw InputError("network '" + net.id() + "': group label '" + node.group +
                         "' not in taxonomy");
      }
    }
  }
}

bool NetworkSample::in_taxonomy(const std::string& label) const {
  return std::find(taxonomy_.begin(), taxonomy_.end(), label) != taxonomy_.end();
}

const std::vector<std::string>& household_taxonomy() {
  static const std::vector<std::string> groups{"YC", "PA", "AD", "YA", "OF", "OM", "SN"};
  return groups;
}

const std::map<std::string, std::string>& household_group_names() {
  static const std::map<std::string, std::string> names{
      {"YC", "Young Child"},        {"PA", "Preadolescent"},    {"AD", "Adolescent"},
      {"YA", "Young Adult"},        {"OF", "Older Female Adult"}, {"OM", "Older Male Adult"},
      {"SN", "Senior"}};
  return names;
}

}  // namespace ergmkit
