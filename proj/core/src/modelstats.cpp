#include "ergmkit/modelstats.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>

#include "ergmkit/error.hpp"

namespace ergmkit {

namespace {

std::string join(const std::set<std::string>& labels) {
  std::string out;
  for (const auto& l : labels) {
    if (!out.empty()) out += '+';
    out += l;
  }
  return out;
}

std::string modifier_suffix(const Modifier& m) {
  switch (m.kind) {
    case ModifierKind::One: return "";
    case ModifierKind::LogN: return "logn";
    case ModifierKind::LogN2: return "logn2";
    case ModifierKind::Flag: return m.name;
    case ModifierKind::Real: return m.name;
  }
  return "";
}

std::string describe(const StatTerm& stat, const Modifier& mod) {
  std::string s = stat_label(stat);
  if (mod.kind != ModifierKind::One) s += " x " + modifier_suffix(mod);
  return s;
}

// Unordered label pairs covered by a Mix cell.
std::set<std::pair<std::string, std::string>> mix_pairs(const StatTerm& stat) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& a : stat.cell_a) {
    for (const auto& b : stat.cell_b) out.insert(a < b ? std::pair{a, b} : std::pair{b, a});
  }
  return out;
}

bool mix_member(const StatTerm& stat, const std::string& a, const std::string& b) {
  return (stat.cell_a.count(a) && stat.cell_b.count(b)) ||
         (stat.cell_a.count(b) && stat.cell_b.count(a));
}

}  // namespace

std::string stat_label(const StatTerm& stat) {
  switch (stat.kind) {
    case StatKind::Edges: return "edges";
    case StatKind::TwoStar: return "twostar";
    case StatKind::Triangle: return "triangle";
    case StatKind::Match: return "match." + stat.attr;
    case StatKind::Mix:
      return "mix." + stat.attr + "." + join(stat.cell_a) + "-" + join(stat.cell_b);
  }
  return "";
}

StatTerm parse_stat_name(const std::string& name) {
  if (name == "edges") return StatTerm::edges();
  if (name == "twostar" || name == "2star" || name == "kstar2") return StatTerm::two_star();
  if (name == "triangle" || name == "triangles") return StatTerm::triangle();
  for (const char* prefix : {"match:", "match."}) {
    if (name.rfind(prefix, 0) == 0 && name.size() > 6) return StatTerm::match(name.substr(6));
  }
  throw InputError("unknown statistic name '" + name +
                   "' (expected edges, twostar, triangle or match:<attr>)");
}

std::string default_label(const StatTerm& stat, const Modifier& modifier) {
  std::string s = stat_label(stat);
  if (modifier.kind != ModifierKind::One) s += "." + modifier_suffix(modifier);
  return s;
}

std::vector<std::string> ModelSpec::labels() const {
  std::vector<std::string> out;
  out.reserve(terms.size());
  for (const auto& t : terms) out.push_back(t.label);
  return out;
}

int ModelSpec::find(const std::string& label) const {
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (terms[k].label == label) return static_cast<int>(k);
  }
  return -1;
}

int ModelSpec::find(const StatTerm& stat, const Modifier& modifier) const {
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (terms[k].stat == stat && terms[k].modifier == modifier) return static_cast<int>(k);
  }
  return -1;
}

bool ModelSpec::dyad_independent() const {
  auto dep = [](const ModelTerm& t) { return t.stat.dyad_dependent(); };
  return std::none_of(terms.begin(), terms.end(), dep) &&
         std::none_of(offsets.begin(), offsets.end(),
                      [&](const OffsetTerm& o) { return dep(o.term); });
}

void validate_model(const ModelSpec& model) {
  if (model.terms.empty()) throw InputError("model has no free terms");
  std::set<std::string> labels;
  std::vector<const ModelTerm*> all;
  for (const auto& t : model.terms) {
    if (t.label.empty()) throw InputError("model term without label");
    if (!labels.insert(t.label).second) throw InputError("duplicate term label '" + t.label + "'");
    all.push_back(&t);
  }
  for (const auto& o : model.offsets) all.push_back(&o.term);

  for (std::size_t a = 0; a < all.size(); ++a) {
    const ModelTerm& t = *all[a];
    if (t.stat.kind == StatKind::Mix) {
      if (t.stat.cell_a.empty() || t.stat.cell_b.empty()) {
        throw InputError("term '" + t.label + "': mix cell label sets must be nonempty");
      }
      if (t.stat.attr.empty()) throw InputError("term '" + t.label + "': mix without attribute");
    }
    if (t.stat.kind == StatKind::Match && t.stat.attr.empty()) {
      throw InputError("term '" + t.label + "': match without attribute");
    }
    if ((t.modifier.kind == ModifierKind::Flag || t.modifier.kind == ModifierKind::Real) &&
        t.modifier.name.empty()) {
      throw InputError("term '" + t.label + "': modifier without attribute name");
    }
    for (std::size_t b = 0; b < a; ++b) {
      const ModelTerm& u = *all[b];
      if (t.stat == u.stat && t.modifier == u.modifier) {
        throw InputError("duplicate statistic/modifier pair: " + describe(t.stat, t.modifier));
      }
      if (t.stat.kind == StatKind::Mix && u.stat.kind == StatKind::Mix &&
          t.stat.attr == u.stat.attr && t.modifier == u.modifier) {
        auto pa = mix_pairs(t.stat);
        auto pb = mix_pairs(u.stat);
        for (const auto& p : pa) {
          if (pb.count(p)) {
            throw InputError("mixing cells '" + u.label + "' and '" + t.label +
                             "' overlap on pair " + p.first + "-" + p.second);
          }
        }
      }
    }
  }
}

namespace {

void validate_against(const ModelTerm& t, const Network& net) {
  if (t.stat.kind == StatKind::Mix || t.stat.kind == StatKind::Match) {
    for (std::size_t v = 0; v < net.nodes().size(); ++v) {
      if (!node_attribute(net.nodes()[v], t.stat.attr)) {
        throw InputError("network '" + net.id() + "': node " + std::to_string(v) +
                         " lacks attribute '" + t.stat.attr + "' used by term '" + t.label + "'");
      }
    }
  }
  switch (t.modifier.kind) {
    case ModifierKind::Flag:
      if (!network_flag(net.attrs(), t.modifier.name)) {
        throw InputError("network '" + net.id() + "': missing flag attribute '" +
                         t.modifier.name + "' used by term '" + t.label + "'");
      }
      break;
    case ModifierKind::Real:
      if (!network_real(net.attrs(), t.modifier.name)) {
        throw InputError("network '" + net.id() + "': missing real attribute '" +
                         t.modifier.name + "' used by term '" + t.label + "'");
      }
      break;
    default: break;
  }
}

}  // namespace

void validate_model(const ModelSpec& model, const Network& net) {
  validate_model(model);
  for (const auto& t : model.terms) validate_against(t, net);
  for (const auto& o : model.offsets) validate_against(o.term, net);
}

void validate_model(const ModelSpec& model, const NetworkSample& sample) {
  validate_model(model);
  auto check_cells = [&](const ModelTerm& t) {
    if (t.stat.kind != StatKind::Mix || t.stat.attr != "group") return;
    for (const auto* cell : {&t.stat.cell_a, &t.stat.cell_b}) {
      for (const auto& l : *cell) {
        if (!sample.in_taxonomy(l)) {
          throw InputError("term '" + t.label + "': group label '" + l + "' not in taxonomy");
        }
      }
    }
  };
  for (const auto& t : model.terms) check_cells(t);
  for (const auto& o : model.offsets) check_cells(o.term);
  for (const Network& net : sample) {
    for (const auto& t : model.terms) validate_against(t, net);
    for (const auto& o : model.offsets) validate_against(o.term, net);
  }
}

double modifier_value(const Modifier& modifier, const NetworkAttributes& attrs) {
  switch (modifier.kind) {
    case ModifierKind::One: return 1.0;
    case ModifierKind::LogN: return std::log(static_cast<double>(attrs.n_s));
    case ModifierKind::LogN2: {
      double l = std::log(static_cast<double>(attrs.n_s));
      return l * l;
    }
    case ModifierKind::Flag: {
      auto v = network_flag(attrs, modifier.name);
      if (!v) {
        throw InputError("network '" + attrs.id + "': missing flag attribute '" + modifier.name +
                         "'");
      }
      return *v ? 1.0 : 0.0;
    }
    case ModifierKind::Real: {
      auto v = network_real(attrs, modifier.name);
      if (!v) {
        throw InputError("network '" + attrs.id + "': missing real attribute '" + modifier.name +
                         "'");
      }
      return *v;
    }
  }
  return 0.0;
}

// BoundModel ---------------------------------------------------------------

BoundModel::Kernel BoundModel::compile(const ModelTerm& term, const Network& net,
                                       double coef) const {
  Kernel k{term.stat.kind, coef * modifier_value(term.modifier, net.attrs()), {}};
  if (term.stat.kind == StatKind::Mix || term.stat.kind == StatKind::Match) {
    std::vector<std::string> values(n_);
    for (int v = 0; v < n_; ++v) {
      auto val = node_attribute(net.nodes()[v], term.stat.attr);
      if (!val) {
        throw InputError("network '" + net.id() + "': node " + std::to_string(v) +
                         " lacks attribute '" + term.stat.attr + "'");
      }
      values[v] = *val;
    }
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (i == j) continue;
        bool on = term.stat.kind == StatKind::Match ? values[i] == values[j]
                                                   : mix_member(term.stat, values[i], values[j]);
        if (on) k.eligible[i] |= static_cast<std::uint16_t>(1U << j);
      }
    }
  }
  return k;
}

BoundModel::BoundModel(const ModelSpec& model, const Network& net) : n_(net.size()) {
  for (const auto& t : model.terms) free_.push_back(compile(t, net, 1.0));
  for (const auto& o : model.offsets) offsets_.push_back(compile(o.term, net, o.coef));
  dyad_dependent_ = !model.dyad_independent();

  key_.reserve(8 + (free_.size() + offsets_.size()) * (sizeof(Kernel) + 1));
  key_.append(reinterpret_cast<const char*>(&n_), sizeof n_);
  auto append = [&](const Kernel& k, char tag) {
    key_.push_back(tag);
    key_.push_back(static_cast<char>(k.kind));
    key_.append(reinterpret_cast<const char*>(&k.weight), sizeof k.weight);
    key_.append(reinterpret_cast<const char*>(k.eligible.data()),
                k.eligible.size() * sizeof(std::uint16_t));
  };
  for (const auto& k : free_) append(k, 'f');
  for (const auto& k : offsets_) append(k, 'o');
}

double BoundModel::raw_stat(const Kernel& k, const Adjacency& adj) {
  const int n = adj.size();
  switch (k.kind) {
    case StatKind::Edges: return adj.edge_count();
    case StatKind::TwoStar: {
      long s = 0;
      for (int i = 0; i < n; ++i) {
        long d = adj.degree(i);
        s += d * (d - 1) / 2;
      }
      return static_cast<double>(s);
    }
    case StatKind::Triangle: {
      long s = 0;
      for (int i = 0; i < n; ++i) {
        // Each triangle is counted once from each of its three edges.
        std::uint16_t upper = adj.row(i) & static_cast<std::uint16_t>(~((2U << i) - 1U));
        while (upper) {
          int j = std::countr_zero(upper);
          upper &= upper - 1;
          s += adj.common_neighbours(i, j);
        }
      }
      return static_cast<double>(s / 3);
    }
    case StatKind::Mix:
    case StatKind::Match: {
      int twice = 0;
      for (int i = 0; i < n; ++i) {
        twice += std::popcount(static_cast<std::uint16_t>(adj.row(i) & k.eligible[i]));
      }
      return twice / 2;
    }
  }
  return 0.0;
}

double BoundModel::raw_change(const Kernel& k, const Adjacency& adj, NodeIndex i, NodeIndex j) {
  switch (k.kind) {
    case StatKind::Edges: return 1.0;
    case StatKind::TwoStar: {
      int present = adj.has(i, j) ? 1 : 0;
      return adj.degree(i) + adj.degree(j) - 2 * present;
    }
    case StatKind::Triangle: return adj.common_neighbours(i, j);
    case StatKind::Mix:
    case StatKind::Match: return (k.eligible[i] >> j) & 1U;
  }
  return 0.0;
}

void BoundModel::stats(const Adjacency& adj, std::span<double> out) const {
  for (std::size_t k = 0; k < free_.size(); ++k) {
    out[k] = free_[k].weight == 0.0 ? 0.0 : free_[k].weight * raw_stat(free_[k], adj);
  }
}

Eigen::VectorXd BoundModel::stats(const Adjacency& adj) const {
  Eigen::VectorXd v(dim());
  stats(adj, std::span<double>(v.data(), v.size()));
  return v;
}

double BoundModel::offset(const Adjacency& adj) const {
  double s = 0.0;
  for (const auto& k : offsets_) {
    if (k.weight != 0.0) s += k.weight * raw_stat(k, adj);
  }
  return s;
}

void BoundModel::change(const Adjacency& adj, NodeIndex i, NodeIndex j,
                        std::span<double> out) const {
  for (std::size_t k = 0; k < free_.size(); ++k) {
    out[k] = free_[k].weight == 0.0 ? 0.0 : free_[k].weight * raw_change(free_[k], adj, i, j);
  }
}

double BoundModel::offset_change(const Adjacency& adj, NodeIndex i, NodeIndex j) const {
  double s = 0.0;
  for (const auto& k : offsets_) {
    if (k.weight != 0.0) s += k.weight * raw_change(k, adj, i, j);
  }
  return s;
}

// Free functions -------------------------------------------------------------

namespace {

ModelSpec single_term(const StatTerm& stat) {
  ModelSpec m;
  m.terms.push_back({stat, Modifier::one(), stat_label(stat)});
  return m;
}

void check_dyad(const Network& net, Dyad dyad) {
  if (dyad.i == dyad.j) throw InputError("change statistic: i == j (" + std::to_string(dyad.i) + ")");
  if (dyad.i < 0 || dyad.j >= net.size()) throw InputError("change statistic: index out of range");
}

}  // namespace

double eval_stat(const StatTerm& stat, const Network& net) {
  return BoundModel(single_term(stat), net).stats(net.adjacency())[0];
}

double change_stat(const StatTerm& stat, const Network& net, Dyad dyad) {
  check_dyad(net, dyad);
  double out = 0.0;
  BoundModel(single_term(stat), net).change(net.adjacency(), dyad.i, dyad.j, {&out, 1});
  return out;
}

Eigen::VectorXd design_vector(const ModelSpec& model, const Network& net) {
  validate_model(model, net);
  return BoundModel(model, net).stats(net.adjacency());
}

Eigen::VectorXd change_vector(const ModelSpec& model, const Network& net, Dyad dyad) {
  check_dyad(net, dyad);
  validate_model(model, net);
  Eigen::VectorXd v(model.dim());
  BoundModel(model, net).change(net.adjacency(), dyad.i, dyad.j, {v.data(), std::size_t(v.size())});
  return v;
}

double offset_change(const ModelSpec& model, const Network& net, Dyad dyad) {
  check_dyad(net, dyad);
  validate_model(model, net);
  return BoundModel(model, net).offset_change(net.adjacency(), dyad.i, dyad.j);
}

double offset_value(const ModelSpec& model, const Network& net) {
  validate_model(model, net);
  return BoundModel(model, net).offset(net.adjacency());
}

Eigen::VectorXd sample_statistic(const ModelSpec& model, const NetworkSample& sample) {
  validate_model(model, sample);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(model.dim());
  for (const Network& net : sample) total += BoundModel(model, net).stats(net.adjacency());
  return total;
}

}  // namespace ergmkit
