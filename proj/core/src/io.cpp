#include "ergmkit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ergmkit/error.hpp"

namespace ergmkit {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& source, const std::string& what) {
  throw InputError(source + ": " + what);
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(source, std::string("malformed JSON: ") + e.what());
  }
}

template <class T>
T get_as(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(where + ": field '" + key + "' missing or of the wrong type");
  }
}

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

double number_or_nan(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

Network network_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected a network object");
  NetworkAttributes attrs;
  attrs.id = get_as<std::string>(j, "id", where);
  const json* nodes_j = find(j, "nodes");
  if (!nodes_j || !nodes_j->is_array()) fail(where, "field 'nodes' missing or not an array");
  std::vector<NodeAttributes> nodes;
  for (const auto& nj : *nodes_j) {
    if (!nj.is_object()) fail(where, "node entries must be objects");
    NodeAttributes node;
    for (const auto& [key, value] : nj.items()) {
      if (key == "group" || key == "gender") {
        if (!value.is_string()) fail(where, "node field '" + key + "' must be a string");
        (key == "group" ? node.group : node.gender) = value.get<std::string>();
      } else if (value.is_string()) {
        node.extra[key] = value.get<std::string>();
      } else if (value.is_number()) {
        node.extra[key] = value.get<double>();
      } else if (value.is_boolean()) {
        node.extra[key] = value.get<bool>() ? 1.0 : 0.0;
      } else {
        fail(where, "node attribute '" + key + "' must be a string, number or boolean");
      }
    }
    nodes.push_back(std::move(node));
  }
  attrs.n_s = static_cast<int>(nodes.size());
  std::vector<Dyad> edges;
  if (const json* ej = find(j, "edges")) {
    if (!ej->is_array()) fail(where, "field 'edges' must be an array");
    for (const auto& e : *ej) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
        fail(where, "edges must be pairs of node indices");
      }
      const auto a = e[0].get<long long>(), b = e[1].get<long long>();
      if (a < 0 || b < 0 || a >= attrs.n_s || b >= attrs.n_s) {
        fail(where, "edge [" + std::to_string(a) + "," + std::to_string(b) + "] has a node index out of range [0, " +
                        std::to_string(attrs.n_s) + ")");
      }
      if (a == b) fail(where, "self-loop at node " + std::to_string(a));
      edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }
  }
  if (const json* aj = find(j, "attrs")) {
    if (!aj->is_object()) fail(where, "field 'attrs' must be an object");
    for (const auto& [key, value] : aj->items()) {
      if (value.is_null()) continue;
      if (key == "weekend" || key == "brussels" || key == "child_absent") {
        if (!value.is_boolean()) fail(where, "attribute '" + key + "' must be a boolean");
        if (key == "weekend") attrs.weekend = value.get<bool>();
        else if (key == "brussels") attrs.brussels = value.get<bool>();
        else attrs.child_absent = value.get<bool>();
      } else if (key == "log_pop_density") {
        if (!value.is_number()) fail(where, "attribute 'log_pop_density' must be a number");
        attrs.log_pop_density = value.get<double>();
      } else if (key == "n_s") {
        if (!value.is_number_integer() || value.get<long long>() != attrs.n_s) {
          fail(where, "attribute n_s does not match the node count " + std::to_string(attrs.n_s));
        }
      } else if (value.is_number()) {
        attrs.extra[key] = value.get<double>();
      } else if (value.is_boolean()) {
        attrs.extra[key] = value.get<bool>() ? 1.0 : 0.0;
      } else {
        fail(where, "network attribute '" + key + "' must be a number or boolean");
      }
    }
  }
  try {
    return Network(std::move(nodes), edges, std::move(attrs));
  } catch (const InputError& e) {
    fail(where, e.what());
  }
}

json node_to_json(const NodeAttributes& node) {
  json j = json::object();
  if (!node.group.empty()) j["group"] = node.group;
  if (!node.gender.empty()) j["gender"] = node.gender;
  for (const auto& [key, value] : node.extra) {
    if (const auto* s = std::get_if<std::string>(&value)) j[key] = *s;
    else j[key] = std::get<double>(value);
  }
  return j;
}

json network_json(const Network& net) {
  json j;
  j["id"] = net.id();
  json nodes = json::array();
  for (const auto& node : net.nodes()) nodes.push_back(node_to_json(node));
  j["nodes"] = std::move(nodes);
  json edges = json::array();
  for (const Dyad& d : net.adjacency().edges()) edges.push_back({d.i, d.j});
  j["edges"] = std::move(edges);
  const NetworkAttributes& a = net.attrs();
  json attrs;
  attrs["weekend"] = a.weekend;
  attrs["brussels"] = a.brussels;
  if (a.log_pop_density) attrs["log_pop_density"] = *a.log_pop_density;
  if (a.child_absent) attrs["child_absent"] = *a.child_absent;
  for (const auto& [key, value] : a.extra) attrs[key] = value;
  j["attrs"] = std::move(attrs);
  return j;
}

std::set<std::string> label_set(const json& j, const std::string& where) {
  std::set<std::string> out;
  if (j.is_string()) {
    out.insert(j.get<std::string>());
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (!v.is_string()) fail(where, "mix cell labels must be strings");
      out.insert(v.get<std::string>());
    }
  } else {
    fail(where, "mix cell must be a label or an array of labels");
  }
  return out;
}

StatTerm stat_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "'stat' must be an object");
  const auto kind = get_as<std::string>(j, "kind", where + " stat");
  if (kind == "edges") return StatTerm::edges();
  if (kind == "twostar") return StatTerm::two_star();
  if (kind == "triangle") return StatTerm::triangle();
  if (kind == "match") return StatTerm::match(get_as<std::string>(j, "attr", where + " match"));
  if (kind == "mix") {
    const json* a = find(j, "a");
    const json* b = find(j, "b");
    if (!a || !b) fail(where, "mix needs cells 'a' and 'b'");
    std::string attr = "group";
    if (const json* at = find(j, "attr")) attr = at->get<std::string>();
    return StatTerm::mix(label_set(*a, where), label_set(*b, where), attr);
  }
  fail(where, "unknown stat kind '" + kind + "' (expected edges, twostar, triangle, match or mix)");
}

Modifier mod_from_json(const json* j, const std::string& where) {
  if (!j) return Modifier::one();
  if (!j->is_object()) fail(where, "'mod' must be an object");
  const auto kind = get_as<std::string>(*j, "kind", where + " mod");
  if (kind == "one") return Modifier::one();
  if (kind == "logn") return Modifier::log_n();
  if (kind == "logn2") return Modifier::log_n2();
  if (kind == "flag") return Modifier::flag(get_as<std::string>(*j, "name", where + " flag"));
  if (kind == "real") return Modifier::real(get_as<std::string>(*j, "name", where + " real"));
  fail(where, "unknown modifier kind '" + kind + "' (expected one, logn, logn2, flag or real)");
}

json cell_json(const std::set<std::string>& cell) { return json(std::vector<std::string>(cell.begin(), cell.end())); }

json stat_to_json(const StatTerm& stat) {
  switch (stat.kind) {
    case StatKind::Edges: return {{"kind", "edges"}};
    case StatKind::TwoStar: return {{"kind", "twostar"}};
    case StatKind::Triangle: return {{"kind", "triangle"}};
    case StatKind::Match: return {{"kind", "match"}, {"attr", stat.attr}};
    case StatKind::Mix:
      return {{"kind", "mix"}, {"attr", stat.attr}, {"a", cell_json(stat.cell_a)}, {"b", cell_json(stat.cell_b)}};
  }
  return {};
}

json mod_to_json(const Modifier& mod) {
  switch (mod.kind) {
    case ModifierKind::One: return {{"kind", "one"}};
    case ModifierKind::LogN: return {{"kind", "logn"}};
    case ModifierKind::LogN2: return {{"kind", "logn2"}};
    case ModifierKind::Flag: return {{"kind", "flag"}, {"name", mod.name}};
    case ModifierKind::Real: return {{"kind", "real"}, {"name", mod.name}};
  }
  return {};
}

std::vector<std::string> taxonomy_from_json(const json& header, const std::string& where) {
  const json* t = find(header, "taxonomy");
  if (!t) fail(where, "first line must be a header {\"taxonomy\":[...]}");
  if (t->is_string()) {
    if (t->get<std::string>() == "household") return household_taxonomy();
    fail(where, "unknown taxonomy preset '" + t->get<std::string>() + "' (expected household)");
  }
  if (!t->is_array() || t->empty()) fail(where, "taxonomy must be a nonempty array of labels");
  std::vector<std::string> out;
  for (const auto& v : *t) {
    if (!v.is_string()) fail(where, "taxonomy labels must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

NetworkSample read_sample(std::istream& in, const std::string& source) {
  std::string line;
  std::optional<std::vector<std::string>> taxonomy;
  std::vector<Network> networks;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError(where + ": malformed JSON: " + e.what());
    }
    if (!taxonomy) {
      taxonomy = taxonomy_from_json(j, where);
      continue;
    }
    Network net = network_from_json(j, where);
    for (const auto& node : net.nodes()) {
      if (std::find(taxonomy->begin(), taxonomy->end(), node.group) == taxonomy->end()) {
        throw InputError(where + ": node group '" + node.group + "' is not in the taxonomy");
      }
    }
    for (const auto& other : networks) {
      if (other.id() == net.id()) throw InputError(where + ": duplicate network id '" + net.id() + "'");
    }
    networks.push_back(std::move(net));
  }
  if (!taxonomy) throw InputError(source + ": empty sample file");
  if (networks.empty()) throw InputError(source + ": sample has no networks");
  return NetworkSample(std::move(*taxonomy), std::move(networks));
}

NetworkSample load_sample(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return read_sample(in, path.string());
}

std::string network_to_json(const Network& net) { return network_json(net).dump(); }

void write_sample(std::ostream& out, const NetworkSample& sample) {
  out << json{{"taxonomy", sample.taxonomy()}}.dump() << '\n';
  for (const auto& net : sample) out << network_json(net).dump() << '\n';
}

void save_sample(const std::filesystem::path& path, const NetworkSample& sample) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  write_sample(out, sample);
}

ModelSpec parse_model(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  if (!j.is_object()) fail(source, "model must be a JSON object");
  ModelSpec model;
  const json* terms = find(j, "terms");
  if (!terms || !terms->is_array()) fail(source, "model needs a 'terms' array");
  int k = 0;
  for (const auto& t : *terms) {
    const std::string where = source + " term " + std::to_string(k++);
    if (!t.is_object() || !find(t, "stat")) fail(where, "term needs a 'stat' object");
    ModelTerm term{stat_from_json(t.at("stat"), where), mod_from_json(find(t, "mod"), where), {}};
    term.label = find(t, "label") ? get_as<std::string>(t, "label", where) : default_label(term.stat, term.modifier);
    model.terms.push_back(std::move(term));
  }
  if (const json* offsets = find(j, "offsets")) {
    if (!offsets->is_array()) fail(source, "'offsets' must be an array");
    k = 0;
    for (const auto& o : *offsets) {
      const std::string where = source + " offset " + std::to_string(k++);
      if (!o.is_object() || !find(o, "stat")) fail(where, "offset needs a 'stat' object");
      OffsetTerm off;
      off.term = {stat_from_json(o.at("stat"), where), mod_from_json(find(o, "mod"), where), {}};
      off.term.label = find(o, "label") ? get_as<std::string>(o, "label", where)
                                        : "offset." + default_label(off.term.stat, off.term.modifier);
      off.coef = get_as<double>(o, "coef", where);
      if (!std::isfinite(off.coef)) fail(where, "offset coefficient must be finite");
      model.offsets.push_back(std::move(off));
    }
  }
  try {
    validate_model(model);
  } catch (const InputError& e) {
    fail(source, e.what());
  }
  return model;
}

ModelSpec load_model(const std::filesystem::path& path) { return parse_model(read_text(path), path.string()); }

std::string model_to_json(const ModelSpec& model) {
  json terms = json::array();
  for (const auto& t : model.terms) {
    terms.push_back({{"stat", stat_to_json(t.stat)}, {"mod", mod_to_json(t.modifier)}, {"label", t.label}});
  }
  json offsets = json::array();
  for (const auto& o : model.offsets) {
    offsets.push_back({{"stat", stat_to_json(o.term.stat)},
                       {"mod", mod_to_json(o.term.modifier)},
                       {"label", o.term.label},
                       {"coef", o.coef}});
  }
  return json{{"terms", terms}, {"offsets", offsets}}.dump(2);
}

std::string fit_to_json(const FitResult& fit) {
  json j;
  j["labels"] = fit.labels;
  json theta = json::array();
  for (Eigen::Index k = 0; k < fit.theta.size(); ++k) theta.push_back(finite_or_null(fit.theta[k]));
  j["theta"] = theta;
  json sigma = json::array();
  for (Eigen::Index r = 0; r < fit.sigma.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < fit.sigma.cols(); ++c) row.push_back(finite_or_null(fit.sigma(r, c)));
    sigma.push_back(row);
  }
  j["sigma"] = sigma;
  j["loglik_kind"] = to_string(fit.loglik_kind);
  j["loglik"] = finite_or_null(fit.loglik);
  j["aic"] = finite_or_null(fit.aic);
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  if (fit.mcse) {
    json m = json::array();
    for (Eigen::Index k = 0; k < fit.mcse->size(); ++k) m.push_back(finite_or_null((*fit.mcse)[k]));
    j["mcse"] = m;
  }
  j["dropped"] = fit.dropped;
  j["nuisance"] = fit.nuisance;
  j["sigma_naive"] = fit.sigma_naive;
  if (!fit.message.empty()) j["message"] = fit.message;
  return j.dump(2);
}

FitResult parse_fit(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  if (!j.is_object()) fail(source, "fit must be a JSON object");
  FitResult fit;
  try {
    fit.labels = j.at("labels").get<std::vector<std::string>>();
    const auto p = static_cast<Eigen::Index>(fit.labels.size());
    const json& theta = j.at("theta");
    const json& sigma = j.at("sigma");
    if (!theta.is_array() || static_cast<Eigen::Index>(theta.size()) != p) fail(source, "theta length differs from labels");
    if (!sigma.is_array() || static_cast<Eigen::Index>(sigma.size()) != p) fail(source, "sigma must be p x p");
    fit.theta.resize(p);
    fit.sigma.resize(p, p);
    for (Eigen::Index r = 0; r < p; ++r) {
      fit.theta[r] = number_or_nan(theta[r]);
      if (!sigma[r].is_array() || static_cast<Eigen::Index>(sigma[r].size()) != p) fail(source, "sigma must be p x p");
      for (Eigen::Index c = 0; c < p; ++c) fit.sigma(r, c) = number_or_nan(sigma[r][c]);
    }
    fit.loglik_kind = parse_loglik_kind(j.value("loglik_kind", std::string("exact")));
    fit.loglik = find(j, "loglik") ? j.at("loglik").get<double>() : std::nan("");
    fit.aic = find(j, "aic") ? j.at("aic").get<double>() : std::nan("");
    fit.converged = j.value("converged", true);
    fit.iterations = j.value("iterations", 0);
    if (const json* m = find(j, "mcse")) {
      Eigen::VectorXd v(m->size());
      for (std::size_t k = 0; k < m->size(); ++k) v[k] = number_or_nan((*m)[k]);
      fit.mcse = v;
    }
    if (const json* d = find(j, "dropped")) fit.dropped = d->get<std::vector<std::string>>();
    fit.nuisance = j.value("nuisance", 0);
    fit.sigma_naive = j.value("sigma_naive", false);
    fit.message = j.value("message", std::string());
  } catch (const json::exception& e) {
    fail(source, std::string("invalid fit: ") + e.what());
  }
  return fit;
}

FitResult load_fit(const std::filesystem::path& path) { return parse_fit(read_text(path), path.string()); }

PowerScenario parse_scenario(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  if (!j.is_object()) fail(source, "scenario must be a JSON object");
  PowerScenario sc;
  try {
    if (const json* g = find(j, "S_grid")) sc.s_grid = g->get<std::vector<int>>();
    else if (const json* g2 = find(j, "s_grid")) sc.s_grid = g2->get<std::vector<int>>();
    sc.n = j.value("n", sc.n);
    if (j.contains("m")) sc.m = j.at("m").is_null() ? std::nullopt : std::optional<int>(j.at("m").get<int>());
    // A null m means free simulation.
    sc.conditional = j.value("conditional", sc.m.has_value() && !(j.contains("m") && j.at("m").is_null()));
    if (const json* th = find(j, "theta_h1")) {
      if (th->is_object()) {
        if (const json* h = find(*th, "homophily")) sc.theta_homophily = h->get<double>();
        if (const json* e = find(*th, "edges")) sc.theta_edges = e->get<double>();
      } else {
        sc.theta_homophily = th->get<double>();
      }
    }
    if (const json* h = find(j, "theta_homophily")) sc.theta_homophily = h->get<double>();
    if (const json* e = find(j, "theta_edges")) sc.theta_edges = e->get<double>();
    if (const json* g = find(j, "gender_split")) sc.gender_split = g->get<int>();
    sc.test_term = j.value("test_term", sc.test_term);
    sc.alpha = j.value("alpha", sc.alpha);
    if (const json* r = find(j, "replicates")) sc.replicates = r->get<int>();
    else if (const json* r2 = find(j, "R")) sc.replicates = r2->get<int>();
    sc.seed = j.value("seed", sc.seed);
    if (const json* f = find(j, "fit_method")) sc.fit_method = parse_fit_method(f->get<std::string>());
    if (const json* b = find(j, "burnin")) sc.burnin = b->get<long>();
    if (const json* i = find(j, "interval")) sc.interval = i->get<long>();
  } catch (const json::exception& e) {
    fail(source, std::string("invalid scenario: ") + e.what());
  }
  try {
    sc.validate();
  } catch (const InputError& e) {
    fail(source, e.what());
  }
  return sc;
}

PowerScenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text(path), path.string());
}

std::string scenario_to_json(const PowerScenario& sc) {
  json j;
  j["S_grid"] = sc.s_grid;
  j["n"] = sc.n;
  j["m"] = sc.m ? json(*sc.m) : json(nullptr);
  j["conditional"] = sc.conditional;
  json theta{{"homophily", sc.theta_homophily}};
  if (sc.theta_edges) theta["edges"] = *sc.theta_edges;
  j["theta_h1"] = theta;
  j["gender_split"] = sc.females();
  j["test_term"] = sc.test_term;
  j["alpha"] = sc.alpha;
  j["replicates"] = sc.replicates;
  j["seed"] = sc.seed;
  j["fit_method"] = to_string(sc.method());
  if (sc.burnin) j["burnin"] = *sc.burnin;
  if (sc.interval) j["interval"] = *sc.interval;
  return j.dump(2);
}

std::vector<TestSpecItem> parse_test_spec(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  const json* tests = j.is_array() ? &j : find(j, "tests");
  if (!tests || !tests->is_array()) fail(source, "test spec needs a 'tests' array");
  std::vector<TestSpecItem> out;
  int k = 0;
  for (const auto& t : *tests) {
    const std::string where = source + " test " + std::to_string(k++);
    try {
      TestSpecItem item;
      const auto kind = t.at("kind").get<std::string>();
      item.label = t.value("label", std::string());
      if (const json* tail = find(t, "tail")) item.tail = parse_tail(tail->get<std::string>());
      if (kind == "omnibus") {
        item.kind = TestSpecItem::Kind::Omnibus;
        item.terms = t.at("terms").get<std::vector<std::string>>();
        if (item.terms.empty()) fail(where, "omnibus test needs at least one term");
      } else if (kind == "contrast") {
        item.kind = TestSpecItem::Kind::Contrast;
        const json& w = t.at("weights");
        if (!w.is_object() || w.empty()) fail(where, "contrast weights must be a nonempty object");
        for (const auto& [name, value] : w.items()) item.weights.emplace_back(name, value.get<double>());
      } else if (kind == "z") {
        item.kind = TestSpecItem::Kind::Z;
        item.estimate = t.at("estimate").get<double>();
        item.se = t.at("se").get<double>();
      } else {
        fail(where, "unknown test kind '" + kind + "' (expected omnibus, contrast or z)");
      }
      if (item.label.empty()) item.label = kind + std::to_string(k);
      out.push_back(std::move(item));
    } catch (const json::exception& e) {
      fail(where, std::string("invalid test: ") + e.what());
    }
  }
  return out;
}

std::vector<TestSpecItem> load_test_spec(const std::filesystem::path& path) {
  return parse_test_spec(read_text(path), path.string());
}

std::vector<TestResult> run_test_spec(const FitResult& fit, const std::vector<TestSpecItem>& items) {
  std::vector<TestResult> out;
  for (const auto& item : items) {
    switch (item.kind) {
      case TestSpecItem::Kind::Omnibus: out.push_back(omnibus_wald(fit, item.terms, item.label)); break;
      case TestSpecItem::Kind::Z: out.push_back(z_test(item.estimate, item.se, item.tail, item.label)); break;
      case TestSpecItem::Kind::Contrast: {
        Contrast c{Eigen::VectorXd::Zero(fit.dim()), item.tail, item.label};
        for (const auto& [name, w] : item.weights) {
          const int k = fit.find(name);
          if (k < 0) {
            std::string valid;
            for (const auto& l : fit.labels) valid += (valid.empty() ? "" : ", ") + l;
            throw InputError("test '" + item.label + "': unknown term '" + name + "' (valid: " + valid + ")");
          }
          c.coeffs[k] += w;
        }
        out.push_back(contrast_test(fit, c));
        break;
      }
    }
  }
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "NA";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  if (x == 0.0) return "0";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_coefs_csv(std::ostream& out, const FitResult& fit) {
  out << "label,estimate,se,z,p,stars\n";
  for (const auto& row : coef_table(fit)) {
    out << csv_field(row.label) << ',' << format_number(row.estimate) << ',' << format_number(row.se) << ','
        << format_number(row.z) << ',' << format_number(row.pvalue) << ',' << row.stars << '\n';
  }
}

void write_tests_csv(std::ostream& out, const std::vector<TestResult>& tests) {
  out << "label,stat,df_or_tail,p\n";
  for (const auto& t : tests) {
    std::string df_or_tail = t.df ? std::to_string(*t.df) : (t.tail ? to_string(*t.tail) : "");
    if (t.kind == TestKind::StudentT && t.tail) df_or_tail += " " + to_string(*t.tail);
    out << csv_field(t.label) << ',' << format_number(t.statistic) << ',' << df_or_tail << ','
        << format_pvalue(t.pvalue) << '\n';
  }
}

void write_cor_csv(std::ostream& out, const FitResult& fit) {
  const Eigen::MatrixXd cor = cor_matrix(fit);
  out << "label";
  for (const auto& l : fit.labels) out << ',' << csv_field(l);
  out << '\n';
  for (Eigen::Index r = 0; r < cor.rows(); ++r) {
    out << csv_field(fit.labels[r]);
    for (Eigen::Index c = 0; c < cor.cols(); ++c) out << ',' << format_number(cor(r, c));
    out << '\n';
  }
}

void write_vif_csv(std::ostream& out, const VifResult& result) {
  out << "label,vif,root_vif\n";
  for (std::size_t k = 0; k < result.labels.size(); ++k) {
    out << csv_field(result.labels[k]) << ',' << format_number(result.vif[k]) << ','
        << format_number(result.root_vif[k]) << '\n';
  }
}

void write_curve_csv(std::ostream& out, const EffectCurve& curve) {
  out << "n,value,se\n";
  for (std::size_t k = 0; k < curve.grid.size(); ++k) {
    out << curve.grid[k] << ',' << format_number(curve.value[k]) << ',' << format_number(curve.se[k]) << '\n';
  }
}

void write_power_csv(std::ostream& out, const PowerCurve& curve) {
  out << "S,p_hat,mcse,rejects,failures\n";
  for (const auto& row : curve.rows) {
    out << row.s << ',' << format_number(row.p_hat) << ',' << format_number(row.mcse) << ',' << row.rejects << ','
        << row.failures << '\n';
  }
}

void write_power_plot_csv(std::ostream& out, const PowerCurve& curve) {
  out << "S,p_hat,lower,upper,alpha\n";
  for (const auto& row : curve.rows) {
    const double lo = std::max(0.0, row.p_hat - 1.96 * row.mcse);
    const double hi = std::min(1.0, row.p_hat + 1.96 * row.mcse);
    out << row.s << ',' << format_number(row.p_hat) << ',' << format_number(lo) << ',' << format_number(hi) << ','
        << format_number(curve.scenario.alpha) << '\n';
  }
}

void write_residuals_csv(std::ostream& out, const ResidualTable& table) {
  out << "network,statistic,observed,sim_mean,sim_sd,residual,excluded\n";
  auto emit = [&](const ResidualRow& r, bool excluded) {
    out << csv_field(r.network) << ',' << csv_field(r.statistic) << ',' << format_number(r.observed) << ','
        << format_number(r.sim_mean) << ',' << format_number(r.sim_sd) << ',' << format_number(r.residual) << ','
        << (excluded ? 1 : 0) << '\n';
  };
  for (const auto& r : table.rows) emit(r, false);
  for (const auto& r : table.excluded) emit(r, true);
}

void write_regression_csv(std::ostream& out, const std::vector<TestResult>& tests) {
  out << "label,slope,se,t,df,p\n";
  for (const auto& t : tests) {
    out << csv_field(t.label) << ',' << format_number(t.estimate.value_or(std::nan(""))) << ','
        << format_number(t.se.value_or(std::nan(""))) << ',' << format_number(t.statistic) << ','
        << (t.df ? std::to_string(*t.df) : "") << ',' << format_pvalue(t.pvalue) << '\n';
  }
}

void write_gof_csv(std::ostream& out, const GofTable& table) {
  out << "scope,statistic,observed,q025,q50,q975,tail\n";
  for (const auto& r : table.rows) {
    out << csv_field(r.scope) << ',' << csv_field(r.statistic) << ',' << format_number(r.observed) << ','
        << format_number(r.q025) << ',' << format_number(r.q50) << ',' << format_number(r.q975) << ','
        << format_number(r.tail) << '\n';
  }
}

std::map<std::string, std::string> csv_schemas() {
  return {
      {"coefs.csv", "label,estimate,se,z,p,stars"},
      {"tests.csv", "label,stat,df_or_tail,p"},
      {"cor.csv", "label,<one column per parameter label>"},
      {"vif.csv", "label,vif,root_vif"},
      {"curve.csv", "n,value,se"},
      {"power.csv", "S,p_hat,mcse,rejects,failures"},
      {"power_plot.csv", "S,p_hat,lower,upper,alpha"},
      {"residuals.csv", "network,statistic,observed,sim_mean,sim_sd,residual,excluded"},
      {"regression.csv", "label,slope,se,t,df,p"},
      {"gof.csv", "scope,statistic,observed,q025,q50,q975,tail"},
  };
}

}  // namespace ergmkit
