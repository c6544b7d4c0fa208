#include "ergmkit/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <string_view>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "ergmkit/error.hpp"
#include "ergmkit/linalg.hpp"

namespace ergmkit {

namespace bm = boost::math;

std::string to_string(Tail tail) {
  switch (tail) {
    case Tail::TwoSided: return "two-sided";
    case Tail::Upper: return "upper";
    case Tail::Lower: return "lower";
  }
  return "";
}

Tail parse_tail(const std::string& s) {
  if (s == "two-sided" || s == "two" || s == "both") return Tail::TwoSided;
  if (s == "upper" || s == "greater") return Tail::Upper;
  if (s == "lower" || s == "less") return Tail::Lower;
  throw InputError("unknown tail '" + s + "' (expected two-sided, upper or lower)");
}

std::string to_string(TestKind kind) {
  switch (kind) {
    case TestKind::WaldChi2: return "wald-chi2";
    case TestKind::WaldZ: return "wald-z";
    case TestKind::StudentT: return "t";
  }
  return "";
}

double normal_pvalue(double z, Tail tail) {
  if (std::isnan(z)) throw InputError("z statistic is NaN");
  const bm::normal nd;
  switch (tail) {
    case Tail::TwoSided: return std::min(1.0, 2.0 * bm::cdf(bm::complement(nd, std::abs(z))));
    case Tail::Upper: return bm::cdf(bm::complement(nd, z));
    case Tail::Lower: return bm::cdf(nd, z);
  }
  return 1.0;
}

double chi2_upper_pvalue(double statistic, int df) {
  if (df < 1) throw InputError("chi-square test needs df >= 1");
  if (std::isnan(statistic)) throw InputError("chi-square statistic is NaN");
  if (statistic <= 0.0) return 1.0;
  return bm::cdf(bm::complement(bm::chi_squared(df), statistic));
}

double chi2_cdf(double x, int df) {
  if (x <= 0.0) return 0.0;
  return bm::cdf(bm::chi_squared(df), x);
}

double t_pvalue(double t, int df, Tail tail) {
  if (df < 1) throw InputError("t test needs df >= 1");
  if (std::isnan(t)) throw InputError("t statistic is NaN");
  const bm::students_t td(df);
  switch (tail) {
    case Tail::TwoSided: return std::min(1.0, 2.0 * bm::cdf(bm::complement(td, std::abs(t))));
    case Tail::Upper: return bm::cdf(bm::complement(td, t));
    case Tail::Lower: return bm::cdf(td, t);
  }
  return 1.0;
}

std::string format_pvalue(double p) {
  if (std::isnan(p)) return "NA";
  // The threshold applies after rounding: 0.0007 prints as 0.001.
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", p);
  if (std::string_view(buf) == "0.000") return "<0.001";
  return buf;
}

std::string significance_stars(double p) {
  if (p <= 0.001) return "***";
  if (p <= 0.01) return "**";
  if (p <= 0.05) return "*";
  return "";
}

CoefRow coef_row(std::string label, double estimate, double se) {
  if (std::isnan(estimate) || std::isnan(se)) {
    throw InputError("coefficient '" + label + "': NaN estimate or standard error");
  }
  if (se < 0.0) throw InputError("coefficient '" + label + "': negative standard error");
  CoefRow row{std::move(label), estimate, se, 0.0, 1.0, ""};
  if (estimate == 0.0) {
    row.z = 0.0;
    row.pvalue = 1.0;
  } else {
    row.z = se > 0.0 ? estimate / se : std::copysign(INFINITY, estimate);
    row.pvalue = normal_pvalue(row.z, Tail::TwoSided);
  }
  row.stars = significance_stars(row.pvalue);
  return row;
}

std::vector<CoefRow> coef_table(const FitResult& fit) {
  if (fit.sigma.rows() != fit.dim() || fit.sigma.cols() != fit.dim()) {
    throw InputError("fit covariance has the wrong shape");
  }
  std::vector<CoefRow> rows;
  for (int k = 0; k < fit.dim(); ++k) {
    double var = fit.sigma(k, k);
    if (var < 0.0) throw InputError("negative variance for '" + fit.labels[k] + "'");
    rows.push_back(coef_row(fit.labels[k], fit.theta[k], std::sqrt(var)));
  }
  return rows;
}

TestResult omnibus_wald(const FitResult& fit, std::span<const int> subset, std::string label) {
  if (subset.empty()) throw InputError("omnibus test '" + label + "': empty parameter subset");
  std::set<int> seen;
  const auto a = static_cast<Eigen::Index>(subset.size());
  Eigen::VectorXd theta(a);
  Eigen::MatrixXd sigma(a, a);
  std::vector<std::string> names;
  for (Eigen::Index r = 0; r < a; ++r) {
    int k = subset[r];
    if (k < 0 || k >= fit.dim()) throw InputError("omnibus test '" + label + "': index out of range");
    if (!seen.insert(k).second) {
      throw InputError("omnibus test '" + label + "': duplicate parameter '" + fit.labels[k] + "'");
    }
    names.push_back(fit.labels[k]);
    theta[r] = fit.theta[k];
    for (Eigen::Index c = 0; c < a; ++c) sigma(r, c) = fit.sigma(k, subset[c]);
  }
  if (!theta.allFinite() || !sigma.allFinite()) {
    throw InputError("omnibus test '" + label + "': non-finite estimates or covariance");
  }
  Eigen::VectorXd solved = spd_solve(sigma, theta, names, "omnibus test '" + label + "' covariance");
  TestResult r;
  r.label = std::move(label);
  r.kind = TestKind::WaldChi2;
  r.statistic = theta.dot(solved);
  r.df = static_cast<int>(a);
  r.pvalue = chi2_upper_pvalue(r.statistic, *r.df);
  return r;
}

TestResult omnibus_wald(const FitResult& fit, const std::vector<std::string>& terms,
                        std::string label) {
  std::vector<int> idx;
  for (const auto& t : terms) {
    int k = fit.find(t);
    if (k < 0) {
      std::string valid;
      for (const auto& l : fit.labels) valid += (valid.empty() ? "" : ", ") + l;
      throw InputError("unknown term label '" + t + "'; valid labels: " + valid);
    }
    idx.push_back(k);
  }
  return omnibus_wald(fit, idx, std::move(label));
}

TestResult z_test(double estimate, double se, Tail tail, std::string label) {
  if (!(se > 0.0)) throw InputError("test '" + label + "': standard error must be positive");
  TestResult r;
  r.label = std::move(label);
  r.kind = TestKind::WaldZ;
  r.statistic = estimate / se;
  r.tail = tail;
  r.pvalue = normal_pvalue(r.statistic, tail);
  r.estimate = estimate;
  r.se = se;
  return r;
}

TestResult contrast_test(const FitResult& fit, const Contrast& contrast) {
  if (contrast.coeffs.size() != fit.dim()) {
    throw InputError("contrast '" + contrast.label + "' has length " +
                     std::to_string(contrast.coeffs.size()) + ", fit has " +
                     std::to_string(fit.dim()) + " parameters");
  }
  if (contrast.coeffs.isZero(0.0)) throw InputError("contrast '" + contrast.label + "' is all zero");
  double est = contrast.coeffs.dot(fit.theta);
  double var = contrast.coeffs.dot(fit.sigma * contrast.coeffs);
  if (!(var > 0.0)) throw InputError("contrast '" + contrast.label + "' has zero standard error");
  return z_test(est, std::sqrt(var), contrast.tail, contrast.label);
}

Eigen::MatrixXd cor_matrix(const FitResult& fit) {
  const int p = fit.dim();
  Eigen::VectorXd sd(p);
  for (int k = 0; k < p; ++k) {
    if (!(fit.sigma(k, k) > 0.0)) {
      throw InputError("parameter '" + fit.labels[k] + "' has zero variance; correlation undefined");
    }
    sd[k] = std::sqrt(fit.sigma(k, k));
  }
  Eigen::MatrixXd c = sd.cwiseInverse().asDiagonal() * fit.sigma * sd.cwiseInverse().asDiagonal();
  c = symmetrize(c);
  c.diagonal().setOnes();
  return c.cwiseMax(-1.0).cwiseMin(1.0);
}

// Reparametrization --------------------------------------------------------

namespace {

bool is_mean_cell(const ModelTerm& t) {
  return t.stat.kind == StatKind::Mix && t.modifier.kind == ModifierKind::One;
}

}  // namespace

std::string choose_baseline(const ModelSpec& model, const NetworkSample& sample) {
  std::map<std::string, double> dyads;
  for (const auto& t : model.terms) {
    if (!is_mean_cell(t)) continue;
    double count = 0.0;
    for (const Network& net : sample) {
      const int n = net.size();
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          auto a = node_attribute(net.nodes()[i], t.stat.attr);
          auto b = node_attribute(net.nodes()[j], t.stat.attr);
          if (!a || !b) continue;
          if ((t.stat.cell_a.count(*a) && t.stat.cell_b.count(*b)) ||
              (t.stat.cell_a.count(*b) && t.stat.cell_b.count(*a))) {
            count += 1.0;
          }
        }
      }
    }
    dyads[t.label] = count;
  }
  if (dyads.empty()) throw InputError("model has no Mix x One cells to choose a baseline from");
  std::string best;
  double most = -1.0;
  for (const auto& [label, count] : dyads) {  // lexicographic order breaks ties
    if (count > most) {
      most = count;
      best = label;
    }
  }
  return best;
}

Reparametrization to_effects_parametrization(const ModelSpec& model, const FitResult& fit,
                                             std::optional<std::string> baseline,
                                             const NetworkSample* sample) {
  if (model.find(StatTerm::edges(), Modifier::one()) >= 0) {
    throw InputError("model already has an edge-count intercept; it is in the effects parametrization");
  }
  const int p = model.dim();
  if (fit.dim() != p || fit.labels != model.labels()) {
    throw InputError("fit parameters do not match the model terms");
  }
  std::vector<int> cells;
  for (int k = 0; k < p; ++k) {
    if (is_mean_cell(model.terms[k])) cells.push_back(k);
  }
  if (cells.size() < 2) throw InputError("means parametrization needs at least two Mix x One cells");

  // The cells must partition all label pairs so that their sum is the edge count.
  const std::string& attr = model.terms[cells.front()].stat.attr;
  std::set<std::string> labels;
  if (sample && attr == "group") {
    labels.insert(sample->taxonomy().begin(), sample->taxonomy().end());
  } else {
    for (int k : cells) {
      labels.insert(model.terms[k].stat.cell_a.begin(), model.terms[k].stat.cell_a.end());
      labels.insert(model.terms[k].stat.cell_b.begin(), model.terms[k].stat.cell_b.end());
    }
  }
  for (int k : cells) {
    if (model.terms[k].stat.attr != attr) {
      throw InputError("means parametrization cells use different attributes");
    }
  }
  for (auto a = labels.begin(); a != labels.end(); ++a) {
    for (auto b = a; b != labels.end(); ++b) {
      int hits = 0;
      for (int k : cells) {
        const auto& st = model.terms[k].stat;
        if ((st.cell_a.count(*a) && st.cell_b.count(*b)) || (st.cell_a.count(*b) && st.cell_b.count(*a))) {
          ++hits;
        }
      }
      if (hits != 1) {
        throw InputError("Mix x One cells do not cover pair " + *a + "-" + *b +
                         " exactly once; not a full means parametrization");
      }
    }
  }

  std::string base = baseline ? *baseline
                              : (sample ? choose_baseline(model, *sample)
                                        : throw InputError("baseline cell required when no sample is given"));
  const int b = model.find(base);
  if (b < 0 || !is_mean_cell(model.terms[b])) {
    throw InputError("unknown baseline cell '" + base + "'");
  }

  Reparametrization out;
  out.baseline = base;
  out.model.offsets = model.offsets;
  out.model.terms.push_back({StatTerm::edges(), Modifier::one(), "edges"});
  if (model.find("edges") >= 0) out.model.terms.back().label = "edges.intercept";
  std::vector<int> position(p, 0);  // means index -> effects index
  for (int k = 0; k < p; ++k) {
    if (k == b) continue;
    position[k] = static_cast<int>(out.model.terms.size());
    out.model.terms.push_back(model.terms[k]);
  }

  out.transform = Eigen::MatrixXd::Zero(p, p);
  for (int k = 0; k < p; ++k) {
    if (k != b) out.transform(k, position[k]) = 1.0;
    if (is_mean_cell(model.terms[k])) out.transform(k, 0) = 1.0;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(out.transform);
  Eigen::MatrixXd inv = lu.inverse();

  out.fit = fit;
  out.fit.labels = out.model.labels();
  out.fit.theta = inv * fit.theta;
  out.fit.sigma = symmetrize(inv * fit.sigma * inv.transpose());
  if (fit.mcse) {
    // MC errors do not transform exactly without the full MC covariance.
    out.fit.mcse.reset();
  }
  return out;
}

VifResult vif(const FitResult& fit, const ModelSpec& model) {
  int e = model.find(StatTerm::edges(), Modifier::one());
  if (e < 0 || fit.find(model.terms[e].label) < 0) {
    throw InputError(
        "VIF is only defined for models with an edge-count (intercept) term; convert a means "
        "parametrization with to_effects_parametrization first");
  }
  const int intercept = fit.find(model.terms[e].label);
  std::vector<int> keep;
  VifResult out;
  for (int k = 0; k < fit.dim(); ++k) {
    if (k == intercept) continue;
    keep.push_back(k);
    out.labels.push_back(fit.labels[k]);
  }
  const auto q = static_cast<Eigen::Index>(keep.size());
  out.vif = Eigen::VectorXd::Ones(q);
  out.root_vif = Eigen::VectorXd::Ones(q);
  if (q == 0) return out;
  Eigen::MatrixXd full = cor_matrix(fit);
  Eigen::MatrixXd c(q, q);
  for (Eigen::Index r = 0; r < q; ++r) {
    for (Eigen::Index s = 0; s < q; ++s) c(r, s) = full(keep[r], keep[s]);
  }
  SpdFactor f(c);
  if (!f.ok()) {
    const auto& d = *f.deficiency();
    out.vif.setConstant(std::numeric_limits<double>::quiet_NaN());
    out.vif[d.column] = INFINITY;
    std::string first = d.partner >= 0 ? out.labels[d.partner] : out.labels[d.column];
    if (d.partner >= 0) out.vif[d.partner] = INFINITY;
    out.collinear = std::pair{first, out.labels[d.column]};
  } else {
    out.vif = f.inverse().diagonal();
  }
  out.root_vif = out.vif.cwiseSqrt();
  return out;
}

EffectCurve size_effect_curve(const FitResult& fit, const ModelSpec& model, StatKind feature,
                              std::vector<int> grid, std::optional<int> reference_n) {
  if (feature != StatKind::Edges && feature != StatKind::TwoStar && feature != StatKind::Triangle) {
    throw InputError("size effect curves are defined for edges, twostar and triangle features");
  }
  struct Part {
    int index;
    ModifierKind mod;
  };
  std::vector<Part> parts;
  for (const auto& t : model.terms) {
    if (t.stat.kind != feature) continue;
    if (t.modifier.kind != ModifierKind::One && t.modifier.kind != ModifierKind::LogN &&
        t.modifier.kind != ModifierKind::LogN2) {
      continue;
    }
    int k = fit.find(t.label);
    if (k >= 0) parts.push_back({k, t.modifier.kind});
  }
  if (parts.empty()) {
    throw InputError("feature '" + stat_label(StatTerm{feature, {}, {}, {}}) +
                     "' has no One/LogN/LogN2 terms in the fit");
  }
  auto phi = [](ModifierKind m, int n) {
    double l = std::log(static_cast<double>(n));
    return m == ModifierKind::One ? 1.0 : m == ModifierKind::LogN ? l : l * l;
  };
  for (int n : grid) {
    if (n < 1) throw InputError("network size grid must be positive");
  }
  if (reference_n && *reference_n < 1) throw InputError("reference size must be positive");

  EffectCurve curve;
  curve.feature = feature;
  curve.grid = std::move(grid);
  curve.reference_n = reference_n;
  const auto g = static_cast<Eigen::Index>(curve.grid.size());
  curve.value.resize(g);
  curve.se.resize(g);
  for (Eigen::Index r = 0; r < g; ++r) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(fit.dim());
    for (const auto& part : parts) {
      double v = phi(part.mod, curve.grid[r]);
      if (reference_n) v -= phi(part.mod, *reference_n);
      c[part.index] += v;
    }
    curve.value[r] = c.dot(fit.theta);
    curve.se[r] = std::sqrt(std::max(0.0, c.dot(fit.sigma * c)));
  }
  return curve;
}

KsResult ks_test(std::vector<double> values, const std::function<double(double)>& cdf) {
  if (values.empty()) throw InputError("KS test on an empty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double f = cdf(values[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  // Q_KS(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
  double q = 0.0;
  if (lambda < 0.2) {
    q = 1.0;
  } else {
    for (int k = 1; k <= 100; ++k) {
      double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
      q += term;
      if (std::abs(term) < 1e-14) break;
    }
  }
  return {d, std::clamp(q, 0.0, 1.0)};
}

}  // namespace ergmkit
