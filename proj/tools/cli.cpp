#include "cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ergmkit/diagnostics.hpp"
#include "ergmkit/error.hpp"
#include "ergmkit/estimation.hpp"
#include "ergmkit/inference.hpp"
#include "ergmkit/io.hpp"
#include "ergmkit/powerdesign.hpp"
#include "ergmkit/sampling.hpp"

namespace ergmkit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string out = ".";
  bool force = false;
  bool verbose = false;
};

class Outputs {
 public:
  Outputs(const Globals& g, std::vector<std::string> names) : dir_(g.out), names_(std::move(names)) {
    for (const auto& name : names_) {
      if (fs::exists(dir_ / name) && !g.force) {
        throw InputError("output '" + (dir_ / name).string() + "' exists; pass --force to overwrite");
      }
    }
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw InputError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) const {
    const fs::path path = dir_ / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + path.string() + "'");
    body(f);
    if (!f) throw InputError("write failed for '" + path.string() + "'");
  }

  void write_text(const std::string& name, const std::string& text) const {
    write(name, [&](std::ostream& o) { o << text << '\n'; });
  }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

std::uint64_t require_seed(const Globals& g, const std::string& command) {
  if (!g.seed) throw InputError(command + " is stochastic and needs --seed");
  return *g.seed;
}

std::string metadata(const std::string& command, std::uint64_t seed, const json& args) {
  json j;
  j["command"] = command;
  j["seed"] = seed;
  j["version"] = ERGMKIT_VERSION;
  j["args"] = args;
  return j.dump(2);
}

std::vector<Constraint> constraints_for(const NetworkSample& sample, bool conditional) {
  std::vector<Constraint> out;
  if (!conditional) return out;
  for (const auto& net : sample) out.push_back(Constraint::fixed_edges(net.edge_count()));
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InputError("cannot parse " + what + " value '" + s + "' as a number");
  }
  return v;
}

// "2..10" or "2,3,5".
std::vector<int> parse_grid(const std::string& s) {
  std::vector<int> out;
  auto dots = s.find("..");
  if (dots != std::string::npos) {
    const int lo = static_cast<int>(parse_double(s.substr(0, dots), "grid"));
    const int hi = static_cast<int>(parse_double(s.substr(dots + 2), "grid"));
    if (hi < lo) throw InputError("grid '" + s + "' is empty");
    for (int n = lo; n <= hi; ++n) out.push_back(n);
    return out;
  }
  for (const auto& item : split(s, ',')) out.push_back(static_cast<int>(parse_double(item, "grid")));
  if (out.empty()) throw InputError("grid is empty");
  return out;
}

std::vector<StatTerm> parse_stats(const std::string& s) {
  std::vector<StatTerm> out;
  for (const auto& name : split(s, ',')) out.push_back(parse_stat_name(name));
  if (out.empty()) throw InputError("no statistics given");
  return out;
}

StatKind parse_feature(const std::string& s) {
  if (s == "edges") return StatKind::Edges;
  if (s == "twostar") return StatKind::TwoStar;
  if (s == "triangle") return StatKind::Triangle;
  throw InputError("unknown feature '" + s + "' (expected edges, twostar or triangle)");
}

Eigen::VectorXd theta_for(const ModelSpec& model, const std::string& fit_path, const std::string& theta_list) {
  if (!fit_path.empty()) return expand_theta(model, load_fit(fit_path));
  const auto items = split(theta_list, ',');
  if (static_cast<int>(items.size()) != model.dim()) {
    throw InputError("--theta has " + std::to_string(items.size()) + " values; the model has " +
                     std::to_string(model.dim()) + " terms");
  }
  Eigen::VectorXd theta(model.dim());
  for (int k = 0; k < model.dim(); ++k) theta[k] = parse_double(items[k], "theta");
  return theta;
}

std::string describe(const std::vector<std::string>& labels) {
  std::string s;
  for (const auto& l : labels) s += (s.empty() ? "" : ", ") + l;
  return s;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exponential random graph models for samples of small networks"};
  app.set_version_flag("--version", std::string(ERGMKIT_VERSION));
  Globals g;
  bool schema_flag = false;
  app.add_option("--seed", g.seed, "Root seed for stochastic commands");
  app.add_option("--workers", g.workers, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("--force", g.force, "Overwrite existing outputs");
  app.add_flag("-v,--verbose", g.verbose, "Progress messages on stderr");
  app.add_flag("--schema", schema_flag, "Print the CSV output schemas and exit");
  app.require_subcommand(0, 1);

  std::function<int()> action;

  // fit
  struct {
    std::string data, model, method = "mple";
    bool conditional = false;
    long draws = 400;
    int max_iter = 0;
  } fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model; writes fit.json, coefs.csv, cor.csv");
  fit_cmd->add_option("--data", fit_args.data, "Sample (JSONL)")->required();
  fit_cmd->add_option("--model", fit_args.model, "Model spec (JSON)")->required();
  fit_cmd->add_option("--method", fit_args.method, "mple, exact or mcmc")
      ->check(CLI::IsMember({"mple", "exact", "mcmc"}));
  fit_cmd->add_flag("--conditional", fit_args.conditional, "Condition each network on its observed edge count");
  fit_cmd->add_option("--draws", fit_args.draws, "MCMC draws per network per iteration");
  fit_cmd->add_option("--max-iter", fit_args.max_iter, "Iteration cap (0: method default)");
  fit_cmd->callback([&] {
    action = [&]() -> int {
      const NetworkSample sample = load_sample(fit_args.data);
      const ModelSpec model = load_model(fit_args.model);
      const auto cons = constraints_for(sample, fit_args.conditional);
      std::vector<std::string> names{"fit.json", "coefs.csv", "cor.csv"};
      if (fit_args.method == "mcmc") names.push_back("metadata.json");
      Outputs outputs(g, names);
      FitResult fit;
      int code = 0;
      try {
        if (fit_args.method == "mcmc") {
          McmcOptions opt;
          opt.sim.seed = require_seed(g, "fit --method mcmc");
          opt.sim.draws = fit_args.draws;
          opt.workers = g.workers;
          if (fit_args.max_iter > 0) opt.max_iter = fit_args.max_iter;
          fit = mcmc_mle(model, sample, cons, opt);
          outputs.write_text("metadata.json",
                             metadata("fit", opt.sim.seed, {{"method", "mcmc"}, {"draws", fit_args.draws}}));
        } else {
          FitOptions opt;
          opt.workers = g.workers;
          if (fit_args.max_iter > 0) opt.max_iter = fit_args.max_iter;
          fit = fit_args.method == "exact" ? exact_mle(model, sample, cons, opt) : mple(model, sample, cons, opt);
        }
      } catch (const FitError& e) {
        fit = e.partial();
        fit.converged = false;
        if (fit.message.empty()) fit.message = e.what();
        err << "nonconvergence: " << e.what() << '\n';
        code = 2;
      }
      outputs.write_text("fit.json", fit_to_json(fit));
      if (code == 0) {
        outputs.write("coefs.csv", [&](std::ostream& o) { write_coefs_csv(o, fit); });
        try {
          outputs.write("cor.csv", [&](std::ostream& o) { write_cor_csv(o, fit); });
        } catch (const InputError& e) {
          err << "warning: correlation matrix not written: " << e.what() << '\n';
        }
        if (fit.sigma_naive) err << "note: standard errors are naive (pseudolikelihood)\n";
        if (!fit.dropped.empty()) err << "note: dropped terms constant under the constraints: " << describe(fit.dropped) << '\n';
      }
      return code;
    };
  });

  // test
  std::string test_fit, test_spec;
  auto* test_cmd = app.add_subcommand("test", "Omnibus Wald tests and contrasts; writes tests.csv");
  test_cmd->add_option("--fit", test_fit, "fit.json")->required();
  test_cmd->add_option("--spec", test_spec, "Test spec (JSON)")->required();
  test_cmd->callback([&] {
    action = [&]() -> int {
      const FitResult fit = load_fit(test_fit);
      const auto items = load_test_spec(test_spec);
      Outputs outputs(g, {"tests.csv"});
      const auto results = run_test_spec(fit, items);
      outputs.write("tests.csv", [&](std::ostream& o) { write_tests_csv(o, results); });
      return 0;
    };
  });

  // contrast
  struct {
    std::string fit, weights, label = "contrast", tail = "two-sided";
    std::optional<double> estimate, se;
  } con_args;
  auto* con_cmd = app.add_subcommand("contrast", "One contrast or z test; writes contrast.csv");
  con_cmd->add_option("--fit", con_args.fit, "fit.json");
  con_cmd->add_option("--weights", con_args.weights, "label=weight,... over the fitted terms");
  con_cmd->add_option("--estimate", con_args.estimate, "Estimate for a direct z test");
  con_cmd->add_option("--se", con_args.se, "Standard error for a direct z test");
  con_cmd->add_option("--label", con_args.label, "Row label");
  con_cmd->add_option("--tail", con_args.tail, "two-sided, upper or lower");
  con_cmd->callback([&] {
    action = [&]() -> int {
      TestSpecItem item;
      item.label = con_args.label;
      item.tail = parse_tail(con_args.tail);
      std::optional<FitResult> fit;
      if (con_args.estimate || con_args.se) {
        if (!con_args.estimate || !con_args.se) throw InputError("--estimate and --se go together");
        item.kind = TestSpecItem::Kind::Z;
        item.estimate = *con_args.estimate;
        item.se = *con_args.se;
      } else {
        if (con_args.fit.empty() || con_args.weights.empty()) {
          throw InputError("contrast needs --fit and --weights, or --estimate and --se");
        }
        fit = load_fit(con_args.fit);
        item.kind = TestSpecItem::Kind::Contrast;
        for (const auto& pair : split(con_args.weights, ',')) {
          auto eq = pair.find('=');
          if (eq == std::string::npos) throw InputError("weight '" + pair + "' is not label=value");
          item.weights.emplace_back(pair.substr(0, eq), parse_double(pair.substr(eq + 1), "weight"));
        }
      }
      Outputs outputs(g, {"contrast.csv"});
      const auto results = run_test_spec(fit.value_or(FitResult{}), {item});
      outputs.write("contrast.csv", [&](std::ostream& o) { write_tests_csv(o, results); });
      out << results[0].label << ": z = " << format_number(results[0].statistic)
          << ", p = " << format_pvalue(results[0].pvalue) << '\n';
      return 0;
    };
  });

  // vif
  std::string vif_fit, vif_model, vif_data;
  std::optional<std::string> vif_baseline;
  auto* vif_cmd = app.add_subcommand("vif", "Variance inflation factors; writes vif.csv");
  vif_cmd->add_option("--fit", vif_fit, "fit.json")->required();
  vif_cmd->add_option("--model", vif_model, "Model spec (JSON)")->required();
  vif_cmd->add_option("--baseline", vif_baseline,
                      "Means parametrization: reparametrize with this Mix x One cell as baseline");
  vif_cmd->add_option("--data", vif_data,
                      "Means parametrization: choose the baseline as the cell with most dyads in this sample");
  vif_cmd->callback([&] {
    action = [&]() -> int {
      FitResult fit = load_fit(vif_fit);
      ModelSpec model = load_model(vif_model);
      if (vif_baseline || !vif_data.empty()) {
        std::optional<NetworkSample> sample;
        if (!vif_data.empty()) sample = load_sample(vif_data);
        Reparametrization r =
            to_effects_parametrization(model, fit, vif_baseline, sample ? &*sample : nullptr);
        if (g.verbose) err << "baseline cell: " << r.baseline << '\n';
        model = std::move(r.model);
        fit = std::move(r.fit);
      }
      const VifResult result = vif(fit, model);
      Outputs outputs(g, {"vif.csv"});
      outputs.write("vif.csv", [&](std::ostream& o) { write_vif_csv(o, result); });
      if (result.collinear) {
        err << "warning: collinear pair " << result.collinear->first << " / " << result.collinear->second << '\n';
      }
      return 0;
    };
  });

  // curve
  struct {
    std::string fit, model, feature = "edges", grid = "2..10";
    std::optional<int> reference;
  } curve_args;
  auto* curve_cmd = app.add_subcommand("curve", "Network-size effect curve; writes curve.csv");
  curve_cmd->add_option("--fit", curve_args.fit, "fit.json")->required();
  curve_cmd->add_option("--model", curve_args.model, "Model spec (JSON)")->required();
  curve_cmd->add_option("--feature", curve_args.feature, "edges, twostar or triangle");
  curve_cmd->add_option("--grid", curve_args.grid, "Sizes, as lo..hi or a comma list");
  curve_cmd->add_option("--reference", curve_args.reference, "Reference size (curve is 0 there)");
  curve_cmd->callback([&] {
    action = [&]() -> int {
      const FitResult fit = load_fit(curve_args.fit);
      const ModelSpec model = load_model(curve_args.model);
      const EffectCurve curve =
          size_effect_curve(fit, model, parse_feature(curve_args.feature), parse_grid(curve_args.grid), curve_args.reference);
      Outputs outputs(g, {"curve.csv"});
      outputs.write("curve.csv", [&](std::ostream& o) { write_curve_csv(o, curve); });
      return 0;
    };
  });

  // power
  struct {
    std::string scenario, fit_method;
    std::optional<int> replicates;
  } power_args;
  auto* power_cmd = app.add_subcommand("power", "Monte-Carlo power curve; writes power.csv, power_plot.csv");
  power_cmd->add_option("--scenario", power_args.scenario, "Scenario (JSON)")->required();
  power_cmd->add_option("--replicates", power_args.replicates, "Override the scenario's replicate count");
  power_cmd->add_option("--fit-method", power_args.fit_method, "exact, mple or mcmc");
  power_cmd->callback([&] {
    action = [&]() -> int {
      PowerScenario scenario = load_scenario(power_args.scenario);
      if (g.seed) scenario.seed = *g.seed;
      if (power_args.replicates) scenario.replicates = *power_args.replicates;
      if (!power_args.fit_method.empty()) scenario.fit_method = parse_fit_method(power_args.fit_method);
      scenario.validate();
      Outputs outputs(g, {"power.csv", "power_plot.csv", "metadata.json"});
      const PowerCurve curve = empirical_power(scenario, g.workers);
      outputs.write("power.csv", [&](std::ostream& o) { write_power_csv(o, curve); });
      outputs.write("power_plot.csv", [&](std::ostream& o) { write_power_plot_csv(o, curve); });
      outputs.write_text("metadata.json",
                         metadata("power", scenario.seed, json::parse(scenario_to_json(scenario))));
      return 0;
    };
  });

  // simulate
  struct {
    std::string model, fit, theta, templates, output = "sample.jsonl";
    bool conditional = false;
    long draws = 1;
    std::optional<long> burnin, interval;
  } sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate networks from templates; writes a JSONL sample");
  sim_cmd->add_option("--model", sim_args.model, "Model spec (JSON)")->required();
  sim_cmd->add_option("--fit", sim_args.fit, "Take parameters from fit.json");
  sim_cmd->add_option("--theta", sim_args.theta, "Comma-separated parameters in model order");
  sim_cmd->add_option("--templates", sim_args.templates, "Template sample (JSONL)")->required();
  sim_cmd->add_flag("--conditional", sim_args.conditional, "Keep each template's edge count");
  sim_cmd->add_option("--draws", sim_args.draws, "Networks per template");
  sim_cmd->add_option("--burnin", sim_args.burnin, "Burn-in steps (default 20 n^2)");
  sim_cmd->add_option("--interval", sim_args.interval, "Steps between draws (default n^2)");
  sim_cmd->add_option("--output", sim_args.output, "Output file name inside --out");
  sim_cmd->callback([&] {
    action = [&]() -> int {
      if (sim_args.fit.empty() == sim_args.theta.empty()) throw InputError("give exactly one of --fit and --theta");
      const std::uint64_t seed = require_seed(g, "simulate");
      const ModelSpec model = load_model(sim_args.model);
      const Eigen::VectorXd theta = theta_for(model, sim_args.fit, sim_args.theta);
      const NetworkSample templates = load_sample(sim_args.templates);
      validate_model(model, templates);
      std::vector<SimTemplate> tmpls;
      for (const auto& net : templates) {
        tmpls.push_back({net, sim_args.conditional ? Constraint::fixed_edges(net.edge_count()) : Constraint::free()});
      }
      SimConfig config{sim_args.burnin, sim_args.interval, sim_args.draws, seed};
      Outputs outputs(g, {sim_args.output, "metadata.json"});
      const NetworkSample sample = simulate_sample(model, tmpls, theta, config, templates.taxonomy(), g.workers);
      outputs.write(sim_args.output, [&](std::ostream& o) { write_sample(o, sample); });
      outputs.write_text("metadata.json", metadata("simulate", seed,
                                                   {{"draws", sim_args.draws},
                                                    {"conditional", sim_args.conditional},
                                                    {"networks", sample.size()}}));
      return 0;
    };
  });

  // gof and residuals share their inputs.
  struct DiagArgs {
    std::string fit, model, data, stats = "edges,twostar,triangle";
    bool conditional = false;
    long draws = 200;
    std::optional<long> burnin, interval;
  };
  auto add_diag_options = [](CLI::App* cmd, DiagArgs& a) {
    cmd->add_option("--fit", a.fit, "fit.json")->required();
    cmd->add_option("--model", a.model, "Model spec (JSON)")->required();
    cmd->add_option("--data", a.data, "Sample (JSONL)")->required();
    cmd->add_option("--stats", a.stats, "Statistics: edges, twostar, triangle, match:<attr>");
    cmd->add_flag("--conditional", a.conditional, "Condition on observed edge counts");
    cmd->add_option("--draws", a.draws, "Simulated networks per observed network");
    cmd->add_option("--burnin", a.burnin, "Burn-in steps (default 20 n^2)");
    cmd->add_option("--interval", a.interval, "Steps between draws (default n^2)");
  };
  auto diag_options = [&](const DiagArgs& a) {
    DiagnosticOptions opt;
    opt.sim.burnin = a.burnin;
    opt.sim.interval = a.interval;
    opt.workers = g.workers;
    return opt;
  };

  DiagArgs gof_args;
  auto* gof_cmd = app.add_subcommand("gof", "Goodness-of-fit percentiles; writes gof.csv");
  add_diag_options(gof_cmd, gof_args);
  gof_cmd->callback([&] {
    action = [&]() -> int {
      const std::uint64_t seed = require_seed(g, "gof");
      const FitResult fit = load_fit(gof_args.fit);
      const ModelSpec model = load_model(gof_args.model);
      const NetworkSample sample = load_sample(gof_args.data);
      const auto stats = parse_stats(gof_args.stats);
      Outputs outputs(g, {"gof.csv", "metadata.json"});
      const GofTable table = gof_summary(fit, model, sample, constraints_for(sample, gof_args.conditional), stats,
                                         gof_args.draws, seed, diag_options(gof_args));
      outputs.write("gof.csv", [&](std::ostream& o) { write_gof_csv(o, table); });
      outputs.write_text("metadata.json", metadata("gof", seed, {{"draws", gof_args.draws}, {"stats", gof_args.stats}}));
      return 0;
    };
  });

  DiagArgs res_args;
  std::string res_covariates;
  auto* res_cmd =
      app.add_subcommand("residuals", "Simulated residuals and covariate regressions; writes residuals.csv, regression.csv");
  add_diag_options(res_cmd, res_args);
  res_cmd->add_option("--covariates", res_covariates, "Network attributes to regress residuals on (comma list)");
  res_cmd->callback([&] {
    action = [&]() -> int {
      const std::uint64_t seed = require_seed(g, "residuals");
      const FitResult fit = load_fit(res_args.fit);
      const ModelSpec model = load_model(res_args.model);
      const NetworkSample sample = load_sample(res_args.data);
      const auto stats = parse_stats(res_args.stats);
      const auto covariates = split(res_covariates, ',');
      std::vector<std::string> names{"residuals.csv", "metadata.json"};
      if (!covariates.empty()) names.push_back("regression.csv");
      Outputs outputs(g, names);
      const ResidualTable table = simulated_residuals(fit, model, sample, constraints_for(sample, res_args.conditional),
                                                      stats, res_args.draws, seed, diag_options(res_args));
      outputs.write("residuals.csv", [&](std::ostream& o) { write_residuals_csv(o, table); });
      if (!covariates.empty()) {
        std::vector<TestResult> tests;
        for (const auto& cov : covariates) {
          std::map<std::string, double> values;
          for (const auto& net : sample) {
            if (auto r = network_real(net.attrs(), cov)) values[net.id()] = *r;
            else if (auto f = network_flag(net.attrs(), cov)) values[net.id()] = *f ? 1.0 : 0.0;
          }
          if (values.empty()) throw InputError("no network has attribute '" + cov + "'");
          for (const auto& stat : stats) {
            tests.push_back(residual_regression(table, stat_label(stat), values, stat_label(stat) + "~" + cov));
          }
        }
        outputs.write("regression.csv", [&](std::ostream& o) { write_regression_csv(o, tests); });
      }
      outputs.write_text("metadata.json",
                         metadata("residuals", seed, {{"draws", res_args.draws}, {"stats", res_args.stats}}));
      return 0;
    };
  });

  auto* schema_cmd = app.add_subcommand("schema", "Print the CSV output schemas");
  schema_cmd->callback([&] { schema_flag = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (schema_flag) {
      for (const auto& [file, header] : csv_schemas()) out << file << ": " << header << '\n';
      out << "exit codes: 0 success, 1 input error, 2 statistical nonconvergence\n";
      return 0;
    }
    if (!action) {
      out << app.help();
      return 1;
    }
    return action();
  } catch (const NonConvergenceError& e) {
    err << "nonconvergence: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.push_back("ergmkit");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace ergmkit::cli
