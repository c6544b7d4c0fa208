#pragma once

// File formats: JSONL network samples, JSON model/fit/scenario/test specs
// and the CSV tables written by the command-line tool.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ergmkit/diagnostics.hpp"
#include "ergmkit/estimation.hpp"
#include "ergmkit/inference.hpp"
#include "ergmkit/modelstats.hpp"
#include "ergmkit/netcore.hpp"
#include "ergmkit/powerdesign.hpp"

namespace ergmkit {

// Header line {"taxonomy":[...]} (or {"taxonomy":"household"} for the
// built-in seven groups), then one network object per line. Blank lines are
// skipped. Errors name the source and line.
NetworkSample read_sample(std::istream& in, const std::string& source = "<input>");
NetworkSample load_sample(const std::filesystem::path& path);
void write_sample(std::ostream& out, const NetworkSample& sample);
void save_sample(const std::filesystem::path& path, const NetworkSample& sample);

std::string network_to_json(const Network& net);

// {"terms":[{"stat":{...},"mod":{...},"label":...}],"offsets":[{"stat":..,"mod":..,"coef":..}]}
// stat kinds: edges, twostar, triangle, match {attr}, mix {attr, a, b};
// mod kinds: one, logn, logn2, flag {name}, real {name}. Omitted mod is one,
// omitted label is default_label.
ModelSpec parse_model(const std::string& text, const std::string& source = "<input>");
ModelSpec load_model(const std::filesystem::path& path);
std::string model_to_json(const ModelSpec& model);

// Non-finite numbers are written as null and read back as NaN.
std::string fit_to_json(const FitResult& fit);
FitResult parse_fit(const std::string& text, const std::string& source = "<input>");
FitResult load_fit(const std::filesystem::path& path);

// Field names follow PowerScenario; "S_grid" and "theta_h1" ({"homophily":x,
// "edges":y}) are accepted as in the scenario file format.
PowerScenario parse_scenario(const std::string& text, const std::string& source = "<input>");
PowerScenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const PowerScenario& scenario);

// Requested tests, run in file order:
//   {"tests":[{"kind":"omnibus","label":..,"terms":[..]},
//             {"kind":"contrast","label":..,"weights":{"a":1,"b":-1},"tail":"two-sided"},
//             {"kind":"z","label":..,"estimate":1.16,"se":0.47,"tail":"upper"}]}
struct TestSpecItem {
  enum class Kind { Omnibus, Contrast, Z };
  Kind kind = Kind::Omnibus;
  std::string label;
  std::vector<std::string> terms;
  std::vector<std::pair<std::string, double>> weights;
  double estimate = 0.0;
  double se = 0.0;
  Tail tail = Tail::TwoSided;
};

std::vector<TestSpecItem> parse_test_spec(const std::string& text, const std::string& source = "<input>");
std::vector<TestSpecItem> load_test_spec(const std::filesystem::path& path);
// Runs the tests against `fit`; unknown labels raise InputError listing the
// valid ones.
std::vector<TestResult> run_test_spec(const FitResult& fit, const std::vector<TestSpecItem>& items);

std::string read_text(const std::filesystem::path& path);

// Shortest round-trip decimal; "NA" for NaN, "Inf"/"-Inf" for infinities.
std::string format_number(double x);

void write_coefs_csv(std::ostream& out, const FitResult& fit);
void write_tests_csv(std::ostream& out, const std::vector<TestResult>& tests);
void write_cor_csv(std::ostream& out, const FitResult& fit);
void write_vif_csv(std::ostream& out, const VifResult& result);
void write_curve_csv(std::ostream& out, const EffectCurve& curve);
void write_power_csv(std::ostream& out, const PowerCurve& curve);
// One row per S with a normal-approximation 95% band around p_hat.
void write_power_plot_csv(std::ostream& out, const PowerCurve& curve);
void write_residuals_csv(std::ostream& out, const ResidualTable& table);
void write_regression_csv(std::ostream& out, const std::vector<TestResult>& tests);
void write_gof_csv(std::ostream& out, const GofTable& table);

// Header lines of every CSV written above, for the schema dump.
std::map<std::string, std::string> csv_schemas();

}  // namespace ergmkit
