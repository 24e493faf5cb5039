#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rwb/derivations.hpp"
#include "rwb/json_io.hpp"
#include "rwb/parse.hpp"
#include "rwb/suite.hpp"

namespace {

using nlohmann::json;

rwb::SuiteConfig load_config(const std::string& path) {
  if (path.empty()) return rwb::default_config();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  json doc = json::parse(in);  // parse_error carries the byte position
  return rwb::parse_config(doc);
}

int run_eval(const rwb::SuiteConfig& config, const std::string& expr_text,
             const std::string& action) {
  const rwb::Expression e =
      rwb::parse_expression(expr_text, config.model, config.functions);
  if (action == "classify") {
    std::cout << to_string(rwb::classify(e)) << "\n";
    return 0;
  }
  if (action == "simplify") {
    std::cout << rwb::expression_to_json(rwb::simplify(e)).dump(2) << "\n";
    return 0;
  }
  if (action == "dbar_s") {
    std::cout << rwb::expression_to_json(rwb::superderivation_bar(e)).dump(2) << "\n";
    return 0;
  }
  if (action == "dbar_h") {
    std::cout << rwb::expression_to_json(rwb::derivation_bar(e)).dump(2) << "\n";
    return 0;
  }
  // expect: vacuum expectation; pure scalars shortcut the representation.
  bool scalar = true;
  for (const auto& term : e.terms()) scalar = scalar && term.word.empty();
  rwb::Complex value{0.0, 0.0};
  if (scalar) {
    for (const auto& term : e.terms()) value += term.coeff;
  } else {
    rwb::FockRep rep(config.model, config.rep);
    value = rep.state_expectation(e);
  }
  std::cout << rwb::complex_to_json(value).dump() << "\n";
  return 0;
}

int run_checks(rwb::SuiteConfig config, const std::vector<std::string>& only,
               const std::string& out_override) {
  if (!out_override.empty()) config.out_path = out_override;
  rwb::SuiteResult result = rwb::run_suite(config, only);
  const std::string text = result.document.dump(2) + "\n";
  if (config.out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(config.out_path);
    if (!out) throw std::runtime_error("cannot write report to " + config.out_path);
    out << text;
  }
  return result.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"resolvent workbench: relation batteries, derivation checks and "
               "flow-generator verification on a truncated fermion-boson "
               "representation"};

  std::string config_path;
  std::vector<std::string> only;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string expr_text;
  std::string action = "classify";

  app.add_option("--config", config_path, "suite config (JSON); omit for the default suite");
  auto* check_opt =
      app.add_option("--check", only, "run only the named checks (repeatable)");
  auto* seed_opt = app.add_option("--seed", seed, "override the config RNG seed");
  app.add_option("--out", out_path, "report path (default: config `out`, else stdout)");
  auto* expr_opt = app.add_option("--expr", expr_text, "evaluate one expression and exit");
  app.add_option("--action", action, "what to do with --expr")
      ->check(CLI::IsMember({"classify", "simplify", "dbar_s", "dbar_h", "expect"}))
      ->needs(expr_opt);
  check_opt->excludes(expr_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    rwb::SuiteConfig config = load_config(config_path);
    if (*seed_opt) config.seed = seed;
    if (*expr_opt) return run_eval(config, expr_text, action);
    return run_checks(std::move(config), only, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
