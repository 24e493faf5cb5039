#include "rwb/suite.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>
#include <utility>

#include "rwb/json_io.hpp"
#include "rwb/parse.hpp"

namespace rwb {
namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config error at " + path + ": " + what);
}

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

long int_field(const json& j, const std::string& path) {
  if (!j.is_number_integer()) config_fail(path, "expected an integer");
  return j.get<long>();
}

double number_field(const json& j, const std::string& path) {
  if (!j.is_number()) config_fail(path, "expected a number");
  return j.get<double>();
}

std::string string_field(const json& j, const std::string& path) {
  if (!j.is_string()) config_fail(path, "expected a string");
  return j.get<std::string>();
}

void reject_unknown_keys(const json& obj, const std::string& prefix,
                         const std::set<std::string>& known) {
  for (const auto& item : obj.items())
    if (!known.count(item.key()))
      config_fail(prefix.empty() ? item.key() : prefix + "." + item.key(),
                  "unknown field");
}

ModelPtr parse_model(const json& j) {
  if (!j.is_object()) config_fail("model", "expected an object");
  reject_unknown_keys(j, "model", {"flavor", "pairs", "size"});
  if (!j.contains("flavor")) config_fail("model.flavor", "required");
  const std::string flavor = string_field(j["flavor"], "model.flavor");
  if (flavor == "canonical_pairs") {
    if (!j.contains("pairs")) config_fail("model.pairs", "required");
    const long pairs = int_field(j["pairs"], "model.pairs");
    if (pairs < 1) config_fail("model.pairs", "expected a positive integer");
    if (j.contains("size")) config_fail("model.size", "not a canonical_pairs field");
    return std::make_shared<const SpaceModel>(
        SpaceModel::canonical_pairs(static_cast<int>(pairs)));
  }
  if (flavor == "lightray_hermite") {
    if (!j.contains("size")) config_fail("model.size", "required");
    const long size = int_field(j["size"], "model.size");
    if (size < 2 || size % 2 != 0)
      config_fail("model.size", "expected a positive even integer");
    if (j.contains("pairs")) config_fail("model.pairs", "not a lightray_hermite field");
    return std::make_shared<const SpaceModel>(
        SpaceModel::lightray_hermite(static_cast<int>(size)));
  }
  config_fail("model.flavor", "unknown flavor \"" + flavor +
                                  "\" (expected canonical_pairs or lightray_hermite)");
}

RepConfig parse_rep(const json& j) {
  RepConfig rep;
  if (j.is_null()) return rep;
  if (!j.is_object()) config_fail("rep", "expected an object");
  reject_unknown_keys(
      j, "rep", {"boson_cutoff", "safe_margin", "solver_tolerance", "dimension_budget"});
  if (j.contains("boson_cutoff")) {
    const long d = int_field(j["boson_cutoff"], "rep.boson_cutoff");
    if (d < 4) config_fail("rep.boson_cutoff", "expected an integer >= 4");
    rep.boson_cutoff = static_cast<int>(d);
  }
  if (j.contains("safe_margin")) {
    const long m = int_field(j["safe_margin"], "rep.safe_margin");
    if (m < 1 || 2 * m >= rep.boson_cutoff)
      config_fail("rep.safe_margin", "need 0 < margin < boson_cutoff/2");
    rep.safe_margin = static_cast<int>(m);
  }
  if (j.contains("solver_tolerance")) {
    const double t = number_field(j["solver_tolerance"], "rep.solver_tolerance");
    if (t <= 0.0) config_fail("rep.solver_tolerance", "expected a positive number");
    rep.solver_tolerance = t;
  }
  if (j.contains("dimension_budget")) {
    const long b = int_field(j["dimension_budget"], "rep.dimension_budget");
    if (b < 1) config_fail("rep.dimension_budget", "expected a positive integer");
    rep.dimension_budget = b;
  }
  return rep;
}

std::map<std::string, Vec> parse_functions(const json& j, const SpaceModel& model) {
  if (!j.is_object()) config_fail("test_functions", "expected an object");
  std::map<std::string, Vec> out;
  for (const auto& item : j.items()) {
    const std::string path = "test_functions." + item.key();
    if (!is_identifier(item.key())) config_fail(path, "name must be a C identifier");
    static const std::set<std::string> reserved = {"i", "res", "cliff", "field", "zeta"};
    if (reserved.count(item.key())) config_fail(path, "name is reserved");
    Vec f;
    try {
      f = vec_from_json(item.value());
    } catch (const std::invalid_argument& e) {
      config_fail(path, e.what());
    }
    if (f.size() != model.dim())
      config_fail(path, "expected " + std::to_string(model.dim()) +
                            " coefficients, got " + std::to_string(f.size()));
    if (model.tau(f, f) == 0.0) config_fail(path, "must be a nonzero vector");
    out.emplace(item.key(), std::move(f));
  }
  return out;
}

/// Three small dense vectors at tau-norm 0.04, pairwise sigma-coupled for
/// generic models; used when the config binds no test functions.
std::map<std::string, Vec> synthesize_functions(const SpaceModel& model) {
  std::map<std::string, Vec> out;
  for (int k = 0; k < 3; ++k) {
    Vec v(model.dim());
    for (int i = 0; i < model.dim(); ++i)
      v[i] = std::sin((k + 1) * (i + 1) + 0.3 * (k + 1));
    out.emplace("f" + std::to_string(k + 1),
                Vec(v * (0.04 / std::sqrt(model.tau(v, v)))));
  }
  return out;
}

// --- per-check option plumbing ----------------------------------------------

struct Job {
  std::string id;
  json tags = json::object();  // merged into report params
  std::function<CheckReport(const FockRep&)> run;
};

struct Adapter {
  const SuiteConfig& cfg;
  const std::string path;  // "checks[k]"
  const json& options;

  void allow_keys(const std::set<std::string>& keys) const {
    for (const auto& item : options.items())
      if (!keys.count(item.key())) config_fail(path + "." + item.key(), "unknown option");
  }

  const std::string& first_name(int index = 0) const {
    if (static_cast<std::size_t>(index) >= cfg.functions.size())
      config_fail(path, "needs at least " + std::to_string(index + 1) +
                            " test functions; define test_functions");
    auto it = cfg.functions.begin();
    std::advance(it, index);
    return it->first;
  }

  const Vec& named_function(const std::string& name, const std::string& where) const {
    auto it = cfg.functions.find(name);
    if (it == cfg.functions.end())
      config_fail(where, "unknown test function \"" + name + "\"");
    return it->second;
  }

  std::vector<Vec> function_list(const char* key) const {
    std::vector<Vec> fs;
    if (options.contains(key)) {
      const json& j = options[key];
      if (!j.is_array() || j.empty())
        config_fail(path + "." + key, "expected a non-empty array of names");
      for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string where = path + "." + key + "[" + std::to_string(i) + "]";
        fs.push_back(named_function(string_field(j[i], where), where));
      }
    } else {
      for (const auto& kv : cfg.functions) fs.push_back(kv.second);
    }
    return fs;
  }

  Vec single_function(const char* key) const {
    if (options.contains(key))
      return named_function(string_field(options[key], path + "." + key),
                            path + "." + key);
    return cfg.functions.at(first_name());
  }

  std::vector<double> lambda_grid(const char* key, std::vector<double> fallback) const {
    if (!options.contains(key)) return fallback;
    const json& j = options[key];
    if (!j.is_array() || j.empty())
      config_fail(path + "." + key, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(
          number_field(j[i], path + "." + key + "[" + std::to_string(i) + "]"));
    return out;
  }

  int count_option(const char* key, int fallback, int lo) const {
    if (!options.contains(key)) return fallback;
    const long n = int_field(options[key], path + "." + std::string(key));
    if (n < lo) config_fail(path + "." + std::string(key),
                            "expected an integer >= " + std::to_string(lo));
    return static_cast<int>(n);
  }

  FDStep fd_options() const {
    FDStep fd;
    if (options.contains("h")) {
      fd.h = number_field(options["h"], path + ".h");
      if (fd.h <= 0.0) config_fail(path + ".h", "expected a positive number");
    }
    if (options.contains("scheme")) {
      const std::string s = string_field(options["scheme"], path + ".scheme");
      if (s == "central2")
        fd.scheme = FDScheme::Central2;
      else if (s == "richardson4")
        fd.scheme = FDScheme::Richardson4;
      else
        config_fail(path + ".scheme", "unknown scheme \"" + s +
                                          "\" (expected central2 or richardson4)");
    }
    return fd;
  }

  double tolerance_option(double fallback) const {
    if (!options.contains("tolerance")) return fallback;
    const double t = number_field(options["tolerance"], path + ".tolerance");
    if (t <= 0.0) config_fail(path + ".tolerance", "expected a positive number");
    return t;
  }

  Expression parse_element(const std::string& text, const std::string& where) const {
    try {
      return parse_expression(text, cfg.model, cfg.functions);
    } catch (const std::invalid_argument& e) {
      config_fail(where, e.what());
    }
  }

  /// Elements come as expression strings; `fallback` supplies the defaults
  /// (already expanded with the bound function names).
  std::vector<std::pair<std::string, Expression>> element_list(
      std::vector<std::string> fallback) const {
    std::vector<std::string> texts;
    if (options.contains("elements")) {
      const json& j = options["elements"];
      if (!j.is_array() || j.empty())
        config_fail(path + ".elements", "expected a non-empty array of expressions");
      for (std::size_t i = 0; i < j.size(); ++i)
        texts.push_back(
            string_field(j[i], path + ".elements[" + std::to_string(i) + "]"));
    } else {
      texts = std::move(fallback);
    }
    std::vector<std::pair<std::string, Expression>> out;
    for (std::size_t i = 0; i < texts.size(); ++i)
      out.emplace_back(texts[i], parse_element(texts[i],
                                               path + ".elements[" +
                                                   std::to_string(i) + "]"));
    return out;
  }

  std::vector<std::string> vector_tags() const {
    std::vector<std::string> tags = {"vacuum", "excited"};
    if (!options.contains("vectors")) return tags;
    const json& j = options["vectors"];
    if (!j.is_array() || j.empty())
      config_fail(path + ".vectors", "expected a non-empty array of vector tags");
    tags.clear();
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string where = path + ".vectors[" + std::to_string(i) + "]";
      const std::string tag = string_field(j[i], where);
      if (tag != "vacuum" && tag != "excited")
        config_fail(where, "unknown test vector \"" + tag +
                               "\" (expected vacuum or excited)");
      tags.push_back(tag);
    }
    return tags;
  }
};

std::vector<Vec> all_functions(const SuiteConfig& cfg) {
  std::vector<Vec> fs;
  for (const auto& kv : cfg.functions) fs.push_back(kv.second);
  return fs;
}

/// Tags come pre-validated ("vacuum" | "excited"); the excited vector is the
/// seed-deterministic domain vector over all bound functions.
VecC make_test_vector(const SuiteConfig& cfg, const std::string& tag,
                      const FockRep& rep) {
  if (tag == "excited") {
    Rng rng(cfg.seed);
    return domain_vector(rep, rng, all_functions(cfg));
  }
  return rep.vacuum();
}

void append_jobs(std::vector<Job>& jobs, const SuiteConfig& cfg, std::size_t index,
                 const CheckSpec& spec) {
  const std::string path = "checks[" + std::to_string(index) + "]";
  const Adapter opt{cfg, path, spec.options};
  const std::uint64_t seed = cfg.seed;

  if (spec.id == "resolvent_battery") {
    opt.allow_keys({"functions", "lambdas", "vectors"});
    auto fs = opt.function_list("functions");
    auto lambdas = opt.lambda_grid("lambdas", {1.0, -1.0, 2.0, 10.0});
    const int n = opt.count_option("vectors", 20, 1);
    jobs.push_back({spec.id, {}, [=](const FockRep& rep) {
                      return check_resolvent_battery(rep, fs, lambdas, seed, n);
                    }});
    return;
  }
  if (spec.id == "norm_law") {
    opt.allow_keys({"f", "lambdas"});
    Vec f = opt.single_function("f");
    auto lambdas = opt.lambda_grid("lambdas", {1.0, 2.0, 10.0});
    jobs.push_back({spec.id, {}, [=](const FockRep& rep) {
                      return check_norm_law(rep, f, lambdas);
                    }});
    return;
  }
  if (spec.id == "asymptotics") {
    opt.allow_keys({"f", "lambdas", "vectors"});
    Vec f = opt.single_function("f");
    auto lambdas = opt.lambda_grid("lambdas", {1, 2, 4, 8, 16, 32, 64});
    const int n = opt.count_option("vectors", 5, 2);
    jobs.push_back({spec.id, {}, [=](const FockRep& rep) {
                      return check_asymptotics(rep, f, lambdas, seed, n);
                    }});
    return;
  }
  if (spec.id == "generator") {
    opt.allow_keys({"elements", "h", "scheme", "tolerance"});
    const std::string f1 = opt.first_name(0);
    const std::string f2 = cfg.functions.size() > 1 ? opt.first_name(1) : f1;
    auto elements = opt.element_list({"cliff(" + f1 + ")", "res(1, " + f1 + ")",
                                      "cliff(" + f1 + ") * res(1, " + f2 + ")"});
    const FDStep fd = opt.fd_options();
    const double tol = opt.tolerance_option(1e-5);
    for (const auto& [text, element] : elements)
      jobs.push_back({spec.id, json{{"element", text}},
                      [=, e = element](const FockRep& rep) {
                        Rng rng(seed);
                        return check_generator(
                            rep, e, domain_vector(rep, rng, all_functions(cfg)), fd,
                            tol);
                      }});
    return;
  }
  if (spec.id == "susy_core") {
    opt.allow_keys({"elements", "lambdas", "vectors", "h", "scheme", "tolerance"});
    const std::string f1 = opt.first_name(0);
    const std::string f2 = cfg.functions.size() > 1 ? opt.first_name(1) : f1;
    auto elements = opt.element_list({"zeta(" + f1 + ")",
                                      "zeta(" + f1 + ") * res(1, " + f2 + ")",
                                      "zeta(" + f1 + ") * zeta(" + f2 + ")"});
    auto lambdas = opt.lambda_grid("lambdas", {1.0, 10.0, 100.0});
    auto tags = opt.vector_tags();
    const FDStep fd = opt.fd_options();
    const double tol = opt.tolerance_option(1e-5);
    for (const auto& [text, element] : elements)
      for (const auto& tag : tags)
        jobs.push_back({spec.id, json{{"element", text}, {"vector", tag}},
                        [=, e = element](const FockRep& rep) {
                          return check_susy_core(rep, e, lambdas,
                                                 make_test_vector(cfg, tag, rep), fd,
                                                 tol);
                        }});
    return;
  }
  if (spec.id == "susy_identity") {
    opt.allow_keys({"functions", "words", "max_len", "scale"});
    auto fs = opt.function_list("functions");
    const int words = opt.count_option("words", 50, 0);
    const int max_len = opt.count_option("max_len", 4, 1);
    double scale = 0.03;
    if (spec.options.contains("scale")) {
      scale = number_field(spec.options["scale"], path + ".scale");
      if (scale < 0.0) config_fail(path + ".scale", "expected a nonnegative number");
    }
    if (scale > 0.0)
      for (auto& f : fs) f *= scale / std::sqrt(cfg.model->tau(f, f));
    jobs.push_back({spec.id, json{{"scale", scale}}, [=](const FockRep& rep) {
                      return check_susy_identity(rep, fs, seed, words, max_len);
                    }});
    return;
  }
  if (spec.id == "state_conditions") {
    opt.allow_keys({"h", "tolerance"});
    double h = 0.0;
    if (spec.options.contains("h")) {
      h = number_field(spec.options["h"], path + ".h");
      if (h <= 0.0) config_fail(path + ".h", "expected a positive number");
    }
    const double tol = opt.tolerance_option(0.0);
    jobs.push_back({spec.id, {}, [=](const FockRep& rep) {
                      return check_state_conditions(rep, h, tol);
                    }});
    return;
  }
  if (spec.id == "density_net") {
    opt.allow_keys({"element", "lambdas", "vector"});
    std::string text = "cliff(" + opt.first_name(0) + ")";
    if (spec.options.contains("element"))
      text = string_field(spec.options["element"], path + ".element");
    Expression b = opt.parse_element(text, path + ".element");
    auto lambdas = opt.lambda_grid("lambdas", {2, 4, 8, 16, 32, 64});
    std::string tag = "vacuum";
    if (spec.options.contains("vector")) {
      tag = string_field(spec.options["vector"], path + ".vector");
      if (tag != "vacuum" && tag != "excited")
        config_fail(path + ".vector",
                    "unknown test vector \"" + tag + "\" (expected vacuum or excited)");
    }
    jobs.push_back({spec.id, json{{"element", text}, {"vector", tag}},
                    [=](const FockRep& rep) {
                      return check_density_net(rep, b, lambdas,
                                               make_test_vector(cfg, tag, rep));
                    }});
    return;
  }
  if (spec.id == "fd_order") {
    opt.allow_keys({"elements", "steps"});
    const std::string f1 = opt.first_name(0);
    auto elements =
        opt.element_list({"res(1, " + f1 + ")", "zeta(" + f1 + ")"});
    auto steps = opt.lambda_grid("steps", {0.05, 0.025, 0.0125, 0.00625});
    for (const auto& [text, element] : elements)
      jobs.push_back({spec.id, json{{"element", text}},
                      [=, e = element](const FockRep& rep) {
                        Rng rng(seed);
                        return check_fd_order(
                            rep, e, domain_vector(rep, rng, all_functions(cfg)), steps);
                      }});
    return;
  }
  if (spec.id == "truncation_guard") {
    opt.allow_keys({"functions"});
    std::vector<Vec> fs;
    if (spec.options.contains("functions")) {
      fs = opt.function_list("functions");
    } else {
      fs.push_back(cfg.functions.at(opt.first_name(0)));
      fs.push_back(cfg.functions.at(opt.first_name(cfg.functions.size() > 1 ? 1 : 0)));
    }
    jobs.push_back({spec.id, {}, [=](const FockRep& rep) {
                      return check_truncation_guard(rep, fs, seed);
                    }});
    return;
  }
  config_fail(path + ".id", "unknown check \"" + spec.id + "\"");
}

std::vector<Job> build_jobs(const SuiteConfig& cfg, const std::vector<std::string>& only) {
  std::set<std::string> wanted(only.begin(), only.end());
  for (const auto& id : only) {
    bool known = false;
    for (const auto& k : known_checks()) known |= (k == id);
    if (!known) throw std::invalid_argument("unknown check id \"" + id + "\"");
    bool configured = false;
    for (const auto& spec : cfg.checks) configured |= (spec.id == id);
    if (!configured)
      throw std::invalid_argument("check \"" + id + "\" is not configured in this suite");
  }
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < cfg.checks.size(); ++k) {
    if (!wanted.empty() && !wanted.count(cfg.checks[k].id)) continue;
    append_jobs(jobs, cfg, k, cfg.checks[k]);
  }
  return jobs;
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> ids = {
      "resolvent_battery", "norm_law",        "asymptotics", "generator",
      "susy_core",         "susy_identity",   "state_conditions",
      "density_net",       "fd_order",        "truncation_guard"};
  return ids;
}

SuiteConfig parse_config(const json& doc) {
  if (!doc.is_object()) config_fail("config", "expected a JSON object");
  reject_unknown_keys(
      doc, "", {"schema", "model", "rep", "test_functions", "checks", "seed", "out"});
  SuiteConfig cfg;
  if (doc.contains("schema")) {
    const long v = int_field(doc["schema"], "schema");
    if (v != 1) config_fail("schema", "unsupported schema " + std::to_string(v));
  }
  if (!doc.contains("model")) config_fail("model", "required");
  cfg.model = parse_model(doc["model"]);
  cfg.rep = parse_rep(doc.contains("rep") ? doc["rep"] : json());
  cfg.functions = doc.contains("test_functions")
                      ? parse_functions(doc["test_functions"], *cfg.model)
                      : synthesize_functions(*cfg.model);
  if (doc.contains("seed")) {
    const json& s = doc["seed"];
    const bool ok = s.is_number_unsigned() ||
                    (s.is_number_integer() && s.get<long long>() >= 0);
    if (!ok) config_fail("seed", "expected an unsigned integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("out")) cfg.out_path = string_field(doc["out"], "out");
  if (doc.contains("checks")) {
    if (!doc["checks"].is_array()) config_fail("checks", "expected an array");
    for (std::size_t k = 0; k < doc["checks"].size(); ++k) {
      const json& entry = doc["checks"][k];
      const std::string path = "checks[" + std::to_string(k) + "]";
      CheckSpec spec;
      if (entry.is_string()) {
        spec.id = entry.get<std::string>();
      } else if (entry.is_object()) {
        if (!entry.contains("id")) config_fail(path + ".id", "required");
        spec.id = string_field(entry["id"], path + ".id");
        spec.options = entry;
        spec.options.erase("id");
      } else {
        config_fail(path, "expected a check id or an object with an id");
      }
      bool known = false;
      for (const auto& id : known_checks()) known |= (id == spec.id);
      if (!known) config_fail(path + ".id", "unknown check \"" + spec.id + "\"");
      cfg.checks.push_back(std::move(spec));
    }
  } else {
    for (const auto& id : known_checks()) cfg.checks.push_back({id, json::object()});
  }
  // Fail early on malformed options / unresolvable names.
  build_jobs(cfg, {});
  return cfg;
}

SuiteConfig default_config() {
  SuiteConfig cfg;
  cfg.model = std::make_shared<const SpaceModel>(SpaceModel::canonical_pairs(1));
  cfg.functions = synthesize_functions(*cfg.model);
  for (const auto& id : known_checks()) cfg.checks.push_back({id, json::object()});
  return cfg;
}

SuiteResult run_suite(const SuiteConfig& config, const std::vector<std::string>& only) {
  std::vector<Job> jobs = build_jobs(config, only);
  FockRep rep = [&] {
    try {
      return FockRep(config.model, config.rep);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("building representation: ") + e.what());
    }
  }();
  SuiteResult result;
  json reports = json::array();
  for (const auto& job : jobs) {
    CheckReport r = job.run(rep);
    r.params["seed"] = config.seed;
    for (const auto& item : job.tags.items()) r.params[item.key()] = item.value();
    result.all_pass = result.all_pass && r.pass();
    reports.push_back(report_to_json(r));
  }
  result.document = json{{"schema", config.schema},
                         {"seed", config.seed},
                         {"verdict", result.all_pass ? "pass" : "fail"},
                         {"reports", std::move(reports)}};
  return result;
}

}  // namespace rwb
