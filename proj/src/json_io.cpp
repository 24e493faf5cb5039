#include "rwb/json_io.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rwb {
namespace {

using nlohmann::json;

std::string kind_token(AtomKind k) {
  switch (k) {
    case AtomKind::Cliff: return "cliff";
    case AtomKind::Field: return "field";
    case AtomKind::Res: return "res";
  }
  return "unknown";
}

AtomKind kind_from_token(const std::string& token) {
  if (token == "cliff") return AtomKind::Cliff;
  if (token == "field") return AtomKind::Field;
  if (token == "res") return AtomKind::Res;
  throw std::invalid_argument("unknown atom kind \"" + token + "\"");
}

}  // namespace

json vec_to_json(const Vec& v) {
  json out = json::array();
  for (long i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vec vec_from_json(const json& j) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("expected a non-empty array of numbers");
  Vec v(static_cast<long>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw std::invalid_argument("expected a number at index " + std::to_string(i));
    v[static_cast<long>(i)] = j[i].get<double>();
  }
  return v;
}

json complex_to_json(Complex z) {
  if (std::abs(z.imag()) <= 1e-14 * std::max(1.0, std::abs(z.real())))
    return json(z.real());
  return json::array({z.real(), z.imag()});
}

json expression_to_json(const Expression& a) {
  json terms = json::array();
  for (const auto& term : a.terms()) {
    json word = json::array();
    for (const auto& atom : term.word) {
      json entry = {{"kind", kind_token(atom.kind)}, {"coeffs", vec_to_json(atom.arg)}};
      if (atom.kind == AtomKind::Res) entry["lambda"] = atom.lambda;
      word.push_back(std::move(entry));
    }
    terms.push_back(json{{"coeff", json::array({term.coeff.real(), term.coeff.imag()})},
                         {"word", std::move(word)}});
  }
  json out = {{"class", to_string(classify(a))}, {"terms", std::move(terms)}};
  if (a.core_provenance()) out["core"] = true;
  return out;
}

Expression expression_from_json(const json& j, const ModelPtr& model) {
  if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array())
    throw std::invalid_argument("expression JSON requires a \"terms\" array");
  std::vector<Term> terms;
  bool has_atoms = false;
  for (std::size_t t = 0; t < j["terms"].size(); ++t) {
    const json& jt = j["terms"][t];
    const std::string where = "terms[" + std::to_string(t) + "]";
    if (!jt.is_object() || !jt.contains("coeff") || !jt.contains("word"))
      throw std::invalid_argument(where + " requires \"coeff\" and \"word\"");
    const json& jc = jt["coeff"];
    if (!jc.is_array() || jc.size() != 2 || !jc[0].is_number() || !jc[1].is_number())
      throw std::invalid_argument(where + ".coeff must be [re, im]");
    Term term;
    term.coeff = Complex(jc[0].get<double>(), jc[1].get<double>());
    if (!jt["word"].is_array())
      throw std::invalid_argument(where + ".word must be an array");
    for (std::size_t k = 0; k < jt["word"].size(); ++k) {
      const json& ja = jt["word"][k];
      const std::string spot = where + ".word[" + std::to_string(k) + "]";
      if (!ja.is_object() || !ja.contains("kind") || !ja["kind"].is_string() ||
          !ja.contains("coeffs"))
        throw std::invalid_argument(spot + " requires \"kind\" and \"coeffs\"");
      Atom atom;
      atom.kind = kind_from_token(ja["kind"].get<std::string>());
      atom.arg = vec_from_json(ja["coeffs"]);
      if (atom.kind == AtomKind::Res) {
        if (!ja.contains("lambda") || !ja["lambda"].is_number())
          throw std::invalid_argument(spot + " resolvent atom requires \"lambda\"");
        atom.lambda = ja["lambda"].get<double>();
      }
      term.word.push_back(std::move(atom));
      has_atoms = true;
    }
    terms.push_back(std::move(term));
  }
  const bool core = j.value("core", false);
  return make_expression(has_atoms ? model : nullptr, std::move(terms), core);
}

json report_to_json(const CheckReport& r) {
  json per_case = json::array();
  for (const auto& c : r.cases)
    per_case.push_back(json{{"label", c.label},
                            {"residual", c.residual},
                            {"tolerance", c.tolerance},
                            {"pass", c.pass}});
  json out = {{"check_id", r.check_id},
              {"params", r.params},
              {"residuals",
               json{{"max", r.max_residual()},
                    {"mean", r.mean_residual()},
                    {"per_case", std::move(per_case)}}},
              {"tolerance", r.tolerance},
              {"verdict", r.pass() ? "pass" : "fail"},
              {"wall_time_ms", r.wall_time_ms}};
  if (!r.extra.empty()) out["extra"] = r.extra;
  return out;
}

}  // namespace rwb
