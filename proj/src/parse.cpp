#include "rwb/parse.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace rwb {
namespace {

struct Parser {
  const std::string& text;
  const ModelPtr& model;
  const std::map<std::string, Vec>& names;
  std::size_t pos = 0;

  [[noreturn]] void fail(std::size_t at, const std::string& what) const {
    throw std::invalid_argument("parse error at position " + std::to_string(at + 1) +
                                ": " + what);
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }

  bool peek_is(char c) {
    skip_ws();
    return pos < text.size() && text[pos] == c;
  }

  bool eat(char c) {
    if (!peek_is(c)) return false;
    ++pos;
    return true;
  }

  void expect(char c, const std::string& context) {
    if (!eat(c)) fail(pos, std::string("expected '") + c + "' " + context);
  }

  std::string identifier() {
    skip_ws();
    const std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    if (pos == start) fail(start, "expected a name");
    return text.substr(start, pos - start);
  }

  double number() {
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin) fail(pos, "malformed number");
    pos += static_cast<std::size_t>(end - begin);
    return value;
  }

  Vec bound_vector() {
    skip_ws();
    const std::size_t at = pos;
    const std::string name = identifier();
    auto it = names.find(name);
    if (it == names.end()) fail(at, "unknown test function \"" + name + "\"");
    return it->second;
  }

  /// The parsed value must be a multiple of the unit with negligible
  /// imaginary part; used for the resolvent scale.
  double real_scalar(const Expression& e, std::size_t at) const {
    Complex value{0.0, 0.0};
    for (const auto& term : e.terms()) {
      if (!term.word.empty()) fail(at, "resolvent scale must be a real number");
      value += term.coeff;
    }
    if (std::abs(value.imag()) > 1e-12 * std::max(1.0, std::abs(value.real())))
      fail(at, "resolvent scale must be a real number");
    return value.real();
  }

  Expression parse_primary() {
    skip_ws();
    if (pos >= text.size()) fail(pos, "unexpected end of input");
    const char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return scalar_expr(number());
    if (c == '(') {
      ++pos;
      Expression inner = parse_sum();
      expect(')', "to close the group");
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t at = pos;
      const std::string name = identifier();
      if (name == "i") return scalar_expr(Complex{0.0, 1.0});
      if (name == "cliff" || name == "field" || name == "zeta") {
        expect('(', "after " + name);
        Vec f = bound_vector();
        expect(')', "to close " + name + "(...)");
        if (name == "cliff") return cliff(model, std::move(f));
        if (name == "field") return field(model, std::move(f));
        return zeta(model, std::move(f));
      }
      if (name == "res") {
        expect('(', "after res");
        skip_ws();
        const std::size_t lambda_at = pos;
        Expression lambda_expr = parse_sum();
        const double lambda = real_scalar(lambda_expr, lambda_at);
        expect(',', "between the resolvent scale and its argument");
        Vec f = bound_vector();
        expect(')', "to close res(...)");
        return res(model, lambda, std::move(f));
      }
      if (names.count(name))
        fail(at, "test function \"" + name +
                     "\" cannot stand alone; wrap it in cliff/field/zeta/res");
      fail(at, "unknown name \"" + name + "\"");
    }
    fail(pos, std::string("unexpected character '") + c + "'");
  }

  Expression parse_factor() {
    if (eat('-')) return scale(-1.0, parse_factor());
    return parse_primary();
  }

  Expression parse_prod() {
    Expression out = parse_factor();
    while (eat('*')) out = mul(out, parse_factor());
    return out;
  }

  Expression parse_sum() {
    Expression out = parse_prod();
    for (;;) {
      if (eat('+'))
        out = add(out, parse_prod());
      else if (eat('-'))
        out = sub(out, parse_prod());
      else
        return out;
    }
  }
};

}  // namespace

Expression parse_expression(const std::string& text, const ModelPtr& model,
                            const std::map<std::string, Vec>& names) {
  Parser p{text, model, names};
  Expression out = p.parse_sum();
  p.skip_ws();
  if (p.pos != text.size()) p.fail(p.pos, "unexpected trailing input");
  return out;
}

}  // namespace rwb
