#include "rwb/derivations.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

namespace rwb {

namespace {

constexpr Complex kI{0.0, 1.0};

Expression zero_like(const Expression& a) {
  return make_expression(a.model(), {}, true);
}

struct AtomRule {
  Complex coeff;
  std::vector<Atom> word;
};

AtomRule super_rule(const SpaceModel& model, const Atom& atom) {
  switch (atom.kind) {
    case AtomKind::Cliff:
      return {1.0, {Atom::field(atom.arg)}};
    case AtomKind::Field:
      return {kI, {Atom::cliff(model.prime(atom.arg))}};
    case AtomKind::Res:
      return {kI, {Atom::cliff(model.prime(atom.arg)), atom, atom}};
  }
  throw std::logic_error("unreachable atom kind");
}

AtomRule ordinary_rule(const SpaceModel& model, const Atom& atom) {
  switch (atom.kind) {
    case AtomKind::Cliff:
      return {kI, {Atom::cliff(model.prime(atom.arg))}};
    case AtomKind::Field:
      return {kI, {Atom::field(model.prime(atom.arg))}};
    case AtomKind::Res:
      return {kI, {atom, Atom::field(model.prime(atom.arg)), atom}};
  }
  throw std::logic_error("unreachable atom kind");
}

template <typename Rule>
Expression leibniz(const Expression& a, Rule rule, bool graded) {
  if (!a.model()) return zero_like(a);
  const SpaceModel& model = *a.model();
  std::vector<Term> out;
  for (const auto& term : a.terms()) {
    int cliffs_before = 0;
    for (std::size_t m = 0; m < term.word.size(); ++m) {
      const double sign = (graded && cliffs_before % 2) ? -1.0 : 1.0;
      AtomRule r = rule(model, term.word[m]);
      Term t{term.coeff * sign * r.coeff, {}};
      t.word.reserve(term.word.size() - 1 + r.word.size());
      t.word.insert(t.word.end(), term.word.begin(), term.word.begin() + m);
      t.word.insert(t.word.end(), r.word.begin(), r.word.end());
      t.word.insert(t.word.end(), term.word.begin() + m + 1, term.word.end());
      out.push_back(std::move(t));
      if (term.word[m].kind == AtomKind::Cliff) ++cliffs_before;
    }
  }
  return make_expression(a.model(), std::move(out), false);
}

std::optional<std::vector<FactoredTerm>> recognize(const Expression& a) {
  if (auto f = core_factorization(a)) return f;
  return core_factorization(simplify(a));
}

Expression factor_to_expression(const ModelPtr& model, const CoreFactor& f) {
  return f.is_zeta ? zeta(model, f.arg) : res(model, f.lambda, f.arg);
}

Expression core_rule(const ModelPtr& model, const CoreFactor& f) {
  if (f.is_zeta) {
    const Vec& w = f.arg;
    Expression r1 = res(model, 1.0, w);
    Expression head = sub(scale(kI, r1), scalar_expr(1.0));
    Expression tail = mul(cliff(model, w),
                          mul(cliff(model, model->prime(w)), mul(r1, r1)));
    return sub(head, scale(kI, tail));
  }
  Expression r = res(model, f.lambda, f.arg);
  return scale(kI, mul(cliff(model, model->prime(f.arg)), mul(r, r)));
}

Expression core_leibniz(const Expression& a,
                        const std::vector<FactoredTerm>& factored) {
  Expression total = zero_like(a);
  for (const auto& ft : factored) {
    for (std::size_t m = 0; m < ft.factors.size(); ++m) {
      int zetas_before = 0;
      for (std::size_t k = 0; k < m; ++k)
        if (ft.factors[k].is_zeta) ++zetas_before;
      Expression piece = scalar_expr(ft.coeff * (zetas_before % 2 ? -1.0 : 1.0));
      for (std::size_t k = 0; k < m; ++k)
        piece = mul(piece, factor_to_expression(a.model(), ft.factors[k]));
      piece = mul(piece, core_rule(a.model(), ft.factors[m]));
      for (std::size_t k = m + 1; k < ft.factors.size(); ++k)
        piece = mul(piece, factor_to_expression(a.model(), ft.factors[k]));
      total = add(total, piece);
    }
  }
  return total;
}

}  // namespace

Expression superderivation_bar(const Expression& a) {
  return leibniz(a, super_rule, /*graded=*/true);
}

Expression derivation_bar(const Expression& a) {
  return leibniz(a, ordinary_rule, /*graded=*/false);
}

bool is_core_element(const Expression& a) { return recognize(a).has_value(); }

Expression superderivation_core(const Expression& a) {
  auto factored = recognize(a);
  if (!factored)
    throw std::domain_error(
        "superderivation_core: expression is not a recognized core element");
  return core_leibniz(a, *factored);
}

Expression conjugate_superderivation(const Expression& a) {
  return scale(-1.0, adjoint(superderivation_core(grade(adjoint(a)))));
}

Expression mollifier(const Expression& a, double lambda) {
  if (lambda == 0.0) throw std::invalid_argument("mollifier requires nonzero lambda");
  if (!is_core_element(a))
    throw std::domain_error("mollifier: expression is not a recognized core element");
  Expression d = simplify(superderivation_bar(a));
  std::set<int> support;
  for (const auto& term : d.terms())
    for (const auto& atom : term.word) {
      if (atom.kind != AtomKind::Cliff) continue;
      int idx = -1;
      for (Eigen::Index j = 0; j < atom.arg.size(); ++j)
        if (atom.arg(j) != 0.0) {
          if (idx >= 0 || atom.arg(j) != 1.0)
            throw std::logic_error("expected basis Clifford atom after simplify");
          idx = static_cast<int>(j);
        }
      if (idx >= 0) support.insert(idx);
    }
  // Argument scale commensurate with the element keeps the truncated
  // resolvents well conditioned; any fixed scale gives a valid family.
  double s = 1.0;
  for (const auto& term : a.terms())
    for (const auto& atom : term.word) {
      const double n = std::sqrt(a.model()->tau(atom.arg, atom.arg));
      if (n > 0.0) s = std::min(s, n);
    }
  Expression m = scalar_expr(1.0);
  for (int k : support) {
    Expression factor =
        scale(Complex{0.0, lambda},
              res(a.model(), lambda, Vec(s * a.model()->basis_vector(k))));
    m = mul(m, factor);
  }
  return m;
}

Expression mollified_square(const Expression& a, double lambda) {
  Expression m = mollifier(a, lambda);
  Expression da = superderivation_core(a);
  Expression product = simplify(mul(m, da));
  Expression t1 = superderivation_core(product);
  Expression t2 = mul(superderivation_core(m), da);
  return sub(t1, t2);
}

Expression core_approximant(const Expression& a, double lambda) {
  if (lambda == 0.0)
    throw std::invalid_argument("core_approximant requires nonzero lambda");
  if (!a.model()) return a;
  std::vector<Term> out;
  for (const auto& term : a.terms()) {
    Term t{term.coeff, {}};
    for (const auto& atom : term.word) {
      if (atom.kind == AtomKind::Cliff) {
        t.coeff *= Complex{0.0, lambda};
        t.word.push_back(Atom::cliff(atom.arg / lambda));
        t.word.push_back(Atom::res(1.0, atom.arg / lambda));
      } else {
        t.word.push_back(atom);
      }
    }
    out.push_back(std::move(t));
  }
  return make_expression(a.model(), std::move(out), a.core_provenance());
}

}  // namespace rwb
