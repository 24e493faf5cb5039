#include "rwb/expression.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace rwb {

namespace {

constexpr double kPruneRel = 1e-12;
constexpr Complex kI{0.0, 1.0};

bool is_zero_vec(const Vec& v) { return v.size() == 0 || v.cwiseAbs().maxCoeff() == 0.0; }

void check_arg(const ModelPtr& model, const Vec& f) {
  if (!model) throw std::invalid_argument("atom constructor requires a model");
  if (f.size() != model->dim())
    throw std::invalid_argument("test function has wrong dimension for the model");
}

ModelPtr unify_models(const Expression& a, const Expression& b) {
  if (!a.model()) return b.model();
  if (!b.model()) return a.model();
  if (!same_space(*a.model(), *b.model()))
    throw std::invalid_argument("expressions are built over different models");
  return a.model();
}

/// Merge equal words; drop exactly-cancelled terms. No relative pruning here.
std::vector<Term> merge_terms(std::vector<Term> terms) {
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return compare(a.word, b.word) < 0; });
  std::vector<Term> out;
  for (auto& t : terms) {
    if (!out.empty() && compare(out.back().word, t.word) == 0)
      out.back().coeff += t.coeff;
    else
      out.push_back(std::move(t));
  }
  std::erase_if(out, [](const Term& t) { return t.coeff == Complex{0.0, 0.0}; });
  return out;
}

/// Drop coefficients at or below `threshold` (an absolute cutoff computed by
/// the caller from the pre-cancellation coefficient scale).
std::vector<Term> prune_terms(std::vector<Term> terms, double threshold) {
  std::erase_if(terms,
                [&](const Term& t) { return std::abs(t.coeff) <= threshold; });
  return terms;
}

/// h = s * g with s != 0; writes s on success.
bool collinear(const Vec& g, const Vec& h, double* s_out) {
  if (g.size() != h.size() || g.size() == 0) return false;
  int k = 0;
  g.cwiseAbs().maxCoeff(&k);
  if (g(k) == 0.0) return false;
  const double s = h(k) / g(k);
  if (s == 0.0) return false;
  const double tol = 1e-10 * std::max(h.cwiseAbs().maxCoeff(),
                                      std::abs(s) * g.cwiseAbs().maxCoeff());
  if ((h - s * g).cwiseAbs().maxCoeff() > tol) return false;
  *s_out = s;
  return true;
}

}  // namespace

bool operator==(const Atom& a, const Atom& b) { return compare(a, b) == 0; }

int compare(const Atom& a, const Atom& b) {
  if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind) ? -1 : 1;
  if (a.lambda != b.lambda) return a.lambda < b.lambda ? -1 : 1;
  if (a.arg.size() != b.arg.size()) return a.arg.size() < b.arg.size() ? -1 : 1;
  for (Eigen::Index i = 0; i < a.arg.size(); ++i)
    if (a.arg(i) != b.arg(i)) return a.arg(i) < b.arg(i) ? -1 : 1;
  return 0;
}

int compare(const std::vector<Atom>& a, const std::vector<Atom>& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (int c = compare(a[i], b[i]); c != 0) return c;
  return 0;
}

std::string to_string(ExprClass c) {
  switch (c) {
    case ExprClass::R0: return "R0";
    case ExprClass::Cliff0: return "Cliff0";
    case ExprClass::CoreA: return "CoreA";
    case ExprClass::F0: return "F0";
    case ExprClass::EOnly: return "EOnly";
  }
  return "unknown";
}

double Expression::coeff_scale() const {
  double s = 0.0;
  for (const auto& t : terms_) s = std::max(s, std::abs(t.coeff));
  return s;
}

Expression make_expression(ModelPtr model, std::vector<Term> terms,
                           bool core_provenance) {
  for (const auto& t : terms)
    for (const auto& a : t.word) {
      if (!model) throw std::invalid_argument("non-scalar expression requires a model");
      if (a.arg.size() != model->dim())
        throw std::invalid_argument("atom argument has wrong dimension for the model");
      if (a.kind == AtomKind::Res && a.lambda == 0.0)
        throw std::invalid_argument("resolvent atom requires nonzero lambda");
    }
  Expression e;
  e.model_ = std::move(model);
  e.terms_ = merge_terms(std::move(terms));
  e.core_provenance_ = core_provenance || e.terms_.empty();
  return e;
}

Expression scalar_expr(Complex value) {
  if (value == Complex{0.0, 0.0}) return make_expression(nullptr, {}, true);
  return make_expression(nullptr, {Term{value, {}}}, true);
}

Expression res(ModelPtr model, double lambda, Vec f) {
  check_arg(model, f);
  if (lambda == 0.0)
    throw std::invalid_argument("resolvent requires nonzero lambda");
  return make_expression(std::move(model),
                         {Term{1.0, {Atom::res(lambda, std::move(f))}}}, true);
}

Expression cliff(ModelPtr model, Vec f) {
  check_arg(model, f);
  return make_expression(std::move(model), {Term{1.0, {Atom::cliff(std::move(f))}}},
                         false);
}

Expression field(ModelPtr model, Vec f) {
  check_arg(model, f);
  return make_expression(std::move(model), {Term{1.0, {Atom::field(std::move(f))}}},
                         false);
}

Expression zeta(ModelPtr model, Vec f) {
  check_arg(model, f);
  Term t{1.0, {Atom::cliff(f), Atom::res(1.0, f)}};
  return make_expression(std::move(model), {std::move(t)}, true);
}

Expression mul(const Expression& a, const Expression& b) {
  ModelPtr model = unify_models(a, b);
  std::vector<Term> out;
  out.reserve(a.terms().size() * b.terms().size());
  for (const auto& ta : a.terms())
    for (const auto& tb : b.terms()) {
      Term t{ta.coeff * tb.coeff, ta.word};
      t.word.insert(t.word.end(), tb.word.begin(), tb.word.end());
      out.push_back(std::move(t));
    }
  return make_expression(std::move(model), std::move(out),
                         a.core_provenance() && b.core_provenance());
}

Expression add(const Expression& a, const Expression& b) {
  ModelPtr model = unify_models(a, b);
  std::vector<Term> out = a.terms();
  out.insert(out.end(), b.terms().begin(), b.terms().end());
  return make_expression(std::move(model), std::move(out),
                         a.core_provenance() && b.core_provenance());
}

Expression sub(const Expression& a, const Expression& b) {
  return add(a, scale(-1.0, b));
}

Expression scale(Complex c, const Expression& a) {
  std::vector<Term> out = a.terms();
  for (auto& t : out) t.coeff *= c;
  return make_expression(a.model(), std::move(out), a.core_provenance());
}

Expression adjoint(const Expression& a) {
  std::vector<Term> out;
  out.reserve(a.terms().size());
  for (const auto& t : a.terms()) {
    Term r{std::conj(t.coeff), {}};
    r.word.reserve(t.word.size());
    for (auto it = t.word.rbegin(); it != t.word.rend(); ++it) {
      Atom atom = *it;
      if (atom.kind == AtomKind::Res) atom.lambda = -atom.lambda;
      r.word.push_back(std::move(atom));
    }
    out.push_back(std::move(r));
  }
  return make_expression(a.model(), std::move(out), a.core_provenance());
}

Expression grade(const Expression& a) {
  std::vector<Term> out = a.terms();
  for (auto& t : out) {
    std::size_t cliffs = 0;
    for (const auto& atom : t.word)
      if (atom.kind == AtomKind::Cliff) ++cliffs;
    if (cliffs % 2) t.coeff = -t.coeff;
  }
  return make_expression(a.model(), std::move(out), a.core_provenance());
}

Expression translate(const Expression& a, double t) {
  if (!a.model() || t == 0.0) return a;
  std::vector<Term> out = a.terms();
  for (auto& term : out)
    for (auto& atom : term.word) atom.arg = a.model()->flow(t, atom.arg);
  return make_expression(a.model(), std::move(out), a.core_provenance());
}

namespace {

struct CliffMonomial {
  Complex coeff;
  std::vector<int> idx;
};

/// Normal-order a product of basis Clifford generators: strictly ascending
/// indices, anticommutation with tau contractions. tau is the model metric.
std::vector<CliffMonomial> normal_order(const Mat& tau, CliffMonomial start) {
  std::vector<CliffMonomial> work{std::move(start)}, done;
  while (!work.empty()) {
    CliffMonomial m = std::move(work.back());
    work.pop_back();
    int p = -1;
    for (std::size_t i = 0; i + 1 < m.idx.size(); ++i)
      if (m.idx[i] >= m.idx[i + 1]) {
        p = static_cast<int>(i);
        break;
      }
    if (p < 0) {
      done.push_back(std::move(m));
      continue;
    }
    if (m.idx[p] == m.idx[p + 1]) {
      // c_i c_i = tau_ii / 2
      CliffMonomial r{m.coeff * (0.5 * tau(m.idx[p], m.idx[p])), m.idx};
      r.idx.erase(r.idx.begin() + p, r.idx.begin() + p + 2);
      work.push_back(std::move(r));
    } else {
      const double tij = tau(m.idx[p], m.idx[p + 1]);
      CliffMonomial swapped{-m.coeff, m.idx};
      std::swap(swapped.idx[p], swapped.idx[p + 1]);
      work.push_back(std::move(swapped));
      if (tij != 0.0) {
        CliffMonomial contracted{m.coeff * tij, m.idx};
        contracted.idx.erase(contracted.idx.begin() + p,
                             contracted.idx.begin() + p + 2);
        work.push_back(std::move(contracted));
      }
    }
  }
  return done;
}

void merge_resolvent_pairs_in_place(std::vector<Term>& terms) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t s = 0; s < terms.size() && !changed; ++s) {
      for (std::size_t t = s + 1; t < terms.size() && !changed; ++t) {
        const auto& ws = terms[s].word;
        const auto& wt = terms[t].word;
        if (ws.size() != wt.size()) continue;
        int diff = -1;
        bool ok = true;
        for (std::size_t p = 0; p < ws.size() && ok; ++p) {
          if (compare(ws[p], wt[p]) == 0) continue;
          if (diff >= 0) {
            ok = false;
            break;
          }
          diff = static_cast<int>(p);
          ok = ws[p].kind == AtomKind::Res && wt[p].kind == AtomKind::Res &&
               ws[p].arg == wt[p].arg && ws[p].lambda != wt[p].lambda;
        }
        if (!ok || diff < 0) continue;
        const Complex cs = terms[s].coeff, ct = terms[t].coeff;
        if (std::abs(cs + ct) > 1e-12 * (std::abs(cs) + std::abs(ct))) continue;
        // cs R(l,f) - cs R(m,f) = cs * i(m-l) R(l,f) R(m,f)
        const double l = ws[diff].lambda, mlam = wt[diff].lambda;
        Term merged{cs * kI * (mlam - l), ws};
        merged.word.insert(merged.word.begin() + diff + 1,
                           Atom::res(mlam, ws[diff].arg));
        terms.erase(terms.begin() + t);
        terms.erase(terms.begin() + s);
        terms.push_back(std::move(merged));
        terms = merge_terms(std::move(terms));
        changed = true;
      }
    }
  }
}

}  // namespace

Expression simplify(const Expression& a, const SimplifyOptions& opts) {
  if (!a.model()) return a;
  const Mat& tau = a.model()->tau_matrix();
  std::vector<Term> out;

  for (const auto& term : a.terms()) {
    Complex coeff = term.coeff;
    std::vector<Vec> cliff_args;
    std::vector<Atom> boson;
    bool dead = false;
    for (const auto& atom : term.word) {
      switch (atom.kind) {
        case AtomKind::Cliff:
          cliff_args.push_back(atom.arg);
          break;
        case AtomKind::Field:
          if (is_zero_vec(atom.arg)) dead = true;
          else boson.push_back(atom);
          break;
        case AtomKind::Res:
          if (is_zero_vec(atom.arg))
            coeff *= Complex{0.0, -1.0 / atom.lambda};  // R(l,0) = -(i/l) 1
          else
            boson.push_back(atom);
          break;
      }
    }
    if (dead) continue;

    // Expand Clifford atoms over the basis, then normal-order.
    std::vector<CliffMonomial> monos{{coeff, {}}};
    for (const Vec& g : cliff_args) {
      std::vector<CliffMonomial> next;
      for (const auto& m : monos)
        for (Eigen::Index i = 0; i < g.size(); ++i) {
          if (g(i) == 0.0) continue;
          CliffMonomial ext{m.coeff * g(i), m.idx};
          ext.idx.push_back(static_cast<int>(i));
          next.push_back(std::move(ext));
        }
      monos = std::move(next);
    }

    for (auto& m : monos)
      for (auto& ordered : normal_order(tau, m)) {
        Term t{ordered.coeff, {}};
        t.word.reserve(ordered.idx.size() + boson.size());
        for (int i : ordered.idx) t.word.push_back(Atom::cliff(a.model()->basis_vector(i)));
        t.word.insert(t.word.end(), boson.begin(), boson.end());
        out.push_back(std::move(t));
      }
  }

  // Cancellation noise is pruned against the pre-merge coefficient scale so
  // that a residue of pure round-off collapses to the zero expression.
  double scale = 0.0;
  for (const auto& t : out) scale = std::max(scale, std::abs(t.coeff));
  out = prune_terms(merge_terms(std::move(out)), kPruneRel * scale);
  if (opts.merge_resolvent_pairs) {
    merge_resolvent_pairs_in_place(out);
    out = prune_terms(std::move(out), kPruneRel * scale);
  }
  return make_expression(a.model(), std::move(out), a.core_provenance());
}

std::optional<std::vector<FactoredTerm>> core_factorization(const Expression& a) {
  std::vector<FactoredTerm> result;
  for (const auto& term : a.terms()) {
    struct BosonSlot {
      Atom atom;
      int cliff = -1;   // index into cliffs when matched
      double s = 0.0;   // res arg = s * cliff arg
    };
    std::vector<BosonSlot> bosons;
    std::vector<Vec> cliffs;
    for (const auto& atom : term.word) {
      if (atom.kind == AtomKind::Field) return std::nullopt;
      if (atom.kind == AtomKind::Cliff) cliffs.push_back(atom.arg);
      else bosons.push_back({atom, -1, 0.0});
    }
    // Match Clifford atoms (in word order) to resolvents at strictly
    // increasing positions; greedy-leftmost finds a system iff one exists.
    std::size_t start = 0;
    for (std::size_t ci = 0; ci < cliffs.size(); ++ci) {
      bool found = false;
      for (std::size_t p = start; p < bosons.size(); ++p) {
        double s = 0.0;
        if (bosons[p].cliff < 0 && collinear(cliffs[ci], bosons[p].atom.arg, &s)) {
          bosons[p].cliff = static_cast<int>(ci);
          bosons[p].s = s;
          start = p + 1;
          found = true;
          break;
        }
      }
      if (!found) return std::nullopt;
    }
    FactoredTerm ft{term.coeff, {}};
    for (const auto& b : bosons) {
      if (b.cliff >= 0) {
        // c(g) R(mu, s g) = (1/s) zeta(s g / mu)
        ft.coeff *= 1.0 / b.s;
        ft.factors.push_back({true, 0.0, b.atom.arg / b.atom.lambda});
      } else {
        ft.factors.push_back({false, b.atom.lambda, b.atom.arg});
      }
    }
    result.push_back(std::move(ft));
  }
  return result;
}

ExprClass classify(const Expression& a) {
  bool has_field = false, has_cliff = false, has_res = false;
  for (const auto& t : a.terms())
    for (const auto& atom : t.word) {
      has_field |= atom.kind == AtomKind::Field;
      has_cliff |= atom.kind == AtomKind::Cliff;
      has_res |= atom.kind == AtomKind::Res;
    }
  if (has_field) return ExprClass::EOnly;
  if (!has_cliff) return ExprClass::R0;
  if (!has_res) return ExprClass::Cliff0;
  if (a.core_provenance()) return ExprClass::CoreA;
  if (core_factorization(a)) return ExprClass::CoreA;
  if (core_factorization(simplify(a))) return ExprClass::CoreA;
  return ExprClass::F0;
}

std::string render(const Expression& a) {
  if (a.is_zero()) return "0";
  std::ostringstream os;
  os.precision(12);
  bool first_term = true;
  for (const auto& t : a.terms()) {
    if (!first_term) os << " + ";
    first_term = false;
    os << "(" << t.coeff.real() << (t.coeff.imag() < 0 ? "" : "+")
       << t.coeff.imag() << "i)";
    for (const auto& atom : t.word) {
      switch (atom.kind) {
        case AtomKind::Cliff: os << "*cliff("; break;
        case AtomKind::Field: os << "*field("; break;
        case AtomKind::Res: os << "*res(" << atom.lambda << ", "; break;
      }
      os << "[";
      for (Eigen::Index i = 0; i < atom.arg.size(); ++i) {
        if (i) os << ",";
        os << atom.arg(i);
      }
      os << "])";
    }
  }
  return os.str();
}

}  // namespace rwb
