#pragma once

#include "rwb/space_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rwb {

/// Atom kinds: Cliff is the self-adjoint fermionic generator c(f), Field the
/// (unbounded) bosonic generator j(f), Res the bounded resolvent R(lambda, f).
/// Cliff atoms commute exactly with Field/Res atoms (distinct tensor factors);
/// Cliff atoms among themselves anticommute up to the tau contraction.
enum class AtomKind { Cliff, Field, Res };

struct Atom {
  AtomKind kind;
  Vec arg;
  double lambda = 0.0;  // Res only, never 0 for a Res atom

  static Atom cliff(Vec f) { return {AtomKind::Cliff, std::move(f), 0.0}; }
  static Atom field(Vec f) { return {AtomKind::Field, std::move(f), 0.0}; }
  static Atom res(double lambda, Vec f) { return {AtomKind::Res, std::move(f), lambda}; }
};

bool operator==(const Atom& a, const Atom& b);
/// Total order used for normal forms and term merging; exact on doubles.
int compare(const Atom& a, const Atom& b);

struct Term {
  Complex coeff;
  std::vector<Atom> word;  // empty word = scalar multiple of the unit
};

int compare(const std::vector<Atom>& a, const std::vector<Atom>& b);

/// Bounded-regular classification:
///   R0     resolvents and scalars only
///   Cliff0 Clifford atoms only
///   CoreA  member of the *-algebra generated by zeta's and resolvents
///   F0     mixed bounded word not recognized as CoreA
///   EOnly  contains an unbounded Field atom
enum class ExprClass { R0, Cliff0, CoreA, F0, EOnly };

std::string to_string(ExprClass c);

/// Finite linear combination of generator words over a fixed model.
/// The zero expression has no terms; pure scalars have an empty word.
class Expression {
public:
  Expression() = default;

  const ModelPtr& model() const { return model_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool core_provenance() const { return core_provenance_; }

  /// Largest coefficient magnitude, 0 for the zero expression.
  double coeff_scale() const;

  friend Expression make_expression(ModelPtr model, std::vector<Term> terms,
                                    bool core_provenance);

private:
  ModelPtr model_;  // null for pure scalars
  std::vector<Term> terms_;
  bool core_provenance_ = false;
};

Expression make_expression(ModelPtr model, std::vector<Term> terms,
                           bool core_provenance);

// --- constructors -----------------------------------------------------------

Expression scalar_expr(Complex value);
/// R(lambda, f); lambda must be nonzero.
Expression res(ModelPtr model, double lambda, Vec f);
Expression cliff(ModelPtr model, Vec f);
Expression field(ModelPtr model, Vec f);
/// zeta(f) = c(f) R(1, f), stored as that two-atom word.
Expression zeta(ModelPtr model, Vec f);

// --- algebra ----------------------------------------------------------------

Expression mul(const Expression& a, const Expression& b);
Expression add(const Expression& a, const Expression& b);
Expression sub(const Expression& a, const Expression& b);
Expression scale(Complex c, const Expression& a);
/// Reverses words, conjugates coefficients, maps R(lambda,f) to R(-lambda,f).
Expression adjoint(const Expression& a);
/// Parity automorphism: each term picks up (-1)^{number of Cliff atoms}.
Expression grade(const Expression& a);
/// Replaces every atom argument f by flow(t, f); lambdas and order unchanged.
Expression translate(const Expression& a, double t);

struct SimplifyOptions {
  /// Rewrite R(l,f) - R(m,f) into i(m-l) R(l,f) R(m,f) where term pairs allow.
  bool merge_resolvent_pairs = false;
};

/// Normal form: Clifford atoms moved to the front (no sign; they commute with
/// the boson factors), expanded over the model basis and normal-ordered with
/// tau contractions; R(lambda,0) becomes the scalar -(i/lambda); j(0) kills
/// the term; boson sub-words keep their order; equal words merge; relative
/// coefficient noise below 1e-12 is pruned.
Expression simplify(const Expression& a, const SimplifyOptions& opts = {});

// --- core recognition -------------------------------------------------------

/// One factor of a recognized core word: either zeta(arg) or res(lambda, arg).
struct CoreFactor {
  bool is_zeta = false;
  double lambda = 0.0;  // Res only
  Vec arg;
};

struct FactoredTerm {
  Complex coeff;
  std::vector<CoreFactor> factors;
};

/// Sound, sufficient-only recognizer: matches each Clifford atom of a term to
/// a collinear resolvent occurrence with strictly increasing positions and
/// fuses c(g) R(mu, s*g) = (1/s) zeta(s*g/mu). Returns std::nullopt when any
/// term fails to factor. Never produces a false positive.
std::optional<std::vector<FactoredTerm>> core_factorization(const Expression& a);

/// Census first (Field => EOnly, no Cliff => R0, no Res => Cliff0); mixed
/// words are CoreA when carried by provenance or recognized by factorization
/// (raw word, then simplified form), else F0.
ExprClass classify(const Expression& a);

/// Compact text rendering, mainly for diagnostics and reports.
std::string render(const Expression& a);

}  // namespace rwb
