#pragma once

#include "rwb/expression.hpp"

namespace rwb {

/// Graded derivation on the extended system, graded Leibniz rule
/// d(AB) = d(A) B + grade(A) d(B), atom rules:
///   c(f) -> j(f),  j(f) -> i c(f'),  R(l,f) -> i c(f') R(l,f)^2.
Expression superderivation_bar(const Expression& a);

/// Ordinary derivation on the extended system, atom rules:
///   c(f) -> i c(f'),  j(f) -> i j(f'),  R(l,f) -> i R(l,f) j(f') R(l,f).
Expression derivation_bar(const Expression& a);

/// True when every term factors into zeta / resolvent generators (raw word
/// first, simplified form second). Scalars and resolvent words qualify.
bool is_core_element(const Expression& a);

/// Superderivation on recognized core elements, generator rules
///   zeta(w) -> i R(1,w) - 1 - i c(w) c(w') R(1,w)^2   (odd)
///   R(l,f)  -> i c(f') R(l,f)^2                        (even)
/// extended by the graded Leibniz rule over the recognized factors.
/// Throws std::domain_error when the input is not recognized.
Expression superderivation_core(const Expression& a);

/// Conjugate superderivation: -(delta(grade(adjoint(A))))^*; same domain as
/// superderivation_core. Agrees with it numerically (hermiticity).
Expression conjugate_superderivation(const Expression& a);

/// Mollifier M_{A,lambda}: ordered product, ascending basis index, of
/// (i*lambda) R(lambda, s*e_k) over the indices k whose Clifford atom appears
/// in simplify(superderivation_bar(A)). The argument scale s is the smallest
/// nonzero tau-norm among A's own atom arguments (capped at 1), which keeps
/// the truncated resolvent solves well conditioned at small lambda. A must be
/// a recognized core element; lambda must be nonzero. For scalar A the
/// mollifier is the unit.
Expression mollifier(const Expression& a, double lambda);

/// delta(M_{A,lambda} delta(A)) - delta(M_{A,lambda}) delta(A), computed via
/// the recognized factorization of the simplified mollified product.
Expression mollified_square(const Expression& a, double lambda);

/// Replaces every Clifford atom c(f) by (i*lambda) zeta(f/lambda), the
/// bounded approximant used by the density checks.
Expression core_approximant(const Expression& a, double lambda);

}  // namespace rwb
