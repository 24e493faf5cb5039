#pragma once

#include "rwb/expression.hpp"

#include <map>
#include <mutex>
#include <vector>

namespace rwb {

struct RepConfig {
  int boson_cutoff = 16;          // levels 0..d-1 per mode, d >= 4
  int safe_margin = 4;            // occupation headroom, 0 < m < d/2
  double solver_tolerance = 1e-10;
  long dimension_budget = 2'000'000;
};

/// Truncated regular representation on fermion (x) boson Fock space.
///
/// Fermion side: Jordan-Wigner Majorana generators scaled to
/// {c_i, c_j} = delta_ij; c(f) = sum_i (L^T f)_i c_i with tau = L L^T.
/// Boson side: per Darboux mode, d-level ladder truncation with
/// q = (a + a*)/sqrt(2), p = (a - a*)/(i sqrt(2));
/// j(f) = sum_k alpha_k q_k + beta_k p_k, (alpha|beta) = frame^{-1} f.
/// Resolvents are cached LU solves of (i lambda I - j(f)).
class FockRep {
public:
  FockRep(ModelPtr model, RepConfig config);

  const SpaceModel& space() const { return *model_; }
  const ModelPtr& model() const { return model_; }
  const RepConfig& config() const { return config_; }
  int modes() const { return modes_; }
  long fermion_dim() const { return fermion_dim_; }
  long boson_dim() const { return boson_dim_; }
  long dim() const { return fermion_dim_ * boson_dim_; }

  /// Fermion-side factor of pi(c(f)).
  MatC fermion_cliff(const Vec& f) const;
  /// Boson-side factor of pi(j(f)).
  MatC boson_field(const Vec& f) const;
  /// Boson-side factor of pi(R(lambda, f)); cached, solve residual checked.
  MatC boson_resolvent(double lambda, const Vec& f) const;

  MatC op_cliff(const Vec& f) const;
  MatC op_field(const Vec& f) const;
  MatC op_resolvent(double lambda, const Vec& f) const;

  /// Dense operator for an expression (kron of the two factor products).
  MatC evaluate(const Expression& e) const;
  /// evaluate(e) * v without forming the full operator.
  VecC strong_apply(const Expression& e, const VecC& v) const;

  VecC vacuum() const;
  /// Zeroes amplitudes with any mode occupation > d - margin.
  VecC safe_project(const VecC& v, int margin) const;
  VecC safe_project(const VecC& v) const { return safe_project(v, config_.safe_margin); }
  Complex state_expectation(const Expression& e) const;

  /// Occupation digits of a boson basis index (mode 0 most significant).
  std::vector<int> occupations(long boson_index) const;

private:
  ModelPtr model_;
  RepConfig config_;
  int modes_ = 0;
  long fermion_dim_ = 0;
  long boson_dim_ = 0;
  std::vector<MatC> majorana_;  // scaled Jordan-Wigner generators
  std::vector<MatC> q_;         // full boson-side position per mode
  std::vector<MatC> p_;         // full boson-side momentum per mode

  struct ResKey {
    double lambda;
    std::vector<double> arg;
    bool operator<(const ResKey& o) const;
  };
  mutable std::map<ResKey, MatC> res_cache_;
  mutable std::mutex cache_mutex_;
};

/// Largest singular value; exact decomposition on small operators, power
/// iteration on the Gram matrix above that (deterministic start vector).
double operator_norm(const MatC& op);

MatC kron(const MatC& a, const MatC& b);

/// Occupation-preserving isometry into a representation with a larger
/// cutoff (same model, same margins semantics). Used by truncation studies.
VecC embed_vector(const FockRep& from, const FockRep& to, const VecC& v);

}  // namespace rwb
