#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwb/derivations.hpp"
#include "rwb/expression.hpp"
#include "rwb/fock.hpp"

namespace rwb {

/// Deterministic random source: 53-bit uniforms from mt19937_64 plus a
/// Box-Muller normal. Fixed seed => identical draws on every run.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform();  // [0, 1)
  double normal();   // standard normal
  /// uniform integer in [0, n)
  int pick(int n);
  Vec real_vector(long n, double scale);
  /// normalized complex gaussian vector
  VecC unit_vector(long n);

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

enum class FDScheme { Central2, Richardson4 };

std::string to_string(FDScheme s);

/// Finite-difference derivative at t = 0.
struct FDStep {
  double h = 1e-4;
  FDScheme scheme = FDScheme::Central2;
};

VecC fd_derivative(const std::function<VecC(double)>& curve, const FDStep& fd);

/// Least-squares slope of log y against log x. Entries must be positive.
double log_log_slope(const std::vector<double>& xs, const std::vector<double>& ys);

/// One verified inequality: pass means residual <= tolerance.
struct CaseResult {
  std::string label;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

struct CheckReport {
  std::string check_id;
  nlohmann::json params = nlohmann::json::object();
  std::vector<CaseResult> cases;
  double tolerance = 0.0;  // headline tolerance of the check
  double wall_time_ms = 0.0;
  nlohmann::json extra = nlohmann::json::object();

  void add_case(std::string label, double residual, double tolerance);
  bool pass() const;
  double max_residual() const;
  double mean_residual() const;
};

/// Random vector with amplitude decaying like rho^(total occupation),
/// safe-projected at the rep's margin and normalized.
VecC decaying_vector(const FockRep& rep, Rng& rng, double rho = 0.5);

/// Vacuum plus a random word (Clifford/resolvent atoms over fs, length <=
/// max_len) applied to the vacuum, safe-projected and normalized.
VecC domain_vector(const FockRep& rep, Rng& rng, const std::vector<Vec>& fs,
                   int max_len = 3);

/// The six defining resolvent relations plus the field-resolvent fusion
/// identity. Scalar-calculus relations are checked on whole-space random
/// vectors at 1e-10; the two sigma-dependent relations on decaying safe
/// vectors at the calibrated 1e-6. Fusion pairs with lambda+mu = 0 are
/// skipped and logged in extra.skipped.
CheckReport check_resolvent_battery(const FockRep& rep, const std::vector<Vec>& fs,
                                    const std::vector<double>& lambdas,
                                    std::uint64_t seed, int n_vectors = 20);

/// Norm bound ||R(lambda,f)|| <= 1/|lambda| for each lambda; at odd cutoff
/// also the equality within 1e-10.
CheckReport check_norm_law(const FockRep& rep, const Vec& f,
                           const std::vector<double>& lambdas);

/// Decay slope of ||i*lambda*R(lambda,f) xi - xi|| across the lambda grid;
/// each slope must sit within 0.15 of -1.
CheckReport check_asymptotics(const FockRep& rep, const Vec& f,
                              const std::vector<double>& lambdas, std::uint64_t seed,
                              int n_vectors = 5);

/// Generator formula on a domain vector: -i d/dt pi(translate(a,t))xi at 0
/// against both the time derivation and the squared odd derivation; the two
/// residuals must agree to 1e-10. Elements with boson field atoms are
/// rejected (their translation flow is not norm-continuous).
CheckReport check_generator(const FockRep& rep, const Expression& a, const VecC& xi,
                            FDStep fd = {}, double tolerance = 1e-5);

/// Mollified generator formula for a core element, per lambda, plus the
/// mollifier diagnostics: identity approach and derivative decay, both with
/// slope -1 (+-0.2), and halving of the mollifier derivative norm.
CheckReport check_susy_core(const FockRep& rep, const Expression& a,
                            const std::vector<double>& lambdas, const VecC& xi,
                            FDStep fd = {}, double tolerance = 1e-5);

/// Squared odd derivation equals the time derivation: numeric residual on
/// decaying safe vectors for all atoms over fs plus n_words random words,
/// and the mollified-square factorization identity on core elements.
CheckReport check_susy_identity(const FockRep& rep, const std::vector<Vec>& fs,
                                std::uint64_t seed, int n_words = 50, int max_len = 4);

/// State regularity: the domain condition (trivial in finite dimension,
/// recorded) and vacuum differentiability of the flowed field on a basis
/// battery. h = 0 / tol = 0 pick per-flavor defaults.
CheckReport check_state_conditions(const FockRep& rep, double h = 0.0,
                                   double tol = 0.0);

/// Clifford factors replaced by scaled mollified fermions: residual decay
/// with slope -1 (+-0.15) across the lambda grid and the uniform factor
/// norm bound (equality at odd cutoff).
CheckReport check_density_net(const FockRep& rep, const Expression& b,
                              const std::vector<double>& lambdas, const VecC& xi);

/// Step-halving ladder for the finite-difference residuals of the generator
/// formula (and the mollified one when a is core): each qualifying halving
/// must improve the residual by at least 3.2x. Rungs within 10x of the
/// observed floor are skipped.
CheckReport check_fd_order(const FockRep& rep, const Expression& a, const VecC& xi,
                           const std::vector<double>& steps = {0.05, 0.025, 0.0125,
                                                               0.00625});

/// Reruns the sigma-dependent battery rows at doubled cutoff on the same
/// embedded vectors; the residual must not grow beyond 1.1x.
CheckReport check_truncation_guard(const FockRep& rep, const std::vector<Vec>& fs,
                                   std::uint64_t seed);

}  // namespace rwb
