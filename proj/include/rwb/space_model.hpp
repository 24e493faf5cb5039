#pragma once

#include <Eigen/Dense>

#include <complex>
#include <memory>
#include <string>

namespace rwb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Complex = std::complex<double>;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;

enum class ModelFlavor { CanonicalPairs, LightrayHermite, Custom };

std::string to_string(ModelFlavor flavor);

/// Darboux frame for sigma: columns of `basis` are [e_1..e_n | f_1..f_n]
/// with sigma(e_j, f_k) = delta_jk and sigma(e_j, e_k) = sigma(f_j, f_k) = 0.
struct DarbouxFrame {
  Mat basis;
  Mat inverse;
  int pairs = 0;
};

/// Finite-dimensional test-function space (X, tau, sigma, S, T_t).
///
/// tau is a positive-definite scalar product, S is tau-antisymmetric,
/// sigma(f, g) := tau(f, -S g) is required nondegenerate, T_t = exp(tS).
/// The derivative map is prime(f) = -S f, so sigma(f, g) = tau(f, prime(g)).
/// tau-antisymmetry of S is a requirement of this workbench's validators,
/// enforced for custom models as well.
class SpaceModel {
public:
  /// N = 2*n_pairs, tau = identity, S(u, v) = (-v, u) blockwise.
  /// Basis layout is (u_1..u_n, v_1..v_n). The flow is an exact rotation.
  static SpaceModel canonical_pairs(int n_pairs);

  /// First `basis_size` orthonormal Hermite-function modes on the line,
  /// tau = identity, prime = tridiagonal derivative matrix D with
  /// D[n-1][n] = sqrt(n/2), D[n+1][n] = -sqrt((n+1)/2), S = -D.
  /// basis_size must be even and positive, otherwise sigma is degenerate.
  static SpaceModel lightray_hermite(int basis_size);

  /// Arbitrary model; tau must be symmetric positive definite, S square of
  /// matching size and tau-antisymmetric, sigma nondegenerate.
  static SpaceModel custom(Mat tau, Mat S);

  int dim() const { return static_cast<int>(S_.rows()); }
  ModelFlavor flavor() const { return flavor_; }

  const Mat& tau_matrix() const { return tau_; }
  const Mat& S_matrix() const { return S_; }
  const Mat& sigma_matrix() const { return sigma_; }
  /// Lower-triangular L with tau = L L^T.
  const Mat& tau_cholesky() const { return chol_; }

  double tau(const Vec& f, const Vec& g) const;
  double sigma(const Vec& f, const Vec& g) const;
  Vec prime(const Vec& f) const;
  Vec flow(double t, const Vec& f) const;
  Vec basis_vector(int i) const;

  const DarbouxFrame& darboux_basis() const { return frame_; }

private:
  SpaceModel(ModelFlavor flavor, Mat tau, Mat S);
  void check_vector(const Vec& f) const;
  DarbouxFrame build_darboux() const;

  ModelFlavor flavor_;
  Mat tau_;
  Mat S_;
  Mat sigma_;
  Mat chol_;
  DarbouxFrame frame_;
};

using ModelPtr = std::shared_ptr<const SpaceModel>;

/// Structural equality: same flavor, same tau and S entries.
bool same_space(const SpaceModel& a, const SpaceModel& b);

}  // namespace rwb
