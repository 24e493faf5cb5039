#include "rwb/space_model.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace rwb {

std::string to_string(ModelFlavor flavor) {
  switch (flavor) {
    case ModelFlavor::CanonicalPairs:
      return "canonical_pairs";
    case ModelFlavor::LightrayHermite:
      return "lightray_hermite";
    case ModelFlavor::Custom:
      return "custom";
  }
  return "unknown";
}

SpaceModel::SpaceModel(ModelFlavor flavor, Mat tau, Mat S)
    : flavor_(flavor), tau_(std::move(tau)), S_(std::move(S)) {
  const auto n = tau_.rows();
  if (n == 0) throw std::invalid_argument("model dimension must be positive");
  if (tau_.cols() != n) throw std::invalid_argument("tau must be square");
  if (S_.rows() != n || S_.cols() != n)
    throw std::invalid_argument("S must be square of the same size as tau");
  if ((tau_ - tau_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("tau must be symmetric");

  Eigen::LLT<Mat> llt(tau_);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("tau must be positive definite");
  chol_ = llt.matrixL();

  // tau(Sf, g) = -tau(f, Sg) for all f, g  <=>  S^T tau + tau S = 0.
  const double scale = std::max(1.0, tau_.cwiseAbs().maxCoeff() *
                                         std::max(1.0, S_.cwiseAbs().maxCoeff()));
  if ((S_.transpose() * tau_ + tau_ * S_).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("S must be tau-antisymmetric: S^T tau + tau S != 0");

  sigma_ = -tau_ * S_;

  Eigen::FullPivLU<Mat> lu(sigma_);
  lu.setThreshold(1e-10);
  if (lu.rank() < n) {
    Mat kernel = lu.kernel();
    std::ostringstream msg;
    msg << "sigma is degenerate: kernel vector (";
    for (Eigen::Index i = 0; i < kernel.rows(); ++i) {
      if (i) msg << ", ";
      msg << kernel(i, 0);
    }
    msg << ") has sigma(., v) = 0";
    throw std::invalid_argument(msg.str());
  }

  frame_ = build_darboux();
}

SpaceModel SpaceModel::canonical_pairs(int n_pairs) {
  if (n_pairs <= 0) throw std::invalid_argument("n_pairs must be positive");
  const int n = 2 * n_pairs;
  Mat S = Mat::Zero(n, n);
  for (int i = 0; i < n_pairs; ++i) {
    S(n_pairs + i, i) = 1.0;   // u_i -> v_i
    S(i, n_pairs + i) = -1.0;  // v_i -> -u_i
  }
  return SpaceModel(ModelFlavor::CanonicalPairs, Mat::Identity(n, n), std::move(S));
}

SpaceModel SpaceModel::lightray_hermite(int basis_size) {
  if (basis_size <= 0) throw std::invalid_argument("basis_size must be positive");
  if (basis_size % 2 != 0)
    throw std::invalid_argument(
        "basis_size must be even: the derivative pairing is degenerate on an "
        "odd number of Hermite modes");
  const int n = basis_size;
  Mat D = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    D(k - 1, k) = std::sqrt(k / 2.0);
    D(k, k - 1) = -std::sqrt(k / 2.0);
  }
  // prime(f) = D f, so S = -D.
  return SpaceModel(ModelFlavor::LightrayHermite, Mat::Identity(n, n), -D);
}

SpaceModel SpaceModel::custom(Mat tau, Mat S) {
  return SpaceModel(ModelFlavor::Custom, std::move(tau), std::move(S));
}

void SpaceModel::check_vector(const Vec& f) const {
  if (f.size() != dim())
    throw std::invalid_argument("test function has wrong dimension");
}

double SpaceModel::tau(const Vec& f, const Vec& g) const {
  check_vector(f);
  check_vector(g);
  return f.dot(tau_ * g);
}

double SpaceModel::sigma(const Vec& f, const Vec& g) const {
  check_vector(f);
  check_vector(g);
  return f.dot(sigma_ * g);
}

Vec SpaceModel::prime(const Vec& f) const {
  check_vector(f);
  return -S_ * f;
}

Vec SpaceModel::flow(double t, const Vec& f) const {
  check_vector(f);
  if (flavor_ == ModelFlavor::CanonicalPairs) {
    // Exact blockwise rotation; keeps the group law at round-off level.
    const int n = dim() / 2;
    const double c = std::cos(t), s = std::sin(t);
    Vec out(dim());
    for (int i = 0; i < n; ++i) {
      out(i) = c * f(i) - s * f(n + i);
      out(n + i) = s * f(i) + c * f(n + i);
    }
    return out;
  }
  return (t * S_).exp() * f;
}

Vec SpaceModel::basis_vector(int i) const {
  if (i < 0 || i >= dim()) throw std::invalid_argument("basis index out of range");
  Vec e = Vec::Zero(dim());
  e(i) = 1.0;
  return e;
}

DarbouxFrame SpaceModel::build_darboux() const {
  const int n = dim();
  std::vector<Vec> pool;
  pool.reserve(n);
  for (int i = 0; i < n; ++i) pool.push_back(basis_vector(i));

  std::vector<Vec> es, fs;
  while (!pool.empty()) {
    Vec e = pool.front();
    pool.erase(pool.begin());
    // Partner with the largest pairing; a vanishing row means degeneracy.
    int best = -1;
    double best_val = 0.0;
    for (std::size_t j = 0; j < pool.size(); ++j) {
      const double v = std::abs(sigma(e, pool[j]));
      if (v > best_val) {
        best_val = v;
        best = static_cast<int>(j);
      }
    }
    if (best < 0 || best_val < 1e-10) {
      std::ostringstream msg;
      msg << "darboux basis failed: sigma is degenerate on the remaining "
          << (pool.size() + 1) << "-dimensional subspace (pivot "
          << best_val << ")";
      throw std::invalid_argument(msg.str());
    }
    Vec f = pool[best] / sigma(e, pool[best]);
    pool.erase(pool.begin() + best);
    for (auto& w : pool) w = w - sigma(w, f) * e + sigma(w, e) * f;
    es.push_back(std::move(e));
    fs.push_back(std::move(f));
  }

  DarbouxFrame frame;
  frame.pairs = static_cast<int>(es.size());
  frame.basis.resize(n, n);
  for (int i = 0; i < frame.pairs; ++i) {
    frame.basis.col(i) = es[i];
    frame.basis.col(frame.pairs + i) = fs[i];
  }
  frame.inverse = frame.basis.inverse();
  return frame;
}

bool same_space(const SpaceModel& a, const SpaceModel& b) {
  return a.flavor() == b.flavor() && a.dim() == b.dim() &&
         a.tau_matrix() == b.tau_matrix() && a.S_matrix() == b.S_matrix();
}

}  // namespace rwb
