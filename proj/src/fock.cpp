#include "rwb/fock.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rwb {

namespace {

constexpr Complex kI{0.0, 1.0};

MatC pauli_x() {
  MatC m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

MatC pauli_y() {
  MatC m(2, 2);
  m << 0, Complex{0, -1}, Complex{0, 1}, 0;
  return m;
}

MatC pauli_z() {
  MatC m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace

MatC kron(const MatC& a, const MatC& b) {
  MatC out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

bool FockRep::ResKey::operator<(const ResKey& o) const {
  if (lambda != o.lambda) return lambda < o.lambda;
  return arg < o.arg;
}

FockRep::FockRep(ModelPtr model, RepConfig config)
    : model_(std::move(model)), config_(config) {
  if (!model_) throw std::invalid_argument("representation requires a model");
  const int d = config_.boson_cutoff;
  if (d < 4) throw std::invalid_argument("boson_cutoff must be at least 4");
  if (config_.safe_margin <= 0 || 2 * config_.safe_margin >= d)
    throw std::invalid_argument("safe_margin must satisfy 0 < margin < cutoff/2");

  const int n_majorana = model_->dim();
  modes_ = n_majorana / 2;
  const int qubits = (n_majorana + 1) / 2;
  fermion_dim_ = 1L << qubits;
  const double total = double(fermion_dim_) * std::pow(double(d), modes_);
  if (total > double(config_.dimension_budget)) {
    std::ostringstream msg;
    msg << "dimension budget exceeded: 2^" << qubits << " * " << d << "^"
        << modes_ << " = " << total << " > " << config_.dimension_budget;
    throw std::invalid_argument(msg.str());
  }
  boson_dim_ = 1;
  for (int k = 0; k < modes_; ++k) boson_dim_ *= d;

  // Jordan-Wigner chain, scaled so {c_i, c_j} = delta_ij.
  majorana_.reserve(n_majorana);
  for (int i = 0; i < n_majorana; ++i) {
    const int site = i / 2;
    MatC op = MatC::Identity(1, 1);
    for (int s = 0; s < qubits; ++s) {
      if (s < site) op = kron(op, pauli_z());
      else if (s == site) op = kron(op, (i % 2 == 0) ? pauli_x() : pauli_y());
      else op = kron(op, MatC::Identity(2, 2));
    }
    majorana_.push_back(op / std::sqrt(2.0));
  }

  // Single-mode ladder blocks, then full boson-side factors per mode.
  MatC q1 = MatC::Zero(d, d), p1 = MatC::Zero(d, d);
  for (int n = 1; n < d; ++n) {
    const double r = std::sqrt(n / 2.0);
    q1(n - 1, n) = r;
    q1(n, n - 1) = r;
    p1(n - 1, n) = Complex{0.0, -r};
    p1(n, n - 1) = Complex{0.0, r};
  }
  for (int k = 0; k < modes_; ++k) {
    MatC qk = MatC::Identity(1, 1), pk = MatC::Identity(1, 1);
    for (int m = 0; m < modes_; ++m) {
      qk = kron(qk, m == k ? q1 : MatC::Identity(d, d));
      pk = kron(pk, m == k ? p1 : MatC::Identity(d, d));
    }
    q_.push_back(std::move(qk));
    p_.push_back(std::move(pk));
  }
}

MatC FockRep::fermion_cliff(const Vec& f) const {
  if (f.size() != model_->dim())
    throw std::invalid_argument("test function has wrong dimension");
  const Vec coords = model_->tau_cholesky().transpose() * f;
  MatC out = MatC::Zero(fermion_dim_, fermion_dim_);
  for (int i = 0; i < coords.size(); ++i)
    if (coords(i) != 0.0) out += coords(i) * majorana_[i];
  return out;
}

MatC FockRep::boson_field(const Vec& f) const {
  if (f.size() != model_->dim())
    throw std::invalid_argument("test function has wrong dimension");
  const Vec coords = model_->darboux_basis().inverse * f;
  MatC out = MatC::Zero(boson_dim_, boson_dim_);
  for (int k = 0; k < modes_; ++k) {
    if (coords(k) != 0.0) out += coords(k) * q_[k];
    if (coords(modes_ + k) != 0.0) out += coords(modes_ + k) * p_[k];
  }
  return out;
}

MatC FockRep::boson_resolvent(double lambda, const Vec& f) const {
  if (lambda == 0.0) throw std::invalid_argument("resolvent requires nonzero lambda");
  ResKey key{lambda, {f.data(), f.data() + f.size()}};
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (auto it = res_cache_.find(key); it != res_cache_.end()) return it->second;
  }
  const MatC A =
      kI * lambda * MatC::Identity(boson_dim_, boson_dim_) - boson_field(f);
  MatC R = Eigen::PartialPivLU<MatC>(A).solve(MatC::Identity(boson_dim_, boson_dim_));
  const double residual =
      (A * R - MatC::Identity(boson_dim_, boson_dim_)).cwiseAbs().maxCoeff();
  if (residual > config_.solver_tolerance) {
    std::ostringstream msg;
    msg << "resolvent solve residual " << residual << " exceeds tolerance "
        << config_.solver_tolerance;
    throw std::runtime_error(msg.str());
  }
  std::lock_guard<std::mutex> lock(cache_mutex_);
  return res_cache_.emplace(std::move(key), std::move(R)).first->second;
}

MatC FockRep::op_cliff(const Vec& f) const {
  return kron(fermion_cliff(f), MatC::Identity(boson_dim_, boson_dim_));
}

MatC FockRep::op_field(const Vec& f) const {
  return kron(MatC::Identity(fermion_dim_, fermion_dim_), boson_field(f));
}

MatC FockRep::op_resolvent(double lambda, const Vec& f) const {
  return kron(MatC::Identity(fermion_dim_, fermion_dim_), boson_resolvent(lambda, f));
}

MatC FockRep::evaluate(const Expression& e) const {
  if (e.model() && !same_space(*e.model(), *model_))
    throw std::invalid_argument("expression belongs to a different model");
  MatC out = MatC::Zero(dim(), dim());
  for (const auto& term : e.terms()) {
    MatC fermion = MatC::Identity(fermion_dim_, fermion_dim_);
    MatC boson = MatC::Identity(boson_dim_, boson_dim_);
    for (const auto& atom : term.word) {
      switch (atom.kind) {
        case AtomKind::Cliff: fermion = fermion * fermion_cliff(atom.arg); break;
        case AtomKind::Field: boson = boson * boson_field(atom.arg); break;
        case AtomKind::Res: boson = boson * boson_resolvent(atom.lambda, atom.arg); break;
      }
    }
    out += term.coeff * kron(fermion, boson);
  }
  return out;
}

VecC FockRep::strong_apply(const Expression& e, const VecC& v) const {
  if (e.model() && !same_space(*e.model(), *model_))
    throw std::invalid_argument("expression belongs to a different model");
  if (v.size() != dim()) throw std::invalid_argument("vector has wrong dimension");

  using RowMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> V(v.data(), fermion_dim_, boson_dim_);
  RowMat acc = RowMat::Zero(fermion_dim_, boson_dim_);
  for (const auto& term : e.terms()) {
    RowMat W = V;
    for (auto it = term.word.rbegin(); it != term.word.rend(); ++it) {
      switch (it->kind) {
        case AtomKind::Cliff:
          W = fermion_cliff(it->arg) * W;
          break;
        case AtomKind::Field:
          W = W * boson_field(it->arg).transpose();
          break;
        case AtomKind::Res:
          W = W * boson_resolvent(it->lambda, it->arg).transpose();
          break;
      }
    }
    acc += term.coeff * W;
  }
  VecC out(dim());
  Eigen::Map<RowMat>(out.data(), fermion_dim_, boson_dim_) = acc;
  return out;
}

VecC FockRep::vacuum() const {
  VecC v = VecC::Zero(dim());
  v(0) = 1.0;
  return v;
}

std::vector<int> FockRep::occupations(long boson_index) const {
  std::vector<int> occ(modes_);
  const int d = config_.boson_cutoff;
  for (int k = modes_ - 1; k >= 0; --k) {
    occ[k] = static_cast<int>(boson_index % d);
    boson_index /= d;
  }
  return occ;
}

VecC FockRep::safe_project(const VecC& v, int margin) const {
  const int d = config_.boson_cutoff;
  if (margin <= 0 || 2 * margin >= d)
    throw std::invalid_argument("margin out of range: need 0 < margin < cutoff/2");
  if (v.size() != dim()) throw std::invalid_argument("vector has wrong dimension");
  VecC out = v;
  for (long b = 0; b < boson_dim_; ++b) {
    bool bad = false;
    for (int occ : occupations(b))
      if (occ > d - margin) {
        bad = true;
        break;
      }
    if (!bad) continue;
    for (long i = 0; i < fermion_dim_; ++i) out(i * boson_dim_ + b) = 0.0;
  }
  return out;
}

Complex FockRep::state_expectation(const Expression& e) const {
  const VecC omega = vacuum();
  return omega.dot(strong_apply(e, omega));
}

double operator_norm(const MatC& op) {
  if (op.rows() <= 128) {
    Eigen::BDCSVD<MatC> svd(op);
    return svd.singularValues()(0);
  }
  // Power iteration on op* op; deterministic start.
  const MatC gram = op.adjoint() * op;
  VecC z = VecC::Ones(op.cols()) / std::sqrt(double(op.cols()));
  double value = 0.0;
  for (int it = 0; it < 300; ++it) {
    z = gram * z;
    const double nrm = z.norm();
    if (nrm == 0.0) return 0.0;
    z /= nrm;
    const double next = std::real(z.dot(gram * z));
    if (std::abs(next - value) <= 1e-14 * std::max(1.0, next)) {
      value = next;
      break;
    }
    value = next;
  }
  return std::sqrt(value);
}

VecC embed_vector(const FockRep& from, const FockRep& to, const VecC& v) {
  if (!same_space(from.space(), to.space()))
    throw std::invalid_argument("embedding requires the same model");
  if (to.config().boson_cutoff < from.config().boson_cutoff)
    throw std::invalid_argument("embedding requires a larger cutoff");
  if (v.size() != from.dim()) throw std::invalid_argument("vector has wrong dimension");
  VecC out = VecC::Zero(to.dim());
  const int d_from = from.config().boson_cutoff;
  const int d_to = to.config().boson_cutoff;
  for (long b = 0; b < from.boson_dim(); ++b) {
    long b_to = 0;
    long rem = b;
    // re-encode the occupation digits in the larger radix
    std::vector<int> occ(from.modes());
    for (int k = from.modes() - 1; k >= 0; --k) {
      occ[k] = static_cast<int>(rem % d_from);
      rem /= d_from;
    }
    for (int k = 0; k < from.modes(); ++k) b_to = b_to * d_to + occ[k];
    for (long i = 0; i < from.fermion_dim(); ++i)
      out(i * to.boson_dim() + b_to) = v(i * from.boson_dim() + b);
  }
  return out;
}

}  // namespace rwb
