#include "rwb/space_model.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

using namespace rwb;

namespace {

bool throws_with(const std::function<void()>& fn, const std::string& needle) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

// Orthonormal Hermite functions h_0..h_n at x, by the stable three-term
// recurrence h_{k+1} = (x*h_k*sqrt(2) - sqrt(k)*h_{k-1}) / sqrt(k+1).
std::vector<double> hermite_values(int n, double x) {
  std::vector<double> h(n + 1);
  h[0] = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
  if (n >= 1) h[1] = std::sqrt(2.0) * x * h[0];
  for (int k = 1; k < n; ++k)
    h[k + 1] = (std::sqrt(2.0) * x * h[k] - std::sqrt(double(k)) * h[k - 1]) /
               std::sqrt(double(k + 1));
  return h;
}

double hermite_fd_derivative(int n, double x) {
  const double h = 1e-4;
  auto v = [n](double y) { return hermite_values(n, y)[n]; };
  const double d1 = (v(x + h) - v(x - h)) / (2 * h);
  const double d2 = (v(x + h / 2) - v(x - h / 2)) / h;
  return (4 * d2 - d1) / 3;
}

// Simpson quadrature of integrand over [-12, 12]; the Hermite weight makes
// the tails negligible far below the 1e-6 comparisons used here.
double simpson(const std::function<double(double)>& f) {
  const int n = 4800;  // intervals
  const double a = -12.0, b = 12.0, h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Independent value of the derivative pairing integral(h_m * h_n').
double derivative_pairing(int m, int n) {
  return simpson([&](double x) {
    return hermite_values(m, x)[m] * hermite_fd_derivative(n, x);
  });
}

}  // namespace

TEST_CASE("canonical pairs model") {
  auto model = SpaceModel::canonical_pairs(1);
  CHECK(model.dim() == 2);
  CHECK(model.flavor() == ModelFlavor::CanonicalPairs);
  CHECK(model.tau_matrix() == Mat::Identity(2, 2));

  Vec u = model.basis_vector(0), v = model.basis_vector(1);

  SUBCASE("pairing and prime") {
    CHECK(model.sigma(u, v) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(model.sigma(v, u) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(model.sigma(u, u) == 0.0);
    // prime((u, v)) = (v, -u)
    Vec f(2);
    f << 0.3, -1.7;
    Vec fp = model.prime(f);
    CHECK(fp(0) == doctest::Approx(-1.7).epsilon(1e-15));
    CHECK(fp(1) == doctest::Approx(-0.3).epsilon(1e-15));
    CHECK(model.prime(Vec::Zero(2)).norm() == 0.0);
    // prime(prime(f)) = S^2 f = -f here
    CHECK((model.prime(model.prime(f)) + f).norm() <= 1e-15);
  }

  SUBCASE("flow is the exact rotation") {
    Vec rot = model.flow(M_PI / 2, u);
    CHECK((rot - v).norm() <= 1e-12);
    CHECK(model.flow(2 * M_PI, u).isApprox(u, 1e-12));
    CHECK(std::abs(model.flow(1.234, u).norm() - 1.0) <= 1e-12);
  }

  SUBCASE("darboux frame is the identity") {
    const auto& frame = model.darboux_basis();
    CHECK(frame.pairs == 1);
    CHECK((frame.basis - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-14);
  }

  CHECK_THROWS_AS(SpaceModel::canonical_pairs(0), std::invalid_argument);
  CHECK_THROWS_AS((void)model.sigma(u, Vec::Zero(3)), std::invalid_argument);
}

TEST_CASE("lightray hermite model") {
  auto model = SpaceModel::lightray_hermite(4);
  CHECK(model.dim() == 4);

  SUBCASE("derivative matrix against quadrature") {
    // Frozen values: integral(h_{n-1} h_n') = sqrt(n/2).
    CHECK(derivative_pairing(0, 1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
    CHECK(derivative_pairing(1, 0) == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-6));
    CHECK(derivative_pairing(1, 2) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(derivative_pairing(2, 3) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-6));
    CHECK(std::abs(derivative_pairing(0, 3)) <= 1e-6);
    CHECK(std::abs(derivative_pairing(2, 2)) <= 1e-6);

    const Mat D = -model.S_matrix();  // prime(f) = D f
    for (int m = 0; m < 4; ++m)
      for (int n = 0; n < 4; ++n)
        CHECK(D(m, n) == doctest::Approx(derivative_pairing(m, n)).epsilon(2e-6));
  }

  SUBCASE("prime and sigma on basis modes") {
    Vec h0 = model.basis_vector(0), h1 = model.basis_vector(1);
    Vec p0 = model.prime(h0);
    CHECK(p0(1) == doctest::Approx(-0.7071067811865476).epsilon(1e-15));
    CHECK(std::abs(p0(0)) + std::abs(p0(2)) + std::abs(p0(3)) == 0.0);
    CHECK(model.sigma(h0, h1) == doctest::Approx(0.7071068).epsilon(1e-7));
    CHECK(model.sigma(h1, h0) == doctest::Approx(-0.7071068).epsilon(1e-7));
  }

  SUBCASE("flow: group law, tau-orthogonality, sigma invariance") {
    Vec f(4), g(4);
    f << 0.4, -0.2, 0.9, 0.3;
    g << -1.1, 0.5, 0.2, -0.7;
    Vec a = model.flow(-0.7, model.flow(0.3, f));
    Vec b = model.flow(-0.4, f);
    CHECK((a - b).norm() <= 1e-12);
    CHECK(std::abs(model.flow(0.6, f).norm() - f.norm()) <= 1e-12);
    CHECK(model.sigma(model.flow(0.6, f), model.flow(0.6, g)) ==
          doctest::Approx(model.sigma(f, g)).epsilon(1e-12));
    CHECK(model.flow(0.0, f).isApprox(f, 1e-15));
  }

  SUBCASE("central difference of the flow recovers S f at order >= 1") {
    Vec f(4);
    f << 1.0, -0.5, 0.25, 0.8;
    auto fd_err = [&](double h) {
      Vec d = (model.flow(h, f) - model.flow(-h, f)) / (2 * h);
      return (d - model.S_matrix() * f).norm();
    };
    const double e1 = fd_err(1e-2), e2 = fd_err(5e-3);
    CHECK(e2 <= 0.6 * e1);  // order >= 1 (central scheme gives ~0.25)
  }

  SUBCASE("darboux frame") {
    auto small = SpaceModel::lightray_hermite(2);
    const auto& f2 = small.darboux_basis();
    CHECK(f2.pairs == 1);
    CHECK(f2.basis.col(0).isApprox(small.basis_vector(0), 1e-14));
    CHECK(f2.basis.col(1).isApprox(std::sqrt(2.0) * small.basis_vector(1), 1e-12));

    const auto& f4 = model.darboux_basis();
    const int n = f4.pairs;
    REQUIRE(n == 2);
    for (int i = 0; i < 2 * n; ++i)
      for (int j = 0; j < 2 * n; ++j) {
        double want = 0.0;
        if (j == i + n) want = 1.0;
        if (i == j + n) want = -1.0;
        CHECK(model.sigma(f4.basis.col(i), f4.basis.col(j)) ==
              doctest::Approx(want).epsilon(1e-12));
      }
  }

  SUBCASE("odd mode count rejected") {
    CHECK(throws_with([] { SpaceModel::lightray_hermite(3); }, "even"));
    CHECK_THROWS_AS(SpaceModel::lightray_hermite(-2), std::invalid_argument);
  }
}

TEST_CASE("model validation invariants") {
  SUBCASE("tau-antisymmetry of S holds in both builtin models") {
    for (const auto& model :
         {SpaceModel::canonical_pairs(2), SpaceModel::lightray_hermite(6)}) {
      const Mat& tau = model.tau_matrix();
      const Mat& S = model.S_matrix();
      CHECK((S.transpose() * tau + tau * S).cwiseAbs().maxCoeff() <= 1e-12);
      // Gram residual of the flow
      Mat T = Mat::Identity(model.dim(), model.dim());
      for (int i = 0; i < model.dim(); ++i)
        T.col(i) = model.flow(0.37, Vec(T.col(i)));
      CHECK((T.transpose() * tau * T - tau).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  SUBCASE("custom model checks") {
    Mat tau = Mat::Identity(2, 2);
    Mat S(2, 2);
    S << 0, -1, 1, 0;
    auto ok = SpaceModel::custom(tau, S);
    CHECK(ok.flavor() == ModelFlavor::Custom);
    CHECK(ok.sigma(ok.basis_vector(0), ok.basis_vector(1)) ==
          doctest::Approx(1.0).epsilon(1e-14));

    Mat bad_tau(2, 2);
    bad_tau << 1, 0.5, 0, 1;
    CHECK(throws_with([&] { SpaceModel::custom(bad_tau, S); }, "symmetric"));
    CHECK(throws_with([&] { SpaceModel::custom(-tau, S); }, "positive definite"));
    CHECK(throws_with([&] { SpaceModel::custom(tau, Mat::Identity(2, 2)); },
                      "antisymmetric"));
    CHECK(throws_with([&] { SpaceModel::custom(tau, Mat::Zero(2, 2)); },
                      "degenerate"));
    CHECK(throws_with([&] { SpaceModel::custom(tau, Mat::Zero(3, 3)); }, "square"));

    // sigma degenerate on a proper subspace: rotation on the first pair,
    // nothing on the second.
    Mat tau4 = Mat::Identity(4, 4);
    Mat S4 = Mat::Zero(4, 4);
    S4(1, 0) = 1;
    S4(0, 1) = -1;
    CHECK(throws_with([&] { SpaceModel::custom(tau4, S4); }, "degenerate"));
  }

  SUBCASE("same_space") {
    auto a = SpaceModel::canonical_pairs(1);
    auto b = SpaceModel::canonical_pairs(1);
    auto c = SpaceModel::lightray_hermite(2);
    CHECK(same_space(a, b));
    CHECK(!same_space(a, c));
    CHECK(to_string(a.flavor()) == "canonical_pairs");
    CHECK(to_string(c.flavor()) == "lightray_hermite");
  }
}
