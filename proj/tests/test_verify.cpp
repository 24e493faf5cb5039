#include "rwb/verify.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace rwb;

namespace {

ModelPtr canonical(int pairs = 1) {
  return std::make_shared<SpaceModel>(SpaceModel::canonical_pairs(pairs));
}

ModelPtr hermite(int n) {
  return std::make_shared<SpaceModel>(SpaceModel::lightray_hermite(n));
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec scaled4(double s, double a, double b, double c, double d) {
  Vec v(4);
  v << a, b, c, d;
  return s * v / v.norm();
}

std::vector<Vec> battery_functions() {
  return {vec2(0.05, 0.02), vec2(-0.01, 0.06), vec2(0.03, -0.04)};
}

const CaseResult* find_case(const CheckReport& r, const std::string& prefix) {
  for (const auto& c : r.cases)
    if (c.label.rfind(prefix, 0) == 0) return &c;
  return nullptr;
}

int count_cases(const CheckReport& r, const std::string& prefix) {
  int n = 0;
  for (const auto& c : r.cases)
    if (c.label.rfind(prefix, 0) == 0) ++n;
  return n;
}

}  // namespace

TEST_CASE("random source and fd helpers") {
  SUBCASE("rng determinism and ranges") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
      const double u = a.uniform();
      CHECK(u == b.uniform());
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
    Rng c(42);
    for (int i = 0; i < 50; ++i) {
      const int k = c.pick(7);
      CHECK(k >= 0);
      CHECK(k < 7);
    }
    Rng d(1);
    double mean = 0, var = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double x = d.normal();
      mean += x;
      var += x * x;
    }
    mean /= n;
    var = var / n - mean * mean;
    CHECK(std::abs(mean) <= 0.03);
    CHECK(std::abs(var - 1.0) <= 0.05);
  }

  SUBCASE("finite differences on a frozen curve") {
    auto curve = [](double t) {
      VecC v(2);
      v << Complex{std::sin(t), 0.0}, Complex{std::exp(t), 0.0};
      return v;
    };
    VecC exact(2);
    exact << Complex{1.0, 0.0}, Complex{1.0, 0.0};
    const VecC d2 = fd_derivative(curve, {1e-4, FDScheme::Central2});
    CHECK((d2 - exact).norm() <= 5e-9);
    CHECK((d2 - exact).norm() >= 1e-10);  // genuinely second order, not exact
    const VecC d4 = fd_derivative(curve, {1e-3, FDScheme::Richardson4});
    CHECK((d4 - exact).norm() <= 1e-11);
    // halving h cuts the central error near 4x
    const double e1 = (fd_derivative(curve, {2e-3, FDScheme::Central2}) - exact).norm();
    const double e2 = (fd_derivative(curve, {1e-3, FDScheme::Central2}) - exact).norm();
    CHECK(e1 / e2 >= 3.8);
    CHECK(e1 / e2 <= 4.2);
    CHECK_THROWS_AS(fd_derivative(curve, {0.0, FDScheme::Central2}),
                    std::invalid_argument);
  }

  SUBCASE("log-log slope") {
    std::vector<double> xs = {1, 2, 4, 8, 16};
    std::vector<double> inv, sq;
    for (double x : xs) {
      inv.push_back(3.0 / x);
      sq.push_back(0.5 * x * x);
    }
    CHECK(std::abs(log_log_slope(xs, inv) + 1.0) <= 1e-12);
    CHECK(std::abs(log_log_slope(xs, sq) - 2.0) <= 1e-12);
    CHECK_THROWS_AS(log_log_slope({1.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(log_log_slope({1.0, 2.0}, {1.0, -1.0}), std::invalid_argument);
  }

  SUBCASE("report bookkeeping") {
    CheckReport r;
    r.add_case("a", 1e-12, 1e-10);
    r.add_case("b", 2e-10, 1e-10);
    CHECK(!r.pass());
    CHECK(r.max_residual() == 2e-10);
    CHECK(r.mean_residual() == doctest::Approx((1e-12 + 2e-10) / 2));
    r.cases.pop_back();
    CHECK(r.pass());
  }
}

TEST_CASE("test vector builders") {
  FockRep rep(canonical(), {.boson_cutoff = 16, .safe_margin = 4});
  Rng rng(3);
  SUBCASE("decaying vectors sit in the safe subspace") {
    const VecC v = decaying_vector(rep, rng);
    CHECK(std::abs(v.norm() - 1.0) <= 1e-14);
    CHECK((rep.safe_project(v) - v).norm() == 0.0);
    Rng rng2(3);
    CHECK((decaying_vector(rep, rng2) - v).norm() == 0.0);
  }
  SUBCASE("domain vectors") {
    const VecC v = domain_vector(rep, rng, battery_functions());
    CHECK(std::abs(v.norm() - 1.0) <= 1e-14);
    CHECK((rep.safe_project(v) - v).norm() == 0.0);
    CHECK_THROWS_AS(domain_vector(rep, rng, {}), std::invalid_argument);
  }
}

TEST_CASE("resolvent battery") {
  FockRep rep(canonical(), {.boson_cutoff = 16, .safe_margin = 4});
  const auto fs = battery_functions();
  const std::vector<double> ls = {1.0, -1.0, 2.0, 10.0};
  const CheckReport r = check_resolvent_battery(rep, fs, ls, 7);

  CHECK(r.pass());
  CHECK(r.check_id == "resolvent_battery");
  // every relation family is present
  CHECK(count_cases(r, "null resolvent") == 4);
  CHECK(count_cases(r, "adjoint") == 12);
  CHECK(count_cases(r, "scaling") == 12);
  CHECK(count_cases(r, "field fusion") == 12);
  CHECK(count_cases(r, "regroup") == 6);
  CHECK(count_cases(r, "commutator") == 10);
  CHECK(count_cases(r, "fusion lambda") == 14);
  // the lambda+mu = 0 pairs were skipped and logged
  CHECK(r.extra["skipped"].size() == 2);
  // scalar-calculus rows hold at 1e-10, sigma rows at the calibrated 1e-6
  for (const auto& c : r.cases) {
    const bool sigma_row = c.label.rfind("commutator", 0) == 0 ||
                           c.label.rfind("fusion lambda", 0) == 0;
    CHECK(c.tolerance == (sigma_row ? 1e-6 : 1e-10));
    CHECK(c.pass);
  }
  CHECK(r.wall_time_ms > 0.0);

  SUBCASE("determinism under a fixed seed") {
    const CheckReport r2 = check_resolvent_battery(rep, fs, ls, 7);
    REQUIRE(r2.cases.size() == r.cases.size());
    for (std::size_t i = 0; i < r.cases.size(); ++i)
      CHECK(r2.cases[i].residual == r.cases[i].residual);
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(check_resolvent_battery(rep, {fs[0]}, ls, 7),
                    std::invalid_argument);
    CHECK_THROWS_AS(check_resolvent_battery(rep, fs, {1.0, 0.0}, 7),
                    std::invalid_argument);
  }
}

TEST_CASE("norm law") {
  SUBCASE("odd cutoff: bound and equality") {
    FockRep rep(canonical(), {.boson_cutoff = 31, .safe_margin = 4});
    const CheckReport r = check_norm_law(rep, vec2(1.0, 0.0), {1.0, 2.0, 10.0});
    CHECK(r.pass());
    CHECK(count_cases(r, "norm bound") == 3);
    CHECK(count_cases(r, "norm equality") == 3);
  }
  SUBCASE("even cutoff: bound only") {
    FockRep rep(canonical(), {.boson_cutoff = 16, .safe_margin = 4});
    const CheckReport r = check_norm_law(rep, vec2(1.0, 0.0), {1.0, 2.0});
    CHECK(r.pass());
    CHECK(count_cases(r, "norm equality") == 0);
    CHECK(r.extra.contains("note"));
  }
}

TEST_CASE("identity asymptotics") {
  FockRep rep(canonical(), {.boson_cutoff = 16, .safe_margin = 4});
  const std::vector<double> ls = {1, 2, 4, 8, 16, 32, 64};
  const CheckReport r = check_asymptotics(rep, vec2(1.0, 0.0), ls, 11, 5);
  CHECK(r.pass());
  CHECK(int(r.cases.size()) == 5);
  for (const auto& c : r.cases) CHECK(c.tolerance == 0.15);
  CHECK_THROWS_AS(check_asymptotics(rep, vec2(1.0, 0.0), {4.0}, 11, 2),
                  std::invalid_argument);
}

TEST_CASE("generator formula") {
  auto m = hermite(4);
  FockRep rep(m, {.boson_cutoff = 12, .safe_margin = 4});
  const Vec f = scaled4(0.04, 1.0, 0.6, -0.4, 0.2);
  const Vec g = scaled4(0.04, -0.3, 1.0, 0.5, -0.6);
  Rng rng(5);
  const VecC xi = domain_vector(rep, rng, {f, g});

  SUBCASE("battery elements pass at 1e-5 with tight two-sided gap") {
    for (const Expression& a :
         {cliff(m, f), res(m, 1.0, f), mul(cliff(m, f), res(m, 1.0, g))}) {
      const CheckReport r = check_generator(rep, a, xi);
      CHECK(r.pass());
      const auto* c1 = find_case(r, "vs time derivation");
      const auto* c2 = find_case(r, "vs squared odd derivation");
      const auto* gap = find_case(r, "two-sided gap");
      REQUIRE(c1 != nullptr);
      REQUIRE(c2 != nullptr);
      REQUIRE(gap != nullptr);
      CHECK(c1->residual <= 1e-5);
      CHECK(c2->residual <= 1e-5);
      CHECK(gap->residual <= 1e-10);
    }
  }
  SUBCASE("unit element: derivative vanishes") {
    const CheckReport r = check_generator(rep, scalar_expr(1.0), xi);
    CHECK(r.pass());
    CHECK(find_case(r, "vs time derivation")->residual <= 1e-12);
  }
  SUBCASE("field atoms rejected") {
    CHECK_THROWS_AS(check_generator(rep, field(m, f), xi), std::domain_error);
  }
}

TEST_CASE("susy core check") {
  auto m = hermite(4);
  FockRep rep(m, {.boson_cutoff = 12, .safe_margin = 4});
  const Vec f = scaled4(0.04, 1.0, 0.6, -0.4, 0.2);
  const Vec g = scaled4(0.04, -0.3, 1.0, 0.5, -0.6);
  const std::vector<double> ls = {1.0, 10.0, 100.0};

  SUBCASE("mollified flow and diagnostics on the vacuum") {
    const CheckReport r = check_susy_core(rep, zeta(m, f), ls, rep.vacuum());
    CHECK(r.pass());
    CHECK(count_cases(r, "mollified flow") == 3);
    for (const auto& c : r.cases)
      if (c.label.rfind("mollified flow", 0) == 0) CHECK(c.residual <= 1e-5);
    CHECK(find_case(r, "identity-approach slope")->residual <= 0.2);
    CHECK(find_case(r, "derivative-decay slope")->residual <= 0.2);
    CHECK(find_case(r, "derivative norm halving")->residual <= 0.1);
  }
  SUBCASE("product core element on an excited vector") {
    Rng rng(9);
    const VecC xi = domain_vector(rep, rng, {f, g});
    const CheckReport r =
        check_susy_core(rep, mul(zeta(m, f), res(m, 1.0, g)), ls, xi);
    CHECK(r.pass());
  }
  SUBCASE("non-core input rejected") {
    CHECK_THROWS_AS(check_susy_core(rep, cliff(m, f), ls, rep.vacuum()),
                    std::domain_error);
  }
}

TEST_CASE("susy identity battery") {
  FockRep rep(canonical(), {.boson_cutoff = 16, .safe_margin = 4});
  const std::vector<Vec> fs = {vec2(0.03, 0.01), vec2(-0.02, 0.025)};
  const CheckReport r = check_susy_identity(rep, fs, 13, 50, 4);
  CHECK(r.pass());
  CHECK(count_cases(r, "atom") == 6);
  CHECK(count_cases(r, "word") == 50);
  CHECK(count_cases(r, "mollified-square factorization") == 6);
  for (const auto& c : r.cases) {
    const bool core_row = c.label.rfind("mollified-square", 0) == 0;
    CHECK(c.tolerance == (core_row ? 1e-10 : 1e-8));
  }
}

TEST_CASE("state conditions") {
  SUBCASE("canonical defaults") {
    FockRep rep(canonical(), {.boson_cutoff = 16, .safe_margin = 4});
    const CheckReport r = check_state_conditions(rep);
    CHECK(r.pass());
    CHECK(r.params["h"] == 1e-5);
    CHECK(r.tolerance == 1e-8);
    CHECK(count_cases(r, "flowed field derivative") == 2);
  }
  SUBCASE("hermite defaults") {
    FockRep rep(hermite(4), {.boson_cutoff = 12, .safe_margin = 4});
    const CheckReport r = check_state_conditions(rep);
    CHECK(r.pass());
    CHECK(r.params["h"] == 1e-4);
    CHECK(r.tolerance == 1e-6);
    CHECK(count_cases(r, "flowed field derivative") == 4);
  }
}

TEST_CASE("density net") {
  auto m = canonical();
  FockRep rep(m, {.boson_cutoff = 31, .safe_margin = 4});
  const std::vector<double> ls = {2, 4, 8, 16, 32, 64};
  Rng rng(17);
  const VecC xi = domain_vector(rep, rng, battery_functions());

  SUBCASE("clifford substitution decays at rate -1") {
    const CheckReport r = check_density_net(rep, cliff(m, vec2(0.3, -0.1)), ls, xi);
    CHECK(r.pass());
    CHECK(find_case(r, "substitution decay slope") != nullptr);
    CHECK(find_case(r, "factor norm equality") != nullptr);
  }
  SUBCASE("no clifford factors: exact") {
    const CheckReport r = check_density_net(rep, res(m, 1.0, vec2(0.4, 0.2)), ls, xi);
    CHECK(r.pass());
    CHECK(find_case(r, "no clifford factors") != nullptr);
    CHECK(find_case(r, "no clifford factors")->residual == 0.0);
  }
  SUBCASE("even cutoff asserts the bound form") {
    FockRep even(m, {.boson_cutoff = 16, .safe_margin = 4});
    Rng rng2(17);
    const VecC xi2 = domain_vector(even, rng2, battery_functions());
    const CheckReport r =
        check_density_net(even, cliff(m, vec2(0.3, -0.1)), ls, xi2);
    CHECK(r.pass());
    CHECK(find_case(r, "factor norm bound") != nullptr);
  }
  SUBCASE("field atoms rejected") {
    CHECK_THROWS_AS(check_density_net(rep, field(m, vec2(1, 0)), ls, xi),
                    std::domain_error);
  }
}

TEST_CASE("fd order ladder") {
  auto m = hermite(4);
  FockRep rep(m, {.boson_cutoff = 12, .safe_margin = 4});
  const Vec f = scaled4(0.04, 1.0, 0.6, -0.4, 0.2);
  Rng rng(19);
  const VecC xi = domain_vector(rep, rng, {f});

  SUBCASE("resolvent element: time ladder asserted") {
    const CheckReport r = check_fd_order(rep, res(m, 1.0, f), xi);
    CHECK(r.pass());
    CHECK(count_cases(r, "time flow order deficit") >= 2);
    const auto rungs = r.extra["time flow rungs"].get<std::vector<double>>();
    REQUIRE(rungs.size() == 4);
    for (std::size_t i = 0; i + 1 < rungs.size(); ++i) CHECK(rungs[i] > rungs[i + 1]);
  }
  SUBCASE("core element: both ladders present") {
    const CheckReport r = check_fd_order(rep, zeta(m, f), xi);
    CHECK(r.pass());
    CHECK(r.extra.contains("time flow rungs"));
    CHECK(r.extra.contains("mollified flow rungs"));
    CHECK(count_cases(r, "mollified flow order deficit") >= 2);
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(check_fd_order(rep, field(m, f), xi), std::domain_error);
    CHECK_THROWS_AS(check_fd_order(rep, res(m, 1.0, f), xi, {0.1}),
                    std::invalid_argument);
  }
}

TEST_CASE("truncation guard") {
  FockRep rep(canonical(), {.boson_cutoff = 16, .safe_margin = 4});
  const CheckReport r = check_truncation_guard(rep, battery_functions(), 23);
  CHECK(r.pass());
  CHECK(r.extra["commutator"].size() == 2);
  CHECK(r.extra["fusion"].size() == 2);
  // the doubled-cutoff residuals are strictly smaller on these vectors
  CHECK(r.extra["commutator"][1].get<double>() <=
        1.1 * r.extra["commutator"][0].get<double>() + 1e-13);
}
