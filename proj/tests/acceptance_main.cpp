// Acceptance gate: eight end-to-end criteria, one line each, exit 0 iff all
// pass. Residual gates live inside the library checks; this binary pins the
// scenario (model, cutoff, elements, grids) and the runtime budget.

#include <chrono>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rwb/verify.hpp"

using namespace rwb;

namespace {

ModelPtr canonical_model() {
  return std::make_shared<SpaceModel>(SpaceModel::canonical_pairs(1));
}

ModelPtr hermite_model() {
  return std::make_shared<SpaceModel>(SpaceModel::lightray_hermite(4));
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

struct Criterion {
  std::string name;
  double budget_s;
  std::function<std::vector<CheckReport>()> run;
};

}  // namespace

int main() {
  const std::vector<double> lambda_small = {1.0, 2.0, 10.0};
  const std::vector<double> lambda_grid = {1, 2, 4, 8, 16, 32, 64};
  const std::vector<double> lambda_core = {1.0, 10.0, 100.0};

  // canonical pairs, one mode, cutoff 16: the relation/battery scale
  const auto cm = canonical_model();
  const std::vector<Vec> cfs = {vec2(0.05, 0.02), vec2(-0.01, 0.06),
                                vec2(0.03, -0.04)};

  // hermite modes, cutoff 12: the finite-difference / derivation scale
  const auto hm = hermite_model();
  const Vec hf = scaled4(0.04, 1.0, 0.6, -0.4, 0.2);
  const Vec hg = scaled4(0.04, -0.3, 1.0, 0.5, -0.6);

  std::vector<Criterion> criteria;

  criteria.push_back({"resolvent relation battery", 10.0, [&] {
    FockRep rep(cm, {.boson_cutoff = 16, .safe_margin = 4});
    return std::vector<CheckReport>{
        check_resolvent_battery(rep, cfs, {1.0, -1.0, 2.0, 10.0}, 0, 20)};
  }});

  criteria.push_back({"resolvent norm law", 5.0, [&] {
    FockRep rep(cm, {.boson_cutoff = 31, .safe_margin = 4});
    return std::vector<CheckReport>{check_norm_law(rep, cfs[0], lambda_small)};
  }});

  criteria.push_back({"identity-approach asymptotics", 10.0, [&] {
    FockRep rep(cm, {.boson_cutoff = 16, .safe_margin = 4});
    return std::vector<CheckReport>{
        check_asymptotics(rep, cfs[0], lambda_grid, 0, 5)};
  }});

  criteria.push_back({"flow generator formula", 60.0, [&] {
    FockRep rep(hm, {.boson_cutoff = 12, .safe_margin = 4});
    Rng rng(5);
    const VecC xi = domain_vector(rep, rng, {hf, hg});
    std::vector<CheckReport> out;
    for (const Expression& a :
         {cliff(hm, hf), res(hm, 1.0, hf), mul(cliff(hm, hf), res(hm, 1.0, hg))})
      out.push_back(check_generator(rep, a, xi, {1e-4, FDScheme::Central2}, 1e-5));
    return out;
  }});

  criteria.push_back({"mollified generator formula on core elements", 120.0, [&] {
    FockRep rep(hm, {.boson_cutoff = 12, .safe_margin = 4});
    Rng rng(9);
    const std::vector<VecC> xis = {rep.vacuum(), domain_vector(rep, rng, {hf, hg})};
    std::vector<CheckReport> out;
    for (const Expression& a :
         {zeta(hm, hf), mul(zeta(hm, hf), res(hm, 1.0, hg)),
          mul(zeta(hm, hf), zeta(hm, hg))})
      for (const VecC& xi : xis)
        out.push_back(check_susy_core(rep, a, lambda_core, xi, {}, 1e-5));
    return out;
  }});

  criteria.push_back({"squared odd derivation equals the time derivation", 60.0, [&] {
    FockRep rep(cm, {.boson_cutoff = 16, .safe_margin = 4});
    return std::vector<CheckReport>{check_susy_identity(
        rep, {vec2(0.03, 0.01), vec2(-0.02, 0.025)}, 13, 50, 4)};
  }});

  criteria.push_back({"state regularity on both models", 10.0, [&] {
    FockRep crep(cm, {.boson_cutoff = 16, .safe_margin = 4});
    FockRep hrep(hm, {.boson_cutoff = 12, .safe_margin = 4});
    return std::vector<CheckReport>{check_state_conditions(crep, 1e-4, 1e-6),
                                    check_state_conditions(hrep, 1e-4, 1e-6)};
  }});

  criteria.push_back({"finite-difference order ladder", 120.0, [&] {
    FockRep rep(hm, {.boson_cutoff = 12, .safe_margin = 4});
    Rng rng(5);
    const VecC xi = domain_vector(rep, rng, {hf, hg});
    std::vector<CheckReport> out;
    for (const Expression& a : {res(hm, 1.0, hf), zeta(hm, hf)})
      out.push_back(check_fd_order(rep, a, xi));
    return out;
  }});

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<CheckReport> reports;
    std::string error;
    try {
      reports = c.run();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    bool ok = error.empty() && secs <= c.budget_s;
    int cases = 0;
    double worst = 0.0;
    for (const auto& r : reports) {
      ok = ok && r.pass();
      cases += static_cast<int>(r.cases.size());
      worst = std::max(worst, r.max_residual());
    }

    std::printf("[%s] %zu. %s: %d cases, max residual %.2e (%.2f s, budget %.0f s)\n",
                ok ? "PASS" : "FAIL", i + 1, c.name.c_str(), cases, worst, secs,
                c.budget_s);
    if (!error.empty()) std::printf("       error: %s\n", error.c_str());
    for (const auto& r : reports)
      for (const auto& cs : r.cases)
        if (!cs.pass)
          std::printf("       %s / %s: residual %.3e > %.3e\n", r.check_id.c_str(),
                      cs.label.c_str(), cs.residual, cs.tolerance);
    if (secs > c.budget_s) std::printf("       over budget\n");
    if (!ok) ++failures;
  }

  std::printf("%s: %zu/%zu criteria passed\n", failures == 0 ? "ACCEPTED" : "REJECTED",
              criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
