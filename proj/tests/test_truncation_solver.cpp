#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "hpmp/truncation_solver.hpp"
#include "oracles.hpp"

using namespace hpmp;

namespace {

std::vector<StageDerivatives> derivs_for(const fixture::Instance& in, std::size_t h) {
  return stage_derivatives_range(in.problem, in.candidate, 0, h);
}

MultiplierOutcome solve(const fixture::Instance& in, std::size_t h, TheoremVariant variant,
                        SolveOptions options = {}) {
  return solve_multipliers(reduce(in.problem, in.candidate, h), derivs_for(in, h), variant, options);
}

double normalization(const TruncatedMultipliers& m) {
  return std::abs(m.lambda0) + m.p_at(1).norm();
}

void check_agreement(const TruncatedMultipliers& a, const TruncatedMultipliers& b, double tol) {
  CHECK(std::abs(a.lambda0 - b.lambda0) <= tol);
  REQUIRE(a.p.size() == b.p.size());
  for (std::size_t i = 0; i < a.p.size(); ++i) CHECK((a.p[i] - b.p[i]).norm() <= tol);
  for (std::size_t t = 0; t < a.mu.size() && t < b.mu.size(); ++t) {
    CHECK((a.mu[t] - b.mu[t]).norm() <= tol);
  }
}

}  // namespace

TEST_CASE("reduce shapes and preconditions") {
  const fixture::Instance zc = fixture::zero_criterion(30);
  const FiniteHorizonProblem fh5 = reduce(zc.problem, zc.candidate, 5);
  CHECK(fh5.stages() == 6);
  CHECK(fh5.z_size() == 5 + 6);
  CHECK(fh5.terminal_state(0) == doctest::Approx(6.0));
  CHECK(fh5.candidate.controls.size() == 6);
  const Trajectory back = fh5.unpack(fh5.pack(fh5.candidate));
  REQUIRE(back.states.size() == fh5.candidate.states.size());
  for (std::size_t t = 0; t < back.states.size(); ++t) CHECK(back.states[t] == fh5.candidate.states[t]);

  const FiniteHorizonProblem fh0 = reduce(zc.problem, zc.candidate, 0);
  CHECK(fh0.z_size() == 1);
  CHECK(fh0.terminal_state(0) == doctest::Approx(1.0));

  CHECK_THROWS_AS(reduce(zc.problem, zc.candidate, 30), PreconditionError);

  fixture::Instance bad = zc;
  bad.candidate.states[3](0) += 0.5;
  CHECK_THROWS_AS(reduce(bad.problem, bad.candidate, 5), InadmissibleError);
}

TEST_CASE("zero criterion gives lambda0 = 1 and a vanishing adjoint") {
  const fixture::Instance zc = fixture::zero_criterion(30);
  const MultiplierOutcome out = solve(zc, 4, TheoremVariant::Thm48);
  REQUIRE(out.certified());
  const TruncatedMultipliers& m = *out.multipliers;
  CHECK(m.lambda0 == doctest::Approx(1.0));
  REQUIRE(m.p.size() == 5);
  for (const auto& p : m.p) CHECK(p.norm() <= 1e-12);
}

TEST_CASE("SLACK1 adjoint vanishes under every inequation variant") {
  const fixture::Instance s = fixture::catalog("SLACK1");
  for (TheoremVariant v : {TheoremVariant::Thm31, TheoremVariant::Thm48}) {
    const MultiplierOutcome out = solve(s, 8, v);
    REQUIRE(out.certified());
    CHECK(out.multipliers->lambda0 == doctest::Approx(1.0));
    for (const auto& p : out.multipliers->p) CHECK(p.norm() <= 1e-10);
  }
}

TEST_CASE("LQ1 at h = 10 matches the monolithic KKT oracle") {
  const fixture::Instance lq = fixture::catalog("LQ1");
  const FiniteHorizonProblem fh = reduce(lq.problem, lq.candidate, 10);
  const MultiplierOutcome a = solve_multipliers(fh, derivs_for(lq, 10), TheoremVariant::Thm48);
  const MultiplierOutcome b = oracle_kkt(fh, TheoremVariant::Thm48);
  REQUIRE(a.certified());
  REQUIRE(b.certified());
  check_agreement(*a.multipliers, *b.multipliers, 1e-5);

  // WM at t gives p_{t+1} = 2 lambda0 u_t for B = R = 1.
  const TruncatedMultipliers& m = *a.multipliers;
  for (std::size_t t = 0; t <= 10; ++t) {
    CHECK(m.p_at(t + 1)(0) == doctest::Approx(2.0 * m.lambda0 * lq.candidate.controls[t](0)).epsilon(1e-8));
  }
}

TEST_CASE("assembly paths agree on LQ1") {
  const fixture::Instance lq = fixture::catalog("LQ1");
  SolveOptions adj;
  adj.path = AssemblyPath::AdjointElimination;
  SolveOptions full;
  full.path = AssemblyPath::FullStacked;
  const MultiplierOutcome a = solve(lq, 12, TheoremVariant::Thm48, adj);
  const MultiplierOutcome b = solve(lq, 12, TheoremVariant::Thm48, full);
  REQUIRE(a.certified());
  REQUIRE(b.certified());
  CHECK(a.path_used == AssemblyPath::AdjointElimination);
  CHECK(b.path_used == AssemblyPath::FullStacked);
  check_agreement(*a.multipliers, *b.multipliers, 1e-9);
}

TEST_CASE("a perturbed LQ1 candidate has no certificate") {
  fixture::Instance lq = fixture::catalog("LQ1");
  std::vector<Eigen::VectorXd> controls = lq.candidate.controls;
  controls[0](0) += 0.1;
  lq.candidate = fixture::rollout(lq.problem, controls);
  for (AssemblyPath path : {AssemblyPath::AdjointElimination, AssemblyPath::FullStacked}) {
    SolveOptions o;
    o.path = path;
    const MultiplierOutcome out = solve(lq, 10, TheoremVariant::Thm48, o);
    CHECK_FALSE(out.certified());
    CHECK(out.best_residual > 1e-3);
    CHECK_FALSE(out.reason.empty());
  }
  const MultiplierOutcome oracle = oracle_kkt(reduce(lq.problem, lq.candidate, 10), TheoremVariant::Thm48);
  CHECK_FALSE(oracle.certified());
  CHECK(oracle.best_residual > 1e-3);
}

TEST_CASE("solver and oracle agree across the catalog for h <= 12") {
  for (const std::string& name : catalog_names()) {
    const fixture::Instance in = fixture::catalog(name);
    const TheoremVariant v = default_variant(in.problem);
    for (std::size_t h : {2u, 5u, 8u, 12u}) {
      CAPTURE(name);
      CAPTURE(h);
      const FiniteHorizonProblem fh = reduce(in.problem, in.candidate, h);
      const MultiplierOutcome a = solve_multipliers(fh, derivs_for(in, h), v);
      const MultiplierOutcome b = oracle_kkt(fh, v);
      REQUIRE(a.certified());
      REQUIRE(b.certified());
      check_agreement(*a.multipliers, *b.multipliers, 1e-5);
    }
  }
}

TEST_CASE("normalization, signs and slackness hold by construction") {
  std::vector<fixture::Instance> cases;
  for (const std::string& name : catalog_names()) cases.push_back(fixture::catalog(name));
  cases.push_back(fixture::staged_bound(5));
  for (const fixture::Instance& in : cases) {
    const TheoremVariant v = default_variant(in.problem);
    const VariantRules r = rules(v);
    for (std::size_t h : {3u, 9u, 15u}) {
      CAPTURE(in.problem.name);
      CAPTURE(h);
      const MultiplierOutcome out = solve(in, h, v);
      REQUIRE(out.certified());
      const TruncatedMultipliers& m = *out.multipliers;
      CHECK(normalization(m) == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(m.lambda0 >= -1e-12);
      if (r.adjoint_nonnegative) {
        for (const auto& p : m.p) CHECK(p.minCoeff() >= -1e-12);
      }
      for (std::size_t t = 0; t < m.mu.size(); ++t) {
        if (m.mu[t].size() == 0) continue;
        CHECK(m.mu[t].minCoeff() >= -1e-12);
        const Eigen::VectorXd g = in.problem.controls.inequalities(t, in.candidate.controls[t]);
        for (Eigen::Index k = 0; k < g.size(); ++k) {
          if (g(k) > kActivityTol) CHECK(m.mu[t](k) == 0.0);
          CHECK(std::abs(m.mu[t](k) * g(k)) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("staged bound: multipliers of inactive stages are exactly zero") {
  const fixture::Instance in = fixture::staged_bound(5);
  const MultiplierOutcome out = solve(in, 12, default_variant(in.problem));
  REQUIRE(out.certified());
  const TruncatedMultipliers& m = *out.multipliers;
  for (std::size_t t = 0; t < 5; ++t) CHECK(m.mu[t](0) > 1e-6);
  for (std::size_t t = 5; t <= 12; ++t) CHECK(m.mu[t](0) == 0.0);
}

TEST_CASE("scaling the criterion rescales the adjoint against lambda0") {
  CatalogEntry base = catalog_entry("LQ1");
  const fixture::Instance a{to_problem(base.file), base.candidate};
  const MultiplierOutcome ma = solve(a, 10, TheoremVariant::Thm48);
  REQUIRE(ma.certified());
  for (double c : {0.25, 3.0, 40.0}) {
    CatalogEntry scaled = base;
    scaled.file.rule.Q *= c;
    scaled.file.rule.R *= c;
    const fixture::Instance b{to_problem(scaled.file), base.candidate};
    const MultiplierOutcome mb = solve(b, 10, TheoremVariant::Thm48);
    REQUIRE(mb.certified());
    // (lambda0, p) solves the scaled system iff (lambda0, p / c) solves the original
    for (std::size_t t = 1; t <= 11; ++t) {
      const double ra = ma.multipliers->p_at(t)(0) / ma.multipliers->lambda0;
      const double rb = mb.multipliers->p_at(t)(0) / mb.multipliers->lambda0;
      CHECK(rb == doctest::Approx(c * ra).epsilon(1e-8));
    }
  }
}

TEST_CASE("variant mismatch is a precondition error") {
  const fixture::Instance lq = fixture::catalog("LQ1");
  CHECK_THROWS_AS(solve(lq, 5, TheoremVariant::Thm47), PreconditionError);
  CHECK_THROWS_AS(solve(lq, 5, TheoremVariant::Thm43), PreconditionError);
  const fixture::Instance zc = fixture::zero_criterion(30);
  const FiniteHorizonProblem fh = reduce(zc.problem, zc.candidate, 6);
  CHECK_THROWS_AS(solve_multipliers(fh, derivs_for(zc, 3), TheoremVariant::Thm48), PreconditionError);
}

TEST_CASE("LQ1 under the nonnegative-adjoint variant has no certificate") {
  const fixture::Instance lq = fixture::catalog("LQ1");
  const MultiplierOutcome out = solve(lq, 10, TheoremVariant::Thm31);
  CHECK_FALSE(out.certified());
}
