#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "hpmp/certificate.hpp"
#include "hpmp/truncation_solver.hpp"
#include "oracles.hpp"

using namespace hpmp;

namespace {

StageDerivatives scalar_stage(double d1f, double d1phi) {
  StageDerivatives s;
  s.D1f = Eigen::MatrixXd::Constant(1, 1, d1f);
  s.D2f = Eigen::MatrixXd::Ones(1, 1);
  s.D1phi = Eigen::RowVectorXd::Constant(1, d1phi);
  s.D2phi = Eigen::RowVectorXd::Zero(1);
  s.Dg = Eigen::MatrixXd(0, 1);
  s.De = Eigen::MatrixXd(0, 1);
  return s;
}

Eigen::RowVectorXd r1(double a) { return Eigen::RowVectorXd::Constant(1, a); }

double lq1_gain() {
  const CatalogEntry e = catalog_entry("LQ1");
  return riccati_fixed_point(e.file.rule.A, e.file.rule.B, e.file.rule.Q, e.file.rule.R, e.file.beta).K(0, 0);
}

Certificate lq1_limit(std::size_t T) {
  const oracle::ScalarLqMultipliers m = oracle::scalar_lq_limit(0.5, 1.0, 1.0, lq1_gain(), 1.0, T);
  Certificate c;
  c.variant = TheoremVariant::Thm48;
  c.lambda0 = m.lambda0;
  for (double p : m.p) c.p.push_back(r1(p));
  return c;
}

Certificate from_truncation(const TruncatedMultipliers& m, std::size_t T) {
  Certificate c;
  c.variant = m.variant;
  c.lambda0 = m.lambda0;
  c.p.assign(m.p.begin(), m.p.begin() + static_cast<std::ptrdiff_t>(T));
  for (std::size_t t = 0; t < T; ++t) {
    if (m.mu[t].size() > 0) c.mu.push_back(m.mu[t]);
    if (m.eq[t].size() > 0) c.eq_lambda.push_back(m.eq[t]);
  }
  return c;
}

Certificate scaled(Certificate c, double s) {
  c.lambda0 *= s;
  for (auto& p : c.p) p *= s;
  for (auto& m : c.mu) m *= s;
  for (auto& e : c.eq_lambda) e *= s;
  return c;
}

}  // namespace

TEST_CASE("adjoint recursion on scalar stages") {
  std::vector<StageDerivatives> d(4, scalar_stage(2.0, 0.0));
  const auto p = adjoint_forward(1.0, r1(1.0), d, 4);
  REQUIRE(p.size() == 4);
  CHECK(p[0](0) == 1.0);
  CHECK(p[1](0) == doctest::Approx(0.5));
  CHECK(p[2](0) == doctest::Approx(0.25));
  CHECK(p[3](0) == doctest::Approx(0.125));

  // p_{t+1} = (p_t - lambda0 D1phi) / D1f with D1phi = 1, D1f = 1: 1, 0, -1
  std::vector<StageDerivatives> e(3, scalar_stage(1.0, 1.0));
  const auto q = adjoint_forward(1.0, r1(1.0), e, 3);
  CHECK(q[1](0) == doctest::Approx(0.0));
  CHECK(q[2](0) == doctest::Approx(-1.0));

  CHECK(adjoint_forward(1.0, r1(1.0), d, 0).empty());

  std::vector<StageDerivatives> singular(4, scalar_stage(2.0, 0.0));
  singular[2] = scalar_stage(0.0, 0.0);
  CHECK_THROWS_WITH_AS(adjoint_forward(1.0, r1(1.0), singular, 4), doctest::Contains("t = 2"),
                       PreconditionError);

  const auto ext = adjoint_extend(1.0, {r1(1.0), r1(0.5)}, d, 4);
  CHECK(ext[3](0) == doctest::Approx(0.125));
}

TEST_CASE("adjoint recursion reproduces truncated LQ1 multipliers") {
  const fixture::Instance lq = fixture::catalog("LQ1");
  const auto derivs = stage_derivatives_range(lq.problem, lq.candidate, 0, 10);
  const MultiplierOutcome out = solve_multipliers(reduce(lq.problem, lq.candidate, 10), derivs,
                                                  TheoremVariant::Thm48);
  REQUIRE(out.certified());
  const TruncatedMultipliers& m = *out.multipliers;
  const auto p = adjoint_forward(m.lambda0, m.p_at(1), derivs, 11);
  for (std::size_t t = 1; t <= 11; ++t) CHECK((p[t - 1] - m.p_at(t)).norm() <= 1e-8);
}

TEST_CASE("adjoint recursion satisfies AE to rounding") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (const std::string& name : {"LQ1", "CON1", "MIX1"}) {
    const fixture::Instance in = fixture::catalog(name);
    const auto derivs = stage_derivatives_range(in.problem, in.candidate, 0, 25);
    for (int trial = 0; trial < 10; ++trial) {
      const double lambda0 = std::abs(unif(rng));
      const auto p = adjoint_forward(lambda0, r1(unif(rng)), derivs, 25);
      for (std::size_t t = 1; t < 25; ++t) {
        const Eigen::RowVectorXd rhs = p[t] * derivs[t].D1f + lambda0 * derivs[t].D1phi;
        const double scale = p[t - 1].norm() + (p[t] * derivs[t].D1f).norm() +
                             lambda0 * derivs[t].D1phi.norm();
        CHECK((p[t - 1] - rhs).norm() <= 1e-12 * std::max(1.0, scale));
      }
    }
  }
}

TEST_CASE("bound sequence") {
  std::vector<StageDerivatives> d(5, scalar_stage(0.5, 1.0));
  const BoundSequence b = bound_sequence(d, 4);
  REQUIRE(b.zeta.size() == 4);
  CHECK(b.zeta_at(1) == 1.0);
  CHECK(b.zeta_at(2) == doctest::Approx(4.0));
  CHECK(b.zeta_at(3) == doctest::Approx(10.0));
  CHECK(b.zeta_at(4) == doctest::Approx(22.0));
  CHECK(b.gamma.size() == 3);

  d[2] = scalar_stage(-0.5, 1.0);
  CHECK_THROWS_WITH_AS(bound_sequence(d, 4), doctest::Contains("t = 2"), PreconditionError);
}

TEST_CASE("truncated LQ1 adjoints stay inside the envelope") {
  const fixture::Instance lq = fixture::catalog("LQ1");
  const auto derivs = stage_derivatives_range(lq.problem, lq.candidate, 0, 60);
  const BoundSequence b = bound_sequence(derivs, 31);
  for (std::size_t h : {20u, 40u, 60u}) {
    const MultiplierOutcome out =
        solve_multipliers(reduce(lq.problem, lq.candidate, h), derivs, TheoremVariant::Thm48);
    REQUIRE(out.certified());
    for (std::size_t t = 1; t <= std::min<std::size_t>(30, h + 1); ++t) {
      CHECK(out.multipliers->p_at(t).norm() <= b.zeta_at(t) + 1e-12);
    }
  }
}

TEST_CASE("verify: zero criterion certificate") {
  const fixture::Instance zc = fixture::zero_criterion(30);
  Certificate c;
  c.lambda0 = 1.0;
  c.p.assign(10, r1(0.0));
  const ConditionReport r = verify(zc.problem, zc.candidate, c);
  CHECK(r.pass());
  CHECK(r.window == 10);
  for (Condition k : kConditions) CHECK(r[k].pass);

  Certificate all_zero = c;
  all_zero.lambda0 = 0.0;
  const ConditionReport z = verify(zc.problem, zc.candidate, all_zero);
  CHECK_FALSE(z[Condition::NN].pass);
}

TEST_CASE("verify: LQ1 limit multipliers") {
  const fixture::Instance lq = fixture::catalog("LQ1");
  const Certificate c = lq1_limit(20);
  CHECK(c.lambda0 == doctest::Approx(0.6531128874).epsilon(1e-8));
  CHECK(c.p_at(1)(0) == doctest::Approx(-0.3468871126).epsilon(1e-8));
  const ConditionReport ok = verify(lq.problem, lq.candidate, c);
  CHECK(ok.pass());

  Certificate strict = c;
  strict.variant = TheoremVariant::Thm31;
  const ConditionReport bad = verify(lq.problem, lq.candidate, strict);
  CHECK_FALSE(bad.pass());
  CHECK_FALSE(bad[Condition::Si].pass);
  REQUIRE(bad[Condition::Si].locus.has_value());
  CHECK(bad[Condition::Si].locus->t == 1);
  CHECK(bad[Condition::AE].pass);
  CHECK(bad[Condition::WM].pass);

  Certificate wrong = c;
  wrong.p[4] *= 1.01;
  const ConditionReport w = verify(lq.problem, lq.candidate, wrong);
  CHECK_FALSE(w[Condition::AE].pass);

  Certificate mismatch = c;
  mismatch.variant = TheoremVariant::Thm47;
  CHECK_THROWS_AS(verify(lq.problem, lq.candidate, mismatch), PreconditionError);
}

TEST_CASE("serial and parallel verification agree") {
  const fixture::Instance lq = fixture::catalog("LQ1");
  const Certificate c = lq1_limit(40);
  VerifyOptions serial;
  serial.exec = Execution::Serial;
  const ConditionReport a = verify(lq.problem, lq.candidate, c, serial);
  const ConditionReport b = verify(lq.problem, lq.candidate, c);
  for (Condition k : kConditions) {
    CHECK(a[k].pass == b[k].pass);
    CHECK(a[k].worst_defect == b[k].worst_defect);
  }
}

TEST_CASE("passing the sign-constrained variant implies passing the general one") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  int strict_passes = 0;
  for (const std::string& name : {"SLACK1", "LQ1"}) {
    const fixture::Instance in = fixture::catalog(name);
    const auto derivs = stage_derivatives_range(in.problem, in.candidate, 0, 12);
    const MultiplierOutcome out =
        solve_multipliers(reduce(in.problem, in.candidate, 12), derivs, TheoremVariant::Thm48);
    REQUIRE(out.certified());
    std::vector<Certificate> certs{from_truncation(*out.multipliers, 12)};
    for (int i = 0; i < 20; ++i) {
      Certificate c = certs.front();
      c.lambda0 = std::abs(unif(rng));
      for (auto& p : c.p) p(0) = unif(rng) * (i % 2 == 0 ? 1e-9 : 1.0);
      certs.push_back(c);
    }
    for (Certificate c : certs) {
      c.variant = TheoremVariant::Thm31;
      const bool strict = verify(in.problem, in.candidate, c).pass();
      c.variant = TheoremVariant::Thm48;
      const bool general = verify(in.problem, in.candidate, c).pass();
      if (strict) {
        ++strict_passes;
        CHECK(general);
      }
    }
  }
  CHECK(strict_passes > 0);
}

TEST_CASE("verification outcome is invariant under positive scaling") {
  std::vector<std::pair<fixture::Instance, Certificate>> cases;
  const fixture::Instance lq = fixture::catalog("LQ1");
  cases.emplace_back(lq, lq1_limit(20));
  Certificate broken = lq1_limit(20);
  broken.p[2] *= 1.05;
  cases.emplace_back(lq, broken);
  for (const std::string& name : {"CON1", "MIX1"}) {
    const fixture::Instance in = fixture::catalog(name);
    const auto derivs = stage_derivatives_range(in.problem, in.candidate, 0, 15);
    const MultiplierOutcome out =
        solve_multipliers(reduce(in.problem, in.candidate, 15), derivs, default_variant(in.problem));
    REQUIRE(out.certified());
    cases.emplace_back(in, from_truncation(*out.multipliers, 15));
  }
  for (const auto& [in, cert] : cases) {
    const ConditionReport base = verify(in.problem, in.candidate, cert);
    for (double s : {0.01, 0.5, 3.0, 100.0}) {
      const ConditionReport r = verify(in.problem, in.candidate, scaled(cert, s));
      for (Condition k : kConditions) CHECK(r[k].pass == base[k].pass);
    }
  }
  CHECK(verify(lq.problem, lq.candidate, lq1_limit(20)).pass());
  CHECK_FALSE(verify(lq.problem, lq.candidate, broken).pass());
}
