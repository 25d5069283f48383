#include <doctest.h>

#include <limits>
#include <random>

#include "fixtures.hpp"
#include "hpmp/problem_model.hpp"
#include "oracles.hpp"

using namespace hpmp;

namespace {

Eigen::VectorXd v1(double a) { return Eigen::VectorXd::Constant(1, a); }

Trajectory scalar_traj(std::vector<double> xs, std::vector<double> us) {
  Trajectory t;
  for (double x : xs) t.states.push_back(v1(x));
  for (double u : us) t.controls.push_back(v1(u));
  return t;
}

ProblemSpec shift_problem(SystemKind kind) {
  return fixture::scalar(
      kind,
      [](std::size_t, const Eigen::VectorXd& x, const Eigen::VectorXd&) -> Eigen::VectorXd { return x + v1(1.0); },
      [](std::size_t, const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; });
}

}  // namespace

TEST_CASE("admissibility of a telescoping equation") {
  const ProblemSpec p = fixture::scalar(
      SystemKind::Equation,
      [](std::size_t, const Eigen::VectorXd& x, const Eigen::VectorXd& u) -> Eigen::VectorXd { return x + u; },
      [](std::size_t, const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; });
  const AdmissibilityReport r = check_admissibility(p, scalar_traj({0, 1, 2}, {1, 1}));
  CHECK(r.feasible);
  REQUIRE(r.slack.size() == 2);
  for (const auto& s : r.slack) CHECK(s(0) == 0.0);
}

TEST_CASE("inequation with constant dynamics has unit slack") {
  const AdmissibilityReport r =
      check_admissibility(shift_problem(SystemKind::Inequation), scalar_traj({0, 0, 0}, {0, 0}));
  CHECK(r.feasible);
  for (const auto& s : r.slack) CHECK(s(0) == 1.0);
}

TEST_CASE("same data as an equation fails by one at each stage") {
  const AdmissibilityReport r =
      check_admissibility(shift_problem(SystemKind::Equation), scalar_traj({0, 0, 0}, {0, 0}));
  CHECK_FALSE(r.feasible);
  REQUIRE(r.violations.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(r.violations[i].t == i);
    CHECK(r.violations[i].kind == ViolationKind::Dynamics);
    CHECK(r.violations[i].magnitude == doctest::Approx(1.0));
  }
}

TEST_CASE("shape mismatch names the stage") {
  Trajectory t = scalar_traj({0, 1, 2}, {1, 1});
  t.controls[1] = Eigen::VectorXd::Zero(2);
  const ProblemSpec p = shift_problem(SystemKind::Inequation);
  try {
    check_admissibility(p, t);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    CHECK(e.stage() == 1);
  }
  t = scalar_traj({0, 1}, {1, 1});
  CHECK_THROWS_AS(check_admissibility(p, t), DimensionError);
}

TEST_CASE("admissibility is monotone in the tolerance") {
  const fixture::Instance lq = fixture::catalog("LQ1");
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Trajectory t = lq.candidate;
    const double scale = std::pow(10.0, -3.0 - 9.0 * trial / 50.0);
    for (auto& x : t.states) x(0) += scale * noise(rng);
    t.states[0] = lq.problem.sigma;
    bool previous = false;
    for (double tol : {1e-14, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2}) {
      const AdmissibilityReport r = check_admissibility(lq.problem, t, tol);
      if (previous) CHECK(r.feasible);
      previous = r.feasible;
      if (r.feasible) {
        for (const auto& s : r.slack) CHECK(std::abs(s(0)) <= tol);
      }
    }
  }
}

TEST_CASE("partial sums") {
  const ProblemSpec zero = shift_problem(SystemKind::Inequation);
  const Trajectory flat = scalar_traj(std::vector<double>(11, 0.0), std::vector<double>(10, 0.0));
  CHECK(partial_sums(zero, flat, {1, 5, 9}).values == std::vector<double>{0.0, 0.0, 0.0});

  ProblemSpec geometric = zero;
  geometric.criterion = [](std::size_t t, const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return std::pow(0.5, static_cast<double>(t));
  };
  const PartialSums g = partial_sums(geometric, flat, {2, 0, 1});
  CHECK(g.horizons == std::vector<std::size_t>{0, 1, 2});
  CHECK(g.values == std::vector<double>{1.0, 1.5, 1.75});

  CHECK_THROWS_AS(partial_sums(zero, flat, {}), PreconditionError);
  CHECK_THROWS(partial_sums(zero, flat, {10}));
}

TEST_CASE("LQ1 partial sums match extended-precision summation") {
  const fixture::Instance lq = fixture::catalog("LQ1");
  const PartialSums s = partial_sums(lq.problem, lq.candidate, {10, 20, 40});
  for (std::size_t i = 0; i < 3; ++i) {
    const long double ref = oracle::partial_sum(lq.problem, lq.candidate, s.horizons[i]);
    CHECK(std::abs(static_cast<long double>(s.values[i]) - ref) <= 1e-12L);
  }
  CHECK(s.cauchy);
}

TEST_CASE("consecutive partial sums differ by the stage value") {
  const fixture::Instance lq = fixture::catalog("LQ1");
  std::vector<std::size_t> hs(40);
  for (std::size_t h = 0; h < hs.size(); ++h) hs[h] = h;
  const PartialSums s = partial_sums(lq.problem, lq.candidate, hs);
  for (std::size_t h = 1; h < hs.size(); ++h) {
    const double phi = lq.problem.criterion(h, lq.candidate.states[h], lq.candidate.controls[h]);
    // exact up to the rounding of the stored sums
    CHECK(std::abs((s.values[h] - s.values[h - 1]) - phi) <= 4.0 * std::numeric_limits<double>::epsilon());
  }
}

TEST_CASE("overtaking comparisons") {
  const fixture::Instance lq = fixture::catalog("LQ1");
  const OvertakingComparison same = overtaking_compare(lq.problem, lq.candidate, lq.candidate, 40);
  for (double d : same.diffs) CHECK(d == 0.0);
  CHECK(same.a_weakly_overtakes_b);
  CHECK(same.a_catching_up_b);
  CHECK(same.tail_window == 10);

  ProblemSpec rich = shift_problem(SystemKind::Inequation);
  rich.criterion = [](std::size_t, const Eigen::VectorXd&, const Eigen::VectorXd& u) { return u(0); };
  const Trajectory a = scalar_traj(std::vector<double>(21, 0.0), std::vector<double>(20, 1.0));
  const Trajectory b = scalar_traj(std::vector<double>(21, 0.0), std::vector<double>(20, 0.0));
  const OvertakingComparison ab = overtaking_compare(rich, a, b, 12);
  REQUIRE(ab.diffs.size() == 13);
  for (std::size_t h = 0; h < ab.diffs.size(); ++h) CHECK(ab.diffs[h] == doctest::Approx(h + 1.0));
  CHECK(ab.a_weakly_overtakes_b);
  CHECK(ab.a_catching_up_b);

  // u_0 shifted by 0.1, states re-simulated.
  std::vector<Eigen::VectorXd> controls = lq.candidate.controls;
  controls[0](0) += 0.1;
  const Trajectory perturbed = fixture::rollout(lq.problem, controls);
  const OvertakingComparison opt = overtaking_compare(lq.problem, lq.candidate, perturbed, 40);
  const double ref = static_cast<double>(oracle::partial_sum(lq.problem, lq.candidate, 40) -
                                         oracle::partial_sum(lq.problem, perturbed, 40));
  CHECK(opt.diffs.back() == doctest::Approx(ref).epsilon(1e-10));
  CHECK(opt.liminf_est > 0.0);
  CHECK(opt.a_weakly_overtakes_b);
}

TEST_CASE("overtaking rejects inadmissible input") {
  const fixture::Instance lq = fixture::catalog("LQ1");
  Trajectory bad = lq.candidate;
  bad.states[3](0) += 1.0;
  CHECK_THROWS_AS(overtaking_compare(lq.problem, bad, lq.candidate, 20), InadmissibleError);
}
