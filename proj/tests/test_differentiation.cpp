#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "hpmp/differentiation.hpp"

using namespace hpmp;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace

TEST_CASE("directional derivative examples") {
  const ScalarFunction square = [](const Eigen::VectorXd& x) { return x(0) * x(0); };
  CHECK(std::abs(directional_derivative(square, vec({3}), vec({1})) - 6.0) <= 1e-9);

  const ScalarFunction bilinear = [](const Eigen::VectorXd& z) { return z(0) * z(1); };
  CHECK(std::abs(directional_derivative(bilinear, vec({2, 5}), vec({1, 0})) - 5.0) <= 1e-9);

  const Eigen::MatrixXd L = (Eigen::MatrixXd(2, 3) << 1, -2, 0.5, 3, 0, -1).finished();
  const VectorFunction linear = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return L * x; };
  for (double step : {1e-1, 1e-3, 1e-5}) {
    const Eigen::VectorXd v = vec({0.25, -1, 2});
    const Eigen::VectorXd d = directional_derivative(linear, vec({1, 2, 3}), v, DifferenceScheme::Central, step);
    CHECK((d - L * v).cwiseAbs().maxCoeff() <= 1e-9);
  }

  const ScalarFunction cube = [](const Eigen::VectorXd& x) { return x(0) * x(0) * x(0); };
  CHECK(directional_derivative(cube, vec({2}), vec({1}), DifferenceScheme::Forward, 1e-6) ==
        doctest::Approx(12.0).epsilon(1e-5));
}

TEST_CASE("non-finite values are reported with the point") {
  const ScalarFunction log_fn = [](const Eigen::VectorXd& x) { return std::log(x(0)); };
  CHECK_THROWS_AS(directional_derivative(log_fn, vec({0}), vec({1})), EvaluationError);
  try {
    directional_derivative(log_fn, vec({-1}), vec({1}));
  } catch (const EvaluationError& e) {
    CHECK(std::string(e.what()).find("-1") != std::string::npos);
  }
}

TEST_CASE("gateaux matrix examples") {
  const VectorFunction id = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x; };
  CHECK(gateaux_matrix(id, vec({0.3, -2})).isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-9));  // rounding of x +- s limits the quotient to ~eps |x| / s

  const Eigen::MatrixXd A = (Eigen::MatrixXd(2, 2) << 2, -1, 0.5, 4).finished();
  const VectorFunction lin = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return A * x; };
  CHECK((gateaux_matrix(lin, vec({1, 1})) - A).cwiseAbs().maxCoeff() <= 1e-10);

  const fixture::Instance lq = fixture::catalog("LQ1");
  ProblemSpec numeric = lq.problem;
  numeric.analytic = {};
  const StageDerivatives s = stage_derivatives(numeric, lq.candidate, 3);
  CHECK(s.D1f(0, 0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(s.D2f(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("central gateaux matrices of cubic polynomials") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const double c3 = unif(rng), c2 = unif(rng), c1 = unif(rng), m = unif(rng);
    const ScalarFunction p = [&](const Eigen::VectorXd& z) {
      return c3 * z(0) * z(0) * z(0) + c2 * z(0) * z(1) * z(1) + c1 * z(1) + m * z(0) * z(1);
    };
    const Eigen::VectorXd a = vec({unif(rng), unif(rng)});
    Eigen::RowVectorXd exact(2);
    exact << 3 * c3 * a(0) * a(0) + c2 * a(1) * a(1) + m * a(1),
        2 * c2 * a(0) * a(1) + c1 + m * a(0);
    const Eigen::RowVectorXd approx = gateaux_matrix(p, a, 1e-5);
    CHECK((approx - exact).norm() <= 1e-6 * (1.0 + exact.norm()));
  }
}

TEST_CASE("central scheme is odd in the direction") {
  const ScalarFunction f = [](const Eigen::VectorXd& x) { return std::sin(x(0)) * std::exp(x(1)); };
  const Eigen::VectorXd a = vec({0.4, -0.2});
  const Eigen::VectorXd v = vec({0.3, 1.1});
  const double base = directional_derivative(f, a, v);
  for (double c : {-3.0, -1.0, 0.5, 2.0}) {
    CHECK(directional_derivative(f, a, c * v) == doctest::Approx(c * base).epsilon(1e-7));
  }
}

TEST_CASE("linearity check") {
  const ScalarFunction square = [](const Eigen::VectorXd& x) { return x(0) * x(0); };
  const LinearityReport sq = linearity_check(square, vec({1.3}), 20);
  CHECK(sq.linear);
  CHECK(sq.worst_defect <= 1e-6);

  const ScalarFunction absval = [](const Eigen::VectorXd& x) { return std::abs(x(0)); };
  const LinearityReport ab = linearity_check(absval, vec({0}), 20);
  CHECK_FALSE(ab.linear);
  CHECK(ab.worst_defect * 2.0 >= 1.0);  // |D(-v) + D(v)| = 2 before scaling by 1 + scale

  const ScalarFunction norm2 = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd a = vec({g(rng), g(rng), g(rng)});
    CHECK(linearity_check(norm2, a, 25, 1e-6, static_cast<std::uint64_t>(trial)).linear);
  }
}

TEST_CASE("invertibility check") {
  const InvertibilityReport id = invertibility_check(Eigen::MatrixXd::Identity(3, 3));
  CHECK(id.invertible);
  CHECK(id.condition_estimate == doctest::Approx(1.0));
  const InvertibilityReport zero = invertibility_check(Eigen::MatrixXd::Zero(2, 2));
  CHECK_FALSE(zero.invertible);
  CHECK(std::isinf(zero.condition_estimate));
  const InvertibilityReport half = invertibility_check(Eigen::MatrixXd::Constant(1, 1, 0.5));
  CHECK(half.invertible);
  CHECK(half.condition_estimate == doctest::Approx(1.0));
  const Eigen::MatrixXd ill = (Eigen::MatrixXd(2, 2) << 1, 0, 0, 1e-14).finished();
  CHECK_FALSE(invertibility_check(ill).invertible);
}

TEST_CASE("monotonicity check") {
  const MonotonicityReport s = monotonicity_check(Eigen::MatrixXd::Constant(1, 1, 0.5));
  CHECK(s.nonneg_offdiag);
  CHECK(s.pos_diag);
  CHECK(s.gamma_t == 0.5);
  const MonotonicityReport neg = monotonicity_check((Eigen::MatrixXd(2, 2) << 1, -0.1, 0, 1).finished());
  CHECK_FALSE(neg.nonneg_offdiag);
  const MonotonicityReport two = monotonicity_check((Eigen::MatrixXd(2, 2) << 2, 1, 0.5, 3).finished());
  CHECK(two.gamma_t == 2.0);
  CHECK(two.monotone());
}

TEST_CASE("monotone matrices dominate gamma on the nonnegative orthant") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd M(3, 3);
    for (Eigen::Index i = 0; i < 3; ++i) {
      for (Eigen::Index j = 0; j < 3; ++j) M(i, j) = i == j ? 0.1 + unif(rng) : unif(rng);
    }
    const MonotonicityReport r = monotonicity_check(M);
    REQUIRE(r.monotone());
    CHECK(r.gamma_t > 0.0);
    const Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(3, [&] { return unif(rng); });
    const Eigen::VectorXd image = M * v;
    for (Eigen::Index a = 0; a < 3; ++a) CHECK(image(a) >= r.gamma_t * v(a) - 1e-15);
  }
}

TEST_CASE("analytic overrides win and shapes are validated") {
  const fixture::Instance mix = fixture::catalog("MIX1");
  const StageDerivatives s = stage_derivatives(mix.problem, mix.candidate, 2);
  CHECK(s.D2f.rows() == 1);
  CHECK(s.D2f.cols() == 2);
  CHECK(s.Dg.rows() == 1);
  CHECK(s.De.rows() == 1);
  CHECK(s.De(0, 0) == 1.0);  // exact coefficient, not a quotient
  CHECK(s.Dg(0, 1) == 1.0);

  ProblemSpec broken = mix.problem;
  broken.analytic.dynamics_state = [](std::size_t, const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::MatrixXd(Eigen::MatrixXd::Zero(2, 2));
  };
  CHECK_THROWS_AS(stage_derivatives(broken, mix.candidate, 0), DimensionError);
}

TEST_CASE("serial and parallel stage ranges agree bit for bit") {
  const fixture::Instance con = fixture::catalog("CON1");
  ProblemSpec numeric = con.problem;
  numeric.analytic = {};
  const auto a = stage_derivatives_range(numeric, con.candidate, 0, 40, Execution::Serial);
  const auto b = stage_derivatives_range(numeric, con.candidate, 0, 40, Execution::Parallel);
  REQUIRE(a.size() == b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t].D1f == b[t].D1f);
    CHECK(a[t].D2phi == b[t].D2phi);
    CHECK(a[t].Dg == b[t].Dg);
  }
}
