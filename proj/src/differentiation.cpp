#include "hpmp/differentiation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <string>

#include <Eigen/SVD>
#include <fmt/format.h>

namespace hpmp {

namespace {

std::string describe_point(const Eigen::VectorXd& a) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (i > 0) out += ", ";
    out += fmt::format("{:.17g}", a(i));
  }
  return out + ")";
}

Eigen::VectorXd evaluate(const VectorFunction& fn, const Eigen::VectorXd& point) {
  Eigen::VectorXd value = fn(point);
  if (!value.allFinite()) {
    throw EvaluationError("non-finite function value at " + describe_point(point));
  }
  return value;
}

VectorFunction lift(const ScalarFunction& fn) {
  return [&fn](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, fn(x)); };
}

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

Eigen::VectorXd directional_derivative(const VectorFunction& fn, const Eigen::VectorXd& a,
                                       const Eigen::VectorXd& v, DifferenceScheme scheme,
                                       double step) {
  if (a.size() != v.size()) throw DimensionError("direction and point differ in dimension");
  if (!(step > 0.0)) throw PreconditionError("difference step must be positive");
  switch (scheme) {
    case DifferenceScheme::Central:
      return (evaluate(fn, a + step * v) - evaluate(fn, a - step * v)) / (2.0 * step);
    case DifferenceScheme::Forward:
      return (evaluate(fn, a + step * v) - evaluate(fn, a)) / step;
    case DifferenceScheme::ForwardSecondOrder:
      return (-3.0 * evaluate(fn, a) + 4.0 * evaluate(fn, a + step * v) -
              evaluate(fn, a + 2.0 * step * v)) /
             (2.0 * step);
  }
  throw PreconditionError("unknown difference scheme");
}

double directional_derivative(const ScalarFunction& fn, const Eigen::VectorXd& a,
                              const Eigen::VectorXd& v, DifferenceScheme scheme, double step) {
  return directional_derivative(lift(fn), a, v, scheme, step)(0);
}

Eigen::MatrixXd gateaux_matrix(const VectorFunction& fn, const Eigen::VectorXd& a, double step,
                               DifferenceScheme scheme) {
  Eigen::MatrixXd jac;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(a.size());
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    e(j) = 1.0;
    const Eigen::VectorXd column = directional_derivative(fn, a, e, scheme, step);
    if (j == 0) jac.resize(column.size(), a.size());
    jac.col(j) = column;
    e(j) = 0.0;
  }
  return jac;
}

Eigen::RowVectorXd gateaux_matrix(const ScalarFunction& fn, const Eigen::VectorXd& a, double step,
                                  DifferenceScheme scheme) {
  return gateaux_matrix(lift(fn), a, step, scheme).row(0);
}

LinearityReport linearity_check(const VectorFunction& fn, const Eigen::VectorXd& a,
                                std::size_t trials, double tol, std::uint64_t seed, double step) {
  if (trials < 1) throw PreconditionError("linearity_check needs at least one trial");
  const auto dim = a.size();
  const auto D = [&](const Eigen::VectorXd& v) {
    return directional_derivative(fn, a, v, DifferenceScheme::ForwardSecondOrder, step);
  };

  LinearityReport report;
  const auto probe = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& w, double c) {
    const Eigen::VectorXd dv = D(v);
    const Eigen::VectorXd dw = D(w);
    const Eigen::VectorXd dcombo = D(c * v + w);
    const double scale = std::max({max_abs(dv), max_abs(dw), max_abs(dcombo)});
    const double defect = max_abs(dcombo - c * dv - dw) / (1.0 + scale);
    report.worst_defect = std::max(report.worst_defect, defect);
    ++report.probes;
  };

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd e = zero;
  for (Eigen::Index j = 0; j < dim; ++j) {
    e(j) = 1.0;
    probe(e, zero, -1.0);
    e(j) = 0.0;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  std::uniform_real_distribution<double> scalar(-2.0, 2.0);
  Eigen::VectorXd v(dim);
  Eigen::VectorXd w(dim);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = entry(rng);
    for (Eigen::Index i = 0; i < dim; ++i) w(i) = entry(rng);
    probe(v, w, scalar(rng));
  }

  report.linear = report.worst_defect <= tol;
  return report;
}

LinearityReport linearity_check(const ScalarFunction& fn, const Eigen::VectorXd& a,
                                std::size_t trials, double tol, std::uint64_t seed, double step) {
  return linearity_check(lift(fn), a, trials, tol, seed, step);
}

InvertibilityReport invertibility_check(const Eigen::MatrixXd& D1f, double cond_limit) {
  if (D1f.rows() != D1f.cols()) throw DimensionError("invertibility_check needs a square matrix");
  InvertibilityReport report;
  if (D1f.size() == 0 || !D1f.allFinite()) {
    report.condition_estimate = std::numeric_limits<double>::infinity();
    return report;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(D1f);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  report.condition_estimate =
      smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
  report.invertible = report.condition_estimate <= cond_limit;
  return report;
}

MonotonicityReport monotonicity_check(const Eigen::MatrixXd& D1f) {
  if (D1f.rows() != D1f.cols()) throw DimensionError("monotonicity_check needs a square matrix");
  MonotonicityReport report;
  report.nonneg_offdiag = true;
  for (Eigen::Index r = 0; r < D1f.rows(); ++r) {
    for (Eigen::Index c = 0; c < D1f.cols(); ++c) {
      if (r != c && !(D1f(r, c) >= 0.0)) report.nonneg_offdiag = false;
    }
  }
  report.gamma_t = D1f.size() == 0 ? 0.0 : D1f.diagonal().minCoeff();
  report.pos_diag = report.gamma_t > 0.0;
  return report;
}

StageDerivatives stage_derivatives(const ProblemSpec& problem, const Trajectory& candidate,
                                   std::size_t t, double step) {
  if (t >= candidate.steps()) {
    throw DimensionError("no candidate control at stage " + std::to_string(t), t);
  }
  const Eigen::VectorXd& x = candidate.states[t];
  const Eigen::VectorXd& u = candidate.controls[t];
  const auto& analytic = problem.analytic;
  StageDerivatives out;

  const VectorFunction f_of_x = [&](const Eigen::VectorXd& xx) { return problem.dynamics(t, xx, u); };
  const VectorFunction f_of_u = [&](const Eigen::VectorXd& uu) { return problem.dynamics(t, x, uu); };
  const ScalarFunction phi_of_x = [&](const Eigen::VectorXd& xx) { return problem.criterion(t, xx, u); };
  const ScalarFunction phi_of_u = [&](const Eigen::VectorXd& uu) { return problem.criterion(t, x, uu); };

  out.D1f = analytic.dynamics_state ? analytic.dynamics_state(t, x, u) : gateaux_matrix(f_of_x, x, step);
  out.D2f = analytic.dynamics_control ? analytic.dynamics_control(t, x, u) : gateaux_matrix(f_of_u, u, step);
  out.D1phi = analytic.criterion_state ? Eigen::RowVectorXd(analytic.criterion_state(t, x, u).transpose())
                                       : gateaux_matrix(phi_of_x, x, step);
  out.D2phi = analytic.criterion_control
                  ? Eigen::RowVectorXd(analytic.criterion_control(t, x, u).transpose())
                  : gateaux_matrix(phi_of_u, u, step);

  const auto& controls = problem.controls;
  const auto d = static_cast<Eigen::Index>(problem.d);
  if (controls.inequality_count > 0) {
    const VectorFunction g = [&](const Eigen::VectorXd& uu) { return controls.inequalities(t, uu); };
    out.Dg = analytic.inequality_jacobian ? analytic.inequality_jacobian(t, u) : gateaux_matrix(g, u, step);
  } else {
    out.Dg.resize(0, d);
  }
  if (controls.equality_count > 0) {
    const VectorFunction e = [&](const Eigen::VectorXd& uu) { return controls.equalities(t, uu); };
    out.De = analytic.equality_jacobian ? analytic.equality_jacobian(t, u) : gateaux_matrix(e, u, step);
  } else {
    out.De.resize(0, d);
  }

  const auto n = static_cast<Eigen::Index>(problem.n);
  const bool shapes_ok = out.D1f.rows() == n && out.D1f.cols() == n && out.D2f.rows() == n &&
                         out.D2f.cols() == d && out.D1phi.size() == n && out.D2phi.size() == d &&
                         out.Dg.rows() == static_cast<Eigen::Index>(controls.inequality_count) &&
                         out.Dg.cols() == d &&
                         out.De.rows() == static_cast<Eigen::Index>(controls.equality_count) &&
                         out.De.cols() == d;
  if (!shapes_ok) throw DimensionError("stage differentials have inconsistent shapes", t);
  if (!out.D1f.allFinite() || !out.D2f.allFinite() || !out.D1phi.allFinite() ||
      !out.D2phi.allFinite() || !out.Dg.allFinite() || !out.De.allFinite()) {
    throw EvaluationError("non-finite differential at stage " + std::to_string(t));
  }
  return out;
}

std::vector<StageDerivatives> stage_derivatives_range(const ProblemSpec& problem,
                                                      const Trajectory& candidate,
                                                      std::size_t first, std::size_t last,
                                                      Execution exec, double step) {
  if (last < first) return {};
  const auto count = static_cast<std::ptrdiff_t>(last - first + 1);
  std::vector<StageDerivatives> out(static_cast<std::size_t>(count));
  if (exec == Execution::Serial) {
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      out[static_cast<std::size_t>(i)] =
          stage_derivatives(problem, candidate, first + static_cast<std::size_t>(i), step);
    }
    return out;
  }

  // Exceptions cannot cross the parallel region; keep the one for the lowest stage.
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] =
          stage_derivatives(problem, candidate, first + static_cast<std::size_t>(i), step);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
  return out;
}

}  // namespace hpmp
