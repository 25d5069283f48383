#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "hpmp/execution.hpp"
#include "hpmp/problem_model.hpp"

namespace hpmp {

inline constexpr double kDefaultStep = 1e-5;
inline constexpr double kConditionLimit = 1e12;

/// Difference quotients for the Gâteaux differential along a direction.
enum class DifferenceScheme {
  Central,             ///< (f(a+sv) - f(a-sv)) / 2s
  Forward,             ///< (f(a+sv) - f(a)) / s
  ForwardSecondOrder,  ///< (-3f(a) + 4f(a+sv) - f(a+2sv)) / 2s
};

using VectorFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;

/// Approximates the directional derivative of fn at a along v.
///
/// Throws EvaluationError naming the point if fn returns a non-finite value.
Eigen::VectorXd directional_derivative(const VectorFunction& fn, const Eigen::VectorXd& a,
                                       const Eigen::VectorXd& v,
                                       DifferenceScheme scheme = DifferenceScheme::Central,
                                       double step = kDefaultStep);

double directional_derivative(const ScalarFunction& fn, const Eigen::VectorXd& a,
                              const Eigen::VectorXd& v,
                              DifferenceScheme scheme = DifferenceScheme::Central,
                              double step = kDefaultStep);

/// Matrix of v -> D fn(a, v); column j is the derivative along e_j.
Eigen::MatrixXd gateaux_matrix(const VectorFunction& fn, const Eigen::VectorXd& a,
                               double step = kDefaultStep,
                               DifferenceScheme scheme = DifferenceScheme::Central);

/// Row vector of v -> D fn(a, v) for a scalar function.
Eigen::RowVectorXd gateaux_matrix(const ScalarFunction& fn, const Eigen::VectorXd& a,
                                  double step = kDefaultStep,
                                  DifferenceScheme scheme = DifferenceScheme::Central);

struct LinearityReport {
  bool linear = true;
  double worst_defect = 0.0;  // max |D(cv+w) - cD(v) - D(w)| / (1 + scale)
  std::size_t probes = 0;
};

/// Probes additivity and homogeneity of v -> D fn(a, v).
///
/// Uses the one-sided second-order scheme: a central quotient is odd in v by
/// construction and would report |x| at 0 as linear. The probe set is the
/// coordinate directions with c = -1 followed by `trials` random (v, w, c)
/// drawn from a generator seeded with `seed`.
LinearityReport linearity_check(const VectorFunction& fn, const Eigen::VectorXd& a,
                                std::size_t trials, double tol = 1e-6, std::uint64_t seed = 0,
                                double step = kDefaultStep);

LinearityReport linearity_check(const ScalarFunction& fn, const Eigen::VectorXd& a,
                                std::size_t trials, double tol = 1e-6, std::uint64_t seed = 0,
                                double step = kDefaultStep);

struct InvertibilityReport {
  bool invertible = false;
  double condition_estimate = 0.0;  // sigma_max / sigma_min, +inf when singular
};

InvertibilityReport invertibility_check(const Eigen::MatrixXd& D1f,
                                        double cond_limit = kConditionLimit);

struct MonotonicityReport {
  bool nonneg_offdiag = false;
  bool pos_diag = false;
  double gamma_t = 0.0;  // min over alpha of d f^alpha / d x^alpha

  bool monotone() const { return nonneg_offdiag && pos_diag; }
};

MonotonicityReport monotonicity_check(const Eigen::MatrixXd& D1f);

/// Differentials of stage t at the candidate point (x_t, u_t).
struct StageDerivatives {
  Eigen::MatrixXd D1f;       // n x n
  Eigen::MatrixXd D2f;       // n x d
  Eigen::RowVectorXd D1phi;  // 1 x n
  Eigen::RowVectorXd D2phi;  // 1 x d
  Eigen::MatrixXd Dg;        // m_i x d, every inequality row
  Eigen::MatrixXd De;        // m_e x d
};

/// Analytic members of problem.analytic win over finite differences.
StageDerivatives stage_derivatives(const ProblemSpec& problem, const Trajectory& candidate,
                                   std::size_t t, double step = kDefaultStep);

/// Stages first..last inclusive. Parallel and serial execution give identical
/// results; each stage is computed independently.
std::vector<StageDerivatives> stage_derivatives_range(const ProblemSpec& problem,
                                                      const Trajectory& candidate,
                                                      std::size_t first, std::size_t last,
                                                      Execution exec = Execution::Parallel,
                                                      double step = kDefaultStep);

}  // namespace hpmp
