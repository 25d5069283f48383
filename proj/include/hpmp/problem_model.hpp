#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hpmp/error.hpp"

namespace hpmp {

/// Default tolerance for dynamic, inequality and equality feasibility.
inline constexpr double kFeasibilityTol = 1e-9;

/// Componentwise x_{t+1} <= f_t(x_t, u_t) (Inequation) or equality (Equation).
enum class SystemKind { Inequation, Equation };

/// Shape of the control sets U_t.
enum class ControlVariant {
  Interior,      ///< no constraint rows, the candidate control is interior
  Inequalities,  ///< U_t = {u : g_t^k(u) >= 0, k = 1..m}
  Mixed,         ///< inequality rows g_t^k >= 0 plus equality rows e_t^j = 0
};

using StageMap = std::function<Eigen::VectorXd(std::size_t t, const Eigen::VectorXd& x,
                                               const Eigen::VectorXd& u)>;
using StageFunction =
    std::function<double(std::size_t t, const Eigen::VectorXd& x, const Eigen::VectorXd& u)>;
/// All rows of a control constraint family evaluated at once.
using ControlRows = std::function<Eigen::VectorXd(std::size_t t, const Eigen::VectorXd& u)>;

struct ControlSetSpec {
  ControlVariant variant = ControlVariant::Interior;
  std::size_t inequality_count = 0;  // m (Inequalities) or m_i (Mixed)
  std::size_t equality_count = 0;    // m_e, Mixed only
  ControlRows inequalities;          // g_t(u) in R^m
  ControlRows equalities;            // e_t(u) in R^{m_e}

  /// Throws PreconditionError when the row counts contradict the variant.
  void validate() const;
};

/// Exact differentials supplied by a problem source. Any empty member falls
/// back to finite differences.
struct AnalyticDerivatives {
  std::function<Eigen::MatrixXd(std::size_t, const Eigen::VectorXd&, const Eigen::VectorXd&)>
      dynamics_state;
  std::function<Eigen::MatrixXd(std::size_t, const Eigen::VectorXd&, const Eigen::VectorXd&)>
      dynamics_control;
  std::function<Eigen::VectorXd(std::size_t, const Eigen::VectorXd&, const Eigen::VectorXd&)>
      criterion_state;
  std::function<Eigen::VectorXd(std::size_t, const Eigen::VectorXd&, const Eigen::VectorXd&)>
      criterion_control;
  std::function<Eigen::MatrixXd(std::size_t, const Eigen::VectorXd&)> inequality_jacobian;
  std::function<Eigen::MatrixXd(std::size_t, const Eigen::VectorXd&)> equality_jacobian;
};

/// Regularity hypotheses that cannot be probed numerically (semicontinuity,
/// Fréchet vs Gâteaux). They are carried through to reports as declarations.
struct DeclaredRegularity {
  bool lower_semicontinuous = false;
  bool frechet_differentiable = false;
};

/// Box description of X_t, shared by every stage t >= 1.
struct StateBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Infinite-horizon problem materialized for stages t = 0..horizon.
struct ProblemSpec {
  std::string name;
  std::size_t n = 1;
  std::size_t d = 1;
  Eigen::VectorXd sigma;
  SystemKind kind = SystemKind::Equation;
  ControlSetSpec controls;
  StageMap dynamics;
  StageFunction criterion;
  std::optional<StateBox> state_set;  // empty: X_t = R^n
  std::size_t horizon = 2;            // H_max
  AnalyticDerivatives analytic;
  DeclaredRegularity regularity;

  void validate() const;
};

/// Candidate sequences; states has exactly one more entry than controls.
struct Trajectory {
  std::vector<Eigen::VectorXd> states;    // x_0 .. x_H
  std::vector<Eigen::VectorXd> controls;  // u_0 .. u_{H-1}

  /// Number of materialized controls H.
  std::size_t steps() const { return controls.size(); }
};

enum class ViolationKind { InitialState, Dynamics, Inequality, Equality, StateSet };

struct Violation {
  std::size_t t;
  std::size_t component;
  ViolationKind kind;
  double magnitude;
};

struct AdmissibilityReport {
  bool feasible = true;
  double tolerance = kFeasibilityTol;
  std::vector<Violation> violations;
  /// slack[t](alpha) = f_t^alpha(x_t, u_t) - x_{t+1}^alpha.
  std::vector<Eigen::VectorXd> slack;
};

/// Thrown by operations whose inputs must be admissible.
class InadmissibleError : public Error {
 public:
  InadmissibleError(const std::string& what, AdmissibilityReport report)
      : Error(what), report_(std::move(report)) {}
  const AdmissibilityReport& report() const { return report_; }

 private:
  AdmissibilityReport report_;
};

/// Checks x_0 = sigma, the dynamic system, control constraints and X_t over
/// every materialized stage of traj.
AdmissibilityReport check_admissibility(const ProblemSpec& problem, const Trajectory& traj,
                                        double tol = kFeasibilityTol);

struct PartialSums {
  std::vector<std::size_t> horizons;  // ascending
  std::vector<double> values;         // sum_{t=0}^{h} phi_t(x_t, u_t)
  bool cauchy = false;                // successive gaps shrink and end below tol
};

/// Partial sums of the criterion. horizons need not be sorted.
PartialSums partial_sums(const ProblemSpec& problem, const Trajectory& traj,
                         std::vector<std::size_t> horizons, double cauchy_tol = 1e-9);

struct OvertakingComparison {
  std::vector<double> diffs;  // index h: sum_{t<=h} phi(a) - sum_{t<=h} phi(b)
  double liminf_est = 0.0;
  double limsup_est = 0.0;
  std::size_t tail_window = 0;
  bool a_weakly_overtakes_b = false;  // liminf_est >= -tol
  bool a_catching_up_b = false;       // limsup_est >= -tol
};

OvertakingComparison overtaking_compare(const ProblemSpec& problem, const Trajectory& a,
                                        const Trajectory& b, std::size_t h_max,
                                        double tol = kFeasibilityTol);

std::string to_string(SystemKind kind);
std::string to_string(ControlVariant variant);
std::string to_string(ViolationKind kind);

}  // namespace hpmp
