#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hpmp/differentiation.hpp"
#include "hpmp/problem_model.hpp"
#include "hpmp/qualification.hpp"
#include "hpmp/theorem_variant.hpp"

namespace hpmp {

/// Truncation of an infinite-horizon problem at h: stages 0..h with x_0 = sigma
/// and x_{h+1} pinned to the candidate.
///
/// The monolithic decision vector is z = (x_1, ..., x_h, u_0, ..., u_h).
struct FiniteHorizonProblem {
  ProblemSpec problem;
  Trajectory candidate;  // x_0..x_{h+1}, u_0..u_h
  std::size_t h = 0;
  Eigen::VectorXd terminal_state;

  std::size_t stages() const { return h + 1; }
  SystemKind kind() const { return problem.kind; }

  Eigen::Index z_size() const;
  /// Offset of x_t in z, 1 <= t <= h.
  Eigen::Index state_offset(std::size_t t) const;
  /// Offset of u_t in z, 0 <= t <= h.
  Eigen::Index control_offset(std::size_t t) const;
  Eigen::VectorXd pack(const Trajectory& traj) const;
  /// States x_0 = sigma and x_{h+1} = terminal_state are filled in.
  Trajectory unpack(const Eigen::VectorXd& z) const;
};

/// Throws InadmissibleError for an inadmissible candidate and
/// PreconditionError when stage h+1 is not materialized.
FiniteHorizonProblem reduce(const ProblemSpec& problem, const Trajectory& candidate,
                            std::size_t h, double tol = kFeasibilityTol);

enum class AssemblyPath {
  Auto,                ///< adjoint elimination unless D1f is singular or amplifies too much
  AdjointElimination,  ///< unknowns (lambda0, p_1, active mu, eq lambda)
  FullStacked,         ///< unknowns (lambda0, p_1..p_{h+1}, active mu, eq lambda)
};

struct SolveOptions {
  AssemblyPath path = AssemblyPath::Auto;
  double activity_tol = kActivityTol;
  double residual_rel = 1e-7;          // accept when residual <= residual_rel (1 + system norm)
  double amplification_limit = 1e5;   // max |P_t| entry before falling back to FullStacked
  double cond_limit = kConditionLimit;
  bool check_qualification = true;     // record separation hypotheses as notes
};

/// Multipliers of one truncated problem, normalized |lambda0| + ||p_1|| = 1.
struct TruncatedMultipliers {
  std::size_t h = 0;
  TheoremVariant variant = TheoremVariant::Thm48;
  double lambda0 = 0.0;
  std::vector<Eigen::RowVectorXd> p;  // p[t-1] = p_t, t = 1..h+1
  std::vector<Eigen::VectorXd> mu;    // mu[t], t = 0..h, length m_i (inactive rows are 0)
  std::vector<Eigen::VectorXd> eq;    // eq[t], t = 0..h, length m_e
  std::vector<double> residual_ae;    // residual_ae[t-1], t = 1..h
  std::vector<double> residual_wm;    // residual_wm[t], t = 0..h
  double max_residual_ae = 0.0;
  double max_residual_wm = 0.0;

  const Eigen::RowVectorXd& p_at(std::size_t t) const { return p.at(t - 1); }
  double max_residual() const { return std::max(max_residual_ae, max_residual_wm); }
};

enum class SolveStatus { Certified, NoCertificate };

/// "No certificate" is a value: necessary conditions can fail for a
/// non-optimal candidate and that is a diagnostic, not an error.
struct MultiplierOutcome {
  SolveStatus status = SolveStatus::NoCertificate;
  std::size_t h = 0;
  /// Best normalized attempt; present unless no sign-feasible direction exists.
  std::optional<TruncatedMultipliers> multipliers;
  double best_residual = 0.0;
  double threshold = 0.0;
  AssemblyPath path_used = AssemblyPath::Auto;
  std::size_t nullity = 0;
  bool abnormal = false;
  std::string reason;
  std::vector<std::string> notes;

  bool certified() const { return status == SolveStatus::Certified; }
};

/// Assembles stationarity and slackness for stages 0..h from derivs (indexed
/// by stage, at least h+1 entries) and solves on the normalization sphere.
///
/// Throws PreconditionError when the variant does not match the control set
/// or the variant's hypothesis on D1f (invertibility/monotonicity at t >= 1)
/// fails.
MultiplierOutcome solve_multipliers(const FiniteHorizonProblem& fh,
                                    const std::vector<StageDerivatives>& derivs,
                                    TheoremVariant variant, const SolveOptions& options = {});

struct OracleOptions {
  double step = kDefaultStep;
  double activity_tol = kActivityTol;
  double residual_rel = 1e-7;
  std::size_t max_h = 15;
};

/// Independent check: central-difference Jacobians of the monolithic program
/// (objective, f_t - x_{t+1}, g, e as functions of z), Lagrangian
/// stationarity in z, the same sign and normalization rules. Shares no
/// assembly code with solve_multipliers.
MultiplierOutcome oracle_kkt(const FiniteHorizonProblem& fh, TheoremVariant variant,
                             const OracleOptions& options = {});

std::string to_string(AssemblyPath path);

}  // namespace hpmp
