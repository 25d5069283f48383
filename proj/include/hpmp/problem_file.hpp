#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "hpmp/problem_model.hpp"

namespace hpmp {

/// Coefficients of one stage of the affine-quadratic class:
///   f_t(x, u)   = A x + B u + c
///   phi_t(x, u) = -beta^t (x'Qx + u'Ru)
///   g_t(u)      = G u + g0 >= 0,  e_t(u) = E u + e0 = 0
struct StageData {
  Eigen::MatrixXd A, B, Q, R, G, E;
  Eigen::VectorXd c, g0, e0;
};

/// Per-stage replacement of individual blocks; absent blocks keep the rule.
struct StagePatch {
  std::optional<Eigen::MatrixXd> A, B, Q, R, G, E;
  std::optional<Eigen::VectorXd> c, g0, e0;
};

struct ProblemFile {
  std::string name = "unnamed";
  std::size_t n = 1;
  std::size_t d = 1;
  SystemKind kind = SystemKind::Equation;
  ControlVariant controls = ControlVariant::Interior;
  std::size_t horizon = 2;  // H_max
  double beta = 1.0;
  Eigen::VectorXd sigma;
  std::optional<StateBox> state_box;
  StageData rule;                          // applies to every stage without a patch
  std::map<std::size_t, StagePatch> stages;

  StageData stage(std::size_t t) const;
  std::size_t inequality_count() const { return static_cast<std::size_t>(rule.G.rows()); }
  std::size_t equality_count() const { return static_cast<std::size_t>(rule.E.rows()); }

  /// Throws PreconditionError on shape mismatch, beta <= 0 or a patch beyond H_max.
  void validate() const;
};

/// Exact coefficient matrices are installed as the analytic derivatives.
ProblemSpec to_problem(const ProblemFile& file);

/// Throws ParseError carrying line and field.
ProblemFile parse_problem_file(const std::string& text);
std::string write_problem_file(const ProblemFile& file);

Trajectory parse_trajectory_file(const std::string& text);
std::string write_trajectory_file(const Trajectory& traj);

/// Reads a whole file; throws Error when it cannot be opened.
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace hpmp
