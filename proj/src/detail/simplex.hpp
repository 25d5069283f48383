#pragma once

#include <vector>

#include <Eigen/Core>

namespace hpmp::detail {

enum class LpStatus { Optimal, Infeasible, Unbounded };
enum class RowSense { GreaterEqual, LessEqual, Equal };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;  // user variables, valid when Optimal
  double objective = 0.0;
  /// When Infeasible: one multiplier per user row with y_i >= 0 on >= rows,
  /// y_i <= 0 on <= rows, A^T y "= 0" on free columns, "<= 0" on nonnegative
  /// columns, and b^T y > 0.
  Eigen::VectorXd farkas;
};

/// Dense two-phase primal simplex with Bland's rule. Sized for tens of rows
/// and columns; no sparsity, no presolve.
class LinearProgram {
 public:
  explicit LinearProgram(Eigen::Index num_vars);

  /// Variables are nonnegative unless marked free.
  void set_free(Eigen::Index j);
  void set_all_free();
  void add_row(const Eigen::RowVectorXd& a, RowSense sense, double b);
  void set_objective(const Eigen::VectorXd& c, bool maximize);

  Eigen::Index num_vars() const { return num_vars_; }
  Eigen::Index num_rows() const { return static_cast<Eigen::Index>(rows_.size()); }

  LpResult solve() const;

 private:
  struct Row {
    Eigen::RowVectorXd a;
    RowSense sense;
    double b;
  };

  Eigen::Index num_vars_;
  std::vector<bool> free_;
  std::vector<Row> rows_;
  Eigen::VectorXd objective_;
  bool maximize_ = false;
};

}  // namespace hpmp::detail
