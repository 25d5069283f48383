#include "detail/sphere.hpp"

#include <cmath>
#include <optional>

#include <Eigen/SVD>

#include "detail/simplex.hpp"
#include "hpmp/error.hpp"

namespace hpmp::detail {

namespace {

constexpr double kNullRel = 1e-7;
constexpr double kSignSlack = 1e-12;
constexpr double kPositive = 1e-10;

Eigen::MatrixXd null_basis(const Eigen::MatrixXd& m, Eigen::Index cols, std::size_t& nullity) {
  if (m.rows() == 0) {
    nullity = static_cast<std::size_t>(cols);
    return Eigen::MatrixXd::Identity(cols, cols);
  }
  Eigen::MatrixXd scaled = m;
  for (Eigen::Index r = 0; r < scaled.rows(); ++r) {
    const double norm = scaled.row(r).norm();
    if (norm > 0.0) scaled.row(r) /= norm;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double threshold = kNullRel * (1.0 + (s.size() > 0 ? s(0) : 0.0));
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > threshold) ++rank;
  nullity = static_cast<std::size_t>(cols - rank);
  if (nullity == 0) return svd.matrixV().rightCols(1);
  return svd.matrixV().rightCols(cols - rank);
}

// Variables: c (k, free) then s (head-1, >= 0) bounding |p_1| componentwise.
struct NormalizationLp {
  LinearProgram lp;
  Eigen::Index k;

  NormalizationLp(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& sign_rows, Eigen::Index head)
      : lp(basis.cols() + head - 1), k(basis.cols()) {
    const Eigen::Index width = k + head - 1;
    for (Eigen::Index j = 0; j < k; ++j) lp.set_free(j);
    const Eigen::MatrixXd signs = sign_rows * basis;
    for (Eigen::Index r = 0; r < signs.rows(); ++r) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(width);
      row.head(k) = signs.row(r);
      lp.add_row(row, RowSense::GreaterEqual, -kSignSlack * (1.0 + sign_rows.row(r).norm()));
    }
    for (Eigen::Index a = 1; a < head; ++a) {
      Eigen::RowVectorXd upper = Eigen::RowVectorXd::Zero(width);
      upper.head(k) = -basis.row(a);
      upper(k + a - 1) = 1.0;
      lp.add_row(upper, RowSense::GreaterEqual, 0.0);
      Eigen::RowVectorXd lower = upper;
      lower.head(k) = basis.row(a);
      lp.add_row(lower, RowSense::GreaterEqual, 0.0);
    }
    Eigen::RowVectorXd budget = Eigen::RowVectorXd::Zero(width);
    budget.head(k) = basis.row(0);
    budget.tail(head - 1).setOnes();
    lp.add_row(budget, RowSense::LessEqual, 1.0);
  }

  // Maximizes direction . (basis c); returns c when the optimum is positive.
  std::optional<Eigen::VectorXd> maximize(const Eigen::RowVectorXd& direction) {
    Eigen::VectorXd objective = Eigen::VectorXd::Zero(lp.num_vars());
    objective.head(k) = direction.transpose();
    lp.set_objective(objective, true);
    const LpResult res = lp.solve();
    if (res.status != LpStatus::Optimal || res.objective <= kPositive) return std::nullopt;
    return Eigen::VectorXd(res.x.head(k));
  }
};

}  // namespace

SphereSolution solve_on_sphere(const SphereProblem& problem) {
  const Eigen::Index cols = problem.equations.rows() > 0 ? problem.equations.cols()
                                                         : problem.sign_rows.cols();
  if (problem.head < 1 || problem.head > cols) throw DimensionError("bad normalization head");
  if (problem.sign_rows.rows() > 0 && problem.sign_rows.cols() != cols) {
    throw DimensionError("sign rows and equations differ in width");
  }

  SphereSolution out;
  const Eigen::MatrixXd basis = null_basis(problem.equations, cols, out.nullity);
  const Eigen::MatrixXd sign_rows =
      problem.sign_rows.rows() > 0 ? problem.sign_rows : Eigen::MatrixXd(0, cols);
  NormalizationLp normalization(basis, sign_rows, problem.head);

  std::optional<Eigen::VectorXd> c = normalization.maximize(basis.row(0));
  if (!c) {
    out.abnormal = true;
    for (Eigen::Index a = 1; a < problem.head && !c; ++a) {
      c = normalization.maximize(basis.row(a));
      if (!c) c = normalization.maximize(-basis.row(a));
    }
  }
  if (!c) {
    out.reason = "only the zero multiplier satisfies the sign constraints";
    return out;
  }

  Eigen::VectorXd y = basis * *c;
  const double scale = std::abs(y(0)) + y.segment(1, problem.head - 1).norm();
  if (!(scale > 1e-14)) {
    out.reason = "normalization head vanishes on the selected direction";
    return out;
  }
  out.y = y / scale;
  out.found = true;
  return out;
}

}  // namespace hpmp::detail
