#include "detail/simplex.hpp"

#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "hpmp/error.hpp"

namespace hpmp::detail {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kReducedCostTol = 1e-10;
constexpr double kPhaseOneTol = 1e-9;

// Tableau over the standard form min c^T z, A z = b >= 0, z >= 0.
class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& a, const Eigen::VectorXd& b)
      : rows_(a.rows()), cols_(a.cols()), t_(a.rows(), a.cols() + 1), basis_(a.rows()) {
    t_.leftCols(cols_) = a;
    t_.col(cols_) = b;
  }

  Eigen::Index rows() const { return rows_; }
  std::vector<Eigen::Index>& basis() { return basis_; }
  const std::vector<Eigen::Index>& basis() const { return basis_; }
  double at(Eigen::Index i, Eigen::Index j) const { return t_(i, j); }
  double rhs(Eigen::Index i) const { return t_(i, cols_); }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i < rows_; ++i) {
      if (i != r && t_(i, c) != 0.0) t_.row(i) -= t_(i, c) * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  enum class Outcome { Optimal, Unbounded };

  // Bland's rule: lowest-index improving column enters, ties on the ratio test
  // go to the lowest basic index.
  Outcome run(const Eigen::VectorXd& cost, const std::vector<bool>& may_enter) {
    const Eigen::Index limit = 50 * (rows_ + cols_) + 100;
    for (Eigen::Index iter = 0; iter < limit; ++iter) {
      Eigen::VectorXd cb(rows_);
      for (Eigen::Index i = 0; i < rows_; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)]);
      Eigen::Index entering = -1;
      for (Eigen::Index j = 0; j < cols_ && entering < 0; ++j) {
        if (!may_enter[static_cast<std::size_t>(j)]) continue;
        const double reduced = cost(j) - cb.dot(t_.col(j).head(rows_));
        if (reduced < -kReducedCostTol) entering = j;
      }
      if (entering < 0) return Outcome::Optimal;

      Eigen::Index leaving = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows_; ++i) {
        const double coef = t_(i, entering);
        if (coef <= kPivotTol) continue;
        const double ratio = rhs(i) / coef;
        const double slack = 1e-12 * (1.0 + std::abs(best));
        if (ratio < best - slack ||
            (ratio <= best + slack &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leaving)])) {
          best = std::min(best, ratio);
          leaving = i;
        }
      }
      if (leaving < 0) return Outcome::Unbounded;
      pivot(leaving, entering);
    }
    throw Error("simplex iteration limit reached");
  }

 private:
  Eigen::Index rows_;
  Eigen::Index cols_;
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

LinearProgram::LinearProgram(Eigen::Index num_vars)
    : num_vars_(num_vars),
      free_(static_cast<std::size_t>(num_vars), false),
      objective_(Eigen::VectorXd::Zero(num_vars)) {}

void LinearProgram::set_free(Eigen::Index j) { free_.at(static_cast<std::size_t>(j)) = true; }

void LinearProgram::set_all_free() { free_.assign(free_.size(), true); }

void LinearProgram::add_row(const Eigen::RowVectorXd& a, RowSense sense, double b) {
  if (a.size() != num_vars_) throw DimensionError("LP row has the wrong number of columns");
  rows_.push_back({a, sense, b});
}

void LinearProgram::set_objective(const Eigen::VectorXd& c, bool maximize) {
  if (c.size() != num_vars_) throw DimensionError("LP objective has the wrong size");
  objective_ = c;
  maximize_ = maximize;
}

LpResult LinearProgram::solve() const {
  const Eigen::Index m = num_rows();

  // Column layout: x+ for every variable, x- for free ones, one slack per
  // inequality row, then one artificial per row.
  std::vector<Eigen::Index> pos(static_cast<std::size_t>(num_vars_));
  std::vector<Eigen::Index> neg(static_cast<std::size_t>(num_vars_), -1);
  Eigen::Index cols = 0;
  for (Eigen::Index j = 0; j < num_vars_; ++j) {
    pos[static_cast<std::size_t>(j)] = cols++;
    if (free_[static_cast<std::size_t>(j)]) neg[static_cast<std::size_t>(j)] = cols++;
  }
  std::vector<Eigen::Index> slack(static_cast<std::size_t>(m), -1);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (rows_[static_cast<std::size_t>(i)].sense != RowSense::Equal) slack[static_cast<std::size_t>(i)] = cols++;
  }
  const Eigen::Index structural = cols;
  const Eigen::Index total = structural + m;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, total);
  Eigen::VectorXd b(m);
  Eigen::VectorXd sign(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Row& row = rows_[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < num_vars_; ++j) {
      a(i, pos[static_cast<std::size_t>(j)]) = row.a(j);
      if (neg[static_cast<std::size_t>(j)] >= 0) a(i, neg[static_cast<std::size_t>(j)]) = -row.a(j);
    }
    if (row.sense == RowSense::GreaterEqual) a(i, slack[static_cast<std::size_t>(i)]) = -1.0;
    if (row.sense == RowSense::LessEqual) a(i, slack[static_cast<std::size_t>(i)]) = 1.0;
    sign(i) = row.b < 0.0 ? -1.0 : 1.0;
    a.row(i).head(structural) *= sign(i);
    b(i) = sign(i) * row.b;
    a(i, structural + i) = 1.0;
  }

  Tableau tab(a, b);
  for (Eigen::Index i = 0; i < m; ++i) tab.basis()[static_cast<std::size_t>(i)] = structural + i;

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(total);
  phase1.tail(m).setOnes();
  std::vector<bool> all(static_cast<std::size_t>(total), true);
  tab.run(phase1, all);

  double infeasibility = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (tab.basis()[static_cast<std::size_t>(i)] >= structural) infeasibility += tab.rhs(i);
  }

  LpResult result;
  if (infeasibility > kPhaseOneTol * (1.0 + (m > 0 ? b.cwiseAbs().maxCoeff() : 0.0))) {
    // Phase-one duals y = B^{-T} c_B certify infeasibility of the standard form;
    // undo the row sign flips to express them on the user rows.
    Eigen::MatrixXd basis_matrix(m, m);
    Eigen::VectorXd cb(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index col = tab.basis()[static_cast<std::size_t>(i)];
      basis_matrix.col(i) = a.col(col);
      cb(i) = phase1(col);
    }
    const Eigen::VectorXd y = basis_matrix.transpose().partialPivLu().solve(cb);
    result.status = LpStatus::Infeasible;
    result.farkas = sign.cwiseProduct(y);
    return result;
  }

  // Drive zero-level artificials out of the basis where a structural pivot exists.
  for (Eigen::Index i = 0; i < m; ++i) {
    if (tab.basis()[static_cast<std::size_t>(i)] < structural) continue;
    for (Eigen::Index j = 0; j < structural; ++j) {
      if (std::abs(tab.at(i, j)) > kPivotTol) {
        tab.pivot(i, j);
        break;
      }
    }
  }

  const double direction = maximize_ ? -1.0 : 1.0;
  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(total);
  for (Eigen::Index j = 0; j < num_vars_; ++j) {
    phase2(pos[static_cast<std::size_t>(j)]) = direction * objective_(j);
    if (neg[static_cast<std::size_t>(j)] >= 0) phase2(neg[static_cast<std::size_t>(j)]) = -direction * objective_(j);
  }
  std::vector<bool> structural_only(static_cast<std::size_t>(total), false);
  for (Eigen::Index j = 0; j < structural; ++j) structural_only[static_cast<std::size_t>(j)] = true;
  if (tab.run(phase2, structural_only) == Tableau::Outcome::Unbounded) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  Eigen::VectorXd z = Eigen::VectorXd::Zero(total);
  for (Eigen::Index i = 0; i < m; ++i) z(tab.basis()[static_cast<std::size_t>(i)]) = tab.rhs(i);
  result.x.resize(num_vars_);
  for (Eigen::Index j = 0; j < num_vars_; ++j) {
    result.x(j) = z(pos[static_cast<std::size_t>(j)]);
    if (neg[static_cast<std::size_t>(j)] >= 0) result.x(j) -= z(neg[static_cast<std::size_t>(j)]);
  }
  result.status = LpStatus::Optimal;
  result.objective = objective_.dot(result.x);
  return result;
}

}  // namespace hpmp::detail
