#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Core>

namespace hpmp::detail {

/// Homogeneous multiplier system M y = 0 with sign rows S y >= 0. The first
/// `head` unknowns are (lambda0, p_1); the normalization acts on them only.
struct SphereProblem {
  Eigen::MatrixXd equations;
  Eigen::MatrixXd sign_rows;
  Eigen::Index head = 1;
};

struct SphereSolution {
  bool found = false;
  Eigen::VectorXd y;       // |y_0| + ||y_1..y_{head-1}||_2 = 1 when found
  std::size_t nullity = 0; // numerical nullity of M
  bool abnormal = false;   // y_0 could not be made positive
  std::string reason;      // set when !found
};

/// Nullspace of the row-equilibrated M (falling back to the least singular
/// direction when M has full column rank), then an LP over the nullspace
/// coordinates: maximize y_0 subject to sign rows and y_0 + ||p_1||_1 <= 1.
/// When y_0 cannot be made positive the coordinates of p_1 are maximized in
/// turn, each in both directions.
SphereSolution solve_on_sphere(const SphereProblem& problem);

}  // namespace hpmp::detail
