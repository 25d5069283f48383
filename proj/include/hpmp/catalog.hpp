#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hpmp/problem_file.hpp"

namespace hpmp {

/// Working horizon H_max of every built-in problem.
inline constexpr std::size_t kCatalogHorizon = 160;

struct CatalogEntry {
  std::string name;
  std::string summary;
  ProblemFile file;
  Trajectory candidate;  // kCatalogHorizon controls
};

/// LQ1, SLACK1, CON1, MIX1.
std::vector<std::string> catalog_names();

/// Throws PreconditionError for an unknown name.
CatalogEntry catalog_entry(const std::string& name);

/// Stationary solution of the discounted Riccati equation for
/// min sum beta^t (x'Qx + u'Ru), x_{t+1} = A x + B u, found by value iteration.
struct RiccatiSolution {
  Eigen::MatrixXd P;
  Eigen::MatrixXd K;  // u = -K x
  std::size_t iterations = 0;
};

RiccatiSolution riccati_fixed_point(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                                    double beta, double tol = 1e-15,
                                    std::size_t max_iterations = 100000);

}  // namespace hpmp
