#pragma once

#include <cstddef>
#include <string>

#include "hpmp/catalog.hpp"
#include "hpmp/problem_file.hpp"
#include "hpmp/problem_model.hpp"

namespace fixture {

struct Instance {
  hpmp::ProblemSpec problem;
  hpmp::Trajectory candidate;
};

Instance catalog(const std::string& name);

/// n = d = 1, f(x, u) = x + u, phi = 0, sigma = 0, u_t = 1.
Instance zero_criterion(std::size_t horizon = 30);

/// Scalar problem with closures; controls interior.
hpmp::ProblemSpec scalar(hpmp::SystemKind kind, hpmp::StageMap dynamics,
                         hpmp::StageFunction criterion, double sigma = 0.0,
                         std::size_t horizon = 30);

/// CON1 with the bound u >= 0 only before stage `switch_at` and u >= -1
/// afterwards. The candidate keeps u = 0 while the bound binds and then
/// follows the Riccati feedback, so later stages are strictly inactive.
Instance staged_bound(std::size_t switch_at = 5);

/// Rolls Equation dynamics forward from sigma.
hpmp::Trajectory rollout(const hpmp::ProblemSpec& problem,
                         const std::vector<Eigen::VectorXd>& controls);

}  // namespace fixture
