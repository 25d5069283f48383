#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "hpmp/certificate.hpp"
#include "hpmp/execution.hpp"
#include "hpmp/qualification.hpp"
#include "hpmp/truncation_solver.hpp"

namespace hpmp {

inline constexpr double kCauchyTol = 1e-6;

struct SweepOptions {
  double cauchy_tol = kCauchyTol;
  SolveOptions solve;
  Execution exec = Execution::Parallel;
  /// Length T of the limit certificate; defaults to the tracked window W.
  std::optional<std::size_t> limit_window;
};

/// Successive-difference norms of every tracked quantity.
struct CauchyProfile {
  std::vector<std::string> quantities;    // "lambda0", "p[t][alpha]", "mu[t][k]", "lambda[t][j]"
  std::vector<std::vector<double>> diffs; // diffs[q][i] = |q^{h_i} - q^{h_{i+1}}|
  std::vector<double> pair_max;           // max over q for pair i
};

struct SweepResult {
  std::vector<std::size_t> horizons;
  std::vector<MultiplierOutcome> runs;  // sign-aligned, one per horizon
  TheoremVariant variant = TheoremVariant::Thm48;
  std::size_t window = 0;               // W
  bool converged = false;
  std::optional<std::size_t> failing_h;
  std::string reason;
  CauchyProfile cauchy_profile;
  std::optional<Certificate> limits;
};

/// Solves every truncation in h_list, aligns the normalization sign where the
/// sign constraints leave it free, and declares convergence when the last
/// min(3, pairs) successive differences of every tracked quantity are below
/// cauchy_tol. Limits are the last run's values on the window, continued by
/// the adjoint recursion (and WM coefficient recovery for mu, eq lambda).
///
/// Throws PreconditionError unless h_list is strictly increasing and
/// max(h_list) + 1 <= H_max.
SweepResult sweep(const ProblemSpec& problem, const Trajectory& candidate,
                  const std::vector<std::size_t>& h_list, TheoremVariant variant,
                  const SweepOptions& options = {});

struct CoefficientRecovery {
  std::vector<Eigen::VectorXd> coefficients;  // one per combo
  std::vector<double> residuals;              // ||basis^T c - combo|| per combo
  std::vector<bool> convergent;               // per coefficient index
  std::vector<double> tail_diff;              // last successive difference per index
};

/// Least-squares coefficients of each combo in the basis rows. Throws
/// PreconditionError when the basis rows are linearly dependent.
CoefficientRecovery recover_coefficients(const FunctionalFamily& basis,
                                         const std::vector<Eigen::VectorXd>& combos,
                                         double cauchy_tol = kCauchyTol);

/// "A..B", "A..B:step" or "h1,h2,...". Throws PreconditionError.
std::vector<std::size_t> parse_horizon_list(std::string_view text);

/// 10, 20, 40, ... while h + 1 <= horizon, closed by horizon - 1.
std::vector<std::size_t> default_horizons(std::size_t horizon);

}  // namespace hpmp
