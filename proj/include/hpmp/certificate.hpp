#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hpmp/differentiation.hpp"
#include "hpmp/execution.hpp"
#include "hpmp/problem_model.hpp"
#include "hpmp/theorem_variant.hpp"

namespace hpmp {

/// Infinite-horizon multiplier list over a finite window T.
struct Certificate {
  TheoremVariant variant = TheoremVariant::Thm48;
  double lambda0 = 0.0;
  std::vector<Eigen::RowVectorXd> p;       // p[t-1] = p_t, t = 1..T
  std::vector<Eigen::VectorXd> mu;         // mu[t], t = 0..T-1; empty when m_i = 0
  std::vector<Eigen::VectorXd> eq_lambda;  // eq_lambda[t], t = 0..T-1; empty when m_e = 0

  std::size_t window() const { return p.size(); }
  const Eigen::RowVectorXd& p_at(std::size_t t) const { return p.at(t - 1); }
};

/// p_{t+1} = (p_t - lambda0 D1phi_t) D1f_t^{-1} for t = 1..T-1, starting from p_1.
/// derivs is indexed by stage. Throws PreconditionError naming t when D1f_t
/// fails invertibility_check.
std::vector<Eigen::RowVectorXd> adjoint_forward(double lambda0, const Eigen::RowVectorXd& p1,
                                                const std::vector<StageDerivatives>& derivs,
                                                std::size_t T,
                                                double cond_limit = kConditionLimit);

/// Continues a known prefix p_1..p_W to p_1..p_T (T >= W) with the same recursion.
std::vector<Eigen::RowVectorXd> adjoint_extend(double lambda0,
                                               std::vector<Eigen::RowVectorXd> prefix,
                                               const std::vector<StageDerivatives>& derivs,
                                               std::size_t T,
                                               double cond_limit = kConditionLimit);

/// A-priori envelope for the adjoint under monotone dynamics.
struct BoundSequence {
  std::vector<double> gamma;  // gamma[t-1] = gamma_t, t = 1..T-1
  std::vector<double> zeta;   // zeta[t-1] = zeta_t, t = 1..T; zeta_1 = 1

  double zeta_at(std::size_t t) const { return zeta.at(t - 1); }
};

/// zeta_{t+1} = (zeta_t + ||D1phi_t||) / gamma_t. Throws PreconditionError
/// naming t when gamma_t <= 0.
BoundSequence bound_sequence(const std::vector<StageDerivatives>& derivs, std::size_t T);

enum class Condition { NN, Si, Sl, AE, WM };
inline constexpr std::array<Condition, 5> kConditions{Condition::NN, Condition::Si, Condition::Sl,
                                                      Condition::AE, Condition::WM};

struct Locus {
  std::size_t t = 0;
  std::size_t index = 0;  // alpha, k or control component; zero-based
  std::string what;       // "lambda0", "p", "mu", "dynamics", "g", ...
};

struct ConditionEntry {
  Condition condition = Condition::NN;
  bool applicable = true;
  bool pass = true;
  double worst_defect = 0.0;  // relative to the tolerance scale where one applies
  std::optional<Locus> locus;
};

struct ConditionReport {
  TheoremVariant variant = TheoremVariant::Thm48;
  std::size_t window = 0;  // conditions inspected for t < window
  double tol = 0.0;
  std::array<ConditionEntry, 5> entries;
  std::vector<std::string> notes;

  const ConditionEntry& operator[](Condition c) const { return entries[static_cast<std::size_t>(c)]; }
  bool pass() const;
};

struct VerifyOptions {
  double tol = 1e-6;
  double tol_nn = 1e-6;  // NN needs |lambda0| + ||p_1|| >= tol_nn
  Execution exec = Execution::Parallel;
  double step = kDefaultStep;
};

/// Checks NN, Si, Sl, AE (t >= 1) and WM of cert against the candidate over
/// the certificate window. Throws PreconditionError for a variant that does
/// not match the control set or a certificate shorter than its own window
/// requires, InadmissibleError for an inadmissible candidate.
ConditionReport verify(const ProblemSpec& problem, const Trajectory& candidate,
                       const Certificate& cert, const VerifyOptions& options = {});

std::string to_string(Condition condition);

}  // namespace hpmp
