#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hpmp {

inline constexpr double kCertificateTol = 1e-9;
inline constexpr double kActivityTol = 1e-8;

/// Linear functionals on R^d, one per row.
struct FunctionalFamily {
  Eigen::MatrixXd rows;             // count x d
  std::vector<std::string> labels;  // empty or one per row

  FunctionalFamily() = default;
  explicit FunctionalFamily(Eigen::MatrixXd r, std::vector<std::string> l = {})
      : rows(std::move(r)), labels(std::move(l)) {}

  Eigen::Index size() const { return rows.rows(); }
  Eigen::Index dim() const { return rows.cols(); }
  /// Throws DimensionError unless nonempty, d >= 1 and labels match.
  void validate() const;
};

/// Outcome of "is 0 outside co{phi_i}?".
struct SeparationCertificate {
  enum class Outcome { Separated, NotSeparated };
  Outcome outcome = Outcome::NotSeparated;
  Eigen::VectorXd witness;  // Separated: <phi_i, w> >= 1 for all i
  Eigen::VectorXd alpha;    // NotSeparated: simplex weights with sum alpha_i phi_i = 0

  bool separated() const { return outcome == Outcome::Separated; }
  /// Direct arithmetic check of the certificate against family.
  bool verify(const FunctionalFamily& family, double tol = kCertificateTol) const;
};

/// Outcome of "are span{psi_j} and co{phi_k} disjoint?".
struct SpanHullCertificate {
  enum class Outcome { Disjoint, Intersecting };
  Outcome outcome = Outcome::Intersecting;
  Eigen::VectorXd witness;  // Disjoint: <psi_j, w> = 0, <phi_k, w> >= 1
  Eigen::VectorXd zeta;     // Intersecting: sum zeta_j psi_j = sum theta_k phi_k
  Eigen::VectorXd theta;    // Intersecting: simplex weights

  bool disjoint() const { return outcome == Outcome::Disjoint; }
  bool verify(const FunctionalFamily& equalities, const FunctionalFamily& inequalities,
              double tol = kCertificateTol) const;
};

/// Solves the feasibility problem <phi_i, w> >= 1 and, when it has no
/// solution, reads the simplex weights off the phase-one duals.
SeparationCertificate separation_check(const FunctionalFamily& family);

/// Same with the added rows <psi_j, w> = 0.
SpanHullCertificate span_co_disjoint_check(const FunctionalFamily& equalities,
                                           const FunctionalFamily& inequalities);

struct VanishingReport {
  bool holds = true;
  bool premise_met = false;    // ||sum lambda psi + sum mu phi|| <= tol
  double combination_norm = 0.0;
  double max_mu = 0.0;
  double bound = 0.0;          // max_mu may not exceed this
  double kappa = 0.0;          // conditioning factor ||w|| / min <phi_k, w>
};

/// For a Disjoint certificate: a combination with mu >= 0 that (nearly)
/// vanishes must have (nearly) vanishing mu. Pairing the combination with
/// the witness gives sum mu_k <phi_k, w> <= ||combo|| ||w|| + |<sum lambda psi, w>|,
/// so max mu <= tol * kappa when the premise holds.
///
/// Throws PreconditionError without a verified Disjoint certificate or with
/// negative mu.
VanishingReport verify_vanishing_implication(const FunctionalFamily& equalities,
                                             const FunctionalFamily& inequalities,
                                             const SpanHullCertificate& certificate,
                                             const Eigen::VectorXd& lambda,
                                             const Eigen::VectorXd& mu,
                                             double tol = kCertificateTol);

struct ActiveSet {
  std::vector<std::size_t> indices;  // zero-based k with |g^k| <= tolerance
  double tolerance = kActivityTol;
};

/// Indices are zero-based. Throws PreconditionError naming k when some
/// g^k < -tol (the control violates its constraint).
ActiveSet active_set(const Eigen::VectorXd& g_values, double tol = kActivityTol);

}  // namespace hpmp
