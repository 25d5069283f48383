#include "hpmp/qualification.hpp"

#include <algorithm>
#include <cmath>

#include "detail/simplex.hpp"
#include "hpmp/error.hpp"

namespace hpmp {

namespace {

using detail::LinearProgram;
using detail::LpStatus;
using detail::RowSense;

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

bool on_simplex(const Eigen::VectorXd& weights, double tol) {
  return weights.size() > 0 && weights.minCoeff() >= -tol && std::abs(weights.sum() - 1.0) <= tol;
}

// Clamp roundoff negatives and rescale onto the simplex; empty when the mass vanishes.
Eigen::VectorXd to_simplex(Eigen::VectorXd y) {
  y = y.cwiseMax(0.0);
  const double mass = y.sum();
  if (!(mass > 0.0)) return {};
  return y / mass;
}

// Witness LP: <psi_j, w> = 0, <phi_k, w> >= 1, w free.
detail::LpResult witness_lp(const Eigen::MatrixXd& psi, const Eigen::MatrixXd& phi) {
  LinearProgram lp(phi.cols());
  lp.set_all_free();
  for (Eigen::Index j = 0; j < psi.rows(); ++j) lp.add_row(psi.row(j), RowSense::Equal, 0.0);
  for (Eigen::Index k = 0; k < phi.rows(); ++k) lp.add_row(phi.row(k), RowSense::GreaterEqual, 1.0);
  return lp.solve();
}

// Alternative system solved directly: theta >= 0, sum theta = 1,
// psi^T zeta - phi^T theta = 0, zeta free. Used when the dual read-off
// does not verify.
std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> alternative_lp(
    const Eigen::MatrixXd& psi, const Eigen::MatrixXd& phi) {
  const Eigen::Index j_count = psi.rows();
  const Eigen::Index k_count = phi.rows();
  LinearProgram lp(j_count + k_count);
  for (Eigen::Index j = 0; j < j_count; ++j) lp.set_free(j);
  Eigen::RowVectorXd mass = Eigen::RowVectorXd::Zero(j_count + k_count);
  mass.tail(k_count).setOnes();
  lp.add_row(mass, RowSense::Equal, 1.0);
  for (Eigen::Index i = 0; i < phi.cols(); ++i) {
    Eigen::RowVectorXd row(j_count + k_count);
    row.head(j_count) = psi.col(i).transpose();
    row.tail(k_count) = -phi.col(i).transpose();
    lp.add_row(row, RowSense::Equal, 0.0);
  }
  const detail::LpResult res = lp.solve();
  if (res.status != LpStatus::Optimal) return std::nullopt;
  return std::make_pair(Eigen::VectorXd(res.x.head(j_count)),
                        Eigen::VectorXd(res.x.tail(k_count).cwiseMax(0.0)));
}

}  // namespace

void FunctionalFamily::validate() const {
  if (rows.rows() < 1) throw DimensionError("functional family is empty");
  if (rows.cols() < 1) throw DimensionError("functional family has dimension 0");
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != rows.rows()) {
    throw DimensionError("functional family has " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(rows.rows()) + " rows");
  }
  if (!rows.allFinite()) throw DimensionError("functional family has non-finite entries");
}

bool SeparationCertificate::verify(const FunctionalFamily& family, double tol) const {
  if (separated()) {
    if (witness.size() != family.dim()) return false;
    const Eigen::VectorXd values = family.rows * witness;
    return values.minCoeff() >= 1.0 - tol;
  }
  if (alpha.size() != family.size() || !on_simplex(alpha, tol)) return false;
  return (family.rows.transpose() * alpha).norm() <= tol;
}

bool SpanHullCertificate::verify(const FunctionalFamily& equalities,
                                 const FunctionalFamily& inequalities, double tol) const {
  if (disjoint()) {
    if (witness.size() != inequalities.dim() || witness.size() != equalities.dim()) return false;
    return max_abs(equalities.rows * witness) <= tol &&
           (inequalities.rows * witness).minCoeff() >= 1.0 - tol;
  }
  if (zeta.size() != equalities.size() || theta.size() != inequalities.size() ||
      !on_simplex(theta, tol)) {
    return false;
  }
  const Eigen::VectorXd gap =
      equalities.rows.transpose() * zeta - inequalities.rows.transpose() * theta;
  return gap.norm() <= tol;
}

SeparationCertificate separation_check(const FunctionalFamily& family) {
  family.validate();
  const Eigen::Index count = family.size();
  SeparationCertificate cert;

  if (family.rows.cwiseAbs().maxCoeff() == 0.0) {
    cert.alpha = Eigen::VectorXd::Constant(count, 1.0 / static_cast<double>(count));
    return cert;
  }

  const Eigen::MatrixXd none(0, family.dim());
  const detail::LpResult res = witness_lp(none, family.rows);
  if (res.status == LpStatus::Optimal) {
    cert.outcome = SeparationCertificate::Outcome::Separated;
    cert.witness = res.x;
    if (cert.verify(family)) return cert;
  } else if (res.status == LpStatus::Infeasible) {
    // Farkas multipliers y >= 0 with Phi^T y = 0 and sum y > 0.
    cert.outcome = SeparationCertificate::Outcome::NotSeparated;
    cert.alpha = to_simplex(res.farkas);
    if (cert.verify(family)) return cert;
  }

  cert = {};
  if (const auto alt = alternative_lp(none, family.rows)) {
    cert.alpha = alt->second / alt->second.sum();
    if (cert.verify(family)) return cert;
  }
  throw Error("separation_check: neither certificate verifies (family is numerically borderline)");
}

SpanHullCertificate span_co_disjoint_check(const FunctionalFamily& equalities,
                                           const FunctionalFamily& inequalities) {
  equalities.validate();
  inequalities.validate();
  if (equalities.dim() != inequalities.dim()) {
    throw DimensionError("equality and inequality families differ in dimension");
  }
  const Eigen::Index j_count = equalities.size();
  SpanHullCertificate cert;

  const detail::LpResult res = witness_lp(equalities.rows, inequalities.rows);
  if (res.status == LpStatus::Optimal) {
    cert.outcome = SpanHullCertificate::Outcome::Disjoint;
    cert.witness = res.x;
    if (cert.verify(equalities, inequalities)) return cert;
  } else if (res.status == LpStatus::Infeasible) {
    // Farkas multipliers (y_psi free, y_phi >= 0) with
    // Psi^T y_psi + Phi^T y_phi = 0 and sum y_phi > 0.
    const Eigen::VectorXd y_psi = res.farkas.head(j_count);
    const Eigen::VectorXd y_phi = res.farkas.tail(inequalities.size()).cwiseMax(0.0);
    const double mass = y_phi.sum();
    if (mass > 0.0) {
      cert.outcome = SpanHullCertificate::Outcome::Intersecting;
      cert.theta = y_phi / mass;
      cert.zeta = -y_psi / mass;
      if (cert.verify(equalities, inequalities)) return cert;
    }
  }

  cert = {};
  if (const auto alt = alternative_lp(equalities.rows, inequalities.rows)) {
    cert.zeta = alt->first;
    cert.theta = alt->second / alt->second.sum();
    if (cert.verify(equalities, inequalities)) return cert;
  }
  throw Error("span_co_disjoint_check: neither certificate verifies (input is numerically borderline)");
}

VanishingReport verify_vanishing_implication(const FunctionalFamily& equalities,
                                             const FunctionalFamily& inequalities,
                                             const SpanHullCertificate& certificate,
                                             const Eigen::VectorXd& lambda,
                                             const Eigen::VectorXd& mu, double tol) {
  if (!certificate.disjoint() || !certificate.verify(equalities, inequalities)) {
    throw PreconditionError("vanishing implication needs a verified Disjoint certificate");
  }
  if (lambda.size() != equalities.size() || mu.size() != inequalities.size()) {
    throw DimensionError("coefficient vectors do not match the families");
  }
  if (mu.size() > 0 && mu.minCoeff() < 0.0) {
    throw PreconditionError("inequality coefficients must be nonnegative");
  }

  const Eigen::VectorXd& w = certificate.witness;
  const double pairing_floor = (inequalities.rows * w).minCoeff();
  const double psi_leak = max_abs(equalities.rows * w);

  VanishingReport report;
  report.combination_norm =
      (equalities.rows.transpose() * lambda + inequalities.rows.transpose() * mu).norm();
  report.max_mu = max_abs(mu);
  report.kappa = w.norm() / pairing_floor;
  report.bound = tol * report.kappa + psi_leak * lambda.cwiseAbs().sum() / pairing_floor;
  report.premise_met = report.combination_norm <= tol;
  report.holds = !report.premise_met || report.max_mu <= report.bound * (1.0 + 1e-12) + 1e-300;
  return report;
}

ActiveSet active_set(const Eigen::VectorXd& g_values, double tol) {
  ActiveSet out;
  out.tolerance = tol;
  for (Eigen::Index k = 0; k < g_values.size(); ++k) {
    const double g = g_values(k);
    if (!std::isfinite(g) || g < -tol) {
      throw PreconditionError("constraint row " + std::to_string(k) + " is violated (g = " +
                              std::to_string(g) + ")");
    }
    if (g <= tol) out.indices.push_back(static_cast<std::size_t>(k));
  }
  return out;
}

}  // namespace hpmp
