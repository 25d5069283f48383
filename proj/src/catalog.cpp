#include "hpmp/catalog.hpp"

#include <algorithm>

#include <Eigen/LU>
#include <fmt/format.h>

namespace hpmp {

namespace {

Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

ProblemFile lq_base(const std::string& name) {
  ProblemFile f;
  f.name = name;
  f.n = 1;
  f.d = 1;
  f.kind = SystemKind::Equation;
  f.controls = ControlVariant::Interior;
  f.horizon = kCatalogHorizon;
  f.beta = 1.0;
  f.sigma = Eigen::VectorXd::Ones(1);
  f.rule.A = scalar(0.5);
  f.rule.B = scalar(1.0);
  f.rule.c = Eigen::VectorXd::Zero(1);
  f.rule.Q = scalar(1.0);
  f.rule.R = scalar(1.0);
  f.rule.G = Eigen::MatrixXd::Zero(0, 1);
  f.rule.g0 = Eigen::VectorXd::Zero(0);
  f.rule.E = Eigen::MatrixXd::Zero(0, 1);
  f.rule.e0 = Eigen::VectorXd::Zero(0);
  return f;
}

// Rolls the affine dynamics forward under a control law.
template <typename Law>
Trajectory simulate(const ProblemFile& f, Law law) {
  Trajectory traj;
  traj.states.push_back(f.sigma);
  for (std::size_t t = 0; t < kCatalogHorizon; ++t) {
    const StageData s = f.stage(t);
    const Eigen::VectorXd& x = traj.states.back();
    Eigen::VectorXd u = law(x);
    traj.states.push_back(s.A * x + s.B * u + s.c);
    traj.controls.push_back(std::move(u));
  }
  return traj;
}

CatalogEntry lq1() {
  CatalogEntry e{"LQ1", "scalar LQ regulator, x' = 0.5x + u, phi = -(x^2 + u^2), sigma = 1", lq_base("LQ1"), {}};
  const RiccatiSolution ric = riccati_fixed_point(e.file.rule.A, e.file.rule.B, e.file.rule.Q,
                                                  e.file.rule.R, e.file.beta);
  e.candidate = simulate(e.file, [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return -ric.K * x; });
  return e;
}

CatalogEntry con1() {
  CatalogEntry e{"CON1", "LQ1 with u >= 0; the Riccati feedback is negative so the bound is active",
                 lq_base("CON1"), {}};
  e.file.controls = ControlVariant::Inequalities;
  e.file.rule.G = scalar(1.0);
  e.file.rule.g0 = Eigen::VectorXd::Zero(1);
  const RiccatiSolution ric = riccati_fixed_point(e.file.rule.A, e.file.rule.B, e.file.rule.Q,
                                                  e.file.rule.R, e.file.beta);
  e.candidate = simulate(e.file, [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return (-ric.K * x).cwiseMax(0.0);
  });
  return e;
}

CatalogEntry mix1() {
  CatalogEntry e{"MIX1", "x' = 0.5x + u1 + u2 with u1 = 0 and u2 >= 0, phi = -(x^2 + |u|^2)",
                 lq_base("MIX1"), {}};
  e.file.d = 2;
  e.file.controls = ControlVariant::Mixed;
  e.file.rule.B = Eigen::MatrixXd::Ones(1, 2);
  e.file.rule.R = Eigen::MatrixXd::Identity(2, 2);
  e.file.rule.E = (Eigen::MatrixXd(1, 2) << 1.0, 0.0).finished();
  e.file.rule.e0 = Eigen::VectorXd::Zero(1);
  e.file.rule.G = (Eigen::MatrixXd(1, 2) << 0.0, 1.0).finished();
  e.file.rule.g0 = Eigen::VectorXd::Zero(1);
  e.candidate = simulate(e.file, [](const Eigen::VectorXd&) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(2); });
  return e;
}

CatalogEntry slack1() {
  CatalogEntry e{"SLACK1", "inequation x' <= x + 1, phi = -(1/2)^t u^2, candidate x = u = 0",
                 lq_base("SLACK1"), {}};
  e.file.kind = SystemKind::Inequation;
  e.file.beta = 0.5;
  e.file.sigma = Eigen::VectorXd::Zero(1);
  e.file.rule.A = scalar(1.0);
  e.file.rule.B = scalar(0.0);
  e.file.rule.c = Eigen::VectorXd::Ones(1);
  e.file.rule.Q = scalar(0.0);
  e.file.rule.R = scalar(1.0);
  e.candidate.states.assign(kCatalogHorizon + 1, Eigen::VectorXd::Zero(1));
  e.candidate.controls.assign(kCatalogHorizon, Eigen::VectorXd::Zero(1));
  return e;
}

}  // namespace

std::vector<std::string> catalog_names() { return {"LQ1", "SLACK1", "CON1", "MIX1"}; }

CatalogEntry catalog_entry(const std::string& name) {
  if (name == "LQ1") return lq1();
  if (name == "SLACK1") return slack1();
  if (name == "CON1") return con1();
  if (name == "MIX1") return mix1();
  throw PreconditionError(fmt::format("unknown catalog problem '{}'", name));
}

RiccatiSolution riccati_fixed_point(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R, double beta,
                                    double tol, std::size_t max_iterations) {
  RiccatiSolution out;
  out.P = Q;
  for (out.iterations = 1; out.iterations <= max_iterations; ++out.iterations) {
    const Eigen::MatrixXd S = R + beta * B.transpose() * out.P * B;
    const Eigen::MatrixXd K = beta * S.partialPivLu().solve(B.transpose() * out.P * A);
    const Eigen::MatrixXd next = Q + beta * A.transpose() * out.P * (A - B * K);
    const double change = (next - out.P).cwiseAbs().maxCoeff();
    out.P = 0.5 * (next + next.transpose());
    out.K = K;
    if (change <= tol * (1.0 + out.P.cwiseAbs().maxCoeff())) {
      const Eigen::MatrixXd Sf = R + beta * B.transpose() * out.P * B;
      out.K = beta * Sf.partialPivLu().solve(B.transpose() * out.P * A);
      return out;
    }
  }
  throw Error("Riccati value iteration did not converge");
}

}  // namespace hpmp
