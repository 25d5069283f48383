#include "hpmp/certificate.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>
#include <fmt/format.h>

namespace hpmp {

namespace {

struct Worst {
  double defect = 0.0;
  std::optional<Locus> locus;

  void offer(double value, std::size_t t, std::size_t index, const char* what) {
    if (value > defect) {
      defect = value;
      locus = Locus{t, index, what};
    }
  }
  void merge(const Worst& other) {
    if (other.defect > defect) *this = other;
  }
};

struct StageChecks {
  Worst si;
  Worst sl;
  Worst ae;
  Worst wm;
};

}  // namespace

std::vector<Eigen::RowVectorXd> adjoint_extend(double lambda0,
                                               std::vector<Eigen::RowVectorXd> prefix,
                                               const std::vector<StageDerivatives>& derivs,
                                               std::size_t T, double cond_limit) {
  if (prefix.empty()) throw PreconditionError("adjoint recursion needs p_1");
  for (std::size_t t = prefix.size(); t < T; ++t) {
    if (t >= derivs.size()) {
      throw PreconditionError(fmt::format("no stage derivatives at t = {}", t));
    }
    const StageDerivatives& s = derivs[t];
    const InvertibilityReport inv = invertibility_check(s.D1f, cond_limit);
    if (!inv.invertible) {
      throw PreconditionError(fmt::format(
          "D1f_t is not invertible at t = {} (condition estimate {:.3g})", t, inv.condition_estimate));
    }
    const Eigen::RowVectorXd rhs = prefix.back() - lambda0 * s.D1phi;
    prefix.emplace_back(s.D1f.transpose().partialPivLu().solve(rhs.transpose()).transpose());
  }
  return prefix;
}

std::vector<Eigen::RowVectorXd> adjoint_forward(double lambda0, const Eigen::RowVectorXd& p1,
                                                const std::vector<StageDerivatives>& derivs,
                                                std::size_t T, double cond_limit) {
  if (T == 0) return {};
  return adjoint_extend(lambda0, {p1}, derivs, T, cond_limit);
}

BoundSequence bound_sequence(const std::vector<StageDerivatives>& derivs, std::size_t T) {
  BoundSequence out;
  if (T == 0) return out;
  out.zeta.push_back(1.0);
  for (std::size_t t = 1; t < T; ++t) {
    if (t >= derivs.size()) throw PreconditionError(fmt::format("no stage derivatives at t = {}", t));
    const double gamma = monotonicity_check(derivs[t].D1f).gamma_t;
    if (!(gamma > 0.0)) {
      throw PreconditionError(fmt::format("gamma_t = {:.6g} is not positive at t = {}", gamma, t));
    }
    out.gamma.push_back(gamma);
    out.zeta.push_back((out.zeta.back() + derivs[t].D1phi.norm()) / gamma);
  }
  return out;
}

bool ConditionReport::pass() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const ConditionEntry& e) { return !e.applicable || e.pass; });
}

ConditionReport verify(const ProblemSpec& problem, const Trajectory& candidate,
                       const Certificate& cert, const VerifyOptions& options) {
  require_compatible(cert.variant, problem);
  const std::size_t T = cert.window();
  const std::size_t m_i = problem.controls.inequality_count;
  const std::size_t m_e = problem.controls.equality_count;
  if (T == 0) throw PreconditionError("certificate carries no adjoint entries");
  if (candidate.steps() < T) {
    throw PreconditionError(fmt::format("candidate has {} controls; the certificate window needs {}",
                                        candidate.steps(), T));
  }
  if ((m_i > 0 && cert.mu.size() < T) || (m_e > 0 && cert.eq_lambda.size() < T)) {
    throw PreconditionError(fmt::format("certificate constraint multipliers do not cover t < {}", T));
  }
  for (std::size_t t = 0; t < T; ++t) {
    if (static_cast<std::size_t>(cert.p[t].size()) != problem.n ||
        (m_i > 0 && static_cast<std::size_t>(cert.mu[t].size()) != m_i) ||
        (m_e > 0 && static_cast<std::size_t>(cert.eq_lambda[t].size()) != m_e)) {
      throw DimensionError("certificate entry has the wrong length", t);
    }
  }
  AdmissibilityReport adm = check_admissibility(problem, candidate);
  if (!adm.feasible) throw InadmissibleError("verify: candidate is inadmissible", std::move(adm));

  const VariantRules r = rules(cert.variant);
  const std::vector<StageDerivatives> derivs =
      stage_derivatives_range(problem, candidate, 0, T - 1, options.exec, options.step);
  const double tol = options.tol;
  const double lambda0 = cert.lambda0;

  std::vector<StageChecks> per_stage(T);
  const auto check_stage = [&](std::size_t t) {
    StageChecks& out = per_stage[t];
    const StageDerivatives& s = derivs[t];
    const Eigen::RowVectorXd& next = cert.p[t];  // p_{t+1}
    const Eigen::VectorXd& x = candidate.states[t];
    const Eigen::VectorXd& u = candidate.controls[t];

    if (r.adjoint_nonnegative) {
      for (Eigen::Index a = 0; a < next.size(); ++a) {
        out.si.offer(-next(a), t + 1, static_cast<std::size_t>(a), "p");
      }
    }
    Eigen::VectorXd g;
    if (m_i > 0) {
      g = problem.controls.inequalities(t, u);
      for (std::size_t k = 0; k < m_i; ++k) {
        const double mu = cert.mu[t](static_cast<Eigen::Index>(k));
        out.si.offer(-mu, t, k, "mu");
        out.sl.offer(std::abs(mu * g(static_cast<Eigen::Index>(k))), t, k, "mu*g");
      }
    }
    if (r.dynamic_slackness) {
      const Eigen::VectorXd slack = problem.dynamics(t, x, u) - candidate.states[t + 1];
      for (Eigen::Index a = 0; a < slack.size(); ++a) {
        out.sl.offer(std::abs(next(a) * slack(a)), t, static_cast<std::size_t>(a), "p*slack");
      }
    }

    if (t >= 1) {
      const Eigen::RowVectorXd& cur = cert.p[t - 1];  // p_t
      const double defect = (cur - next * s.D1f - lambda0 * s.D1phi).norm();
      const double scale =
          1.0 + std::max({cur.norm(), next.norm(), std::abs(lambda0) * s.D1phi.norm()});
      out.ae.offer(defect / scale, t, 0, "AE");
    }

    Eigen::RowVectorXd wm = next * s.D2f + lambda0 * s.D2phi;
    double scale = std::max((next * s.D2f).norm(), std::abs(lambda0) * s.D2phi.norm());
    if (m_i > 0) {
      const Eigen::RowVectorXd term = cert.mu[t].transpose() * s.Dg;
      wm += term;
      scale = std::max(scale, term.norm());
    }
    if (m_e > 0) {
      const Eigen::RowVectorXd term = cert.eq_lambda[t].transpose() * s.De;
      wm += term;
      scale = std::max(scale, term.norm());
    }
    out.wm.offer(wm.norm() / (1.0 + scale), t, 0, "WM");
  };

  const auto count = static_cast<std::ptrdiff_t>(T);
  if (options.exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) check_stage(static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) check_stage(static_cast<std::size_t>(i));
  }

  StageChecks total;
  total.si.offer(-lambda0, 0, 0, "lambda0");
  for (const StageChecks& s : per_stage) {
    total.si.merge(s.si);
    total.sl.merge(s.sl);
    total.ae.merge(s.ae);
    total.wm.merge(s.wm);
  }

  ConditionReport report;
  report.variant = cert.variant;
  report.window = T;
  report.tol = tol;
  const auto fill = [&](Condition c, const Worst& w, bool applicable) {
    ConditionEntry& e = report.entries[static_cast<std::size_t>(c)];
    e.condition = c;
    e.applicable = applicable;
    e.worst_defect = w.defect;
    e.locus = w.locus;
    e.pass = w.defect <= tol;
  };

  const double nn_value = std::abs(lambda0) + cert.p[0].norm();
  Worst nn;
  nn.offer(options.tol_nn - nn_value, 1, 0, "(lambda0, p_1)");
  fill(Condition::NN, nn, true);
  report.entries[0].pass = nn_value >= options.tol_nn;
  fill(Condition::Si, total.si, true);
  fill(Condition::Sl, total.sl, r.dynamic_slackness || m_i > 0);
  fill(Condition::AE, total.ae, T >= 2);
  fill(Condition::WM, total.wm, true);

  report.notes.push_back(fmt::format("conditions inspected over the window t < {}", T));
  if (cert.variant == TheoremVariant::Thm48) {
    report.notes.push_back(
        "AE is stated for every t but p_0 is undefined; checked for t >= 1 only");
  }
  if (cert.variant == TheoremVariant::Thm47 || cert.variant == TheoremVariant::Thm48) {
    report.notes.push_back(
        "the criterion differential is assumed Frechet; a finite-difference probe cannot tell it "
        "from Gateaux");
  }
  if (!problem.regularity.lower_semicontinuous) {
    report.notes.push_back("semicontinuity of slack rows is not declared and is not checked");
  }
  return report;
}

std::string to_string(Condition condition) {
  switch (condition) {
    case Condition::NN:
      return "NN";
    case Condition::Si:
      return "Si";
    case Condition::Sl:
      return "Sl";
    case Condition::AE:
      return "AE";
    case Condition::WM:
      return "WM";
  }
  return "?";
}

}  // namespace hpmp
