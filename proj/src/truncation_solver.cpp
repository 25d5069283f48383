#include "hpmp/truncation_solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

#include <Eigen/LU>
#include <fmt/format.h>

#include "detail/sphere.hpp"

namespace hpmp {

namespace {

constexpr double kClamp = 1e-9;

struct ActiveMu {
  std::size_t t;
  std::size_t k;
};

// Which p_{t+1}^alpha slackness forces to zero and which mu_t^k may be nonzero.
struct Activity {
  std::vector<std::vector<bool>> p_zero;  // [t][alpha], t = 0..h
  std::vector<ActiveMu> active;
};

// Multiplier list after unpacking, before finalization.
struct Multipliers {
  double lambda0 = 0.0;
  std::vector<Eigen::RowVectorXd> p;  // p_1..p_{h+1}
  std::vector<Eigen::VectorXd> mu;    // t = 0..h
  std::vector<Eigen::VectorXd> eq;    // t = 0..h
};

Activity classify(const FiniteHorizonProblem& fh, const VariantRules& rules, double tol) {
  const ProblemSpec& pr = fh.problem;
  Activity act;
  act.p_zero.assign(fh.stages(), std::vector<bool>(pr.n, false));
  for (std::size_t t = 0; t <= fh.h; ++t) {
    const Eigen::VectorXd& x = fh.candidate.states[t];
    const Eigen::VectorXd& u = fh.candidate.controls[t];
    if (rules.dynamic_slackness) {
      const Eigen::VectorXd slack = pr.dynamics(t, x, u) - fh.candidate.states[t + 1];
      for (std::size_t a = 0; a < pr.n; ++a) act.p_zero[t][a] = slack(static_cast<Eigen::Index>(a)) > tol;
    }
    if (pr.controls.inequality_count > 0) {
      for (std::size_t k : active_set(pr.controls.inequalities(t, u), tol).indices) {
        act.active.push_back({t, k});
      }
    }
  }
  return act;
}

void check_hypotheses(const std::vector<StageDerivatives>& derivs, std::size_t h,
                      const VariantRules& rules, TheoremVariant variant, double cond_limit) {
  for (std::size_t t = 1; t <= h; ++t) {
    const InvertibilityReport inv = invertibility_check(derivs[t].D1f, cond_limit);
    const bool mono = monotonicity_check(derivs[t].D1f).monotone();
    bool ok = true;
    std::string need;
    switch (rules.jacobian) {
      case StateJacobianHypothesis::Invertible:
        ok = inv.invertible;
        need = "invertible";
        break;
      case StateJacobianHypothesis::Monotone:
        ok = mono;
        need = "monotone (nonnegative entries, positive diagonal)";
        break;
      case StateJacobianHypothesis::InvertibleOrMonotone:
        ok = inv.invertible || mono;
        need = "invertible or monotone";
        break;
    }
    if (!ok) {
      throw PreconditionError(fmt::format("{} needs D1f_t {} at t = {} (condition estimate {:.3g})",
                                          to_string(variant), need, t, inv.condition_estimate));
    }
  }
}

std::vector<std::string> qualification_notes(const FiniteHorizonProblem& fh,
                                             const std::vector<StageDerivatives>& derivs,
                                             const VariantRules& rules, const Activity& act) {
  std::vector<std::string> notes;
  if (!rules.separation_qualification && !rules.span_hull_qualification) return notes;
  for (std::size_t t = 0; t <= fh.h; ++t) {
    std::vector<Eigen::Index> rows;
    for (const ActiveMu& a : act.active) {
      if (a.t == t) rows.push_back(static_cast<Eigen::Index>(a.k));
    }
    const Eigen::MatrixXd& De = derivs[t].De;
    if (De.rows() > 0) {
      Eigen::FullPivLU<Eigen::MatrixXd> lu(De);
      if (lu.rank() < De.rows()) {
        notes.push_back(fmt::format("t = {}: equality differentials are linearly dependent", t));
      }
    }
    if (rows.empty()) continue;
    Eigen::MatrixXd dg(static_cast<Eigen::Index>(rows.size()), derivs[t].Dg.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) dg.row(static_cast<Eigen::Index>(i)) = derivs[t].Dg.row(rows[i]);
    if (rules.span_hull_qualification && De.rows() > 0) {
      if (!span_co_disjoint_check(FunctionalFamily(De), FunctionalFamily(dg)).disjoint()) {
        notes.push_back(fmt::format("t = {}: span of equality differentials meets co(active Dg)", t));
      }
    } else if (!separation_check(FunctionalFamily(dg)).separated()) {
      notes.push_back(fmt::format("t = {}: 0 lies in co(active Dg)", t));
    }
  }
  return notes;
}

double system_norm(const std::vector<StageDerivatives>& derivs, std::size_t h) {
  double out = 0.0;
  for (std::size_t t = 0; t <= h; ++t) {
    const StageDerivatives& s = derivs[t];
    out = std::max({out, s.D1f.norm(), s.D2f.norm(), s.D1phi.norm(), s.D2phi.norm(), s.Dg.norm(),
                    s.De.norm()});
  }
  return out;
}

// Zero slack adjoint components, clamp roundoff below sign bounds, renormalize.
TruncatedMultipliers finalize(Multipliers m, const Activity& act, const VariantRules& rules,
                              std::size_t h, TheoremVariant variant) {
  for (std::size_t t = 0; t <= h; ++t) {
    for (std::size_t a = 0; a < act.p_zero[t].size(); ++a) {
      if (act.p_zero[t][a]) m.p[t](static_cast<Eigen::Index>(a)) = 0.0;
    }
  }
  const auto clamp = [](double& v) {
    if (v < 0.0 && v >= -kClamp) v = 0.0;
  };
  clamp(m.lambda0);
  if (rules.adjoint_nonnegative) {
    for (auto& p : m.p) {
      for (Eigen::Index a = 0; a < p.size(); ++a) clamp(p(a));
    }
  }
  for (auto& mu : m.mu) {
    for (Eigen::Index k = 0; k < mu.size(); ++k) clamp(mu(k));
  }

  const double scale = std::abs(m.lambda0) + m.p[0].norm();
  TruncatedMultipliers out;
  out.h = h;
  out.variant = variant;
  out.lambda0 = m.lambda0 / scale;
  out.p.reserve(m.p.size());
  for (auto& p : m.p) out.p.emplace_back(p / scale);
  for (auto& mu : m.mu) out.mu.emplace_back(mu / scale);
  for (auto& eq : m.eq) out.eq.emplace_back(eq / scale);
  return out;
}

void stage_residuals(TruncatedMultipliers& out, const std::vector<StageDerivatives>& derivs) {
  const std::size_t h = out.h;
  out.residual_ae.assign(h, 0.0);
  out.residual_wm.assign(h + 1, 0.0);
  for (std::size_t t = 1; t <= h; ++t) {
    const StageDerivatives& s = derivs[t];
    out.residual_ae[t - 1] =
        (out.p_at(t) - out.p_at(t + 1) * s.D1f - out.lambda0 * s.D1phi).norm();
  }
  for (std::size_t t = 0; t <= h; ++t) {
    const StageDerivatives& s = derivs[t];
    Eigen::RowVectorXd wm = out.p_at(t + 1) * s.D2f + out.lambda0 * s.D2phi;
    if (s.Dg.rows() > 0) wm += out.mu[t].transpose() * s.Dg;
    if (s.De.rows() > 0) wm += out.eq[t].transpose() * s.De;
    out.residual_wm[t] = wm.norm();
  }
  out.max_residual_ae = out.residual_ae.empty() ? 0.0 : *std::max_element(out.residual_ae.begin(), out.residual_ae.end());
  out.max_residual_wm = *std::max_element(out.residual_wm.begin(), out.residual_wm.end());
}

// Column layout shared by both assembly paths after the adjoint block.
struct TailLayout {
  Eigen::Index mu_offset;
  Eigen::Index eq_offset;
  Eigen::Index total;
  std::size_t m_e;

  Eigen::Index eq_col(std::size_t t, std::size_t j) const {
    return eq_offset + static_cast<Eigen::Index>(t * m_e + j);
  }
};

TailLayout tail_layout(Eigen::Index adjoint_cols, const Activity& act, std::size_t h, std::size_t m_e) {
  TailLayout lay;
  lay.mu_offset = adjoint_cols;
  lay.eq_offset = lay.mu_offset + static_cast<Eigen::Index>(act.active.size());
  lay.total = lay.eq_offset + static_cast<Eigen::Index>((h + 1) * m_e);
  lay.m_e = m_e;
  return lay;
}

// Adds the mu and eq-lambda columns of WM at stage t, control component i.
void wm_tail(Eigen::Ref<Eigen::RowVectorXd> row, const TailLayout& lay, const Activity& act,
             const StageDerivatives& s, std::size_t t, Eigen::Index i) {
  for (std::size_t c = 0; c < act.active.size(); ++c) {
    if (act.active[c].t == t) {
      row(lay.mu_offset + static_cast<Eigen::Index>(c)) = s.Dg(static_cast<Eigen::Index>(act.active[c].k), i);
    }
  }
  for (std::size_t j = 0; j < lay.m_e; ++j) row(lay.eq_col(t, j)) = s.De(static_cast<Eigen::Index>(j), i);
}

void unpack_tail(Multipliers& m, const Eigen::VectorXd& y, const TailLayout& lay,
                 const Activity& act, std::size_t h, std::size_t m_i) {
  m.mu.assign(h + 1, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_i)));
  m.eq.assign(h + 1, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lay.m_e)));
  for (std::size_t c = 0; c < act.active.size(); ++c) {
    m.mu[act.active[c].t](static_cast<Eigen::Index>(act.active[c].k)) = y(lay.mu_offset + static_cast<Eigen::Index>(c));
  }
  for (std::size_t t = 0; t <= h; ++t) {
    for (std::size_t j = 0; j < lay.m_e; ++j) m.eq[t](static_cast<Eigen::Index>(j)) = y(lay.eq_col(t, j));
  }
}

class RowBuilder {
 public:
  explicit RowBuilder(Eigen::Index cols) : cols_(cols) {}
  Eigen::Ref<Eigen::RowVectorXd> add() {
    rows_.push_back(Eigen::RowVectorXd::Zero(cols_));
    return rows_.back();
  }
  Eigen::MatrixXd matrix() const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows_.size()), cols_);
    for (std::size_t r = 0; r < rows_.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = rows_[r];
    return out;
  }

 private:
  Eigen::Index cols_;
  std::vector<Eigen::RowVectorXd> rows_;
};

// P_t maps (lambda0, p_1) to p_t; returns empty when some D1f_t is singular.
std::vector<Eigen::MatrixXd> adjoint_maps(const std::vector<StageDerivatives>& derivs,
                                          std::size_t h, std::size_t n, double cond_limit) {
  const auto nn = static_cast<Eigen::Index>(n);
  std::vector<Eigen::MatrixXd> P;
  P.reserve(h + 1);
  Eigen::MatrixXd first = Eigen::MatrixXd::Zero(nn + 1, nn);
  first.bottomRows(nn).setIdentity();
  P.push_back(first);
  for (std::size_t t = 1; t <= h; ++t) {
    const StageDerivatives& s = derivs[t];
    if (!invertibility_check(s.D1f, cond_limit).invertible) return {};
    Eigen::MatrixXd y = P.back();
    y.row(0) -= s.D1phi;
    // X D1f = Y  <=>  D1f^T X^T = Y^T.
    P.push_back(s.D1f.transpose().partialPivLu().solve(y.transpose()).transpose());
  }
  return P;
}

std::optional<Multipliers> solve_adjoint_path(const FiniteHorizonProblem& fh,
                                              const std::vector<StageDerivatives>& derivs,
                                              const std::vector<Eigen::MatrixXd>& P,
                                              const Activity& act, const VariantRules& rules,
                                              detail::SphereSolution& sol) {
  const ProblemSpec& pr = fh.problem;
  const std::size_t h = fh.h;
  const auto n = static_cast<Eigen::Index>(pr.n);
  const Eigen::Index head = n + 1;
  const TailLayout lay = tail_layout(head, act, h, pr.controls.equality_count);

  RowBuilder eqs(lay.total);
  RowBuilder signs(lay.total);
  for (std::size_t t = 0; t <= h; ++t) {
    const StageDerivatives& s = derivs[t];
    Eigen::MatrixXd c = P[t] * s.D2f;
    c.row(0) += s.D2phi;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(pr.d); ++i) {
      auto row = eqs.add();
      row.head(head) = c.col(i).transpose();
      wm_tail(row, lay, act, s, t, i);
    }
    for (Eigen::Index a = 0; a < n; ++a) {
      if (act.p_zero[t][static_cast<std::size_t>(a)]) {
        eqs.add().head(head) = P[t].col(a).transpose();
      } else if (rules.adjoint_nonnegative) {
        signs.add().head(head) = P[t].col(a).transpose();
      }
    }
  }
  signs.add()(0) = 1.0;
  for (std::size_t c = 0; c < act.active.size(); ++c) signs.add()(lay.mu_offset + static_cast<Eigen::Index>(c)) = 1.0;

  sol = detail::solve_on_sphere({eqs.matrix(), signs.matrix(), head});
  if (!sol.found) return std::nullopt;

  Multipliers m;
  const Eigen::RowVectorXd y0 = sol.y.head(head).transpose();
  m.lambda0 = y0(0);
  for (std::size_t t = 0; t <= h; ++t) m.p.emplace_back(y0 * P[t]);
  unpack_tail(m, sol.y, lay, act, h, pr.controls.inequality_count);
  return m;
}

std::optional<Multipliers> solve_full_path(const FiniteHorizonProblem& fh,
                                           const std::vector<StageDerivatives>& derivs,
                                           const Activity& act, const VariantRules& rules,
                                           detail::SphereSolution& sol) {
  const ProblemSpec& pr = fh.problem;
  const std::size_t h = fh.h;
  const auto n = static_cast<Eigen::Index>(pr.n);
  const auto p_col = [n](std::size_t t) { return 1 + static_cast<Eigen::Index>(t - 1) * n; };
  const TailLayout lay = tail_layout(1 + n * static_cast<Eigen::Index>(h + 1), act, h,
                                     pr.controls.equality_count);

  RowBuilder eqs(lay.total);
  RowBuilder signs(lay.total);
  for (std::size_t t = 1; t <= h; ++t) {
    const StageDerivatives& s = derivs[t];
    for (Eigen::Index b = 0; b < n; ++b) {
      auto row = eqs.add();
      row(p_col(t) + b) = 1.0;
      row.segment(p_col(t + 1), n) -= s.D1f.col(b).transpose();
      row(0) = -s.D1phi(b);
    }
  }
  for (std::size_t t = 0; t <= h; ++t) {
    const StageDerivatives& s = derivs[t];
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(pr.d); ++i) {
      auto row = eqs.add();
      row(0) = s.D2phi(i);
      row.segment(p_col(t + 1), n) = s.D2f.col(i).transpose();
      wm_tail(row, lay, act, s, t, i);
    }
    for (Eigen::Index a = 0; a < n; ++a) {
      if (act.p_zero[t][static_cast<std::size_t>(a)]) {
        eqs.add()(p_col(t + 1) + a) = 1.0;
      } else if (rules.adjoint_nonnegative) {
        signs.add()(p_col(t + 1) + a) = 1.0;
      }
    }
  }
  signs.add()(0) = 1.0;
  for (std::size_t c = 0; c < act.active.size(); ++c) signs.add()(lay.mu_offset + static_cast<Eigen::Index>(c)) = 1.0;

  sol = detail::solve_on_sphere({eqs.matrix(), signs.matrix(), n + 1});
  if (!sol.found) return std::nullopt;

  Multipliers m;
  m.lambda0 = sol.y(0);
  for (std::size_t t = 1; t <= h + 1; ++t) m.p.emplace_back(sol.y.segment(p_col(t), n).transpose());
  unpack_tail(m, sol.y, lay, act, h, pr.controls.inequality_count);
  return m;
}

void conclude(MultiplierOutcome& out, std::optional<Multipliers> m, const detail::SphereSolution& sol,
              const Activity& act, const VariantRules& rules, TheoremVariant variant,
              const std::function<void(TruncatedMultipliers&)>& residuals) {
  out.nullity = sol.nullity;
  out.abnormal = sol.abnormal;
  if (!m) {
    out.status = SolveStatus::NoCertificate;
    out.reason = sol.reason;
    return;
  }
  TruncatedMultipliers tm = finalize(std::move(*m), act, rules, out.h, variant);
  residuals(tm);
  out.best_residual = tm.max_residual();
  out.multipliers = std::move(tm);
  if (out.best_residual <= out.threshold) {
    out.status = SolveStatus::Certified;
  } else {
    out.status = SolveStatus::NoCertificate;
    out.reason = fmt::format("stationarity residual {:.3e} exceeds threshold {:.3e}",
                             out.best_residual, out.threshold);
  }
}

}  // namespace

Eigen::Index FiniteHorizonProblem::z_size() const {
  return static_cast<Eigen::Index>(h * problem.n + (h + 1) * problem.d);
}

Eigen::Index FiniteHorizonProblem::state_offset(std::size_t t) const {
  if (t < 1 || t > h) throw DimensionError("x_t is not a decision variable at this t", t);
  return static_cast<Eigen::Index>((t - 1) * problem.n);
}

Eigen::Index FiniteHorizonProblem::control_offset(std::size_t t) const {
  if (t > h) throw DimensionError("u_t is not a decision variable at this t", t);
  return static_cast<Eigen::Index>(h * problem.n + t * problem.d);
}

Eigen::VectorXd FiniteHorizonProblem::pack(const Trajectory& traj) const {
  Eigen::VectorXd z(z_size());
  const auto n = static_cast<Eigen::Index>(problem.n);
  const auto d = static_cast<Eigen::Index>(problem.d);
  for (std::size_t t = 1; t <= h; ++t) z.segment(state_offset(t), n) = traj.states.at(t);
  for (std::size_t t = 0; t <= h; ++t) z.segment(control_offset(t), d) = traj.controls.at(t);
  return z;
}

Trajectory FiniteHorizonProblem::unpack(const Eigen::VectorXd& z) const {
  if (z.size() != z_size()) throw DimensionError("decision vector has the wrong size");
  const auto n = static_cast<Eigen::Index>(problem.n);
  const auto d = static_cast<Eigen::Index>(problem.d);
  Trajectory traj;
  traj.states.push_back(problem.sigma);
  for (std::size_t t = 1; t <= h; ++t) traj.states.emplace_back(z.segment(state_offset(t), n));
  traj.states.push_back(terminal_state);
  for (std::size_t t = 0; t <= h; ++t) traj.controls.emplace_back(z.segment(control_offset(t), d));
  return traj;
}

FiniteHorizonProblem reduce(const ProblemSpec& problem, const Trajectory& candidate, std::size_t h,
                            double tol) {
  if (candidate.steps() < h + 1) {
    throw PreconditionError(fmt::format(
        "truncation at h = {} needs stages 0..{} but the candidate has {} controls", h, h,
        candidate.steps()));
  }
  AdmissibilityReport report = check_admissibility(problem, candidate, tol);
  if (!report.feasible) {
    throw InadmissibleError("reduce: candidate is inadmissible", std::move(report));
  }
  FiniteHorizonProblem fh;
  fh.problem = problem;
  fh.h = h;
  fh.candidate.states.assign(candidate.states.begin(),
                             candidate.states.begin() + static_cast<std::ptrdiff_t>(h + 2));
  fh.candidate.controls.assign(candidate.controls.begin(),
                               candidate.controls.begin() + static_cast<std::ptrdiff_t>(h + 1));
  fh.terminal_state = candidate.states[h + 1];
  return fh;
}

MultiplierOutcome solve_multipliers(const FiniteHorizonProblem& fh,
                                    const std::vector<StageDerivatives>& derivs,
                                    TheoremVariant variant, const SolveOptions& options) {
  require_compatible(variant, fh.problem);
  if (derivs.size() < fh.stages()) {
    throw PreconditionError(fmt::format("solve_multipliers needs derivatives for stages 0..{}", fh.h));
  }
  const VariantRules r = rules(variant);
  check_hypotheses(derivs, fh.h, r, variant, options.cond_limit);

  const Activity act = classify(fh, r, options.activity_tol);
  MultiplierOutcome out;
  out.h = fh.h;
  out.threshold = options.residual_rel * (1.0 + system_norm(derivs, fh.h));
  if (options.check_qualification) out.notes = qualification_notes(fh, derivs, r, act);

  std::vector<Eigen::MatrixXd> P;
  if (options.path != AssemblyPath::FullStacked) {
    P = adjoint_maps(derivs, fh.h, fh.problem.n, options.cond_limit);
    if (P.empty() && options.path == AssemblyPath::AdjointElimination) {
      throw PreconditionError("adjoint elimination needs invertible D1f_t at every t >= 1");
    }
    double amplification = 0.0;
    for (const auto& m : P) amplification = std::max(amplification, m.cwiseAbs().maxCoeff());
    if (options.path == AssemblyPath::Auto && amplification > options.amplification_limit) {
      out.notes.push_back(fmt::format("adjoint maps amplify by {:.3g}; using the stacked system",
                                      amplification));
      P.clear();
    }
  }

  detail::SphereSolution sol;
  std::optional<Multipliers> m;
  if (!P.empty()) {
    out.path_used = AssemblyPath::AdjointElimination;
    m = solve_adjoint_path(fh, derivs, P, act, r, sol);
  } else {
    out.path_used = AssemblyPath::FullStacked;
    m = solve_full_path(fh, derivs, act, r, sol);
  }
  conclude(out, std::move(m), sol, act, r, variant,
           [&derivs](TruncatedMultipliers& tm) { stage_residuals(tm, derivs); });
  return out;
}

MultiplierOutcome oracle_kkt(const FiniteHorizonProblem& fh, TheoremVariant variant,
                             const OracleOptions& options) {
  if (fh.h > options.max_h) {
    throw PreconditionError(fmt::format("oracle_kkt is limited to h <= {}", options.max_h));
  }
  require_compatible(variant, fh.problem);
  const VariantRules r = rules(variant);
  const ProblemSpec& pr = fh.problem;
  const std::size_t h = fh.h;
  const auto n = static_cast<Eigen::Index>(pr.n);
  const std::size_t m_i = pr.controls.inequality_count;
  const std::size_t m_e = pr.controls.equality_count;
  const Eigen::VectorXd z0 = fh.pack(fh.candidate);

  // Activity read off the monolithic constraint values at the candidate.
  Activity act;
  act.p_zero.assign(h + 1, std::vector<bool>(pr.n, false));
  {
    const Trajectory traj = fh.unpack(z0);
    for (std::size_t t = 0; t <= h; ++t) {
      const Eigen::VectorXd F = pr.dynamics(t, traj.states[t], traj.controls[t]) - traj.states[t + 1];
      for (Eigen::Index a = 0; a < n; ++a) {
        act.p_zero[t][static_cast<std::size_t>(a)] = r.dynamic_slackness && F(a) > options.activity_tol;
      }
      if (m_i > 0) {
        const Eigen::VectorXd g = pr.controls.inequalities(t, traj.controls[t]);
        for (std::size_t k = 0; k < m_i; ++k) {
          if (std::abs(g(static_cast<Eigen::Index>(k))) <= options.activity_tol) act.active.push_back({t, k});
        }
      }
    }
  }

  // Outputs in unknown order: Phi, F_0..F_h (paired with p_1..p_{h+1}),
  // active g rows (mu), every e row (eq lambda).
  const Eigen::Index outputs = 1 + n * static_cast<Eigen::Index>(h + 1) +
                               static_cast<Eigen::Index>(act.active.size()) +
                               static_cast<Eigen::Index>((h + 1) * m_e);
  const auto program = [&](const Eigen::VectorXd& z) {
    const Trajectory traj = fh.unpack(z);
    Eigen::VectorXd out(outputs);
    double phi = 0.0;
    for (std::size_t t = 0; t <= h; ++t) phi += pr.criterion(t, traj.states[t], traj.controls[t]);
    out(0) = phi;
    Eigen::Index row = 1;
    for (std::size_t t = 0; t <= h; ++t, row += n) {
      out.segment(row, n) = pr.dynamics(t, traj.states[t], traj.controls[t]) - traj.states[t + 1];
    }
    for (const ActiveMu& a : act.active) {
      out(row++) = pr.controls.inequalities(a.t, traj.controls[a.t])(static_cast<Eigen::Index>(a.k));
    }
    for (std::size_t t = 0; t <= h && m_e > 0; ++t, row += static_cast<Eigen::Index>(m_e)) {
      out.segment(row, static_cast<Eigen::Index>(m_e)) = pr.controls.equalities(t, traj.controls[t]);
    }
    return out;
  };

  Eigen::MatrixXd J(outputs, z0.size());
  for (Eigen::Index j = 0; j < z0.size(); ++j) {
    const double s = options.step * std::max(1.0, std::abs(z0(j)));
    Eigen::VectorXd zp = z0;
    Eigen::VectorXd zm = z0;
    zp(j) += s;
    zm(j) -= s;
    J.col(j) = (program(zp) - program(zm)) / (2.0 * s);
  }
  if (!J.allFinite()) throw EvaluationError("oracle_kkt: non-finite Jacobian entry");

  // Stationarity of lambda0 Phi + sum p_{t+1} F_t + sum mu g + sum lambda e in z.
  const Eigen::MatrixXd K = J.transpose();
  const Eigen::Index cols = outputs;
  const auto p_col = [n](std::size_t t) { return 1 + static_cast<Eigen::Index>(t - 1) * n; };
  const Eigen::Index mu_offset = 1 + n * static_cast<Eigen::Index>(h + 1);

  RowBuilder eqs(cols);
  RowBuilder signs(cols);
  for (Eigen::Index i = 0; i < K.rows(); ++i) eqs.add() = K.row(i);
  for (std::size_t t = 0; t <= h; ++t) {
    for (Eigen::Index a = 0; a < n; ++a) {
      if (act.p_zero[t][static_cast<std::size_t>(a)]) {
        eqs.add()(p_col(t + 1) + a) = 1.0;
      } else if (r.adjoint_nonnegative) {
        signs.add()(p_col(t + 1) + a) = 1.0;
      }
    }
  }
  signs.add()(0) = 1.0;
  for (std::size_t c = 0; c < act.active.size(); ++c) signs.add()(mu_offset + static_cast<Eigen::Index>(c)) = 1.0;

  MultiplierOutcome out;
  out.h = h;
  out.path_used = AssemblyPath::FullStacked;
  double knorm = 0.0;
  for (std::size_t t = 0; t <= h; ++t) {
    if (t >= 1) knorm = std::max(knorm, K.middleRows(fh.state_offset(t), n).norm());
    knorm = std::max(knorm, K.middleRows(fh.control_offset(t), static_cast<Eigen::Index>(pr.d)).norm());
  }
  out.threshold = options.residual_rel * (1.0 + knorm);

  const detail::SphereSolution sol = detail::solve_on_sphere({eqs.matrix(), signs.matrix(), n + 1});
  if (sol.nullity > 1) {
    out.notes.push_back(fmt::format("stationarity system is rank deficient (nullity {})", sol.nullity));
  }
  std::optional<Multipliers> m;
  if (sol.found) {
    Multipliers mm;
    mm.lambda0 = sol.y(0);
    for (std::size_t t = 1; t <= h + 1; ++t) mm.p.emplace_back(sol.y.segment(p_col(t), n).transpose());
    mm.mu.assign(h + 1, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_i)));
    mm.eq.assign(h + 1, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_e)));
    for (std::size_t c = 0; c < act.active.size(); ++c) {
      mm.mu[act.active[c].t](static_cast<Eigen::Index>(act.active[c].k)) = sol.y(mu_offset + static_cast<Eigen::Index>(c));
    }
    const Eigen::Index eq_offset = mu_offset + static_cast<Eigen::Index>(act.active.size());
    for (std::size_t t = 0; t <= h; ++t) {
      for (std::size_t j = 0; j < m_e; ++j) {
        mm.eq[t](static_cast<Eigen::Index>(j)) = sol.y(eq_offset + static_cast<Eigen::Index>(t * m_e + j));
      }
    }
    m = std::move(mm);
  }

  // Residuals from the monolithic stationarity blocks: x_t rows are AE, u_t rows are WM.
  const auto residuals = [&](TruncatedMultipliers& tm) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(cols);
    y(0) = tm.lambda0;
    for (std::size_t t = 1; t <= h + 1; ++t) y.segment(p_col(t), n) = tm.p_at(t).transpose();
    for (std::size_t c = 0; c < act.active.size(); ++c) {
      y(mu_offset + static_cast<Eigen::Index>(c)) = tm.mu[act.active[c].t](static_cast<Eigen::Index>(act.active[c].k));
    }
    const Eigen::Index eq_offset = mu_offset + static_cast<Eigen::Index>(act.active.size());
    for (std::size_t t = 0; t <= h; ++t) {
      for (std::size_t j = 0; j < m_e; ++j) y(eq_offset + static_cast<Eigen::Index>(t * m_e + j)) = tm.eq[t](static_cast<Eigen::Index>(j));
    }
    const Eigen::VectorXd grad = K * y;
    tm.residual_ae.assign(h, 0.0);
    tm.residual_wm.assign(h + 1, 0.0);
    for (std::size_t t = 1; t <= h; ++t) tm.residual_ae[t - 1] = grad.segment(fh.state_offset(t), n).norm();
    for (std::size_t t = 0; t <= h; ++t) {
      tm.residual_wm[t] = grad.segment(fh.control_offset(t), static_cast<Eigen::Index>(pr.d)).norm();
    }
    tm.max_residual_ae = tm.residual_ae.empty() ? 0.0 : *std::max_element(tm.residual_ae.begin(), tm.residual_ae.end());
    tm.max_residual_wm = *std::max_element(tm.residual_wm.begin(), tm.residual_wm.end());
  };
  conclude(out, std::move(m), sol, act, r, variant, residuals);
  return out;
}

std::string to_string(AssemblyPath path) {
  switch (path) {
    case AssemblyPath::Auto:
      return "auto";
    case AssemblyPath::AdjointElimination:
      return "adjoint-elimination";
    case AssemblyPath::FullStacked:
      return "full-stacked";
  }
  return "?";
}

}  // namespace hpmp
