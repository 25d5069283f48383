#include "hpmp/horizon_lab.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <exception>

#include <Eigen/QR>
#include <fmt/format.h>

namespace hpmp {

namespace {

// A run may be negated only when no sign constraint pins its orientation.
void align_sign(MultiplierOutcome& run, const VariantRules& r) {
  if (!run.multipliers) return;
  TruncatedMultipliers& m = *run.multipliers;
  const bool mu_zero = std::all_of(m.mu.begin(), m.mu.end(),
                                   [](const Eigen::VectorXd& v) { return v.isZero(0.0); });
  if (std::abs(m.lambda0) > 1e-12 || r.adjoint_nonnegative || !mu_zero) return;

  double dominant = m.lambda0;
  for (Eigen::Index a = 0; a < m.p[0].size(); ++a) {
    if (std::abs(m.p[0](a)) > std::abs(dominant)) dominant = m.p[0](a);
  }
  if (dominant >= 0.0) return;
  m.lambda0 = -m.lambda0;
  for (auto& p : m.p) p = -p;
  for (auto& e : m.eq) e = -e;
}

struct Tracked {
  std::vector<std::string> names;
  std::vector<double> values;
};

Tracked tracked_quantities(const TruncatedMultipliers& m, std::size_t W) {
  Tracked out;
  out.names.emplace_back("lambda0");
  out.values.push_back(m.lambda0);
  for (std::size_t t = 1; t <= W; ++t) {
    for (Eigen::Index a = 0; a < m.p_at(t).size(); ++a) {
      out.names.push_back(fmt::format("p[{}][{}]", t, a + 1));
      out.values.push_back(m.p_at(t)(a));
    }
  }
  for (std::size_t t = 0; t < W; ++t) {
    for (Eigen::Index k = 0; k < m.mu[t].size(); ++k) {
      out.names.push_back(fmt::format("mu[{}][{}]", t, k + 1));
      out.values.push_back(m.mu[t](k));
    }
  }
  for (std::size_t t = 0; t < W; ++t) {
    for (Eigen::Index j = 0; j < m.eq[t].size(); ++j) {
      out.names.push_back(fmt::format("lambda[{}][{}]", t, j + 1));
      out.values.push_back(m.eq[t](j));
    }
  }
  return out;
}

// WM solved for the constraint multipliers at stage t given p_{t+1}.
void recover_stage(const ProblemSpec& problem, const Trajectory& candidate,
                   const StageDerivatives& s, std::size_t t, double lambda0,
                   const Eigen::RowVectorXd& next, Eigen::VectorXd& mu, Eigen::VectorXd& eq,
                   double activity_tol) {
  const auto m_i = static_cast<Eigen::Index>(problem.controls.inequality_count);
  const auto m_e = static_cast<Eigen::Index>(problem.controls.equality_count);
  mu = Eigen::VectorXd::Zero(m_i);
  eq = Eigen::VectorXd::Zero(m_e);
  std::vector<Eigen::Index> active;
  if (m_i > 0) {
    for (std::size_t k : active_set(problem.controls.inequalities(t, candidate.controls[t]),
                                    activity_tol).indices) {
      active.push_back(static_cast<Eigen::Index>(k));
    }
  }
  const auto rows = m_e + static_cast<Eigen::Index>(active.size());
  if (rows == 0) return;
  Eigen::MatrixXd basis(rows, s.D2f.cols());
  if (m_e > 0) basis.topRows(m_e) = s.De;
  for (std::size_t i = 0; i < active.size(); ++i) basis.row(m_e + static_cast<Eigen::Index>(i)) = s.Dg.row(active[i]);
  const Eigen::VectorXd combo = -(next * s.D2f + lambda0 * s.D2phi).transpose();
  const CoefficientRecovery rec = recover_coefficients(FunctionalFamily(basis), {combo});
  eq = rec.coefficients[0].head(m_e);
  for (std::size_t i = 0; i < active.size(); ++i) mu(active[i]) = rec.coefficients[0](m_e + static_cast<Eigen::Index>(i));
}

}  // namespace

SweepResult sweep(const ProblemSpec& problem, const Trajectory& candidate,
                  const std::vector<std::size_t>& h_list, TheoremVariant variant,
                  const SweepOptions& options) {
  if (h_list.empty()) throw PreconditionError("sweep needs at least one horizon");
  for (std::size_t i = 1; i < h_list.size(); ++i) {
    if (h_list[i] <= h_list[i - 1]) throw PreconditionError("sweep horizons must be strictly increasing");
  }
  const std::size_t h_max = h_list.back();
  if (h_max + 1 > problem.horizon) {
    throw PreconditionError(fmt::format("largest horizon {} needs stage {} but H_max = {}", h_max,
                                        h_max + 1, problem.horizon));
  }
  require_compatible(variant, problem);
  const VariantRules r = rules(variant);

  SweepResult result;
  result.horizons = h_list;
  result.variant = variant;
  result.window = std::max<std::size_t>(1, h_list.front() > 0 ? h_list.front() - 1 : 0);

  const std::vector<StageDerivatives> derivs =
      stage_derivatives_range(problem, candidate, 0, h_max, options.exec);

  const auto count = static_cast<std::ptrdiff_t>(h_list.size());
  result.runs.resize(h_list.size());
  const auto solve_one = [&](std::size_t i) {
    const FiniteHorizonProblem fh = reduce(problem, candidate, h_list[i]);
    result.runs[i] = solve_multipliers(fh, derivs, variant, options.solve);
    align_sign(result.runs[i], r);
  };
  if (options.exec == Execution::Parallel) {
    std::vector<std::exception_ptr> errors(h_list.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        solve_one(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) solve_one(static_cast<std::size_t>(i));
  }

  for (const MultiplierOutcome& run : result.runs) {
    if (!run.certified()) {
      result.failing_h = run.h;
      result.reason = fmt::format("no certificate at h = {}: {}", run.h, run.reason);
      return result;
    }
  }

  const std::size_t W = result.window;
  std::vector<Tracked> tracked;
  for (const MultiplierOutcome& run : result.runs) tracked.push_back(tracked_quantities(*run.multipliers, W));
  CauchyProfile& profile = result.cauchy_profile;
  profile.quantities = tracked.front().names;
  profile.diffs.assign(profile.quantities.size(), {});
  for (std::size_t i = 0; i + 1 < tracked.size(); ++i) {
    double worst = 0.0;
    for (std::size_t q = 0; q < profile.quantities.size(); ++q) {
      const double diff = std::abs(tracked[i].values[q] - tracked[i + 1].values[q]);
      profile.diffs[q].push_back(diff);
      worst = std::max(worst, diff);
    }
    profile.pair_max.push_back(worst);
  }

  if (profile.pair_max.empty()) {
    result.reason = "convergence needs at least two horizons";
    return result;
  }
  const std::size_t tail = std::min<std::size_t>(3, profile.pair_max.size());
  result.converged = std::all_of(profile.pair_max.end() - static_cast<std::ptrdiff_t>(tail),
                                 profile.pair_max.end(),
                                 [&](double d) { return d <= options.cauchy_tol; });
  if (!result.converged) {
    result.reason = fmt::format("successive differences {:.3e} exceed cauchy_tol {:.1e}",
                                profile.pair_max.back(), options.cauchy_tol);
    return result;
  }

  // Limits: last run on the window, continued past it.
  const TruncatedMultipliers& last = *result.runs.back().multipliers;
  const std::size_t T = options.limit_window.value_or(W);
  const std::size_t kept = std::min(W, T);
  std::vector<StageDerivatives> ext = derivs;
  if (T > ext.size()) {
    const auto more = stage_derivatives_range(problem, candidate, ext.size(), T - 1, options.exec);
    ext.insert(ext.end(), more.begin(), more.end());
  }

  Certificate cert;
  cert.variant = variant;
  cert.lambda0 = last.lambda0;
  std::vector<Eigen::RowVectorXd> prefix(last.p.begin(), last.p.begin() + static_cast<std::ptrdiff_t>(kept));
  try {
    cert.p = adjoint_extend(last.lambda0, prefix, ext, T, options.solve.cond_limit);
  } catch (const PreconditionError&) {
    // Singular D1f (monotone-only variants): fall back to the last run itself.
    if (T > last.p.size()) throw;
    cert.p.assign(last.p.begin(), last.p.begin() + static_cast<std::ptrdiff_t>(T));
  }

  const bool has_mu = problem.controls.inequality_count > 0;
  const bool has_eq = problem.controls.equality_count > 0;
  for (std::size_t t = 0; t < T && (has_mu || has_eq); ++t) {
    Eigen::VectorXd mu;
    Eigen::VectorXd eq;
    if (t < kept) {
      mu = last.mu[t];
      eq = last.eq[t];
    } else {
      recover_stage(problem, candidate, ext[t], t, cert.lambda0, cert.p[t], mu, eq,
                    options.solve.activity_tol);
    }
    if (has_mu) cert.mu.push_back(mu);
    if (has_eq) cert.eq_lambda.push_back(eq);
  }
  result.limits = std::move(cert);
  return result;
}

CoefficientRecovery recover_coefficients(const FunctionalFamily& basis,
                                         const std::vector<Eigen::VectorXd>& combos,
                                         double cauchy_tol) {
  basis.validate();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis.rows.transpose());
  qr.setThreshold(1e-10);
  if (qr.rank() < basis.size()) {
    throw PreconditionError(fmt::format("basis rows are linearly dependent (rank {} of {})",
                                        qr.rank(), basis.size()));
  }
  CoefficientRecovery out;
  for (const Eigen::VectorXd& combo : combos) {
    if (combo.size() != basis.dim()) throw DimensionError("combination has the wrong dimension");
    Eigen::VectorXd c = qr.solve(combo);
    out.residuals.push_back((basis.rows.transpose() * c - combo).norm());
    out.coefficients.push_back(std::move(c));
  }

  const auto count = static_cast<std::size_t>(basis.size());
  out.convergent.assign(count, false);
  out.tail_diff.assign(count, 0.0);
  if (out.coefficients.size() < 2) return out;
  const std::size_t pairs = out.coefficients.size() - 1;
  const std::size_t tail = std::min<std::size_t>(3, pairs);
  for (std::size_t k = 0; k < count; ++k) {
    bool ok = true;
    for (std::size_t i = pairs - tail; i < pairs; ++i) {
      const double diff = std::abs(out.coefficients[i + 1](static_cast<Eigen::Index>(k)) -
                                   out.coefficients[i](static_cast<Eigen::Index>(k)));
      ok = ok && diff <= cauchy_tol;
      out.tail_diff[k] = diff;
    }
    out.convergent[k] = ok;
  }
  return out;
}

namespace {

std::size_t horizon_value(std::string_view token, std::string_view whole) {
  std::size_t value = 0;
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (token.empty() || ec != std::errc() || ptr != end) {
    throw PreconditionError(fmt::format("bad horizon '{}' in '{}'", token, whole));
  }
  return value;
}

}  // namespace

std::vector<std::size_t> parse_horizon_list(std::string_view text) {
  std::vector<std::size_t> out;
  if (const auto dots = text.find(".."); dots != std::string_view::npos) {
    const std::string_view rest = text.substr(dots + 2);
    const auto colon = rest.find(':');
    const std::size_t first = horizon_value(text.substr(0, dots), text);
    const std::size_t last = horizon_value(rest.substr(0, colon), text);
    const std::size_t step = colon == std::string_view::npos ? 1 : horizon_value(rest.substr(colon + 1), text);
    if (step == 0) throw PreconditionError(fmt::format("step must be positive in '{}'", text));
    if (last < first) throw PreconditionError(fmt::format("empty range '{}'", text));
    for (std::size_t h = first; h <= last; h += step) out.push_back(h);
  } else {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto comma = text.find(',', start);
      const std::size_t stop = comma == std::string_view::npos ? text.size() : comma;
      out.push_back(horizon_value(text.substr(start, stop - start), text));
      start = stop + 1;
    }
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) throw PreconditionError(fmt::format("horizons in '{}' must increase", text));
  }
  return out;
}

std::vector<std::size_t> default_horizons(std::size_t horizon) {
  std::vector<std::size_t> out;
  for (std::size_t h = 10; h + 1 <= horizon; h *= 2) out.push_back(h);
  if (horizon >= 2 && (out.empty() || out.back() < horizon - 1)) out.push_back(horizon - 1);
  return out;
}

}  // namespace hpmp
