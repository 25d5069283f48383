#include "hpmp/report.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "detail/text.hpp"

namespace hpmp {

namespace {

constexpr const char* kCertificateHeader = "horizon-pmp-certificate";

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string join(const Eigen::Ref<const Eigen::RowVectorXd>& row, char sep) {
  std::string out;
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    if (i > 0) out += sep;
    out += num(row(i));
  }
  return out;
}

std::string locus_text(const std::optional<Locus>& locus) {
  if (!locus) return "";
  return fmt::format(" at t={} component {} ({})", locus->t, locus->index + 1, locus->what);
}

}  // namespace

std::string sweep_csv(const SweepResult& result, const ProblemSpec& problem) {
  const std::size_t W = result.window;
  const std::size_t n = problem.n;
  const std::size_t m_i = problem.controls.inequality_count;
  const std::size_t m_e = problem.controls.equality_count;

  std::string out = "h,lambda0";
  for (std::size_t t = 1; t <= W; ++t) {
    for (std::size_t a = 1; a <= n; ++a) out += fmt::format(",p[{}][{}]", t, a);
  }
  for (std::size_t t = 0; t < W; ++t) {
    for (std::size_t k = 1; k <= m_i; ++k) out += fmt::format(",mu[{}][{}]", t, k);
  }
  for (std::size_t t = 0; t < W; ++t) {
    for (std::size_t j = 1; j <= m_e; ++j) out += fmt::format(",lambda[{}][{}]", t, j);
  }
  out += ",residual_AE,residual_WM\n";

  const std::size_t columns = 1 + W * n + W * m_i + W * m_e + 2;
  for (const MultiplierOutcome& run : result.runs) {
    out += fmt::format("{}", run.h);
    if (!run.multipliers) {
      for (std::size_t c = 0; c < columns; ++c) out += ",nan";
      out += '\n';
      continue;
    }
    const TruncatedMultipliers& m = *run.multipliers;
    out += ',' + num(m.lambda0);
    for (std::size_t t = 1; t <= W; ++t) out += ',' + join(m.p_at(t), ',');
    if (m_i > 0) {
      for (std::size_t t = 0; t < W; ++t) out += ',' + join(m.mu[t].transpose(), ',');
    }
    if (m_e > 0) {
      for (std::size_t t = 0; t < W; ++t) out += ',' + join(m.eq[t].transpose(), ',');
    }
    out += ',' + num(m.max_residual_ae) + ',' + num(m.max_residual_wm) + '\n';
  }
  return out;
}

std::string cauchy_csv(const SweepResult& result) {
  const CauchyProfile& profile = result.cauchy_profile;
  std::string out = "quantity";
  for (std::size_t i = 0; i < profile.pair_max.size(); ++i) {
    out += fmt::format(",d_{}_{}", result.horizons[i], result.horizons[i + 1]);
  }
  out += '\n';
  for (std::size_t q = 0; q < profile.quantities.size(); ++q) {
    out += profile.quantities[q];
    for (double d : profile.diffs[q]) out += ',' + num(d);
    out += '\n';
  }
  out += "max";
  for (double d : profile.pair_max) out += ',' + num(d);
  out += '\n';
  return out;
}

std::string condition_summary(const ConditionReport& report) {
  std::string out = fmt::format("variant {}, conditions inspected for t < {}, tol {:g}\n",
                                to_string(report.variant), report.window, report.tol);
  for (Condition c : kConditions) {
    const ConditionEntry& e = report[c];
    if (!e.applicable) {
      out += fmt::format("  {:<3} n/a\n", to_string(c));
      continue;
    }
    out += fmt::format("  {:<3} {}  worst {:.3e}{}\n", to_string(c), e.pass ? "pass" : "FAIL",
                       e.worst_defect, e.pass ? "" : locus_text(e.locus));
  }
  out += fmt::format("overall: {}\n", report.pass() ? "PASS" : "FAIL");
  for (const std::string& note : report.notes) out += fmt::format("note: {}\n", note);
  return out;
}

std::string sweep_summary(const SweepResult& result) {
  std::string out = fmt::format("sweep under {}, tracked window W = {}\n", to_string(result.variant),
                                result.window);
  for (const MultiplierOutcome& run : result.runs) {
    out += fmt::format("  h={:<4} {:<14} path={:<18} residual {:.3e} (threshold {:.3e}) nullity {}{}\n",
                       run.h, run.certified() ? "certified" : "no-certificate", to_string(run.path_used),
                       run.best_residual, run.threshold, run.nullity, run.abnormal ? " abnormal" : "");
    for (const std::string& note : run.notes) out += fmt::format("         note: {}\n", note);
  }
  if (!result.cauchy_profile.pair_max.empty()) {
    out += "  successive max differences:";
    for (double d : result.cauchy_profile.pair_max) out += fmt::format(" {:.3e}", d);
    out += '\n';
  }
  out += fmt::format("converged: {}\n", result.converged ? "yes" : "no");
  if (!result.reason.empty()) out += fmt::format("reason: {}\n", result.reason);
  if (result.limits) {
    out += fmt::format("limit lambda0 = {:.12g}, p_1 = [{}]\n", result.limits->lambda0,
                       join(result.limits->p.front(), ' '));
  }
  return out;
}

std::string admissibility_summary(const AdmissibilityReport& report) {
  std::string out = fmt::format("feasible: {} (tol {:g})\n", report.feasible ? "yes" : "no", report.tolerance);
  for (const Violation& v : report.violations) {
    out += fmt::format("violation t={} component {} {} magnitude {:.6g}\n", v.t, v.component + 1,
                       to_string(v.kind), v.magnitude);
  }
  out += "t,alpha,slack\n";
  for (std::size_t t = 0; t < report.slack.size(); ++t) {
    for (Eigen::Index a = 0; a < report.slack[t].size(); ++a) {
      out += fmt::format("{},{},{}\n", t, a + 1, num(report.slack[t](a)));
    }
  }
  return out;
}

std::string separation_summary(const FunctionalFamily& family, const SeparationCertificate& cert) {
  std::string out = fmt::format("separation of {} active differential(s) in R^{}\n", family.size(), family.dim());
  if (cert.separated()) {
    out += fmt::format("outcome: Separated (0 is outside the convex hull)\nwitness: {}\n",
                       join(cert.witness.transpose(), ' '));
  } else {
    out += fmt::format("outcome: NotSeparated (0 lies in the convex hull)\nalpha: {}\n",
                       join(cert.alpha.transpose(), ' '));
  }
  out += fmt::format("verified: {}\n", cert.verify(family) ? "yes" : "no");
  return out;
}

std::string span_hull_summary(const FunctionalFamily& equalities, const FunctionalFamily& inequalities,
                              const SpanHullCertificate& cert) {
  std::string out = fmt::format("span of {} equality row(s) against hull of {} active inequality row(s)\n",
                                equalities.size(), inequalities.size());
  if (cert.disjoint()) {
    out += fmt::format("outcome: Disjoint\nwitness: {}\n", join(cert.witness.transpose(), ' '));
  } else {
    out += fmt::format("outcome: Intersecting\ntheta: {}\nzeta: {}\n", join(cert.theta.transpose(), ' '),
                       join(cert.zeta.transpose(), ' '));
  }
  out += fmt::format("verified: {}\n", cert.verify(equalities, inequalities) ? "yes" : "no");
  return out;
}

std::string write_certificate(const Certificate& cert) {
  std::string out = fmt::format("format {} 1\n", kCertificateHeader);
  out += fmt::format("variant {}\n", to_string(cert.variant));
  out += fmt::format("lambda0 {}\n", num(cert.lambda0));
  const auto width = [](const auto& rows) { return rows.empty() ? Eigen::Index{0} : rows.front().size(); };
  out += fmt::format("p {} {}\n", cert.p.size(), width(cert.p));
  for (const auto& p : cert.p) out += join(p, ' ') + '\n';
  if (!cert.mu.empty()) {
    out += fmt::format("mu {} {}\n", cert.mu.size(), width(cert.mu));
    for (const auto& m : cert.mu) out += join(m.transpose(), ' ') + '\n';
  }
  if (!cert.eq_lambda.empty()) {
    out += fmt::format("lambda {} {}\n", cert.eq_lambda.size(), width(cert.eq_lambda));
    for (const auto& l : cert.eq_lambda) out += join(l.transpose(), ' ') + '\n';
  }
  return out;
}

Certificate parse_certificate(const std::string& text) {
  detail::Cursor cur(detail::tokenize(text));
  cur.expect_header(kCertificateHeader);
  Certificate cert;
  bool have_variant = false;
  bool have_lambda0 = false;
  bool have_p = false;
  while (!cur.done()) {
    const detail::Line& line = cur.next("key");
    const std::string& key = line.tokens[0];
    if (key == "variant") {
      if (line.tokens.size() != 2) throw ParseError(line.number, key, "expected one value");
      try {
        cert.variant = parse_variant(line.tokens[1]);
      } catch (const Error& e) {
        throw ParseError(line.number, key, e.what());
      }
      have_variant = true;
    } else if (key == "lambda0") {
      if (line.tokens.size() != 2) throw ParseError(line.number, key, "expected one value");
      cert.lambda0 = detail::parse_number(line.tokens[1], line.number, key);
      have_lambda0 = true;
    } else if (key == "p" || key == "mu" || key == "lambda") {
      const Eigen::MatrixXd block = cur.matrix_block(line, key);
      if (key == "p") {
        cert.p.clear();
        for (Eigen::Index r = 0; r < block.rows(); ++r) cert.p.emplace_back(block.row(r));
        have_p = true;
      } else {
        auto& slot = key == "mu" ? cert.mu : cert.eq_lambda;
        slot.clear();
        for (Eigen::Index r = 0; r < block.rows(); ++r) slot.emplace_back(block.row(r).transpose());
      }
    } else {
      throw ParseError(line.number, key, "unknown key");
    }
  }
  if (!have_variant) throw ParseError(cur.last_line(), "variant", "missing");
  if (!have_lambda0) throw ParseError(cur.last_line(), "lambda0", "missing");
  if (!have_p || cert.p.empty()) throw ParseError(cur.last_line(), "p", "missing or empty");
  return cert;
}

}  // namespace hpmp
