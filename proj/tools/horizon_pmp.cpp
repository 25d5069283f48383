// horizon-pmp: command-line front end.
//
// Exit codes: 0 pass, 1 condition failure, 2 input error.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/QR>
#include <fmt/format.h>

#include "hpmp/catalog.hpp"
#include "hpmp/certificate.hpp"
#include "hpmp/differentiation.hpp"
#include "hpmp/horizon_lab.hpp"
#include "hpmp/problem_file.hpp"
#include "hpmp/qualification.hpp"
#include "hpmp/report.hpp"
#include "hpmp/theorem_variant.hpp"

namespace {

using namespace hpmp;

constexpr int kPass = 0;
constexpr int kConditionFailure = 1;
constexpr int kInputError = 2;

struct Inputs {
  std::string problem_path;
  std::string trajectory_path;
};

struct Loaded {
  ProblemSpec problem;
  Trajectory candidate;
};

Loaded load(const Inputs& in) {
  Loaded out;
  try {
    out.problem = to_problem(parse_problem_file(read_text(in.problem_path)));
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.field(), fmt::format("{} ({})", in.problem_path, e.what()));
  }
  try {
    out.candidate = parse_trajectory_file(read_text(in.trajectory_path));
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.field(), fmt::format("{} ({})", in.trajectory_path, e.what()));
  }
  return out;
}

void emit(const std::optional<std::string>& path, const std::string& text) {
  if (path) {
    write_text(*path, text);
  } else {
    std::cout << text;
  }
}

TheoremVariant pick_variant(const std::optional<std::string>& text, const ProblemSpec& problem) {
  return text ? parse_variant(*text) : default_variant(problem);
}

// Candidate admissibility gate shared by the solving subcommands.
bool admissible_or_report(const Loaded& in) {
  const AdmissibilityReport adm = check_admissibility(in.problem, in.candidate);
  if (adm.feasible) return true;
  std::cout << "candidate is inadmissible\n" << admissibility_summary(adm);
  return false;
}

double default_tolerance() {
  const char* env = std::getenv("HORIZON_PMP_TOL");
  if (env == nullptr || *env == '\0') return 1e-6;
  char* end = nullptr;
  const double value = std::strtod(env, &end);
  if (*end != '\0' || !(value > 0.0)) {
    throw PreconditionError(fmt::format("HORIZON_PMP_TOL='{}' is not a positive number", env));
  }
  return value;
}

struct CertifyArgs {
  Inputs in;
  std::optional<std::string> variant;
  std::optional<double> tol;
  std::size_t window = 20;
  std::optional<std::string> horizons;
  std::optional<std::string> report;
  std::optional<std::string> certificate_out;
  std::optional<std::string> load;
  bool serial = false;
};

int run_certify(const CertifyArgs& a) {
  const Loaded in = load(a.in);
  const double tol = a.tol ? *a.tol : default_tolerance();
  const Execution exec = a.serial ? Execution::Serial : Execution::Parallel;
  if (!admissible_or_report(in)) return kConditionFailure;

  std::string text;
  Certificate cert;
  if (a.load) {
    cert = parse_certificate(read_text(*a.load));
    if (a.variant) cert.variant = parse_variant(*a.variant);
    text += fmt::format("certificate loaded from {}\n", *a.load);
  } else {
    const TheoremVariant variant = pick_variant(a.variant, in.problem);
    const std::vector<std::size_t> h_list =
        a.horizons ? parse_horizon_list(*a.horizons) : default_horizons(in.problem.horizon);
    SweepOptions options;
    options.exec = exec;
    options.limit_window = a.window;
    const SweepResult result = sweep(in.problem, in.candidate, h_list, variant, options);
    text += sweep_summary(result);
    if (!result.limits) {
      emit(a.report, text);
      return kConditionFailure;
    }
    cert = *result.limits;
  }
  if (a.certificate_out) write_text(*a.certificate_out, write_certificate(cert));

  VerifyOptions vo;
  vo.tol = tol;
  vo.exec = exec;
  const ConditionReport report = verify(in.problem, in.candidate, cert, vo);
  text += condition_summary(report);
  emit(a.report, text);
  if (a.report) std::cout << condition_summary(report);
  return report.pass() ? kPass : kConditionFailure;
}

struct SweepArgs {
  Inputs in;
  std::string horizons;
  std::optional<std::string> variant;
  std::optional<std::string> csv;
  std::optional<std::string> profile;
  double cauchy_tol = kCauchyTol;
  bool serial = false;
};

int run_sweep(const SweepArgs& a) {
  const Loaded in = load(a.in);
  if (!admissible_or_report(in)) return kConditionFailure;
  SweepOptions options;
  options.cauchy_tol = a.cauchy_tol;
  options.exec = a.serial ? Execution::Serial : Execution::Parallel;
  const SweepResult result = sweep(in.problem, in.candidate, parse_horizon_list(a.horizons),
                                   pick_variant(a.variant, in.problem), options);
  const std::string csv = sweep_csv(result, in.problem);
  const std::string profile = cauchy_csv(result);
  if (a.csv) {
    write_text(*a.csv, csv);
    write_text(a.profile.value_or(*a.csv + ".profile.csv"), profile);
    std::cout << sweep_summary(result);
  } else {
    std::cout << csv;
    if (a.profile) {
      write_text(*a.profile, profile);
    } else {
      std::cout << '\n' << profile;
    }
    std::cerr << sweep_summary(result);
  }
  return result.converged ? kPass : kConditionFailure;
}

struct QualifyArgs {
  Inputs in;
  std::size_t t = 0;
};

int run_qualify(const QualifyArgs& a) {
  const Loaded in = load(a.in);
  if (!admissible_or_report(in)) return kConditionFailure;
  const ProblemSpec& problem = in.problem;
  if (a.t >= in.candidate.steps()) {
    throw PreconditionError(fmt::format("stage {} is beyond the candidate's {} controls", a.t,
                                        in.candidate.steps()));
  }
  const StageDerivatives s = stage_derivatives(problem, in.candidate, a.t);
  std::cout << fmt::format("stage {} of {} ({} controls)\n", a.t, problem.name, to_string(problem.controls.variant));
  if (problem.controls.variant == ControlVariant::Interior) {
    std::cout << "no constraint rows; nothing to qualify\n";
    return kPass;
  }
  const ActiveSet active = active_set(problem.controls.inequalities(a.t, in.candidate.controls[a.t]));
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(active.indices.size()), s.Dg.cols());
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < active.indices.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = s.Dg.row(static_cast<Eigen::Index>(active.indices[i]));
    labels.push_back(fmt::format("g{}", active.indices[i] + 1));
  }
  std::cout << fmt::format("active inequality rows: {}\n", active.indices.size());
  if (problem.controls.variant == ControlVariant::Inequalities) {
    if (active.indices.empty()) {
      std::cout << "outcome: Separated (no active rows)\n";
      return kPass;
    }
    const FunctionalFamily family(rows, labels);
    const SeparationCertificate cert = separation_check(family);
    std::cout << separation_summary(family, cert);
    return cert.separated() ? kPass : kConditionFailure;
  }

  std::vector<std::string> eq_labels;
  for (Eigen::Index j = 0; j < s.De.rows(); ++j) eq_labels.push_back(fmt::format("e{}", j + 1));
  const FunctionalFamily equalities(s.De, eq_labels);
  const Eigen::Index rank = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(s.De.transpose()).rank();
  std::cout << fmt::format("equality rows: {} (rank {})\n", s.De.rows(), rank);
  const bool independent = rank == s.De.rows();
  if (active.indices.empty()) {
    std::cout << "outcome: Disjoint (no active rows)\n";
    return independent ? kPass : kConditionFailure;
  }
  const FunctionalFamily inequalities(rows, labels);
  const SpanHullCertificate cert = span_co_disjoint_check(equalities, inequalities);
  std::cout << span_hull_summary(equalities, inequalities, cert);
  return cert.disjoint() && independent ? kPass : kConditionFailure;
}

struct CheckArgs {
  Inputs in;
  double tol = kFeasibilityTol;
};

int run_check(const CheckArgs& a) {
  const Loaded in = load(a.in);
  const AdmissibilityReport report = check_admissibility(in.problem, in.candidate, a.tol);
  std::cout << admissibility_summary(report);
  return report.feasible ? kPass : kConditionFailure;
}

struct CatalogArgs {
  std::string name;
  std::optional<std::string> out;
  std::optional<std::string> trajectory_out;
};

int run_catalog_list() {
  for (const std::string& name : catalog_names()) {
    std::cout << fmt::format("{:<7} {}\n", name, catalog_entry(name).summary);
  }
  return kPass;
}

int run_catalog_emit(const CatalogArgs& a) {
  const CatalogEntry entry = catalog_entry(a.name);
  emit(a.out, write_problem_file(entry.file));
  if (a.trajectory_out) write_text(*a.trajectory_out, write_trajectory_file(entry.candidate));
  return kPass;
}

void add_inputs(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--problem", in.problem_path, "problem file")->required();
  cmd->add_option("--trajectory", in.trajectory_path, "candidate trajectory file")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pontryagin multiplier certificates for infinite-horizon discrete-time control"};
  app.set_help_flag("--help", "print help");  // -h would clash with --h
  app.require_subcommand(1);

  CertifyArgs certify;
  auto* c = app.add_subcommand("certify", "sweep, build the limit certificate and verify it");
  add_inputs(c, certify.in);
  c->add_option("--variant", certify.variant, "Thm31, Thm32, Thm43, Thm47 or Thm48");
  c->add_option("--tol", certify.tol, "verification tolerance (default 1e-6 or HORIZON_PMP_TOL)");
  c->add_option("--window", certify.window, "certificate window T")->check(CLI::PositiveNumber);
  c->add_option("--h", certify.horizons, "horizons: A..B[:step] or h1,h2,...");
  c->add_option("--report", certify.report, "write the full report here");
  c->add_option("--certificate", certify.certificate_out, "write the certificate here");
  c->add_option("--load", certify.load, "verify this certificate file instead of sweeping");
  c->add_flag("--serial", certify.serial, "run kernels without OpenMP");

  SweepArgs sweep_args;
  auto* s = app.add_subcommand("sweep", "solve truncations and write multipliers as CSV");
  add_inputs(s, sweep_args.in);
  s->add_option("--h", sweep_args.horizons, "horizons: A..B[:step] or h1,h2,...")->required();
  s->add_option("--variant", sweep_args.variant, "theorem variant");
  s->add_option("--csv", sweep_args.csv, "multiplier CSV path (default stdout)");
  s->add_option("--profile", sweep_args.profile, "Cauchy profile CSV path");
  s->add_option("--cauchy-tol", sweep_args.cauchy_tol, "convergence tolerance");
  s->add_flag("--serial", sweep_args.serial, "run kernels without OpenMP");

  QualifyArgs qualify;
  auto* q = app.add_subcommand("qualify", "constraint qualification at one stage");
  add_inputs(q, qualify.in);
  q->add_option("--t", qualify.t, "stage")->required();

  CheckArgs check;
  auto* k = app.add_subcommand("check", "admissibility report");
  add_inputs(k, check.in);
  k->add_option("--tol", check.tol, "feasibility tolerance");

  CatalogArgs catalog;
  auto* cat = app.add_subcommand("catalog", "built-in problems");
  cat->require_subcommand(1);
  auto* list = cat->add_subcommand("list", "enumerate built-ins");
  auto* emit_cmd = cat->add_subcommand("emit", "write the problem file of a built-in");
  emit_cmd->add_option("name", catalog.name, "LQ1, SLACK1, CON1 or MIX1")->required();
  emit_cmd->add_option("--out", catalog.out, "problem file path (default stdout)");
  emit_cmd->add_option("--trajectory-out", catalog.trajectory_out, "also write the candidate trajectory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kInputError;
  }

  try {
    if (*c) return run_certify(certify);
    if (*s) return run_sweep(sweep_args);
    if (*q) return run_qualify(qualify);
    if (*k) return run_check(check);
    if (*list) return run_catalog_list();
    if (*emit_cmd) return run_catalog_emit(catalog);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kInputError;
  } catch (const InadmissibleError& e) {
    std::cerr << "error: " << e.what() << '\n' << admissibility_summary(e.report());
    return kConditionFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
