#pragma once

#include <string>

#include "hpmp/certificate.hpp"
#include "hpmp/horizon_lab.hpp"
#include "hpmp/problem_model.hpp"
#include "hpmp/qualification.hpp"

namespace hpmp {

/// One row per horizon: h, lambda0, p[t][alpha] (t <= W), mu[t][k] (t < W),
/// lambda[t][j] (t < W, only with equality rows), residual_AE, residual_WM.
/// Indices in headers are one-based for alpha, k, j. Values use 17
/// significant digits; runs without multipliers print nan.
std::string sweep_csv(const SweepResult& result, const ProblemSpec& problem);

/// quantity, then one column per horizon pair, then a final "max" row.
std::string cauchy_csv(const SweepResult& result);

std::string condition_summary(const ConditionReport& report);
std::string sweep_summary(const SweepResult& result);
std::string admissibility_summary(const AdmissibilityReport& report);
std::string separation_summary(const FunctionalFamily& family, const SeparationCertificate& cert);
std::string span_hull_summary(const FunctionalFamily& equalities, const FunctionalFamily& inequalities,
                              const SpanHullCertificate& cert);

/// Line-oriented certificate file ("format horizon-pmp-certificate 1").
std::string write_certificate(const Certificate& cert);
/// Throws ParseError carrying line and field.
Certificate parse_certificate(const std::string& text);

}  // namespace hpmp
