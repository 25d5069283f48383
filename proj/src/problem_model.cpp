#include "hpmp/problem_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hpmp {

namespace {

// Neumaier's compensated sum; keeps the partial sums within a few ulps.
class CompensatedSum {
 public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

void check_shapes(const ProblemSpec& problem, const Trajectory& traj) {
  if (traj.states.size() != traj.controls.size() + 1) {
    throw DimensionError("trajectory must carry one more state than controls (got " +
                         std::to_string(traj.states.size()) + " states, " +
                         std::to_string(traj.controls.size()) + " controls)");
  }
  if (traj.steps() > problem.horizon + 1) {
    throw DimensionError("trajectory has " + std::to_string(traj.steps()) +
                         " controls but the problem materializes stages 0.." +
                         std::to_string(problem.horizon));
  }
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    if (static_cast<std::size_t>(traj.states[t].size()) != problem.n) {
      throw DimensionError("state dimension " + std::to_string(traj.states[t].size()) +
                               " differs from n = " + std::to_string(problem.n),
                           t);
    }
  }
  for (std::size_t t = 0; t < traj.controls.size(); ++t) {
    if (static_cast<std::size_t>(traj.controls[t].size()) != problem.d) {
      throw DimensionError("control dimension " + std::to_string(traj.controls[t].size()) +
                               " differs from d = " + std::to_string(problem.d),
                           t);
    }
  }
}

}  // namespace

void ControlSetSpec::validate() const {
  switch (variant) {
    case ControlVariant::Interior:
      if (inequality_count != 0 || equality_count != 0) {
        throw PreconditionError("interior control set carries constraint rows");
      }
      break;
    case ControlVariant::Inequalities:
      if (inequality_count == 0 || equality_count != 0) {
        throw PreconditionError("inequality control set needs m >= 1 and no equality rows");
      }
      if (!inequalities) throw PreconditionError("inequality rows are not evaluable");
      break;
    case ControlVariant::Mixed:
      if (inequality_count == 0 || equality_count == 0) {
        throw PreconditionError("mixed control set needs m_i >= 1 and m_e >= 1");
      }
      if (!inequalities || !equalities) {
        throw PreconditionError("mixed constraint rows are not evaluable");
      }
      break;
  }
}

void ProblemSpec::validate() const {
  if (n < 1 || d < 1) throw PreconditionError("problem needs n >= 1 and d >= 1");
  if (horizon < 2) throw PreconditionError("working horizon H_max must be at least 2");
  if (static_cast<std::size_t>(sigma.size()) != n) {
    throw DimensionError("initial state has dimension " + std::to_string(sigma.size()) +
                         ", expected " + std::to_string(n));
  }
  if (!dynamics || !criterion) throw PreconditionError("dynamics and criterion must be set");
  if (state_set && (static_cast<std::size_t>(state_set->lower.size()) != n ||
                    static_cast<std::size_t>(state_set->upper.size()) != n)) {
    throw DimensionError("state box bounds must have dimension n");
  }
  controls.validate();
}

AdmissibilityReport check_admissibility(const ProblemSpec& problem, const Trajectory& traj,
                                        double tol) {
  problem.validate();
  check_shapes(problem, traj);

  AdmissibilityReport report;
  report.tolerance = tol;
  const auto flag = [&](std::size_t t, std::size_t i, ViolationKind kind, double magnitude) {
    report.violations.push_back({t, i, kind, magnitude});
  };
  const auto exceeds = [tol](double magnitude) {
    return !std::isfinite(magnitude) || magnitude > tol;
  };

  for (std::size_t i = 0; i < problem.n; ++i) {
    const double gap = std::abs(traj.states[0](i) - problem.sigma(i));
    if (exceeds(gap)) flag(0, i, ViolationKind::InitialState, gap);
  }

  report.slack.reserve(traj.steps());
  for (std::size_t t = 0; t < traj.steps(); ++t) {
    const Eigen::VectorXd& x = traj.states[t];
    const Eigen::VectorXd& u = traj.controls[t];
    const Eigen::VectorXd fx = problem.dynamics(t, x, u);
    if (static_cast<std::size_t>(fx.size()) != problem.n) {
      throw DimensionError("dynamics returned a vector of the wrong size", t);
    }
    Eigen::VectorXd slack = fx - traj.states[t + 1];
    for (std::size_t a = 0; a < problem.n; ++a) {
      const double s = slack(a);
      const double magnitude =
          problem.kind == SystemKind::Equation ? std::abs(s) : std::max(0.0, -s);
      if (exceeds(std::isfinite(s) ? magnitude : s)) {
        flag(t, a, ViolationKind::Dynamics,
             std::isfinite(s) ? magnitude : std::numeric_limits<double>::infinity());
      }
    }
    report.slack.push_back(std::move(slack));

    if (problem.controls.inequality_count > 0) {
      const Eigen::VectorXd g = problem.controls.inequalities(t, u);
      for (std::size_t k = 0; k < problem.controls.inequality_count; ++k) {
        const double magnitude = std::isfinite(g(k)) ? std::max(0.0, -g(k))
                                                     : std::numeric_limits<double>::infinity();
        if (exceeds(magnitude)) flag(t, k, ViolationKind::Inequality, magnitude);
      }
    }
    if (problem.controls.equality_count > 0) {
      const Eigen::VectorXd e = problem.controls.equalities(t, u);
      for (std::size_t j = 0; j < problem.controls.equality_count; ++j) {
        const double magnitude = std::abs(e(j));
        if (exceeds(magnitude)) flag(t, j, ViolationKind::Equality, magnitude);
      }
    }
  }

  if (problem.state_set) {
    for (std::size_t t = 0; t < traj.states.size(); ++t) {
      for (std::size_t a = 0; a < problem.n; ++a) {
        const double x = traj.states[t](a);
        const double magnitude = std::max({0.0, problem.state_set->lower(a) - x,
                                           x - problem.state_set->upper(a)});
        if (exceeds(magnitude)) flag(t, a, ViolationKind::StateSet, magnitude);
      }
    }
  }

  report.feasible = report.violations.empty();
  return report;
}

PartialSums partial_sums(const ProblemSpec& problem, const Trajectory& traj,
                         std::vector<std::size_t> horizons, double cauchy_tol) {
  if (horizons.empty()) throw PreconditionError("partial_sums needs at least one horizon");
  check_shapes(problem, traj);
  std::sort(horizons.begin(), horizons.end());
  horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());
  if (horizons.back() >= traj.steps()) {
    throw PreconditionError("horizon " + std::to_string(horizons.back()) +
                            " exceeds the materialized trajectory (" +
                            std::to_string(traj.steps()) + " controls)");
  }

  PartialSums out;
  out.horizons = horizons;
  out.values.reserve(horizons.size());
  CompensatedSum sum;
  std::size_t t = 0;
  for (std::size_t h : horizons) {
    for (; t <= h; ++t) sum.add(problem.criterion(t, traj.states[t], traj.controls[t]));
    out.values.push_back(sum.value());
  }

  if (out.values.size() >= 2) {
    bool shrinking = true;
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < out.values.size(); ++i) {
      const double gap = std::abs(out.values[i] - out.values[i - 1]);
      shrinking = shrinking && gap <= previous;
      previous = gap;
    }
    out.cauchy = shrinking && previous <= cauchy_tol;
  }
  return out;
}

OvertakingComparison overtaking_compare(const ProblemSpec& problem, const Trajectory& a,
                                        const Trajectory& b, std::size_t h_max, double tol) {
  for (const Trajectory* traj : {&a, &b}) {
    if (traj->steps() < h_max + 1) {
      throw PreconditionError("trajectory not materialized through stage " +
                              std::to_string(h_max));
    }
    AdmissibilityReport report = check_admissibility(problem, *traj, tol);
    if (!report.feasible) {
      throw InadmissibleError(std::string("overtaking_compare: trajectory ") +
                                  (traj == &a ? "a" : "b") + " is inadmissible",
                              std::move(report));
    }
  }

  OvertakingComparison out;
  out.diffs.reserve(h_max + 1);
  CompensatedSum sum_a;
  CompensatedSum sum_b;
  for (std::size_t t = 0; t <= h_max; ++t) {
    sum_a.add(problem.criterion(t, a.states[t], a.controls[t]));
    sum_b.add(problem.criterion(t, b.states[t], b.controls[t]));
    out.diffs.push_back(sum_a.value() - sum_b.value());
  }

  out.tail_window = std::max<std::size_t>(1, (h_max + 3) / 4);
  const auto tail_begin = out.diffs.end() - static_cast<std::ptrdiff_t>(out.tail_window);
  out.liminf_est = *std::min_element(tail_begin, out.diffs.end());
  out.limsup_est = *std::max_element(tail_begin, out.diffs.end());
  out.a_weakly_overtakes_b = out.liminf_est >= -tol;
  out.a_catching_up_b = out.limsup_est >= -tol;
  return out;
}

std::string to_string(SystemKind kind) {
  return kind == SystemKind::Equation ? "equation" : "inequation";
}

std::string to_string(ControlVariant variant) {
  switch (variant) {
    case ControlVariant::Interior:
      return "interior";
    case ControlVariant::Inequalities:
      return "inequalities";
    case ControlVariant::Mixed:
      return "mixed";
  }
  return "?";
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::InitialState:
      return "initial-state";
    case ViolationKind::Dynamics:
      return "dynamics";
    case ViolationKind::Inequality:
      return "inequality";
    case ViolationKind::Equality:
      return "equality";
    case ViolationKind::StateSet:
      return "state-set";
  }
  return "?";
}

}  // namespace hpmp
