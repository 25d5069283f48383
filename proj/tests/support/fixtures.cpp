#include "fixtures.hpp"

namespace fixture {

Instance catalog(const std::string& name) {
  hpmp::CatalogEntry entry = hpmp::catalog_entry(name);
  return {hpmp::to_problem(entry.file), std::move(entry.candidate)};
}

hpmp::ProblemSpec scalar(hpmp::SystemKind kind, hpmp::StageMap dynamics,
                         hpmp::StageFunction criterion, double sigma, std::size_t horizon) {
  hpmp::ProblemSpec p;
  p.name = "scalar";
  p.n = 1;
  p.d = 1;
  p.sigma = Eigen::VectorXd::Constant(1, sigma);
  p.kind = kind;
  p.dynamics = std::move(dynamics);
  p.criterion = std::move(criterion);
  p.horizon = horizon;
  return p;
}

hpmp::Trajectory rollout(const hpmp::ProblemSpec& problem,
                         const std::vector<Eigen::VectorXd>& controls) {
  hpmp::Trajectory traj;
  traj.states.push_back(problem.sigma);
  for (std::size_t t = 0; t < controls.size(); ++t) {
    traj.states.push_back(problem.dynamics(t, traj.states.back(), controls[t]));
    traj.controls.push_back(controls[t]);
  }
  return traj;
}

Instance staged_bound(std::size_t switch_at) {
  hpmp::CatalogEntry entry = hpmp::catalog_entry("CON1");
  hpmp::ProblemFile& file = entry.file;
  file.name = "CON1-staged";
  file.rule.g0 = Eigen::VectorXd::Ones(1);
  for (std::size_t t = 0; t < switch_at; ++t) file.stages[t].g0 = Eigen::VectorXd::Zero(1);
  const hpmp::RiccatiSolution ric =
      hpmp::riccati_fixed_point(file.rule.A, file.rule.B, file.rule.Q, file.rule.R, file.beta);
  Instance out;
  out.problem = hpmp::to_problem(file);
  out.candidate.states.push_back(file.sigma);
  for (std::size_t t = 0; t < file.horizon; ++t) {
    const Eigen::VectorXd& x = out.candidate.states.back();
    Eigen::VectorXd u = t < switch_at ? Eigen::VectorXd::Zero(1) : Eigen::VectorXd(-ric.K * x);
    out.candidate.states.push_back(file.rule.A * x + file.rule.B * u);
    out.candidate.controls.push_back(std::move(u));
  }
  return out;
}

Instance zero_criterion(std::size_t horizon) {
  Instance out;
  out.problem = scalar(
      hpmp::SystemKind::Equation,
      [](std::size_t, const Eigen::VectorXd& x, const Eigen::VectorXd& u) -> Eigen::VectorXd { return x + u; },
      [](std::size_t, const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; }, 0.0, horizon);
  out.candidate = rollout(out.problem, std::vector<Eigen::VectorXd>(horizon, Eigen::VectorXd::Ones(1)));
  return out;
}

}  // namespace fixture
