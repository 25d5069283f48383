// Serial reference vs OpenMP kernels.
#include <benchmark/benchmark.h>

#include <cmath>

#include "hpmp/catalog.hpp"
#include "hpmp/certificate.hpp"
#include "hpmp/differentiation.hpp"
#include "hpmp/horizon_lab.hpp"
#include "hpmp/problem_file.hpp"

using namespace hpmp;

namespace {

Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

// Smooth nonlinear problem without analytic derivatives, so every stage
// pays for finite differences.
struct Nonlinear {
  ProblemSpec problem;
  Trajectory candidate;
};

Nonlinear nonlinear(std::size_t n, std::size_t d, std::size_t horizon) {
  Nonlinear out;
  ProblemSpec& p = out.problem;
  p.name = "bench";
  p.n = n;
  p.d = d;
  p.sigma = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(n), 0.1, 1.0);
  p.kind = SystemKind::Equation;
  p.horizon = horizon;
  p.dynamics = [n, d](std::size_t t, const Eigen::VectorXd& x, const Eigen::VectorXd& u) -> Eigen::VectorXd {
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (Eigen::Index a = 0; a < y.size(); ++a) {
      double s = 0.5 * x(a) + 0.1 * std::sin(x((a + 1) % y.size()) + 0.01 * static_cast<double>(t));
      s += 0.2 * std::tanh(u(a % static_cast<Eigen::Index>(d)));
      y(a) = s;
    }
    return y;
  };
  p.criterion = [](std::size_t t, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return -std::pow(0.95, static_cast<double>(t)) * (x.squaredNorm() + std::log1p(u.squaredNorm()));
  };
  Trajectory& c = out.candidate;
  c.states.push_back(p.sigma);
  for (std::size_t t = 0; t < horizon; ++t) {
    c.controls.emplace_back(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), 0.1));
    c.states.push_back(p.dynamics(t, c.states.back(), c.controls.back()));
  }
  return out;
}

void BM_StageDerivatives(benchmark::State& state) {
  static const Nonlinear nl = nonlinear(16, 8, 400);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stage_derivatives_range(nl.problem, nl.candidate, 0, 399, exec_of(state)));
  }
}

void BM_Verify(benchmark::State& state) {
  const CatalogEntry e = catalog_entry("MIX1");
  const ProblemSpec p = to_problem(e.file);
  const SweepResult r = sweep(p, e.candidate, default_horizons(kCatalogHorizon), TheoremVariant::Thm48,
                              SweepOptions{.limit_window = 150});
  VerifyOptions o;
  o.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(verify(p, e.candidate, *r.limits, o));
}

void BM_Sweep(benchmark::State& state) {
  const CatalogEntry e = catalog_entry("CON1");
  const ProblemSpec p = to_problem(e.file);
  SweepOptions o;
  o.exec = exec_of(state);
  const std::vector<std::size_t> hs = parse_horizon_list("10..150:10");
  for (auto _ : state) benchmark::DoNotOptimize(sweep(p, e.candidate, hs, TheoremVariant::Thm48, o));
}

}  // namespace

BENCHMARK(BM_StageDerivatives)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Verify)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Sweep)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
