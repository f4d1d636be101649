// Microbenchmarks for the hot paths: basis evaluation, regulated fitting,
// and transcription constraint evaluation with Jacobians.

#include <benchmark/benchmark.h>

#include "bftraj/lsfit.hpp"
#include "bftraj/ocp.hpp"

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

bft::BasisSpec make_spec(int nb, int nf, int nt) {
  bft::BasisSpec spec;
  spec.bernstein_order = nb;
  for (int k = 1; k <= nf; ++k) spec.harmonics.push_back(k);
  spec.include_dc = true;
  spec.horizon = 1.0;
  spec.node_count = nt;
  return spec;
}

void BM_BernsteinEvalAll(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  double t = 0.37;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bft::bernstein_eval_all(n, t, 1.0));
  }
}
BENCHMARK(BM_BernsteinEvalAll)->Arg(8)->Arg(40)->Arg(70);

void BM_BasisMatrix(benchmark::State& state) {
  const auto spec = make_spec(static_cast<int>(state.range(0)), 10, 200);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bft::basis_matrix(spec));
  }
}
BENCHMARK(BM_BasisMatrix)->Arg(8)->Arg(40)->Arg(70);

void BM_RegulatedFit(benchmark::State& state) {
  const auto spec = make_spec(static_cast<int>(state.range(0)), 10, 400);
  bft::FitProblem fp;
  fp.spec = spec;
  fp.lambda = 1e-14;
  fp.samples.resize(spec.node_count + 1, 1);
  for (int k = 0; k <= spec.node_count; ++k)
    fp.samples(k, 0) = std::sin(6.28 * k / spec.node_count) + 0.5 * k / spec.node_count;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bft::fit(fp));
  }
}
BENCHMARK(BM_RegulatedFit)->Arg(8)->Arg(22)->Arg(40);

bft::NlpProblem toy_nlp(int nt) {
  bft::OcpDefinition ocp;
  ocp.m_x = 2;
  ocp.m_u = 1;
  ocp.m_e = 4;
  ocp.horizon = 1.0;
  ocp.running_cost = [](const Vec&, const Vec& u) { return u(0) * u(0); };
  ocp.dynamics = [](const Vec& x, const Vec& u) {
    Vec f(2);
    f << x(1), u(0);
    return f;
  };
  ocp.dynamics_jac = [](const Vec&, const Vec&, Mat& fx, Mat& fu) {
    fx = Mat::Zero(2, 2);
    fx(0, 1) = 1;
    fu = Mat::Zero(2, 1);
    fu(1, 0) = 1;
  };
  ocp.boundary = [](const Vec& x0, const Vec& x1) {
    Vec e(4);
    e << x0(0), x0(1), x1(0) - 1.0, x1(1);
    return e;
  };
  bft::BasisSpec spec;
  spec.bernstein_order = 8;
  spec.harmonics = {1, 2, 3};
  spec.horizon = 1.0;
  spec.node_count = nt;
  bft::DecisionLayout layout;
  layout.state_specs = {spec, spec};
  layout.control_specs = {spec};
  return bft::transcribe(ocp, layout, 0.0);
}

void BM_EqConstraintsWithJacobian(benchmark::State& state) {
  const auto nlp = toy_nlp(static_cast<int>(state.range(0)));
  const Vec d = Vec::LinSpaced(nlp.num_vars(), -0.5, 0.5);
  Mat jac;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nlp.eq_constraints(d, &jac));
  }
}
BENCHMARK(BM_EqConstraintsWithJacobian)->Arg(50)->Arg(200)->Arg(800);

}  // namespace

BENCHMARK_MAIN();
