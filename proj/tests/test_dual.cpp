#include <cmath>
#include <limits>
#include <vector>

#include "bftraj/dual.hpp"
#include "doctest.h"

using namespace bft;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace {

BasisSpec make_spec(int nb, std::vector<int> harmonics, bool dc, double tf, int nt) {
  BasisSpec s;
  s.bernstein_order = nb;
  s.harmonics = std::move(harmonics);
  s.include_dc = dc;
  s.horizon = tf;
  s.node_count = nt;
  return s;
}

// Minimum-effort double integrator transfer from rest at 0 to rest at 1:
// u*(t) = 6 - 12t with costates lambda_1 = -24, lambda_2 = 24t - 12.
NlpProblem double_integrator(int nb, int nt, double cost_scale = 1.0, int m_h = 0) {
  OcpDefinition ocp;
  ocp.m_x = 2;
  ocp.m_u = 1;
  ocp.m_e = 4;
  ocp.m_h = m_h;
  ocp.horizon = 1.0;
  ocp.running_cost = [cost_scale](const Vec&, const Vec& u) {
    return cost_scale * u(0) * u(0);
  };
  ocp.running_grad = [cost_scale](const Vec& x, const Vec& u, Vec& gx, Vec& gu) {
    gx = Vec::Zero(x.size());
    gu = 2.0 * cost_scale * u;
  };
  ocp.dynamics = [](const Vec& x, const Vec& u) {
    Vec f(2);
    f << x(1), u(0);
    return f;
  };
  ocp.dynamics_jac = [](const Vec&, const Vec&, Mat& fx, Mat& fu) {
    fx = Mat::Zero(2, 2);
    fx(0, 1) = 1.0;
    fu = Mat::Zero(2, 1);
    fu(1, 0) = 1.0;
  };
  ocp.boundary = [](const Vec& x0, const Vec& x1) {
    Vec e(4);
    e << x0(0), x0(1), x1(0) - 1.0, x1(1);
    return e;
  };
  if (m_h == 1) {
    // Inactive bound u <= 100 (the optimal control peaks at 6).
    ocp.path = [](const Vec&, const Vec& u, const Vec&) {
      return Vec::Constant(1, u(0) - 100.0);
    };
  }
  DecisionLayout layout;
  layout.state_specs = {make_spec(nb, {}, false, 1.0, nt), make_spec(nb, {}, false, 1.0, nt)};
  layout.control_specs = {make_spec(nb, {}, false, 1.0, nt)};
  return transcribe(ocp, layout, 0.0);
}

SolveResult tight_solve(const NlpProblem& prob) {
  SolverOptions opts;
  opts.optimality_tol = 1e-8;
  return solve(prob, Vec::Zero(prob.num_vars()), opts);
}

}  // namespace

TEST_CASE("covector scaling uses the quadrature weight") {
  NlpProblem prob = double_integrator(4, 99);
  const SolveResult res = tight_solve(prob);
  const DualCertificate cert = extract_covectors(prob, res);
  CHECK(cert.w == doctest::Approx(0.01));
}

TEST_CASE("extraction rejects incomplete solve results") {
  NlpProblem prob = double_integrator(4, 20);
  SolveResult res = tight_solve(prob);
  SolveResult bad = res;
  bad.status = SolveStatus::max_iter;
  CHECK_THROWS_AS(extract_covectors(prob, bad), CertificateError);
  bad = res;
  bad.eq_multipliers = Vec::Zero(3);
  CHECK_THROWS_AS(extract_covectors(prob, bad), CertificateError);
}

TEST_CASE("double integrator costates match the analytic solution") {
  NlpProblem prob = double_integrator(4, 50);
  const SolveResult res = tight_solve(prob);
  REQUIRE(res.status == SolveStatus::optimal);
  const DualCertificate cert = verify_certificate(prob, res);

  for (const double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const Vec lam = cert.lambda_traj.eval(t);
    CHECK(lam(0) == doctest::Approx(-24.0).epsilon(1e-6));
    CHECK(lam(1) == doctest::Approx(24.0 * t - 12.0).scale(24.0).epsilon(1e-6));
  }
  const Vec nu_ref = (Vec(4) << 24.0, 12.0, -24.0, 12.0).finished();
  for (int i = 0; i < 4; ++i)
    CHECK(cert.nu_bar(i) == doctest::Approx(nu_ref(i)).scale(24.0).epsilon(1e-6));

  CHECK(cert.residuals.closure0 <= 1e-6);
  CHECK(cert.residuals.closure1 <= 1e-6);
  CHECK(cert.residuals.adjoint_rms <= 1e-6);
  // Autonomous problem: H = -36 along the optimum.
  CHECK(cert.residuals.hamiltonian_consistency_rms <= 1e-6 * 36.0);
  REQUIRE(cert.residuals.stationarity.size() == 3);
  for (const auto& fam : cert.residuals.stationarity) CHECK(fam.max <= 1e-8);
  CHECK_FALSE(cert.pure_state_constraint);
}

TEST_CASE("zero cost and zero constraints give zero residuals") {
  OcpDefinition ocp;
  ocp.m_x = 1;
  ocp.m_u = 1;
  ocp.horizon = 1.0;
  ocp.dynamics = [](const Vec&, const Vec& u) { return u; };
  DecisionLayout layout;
  layout.state_specs = {make_spec(3, {}, false, 1.0, 10)};
  layout.control_specs = {make_spec(2, {}, false, 1.0, 10)};
  NlpProblem prob = transcribe(ocp, layout, 0.0);

  const SolveResult res = solve(prob, Vec::Zero(prob.num_vars()), SolverOptions{});
  REQUIRE(res.status == SolveStatus::optimal);
  const DualCertificate cert = verify_certificate(prob, res);
  CHECK(cert.residuals.closure0 == doctest::Approx(0.0));
  CHECK(cert.residuals.closure1 == doctest::Approx(0.0));
  CHECK(cert.residuals.adjoint_rms == doctest::Approx(0.0));
  CHECK(cert.residuals.complementarity_max == 0.0);
  CHECK(cert.residuals.mu_negativity_max == 0.0);
}

TEST_CASE("inactive path constraint has a vanishing multiplier trajectory") {
  NlpProblem prob = double_integrator(4, 30, 1.0, 1);
  const SolveResult res = tight_solve(prob);
  REQUIRE(res.status == SolveStatus::optimal);
  const DualCertificate cert = verify_certificate(prob, res);

  double mu_max = 0.0;
  for (const double t : prob.grid())
    mu_max = std::max(mu_max, std::abs(cert.mu_traj.eval(t)(0)));
  CHECK(mu_max <= 1e-5);
  const ComplementarityReport comp = complementarity_check(cert, prob, res.d_star);
  CHECK(comp.delta_d <= 1e-2);
}

TEST_CASE("synthetic dual infeasibility is flagged") {
  NlpProblem prob = double_integrator(4, 30, 1.0, 1);
  const SolveResult res = tight_solve(prob);
  DualCertificate cert = extract_covectors(prob, res);
  const BasisSpec spec = make_spec(4, {}, false, 1.0, 30);
  cert.mu_traj = MixedSeries(spec, Mat::Constant(5, 1, -1.0), Eigen::RowVectorXd::Zero(1),
                             Mat(0, 1), Mat(0, 1));
  const ComplementarityReport comp = complementarity_check(cert, prob, res.d_star);
  CHECK(comp.max_negativity == doctest::Approx(1.0));
  CHECK(comp.delta_d >= 30.0);
}

TEST_CASE("perturbing a coefficient raises its family residual") {
  NlpProblem prob = double_integrator(4, 30);
  const SolveResult res = tight_solve(prob);
  const auto base = stationarity_residuals(prob, res);

  SolveResult bumped = res;
  bumped.d_star(prob.layout().offset(2) + 1) += 0.1;  // a control coefficient
  const auto after = stationarity_residuals(prob, bumped);
  REQUIRE(base.size() == after.size());
  bool found = false;
  for (size_t i = 0; i < base.size(); ++i) {
    if (base[i].name == "u1:bernstein") {
      CHECK(after[i].rms > base[i].rms);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("verification scales linearly with the running cost") {
  NlpProblem one = double_integrator(4, 20, 1.0);
  NlpProblem three = double_integrator(4, 20, 3.0);
  const DualCertificate c1 = verify_certificate(one, tight_solve(one));
  const DualCertificate c3 = verify_certificate(three, tight_solve(three));
  for (const double t : {0.0, 0.5, 1.0}) {
    const Vec l1 = c1.lambda_traj.eval(t), l3 = c3.lambda_traj.eval(t);
    for (int i = 0; i < 2; ++i) CHECK(l3(i) == doctest::Approx(3.0 * l1(i)).epsilon(1e-3));
  }
}

TEST_CASE("free terminal state forces a vanishing terminal costate") {
  // min int (u - 1)^2 with xdot = u and only the initial state pinned:
  // u* = 1 and lambda = 0 throughout.
  OcpDefinition ocp;
  ocp.m_x = 1;
  ocp.m_u = 1;
  ocp.m_e = 1;
  ocp.horizon = 1.0;
  ocp.running_cost = [](const Vec&, const Vec& u) {
    return (u(0) - 1.0) * (u(0) - 1.0);
  };
  ocp.dynamics = [](const Vec&, const Vec& u) { return u; };
  ocp.boundary = [](const Vec& x0, const Vec&) { return x0; };
  DecisionLayout layout;
  layout.state_specs = {make_spec(3, {}, false, 1.0, 20)};
  layout.control_specs = {make_spec(2, {}, false, 1.0, 20)};
  NlpProblem prob = transcribe(ocp, layout, 0.0);

  const SolveResult res = tight_solve(prob);
  REQUIRE(res.status == SolveStatus::optimal);
  const DualCertificate cert = verify_certificate(prob, res);
  CHECK(std::abs(cert.lambda_traj.eval(1.0)(0)) <= 1e-4);
  CHECK(cert.residuals.closure1 <= 1e-4);
}

TEST_CASE("pure state constraints are detected and reported") {
  OcpDefinition ocp;
  ocp.m_x = 2;
  ocp.m_u = 1;
  ocp.m_e = 4;
  ocp.m_h = 1;
  ocp.horizon = 1.0;
  ocp.running_cost = [](const Vec&, const Vec& u) { return u(0) * u(0); };
  ocp.dynamics = [](const Vec& x, const Vec& u) {
    Vec f(2);
    f << x(1), u(0);
    return f;
  };
  ocp.boundary = [](const Vec& x0, const Vec& x1) {
    Vec e(4);
    e << x0(0), x0(1), x1(0) - 1.0, x1(1);
    return e;
  };
  ocp.path = [](const Vec& x, const Vec&, const Vec&) {
    return Vec::Constant(1, x(0) - 10.0);  // never active, no u dependence
  };
  DecisionLayout layout;
  layout.state_specs = {make_spec(4, {}, false, 1.0, 30), make_spec(4, {}, false, 1.0, 30)};
  layout.control_specs = {make_spec(4, {}, false, 1.0, 30)};
  NlpProblem prob = transcribe(ocp, layout, 0.0);

  const SolveResult res = tight_solve(prob);
  REQUIRE(res.status == SolveStatus::optimal);
  const DualCertificate cert = extract_covectors(prob, res);
  CHECK(cert.pure_state_constraint);
  REQUIRE_FALSE(cert.warnings.empty());
}

TEST_CASE("zero-disturbance time augmentation keeps the clock costate constant") {
  // States (x1, x2, tau) with tau_dot = 1 and no explicit time dependence:
  // dH/dt = 0, so the reconstructed clock costate is constant -H.
  OcpDefinition ocp;
  ocp.m_x = 3;
  ocp.m_u = 1;
  ocp.m_e = 5;
  ocp.horizon = 1.0;
  ocp.running_cost = [](const Vec&, const Vec& u) { return u(0) * u(0); };
  ocp.dynamics = [](const Vec& x, const Vec& u) {
    Vec f(3);
    f << x(1), u(0), 1.0;
    return f;
  };
  ocp.boundary = [](const Vec& x0, const Vec& x1) {
    Vec e(5);
    e << x0(0), x0(1), x0(2), x1(0) - 1.0, x1(1);
    return e;
  };
  DecisionLayout layout;
  layout.state_specs = {make_spec(4, {}, false, 1.0, 40), make_spec(4, {}, false, 1.0, 40),
                        make_spec(4, {}, false, 1.0, 40)};
  layout.control_specs = {make_spec(4, {}, false, 1.0, 40)};
  NlpProblem prob = transcribe(ocp, layout, 0.0);

  const SolveResult res = tight_solve(prob);
  REQUIRE(res.status == SolveStatus::optimal);
  const DualCertificate cert = extract_covectors(prob, res);
  // H = -36 along the optimum; the reconstructed clock costate is -H.
  const double rms = hamiltonian_consistency(cert, prob, res.d_star, 2);
  CHECK(rms <= 1e-4 * 36.0);
}

TEST_CASE("dual residuals decay under basis refinement") {
  // Exponential regulator: xdot = -x + u with pinned endpoints. The optimum
  // involves e^t terms outside every polynomial basis, so the adjoint and
  // closure residuals of the reconstructed costate measure the genuine
  // approximation error and must shrink as the order grows.
  OcpDefinition ocp;
  ocp.m_x = 1;
  ocp.m_u = 1;
  ocp.m_e = 2;
  ocp.horizon = 1.0;
  ocp.running_cost = [](const Vec&, const Vec& u) { return u(0) * u(0); };
  ocp.dynamics = [](const Vec& x, const Vec& u) { return Vec::Constant(1, -x(0) + u(0)); };
  ocp.boundary = [](const Vec& x0, const Vec& x1) {
    Vec e(2);
    e << x0(0) - 1.0, x1(0) - 0.5;
    return e;
  };

  double first_sum = 0.0, last_sum = 0.0;
  for (const int nb : {2, 4, 8}) {
    DecisionLayout layout;
    layout.state_specs = {make_spec(nb, {}, false, 1.0, 128)};
    layout.control_specs = {make_spec(nb, {}, false, 1.0, 128)};
    NlpProblem prob = transcribe(ocp, layout, 0.0);
    const SolveResult res = tight_solve(prob);
    REQUIRE(res.status == SolveStatus::optimal);
    const DualCertificate cert = verify_certificate(prob, res);
    const double sum = cert.residuals.adjoint_rms + cert.residuals.closure0 +
                       cert.residuals.closure1;
    CAPTURE(nb);
    if (nb == 2) first_sum = sum;
    last_sum = sum;
  }
  CHECK(last_sum < first_sum / 10.0);
}
