#include <cmath>
#include <cstdio>
#include <limits>

#include "bftraj/basis.hpp"
#include "bftraj/solver.hpp"
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

// Control-only problem (no states, no dynamics) used for small analytic
// QP-style tests where the exact minimizer and multipliers are known.
NlpProblem control_only_problem(const BasisSpec& uspec) {
  OcpDefinition ocp;
  ocp.m_u = 1;
  ocp.horizon = uspec.horizon;
  DecisionLayout layout;
  layout.control_specs = {uspec};
  return transcribe(ocp, layout, 0.0);
}

// Least-squares node objective sum_k (U_k - y_k)^2 with analytic gradient.
NodeObjective tracking_objective(const Vec& y) {
  return [y](const NodeTrajectory& nt, Mat* gX, Mat* gU) {
    const Vec r = nt.U.col(0) - y;
    if (gX) *gX = Mat::Zero(nt.X.rows(), nt.X.cols());
    if (gU) {
      *gU = Mat::Zero(nt.U.rows(), 1);
      gU->col(0) = 2.0 * r;
    }
    return r.squaredNorm();
  };
}

NlpProblem double_integrator(int nb, int nt) {
  OcpDefinition ocp;
  ocp.m_x = 2;
  ocp.m_u = 1;
  ocp.m_e = 4;
  ocp.horizon = 1.0;
  ocp.running_cost = [](const Vec&, const Vec& u) { return u(0) * u(0); };
  ocp.running_grad = [](const Vec& x, const Vec& u, Vec& gx, Vec& gu) {
    gx = Vec::Zero(x.size());
    gu = 2.0 * u;
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

  DecisionLayout layout;
  layout.state_specs = {make_spec(nb, {}, false, 1.0, nt), make_spec(nb, {}, false, 1.0, nt)};
  layout.control_specs = {make_spec(nb, {}, false, 1.0, nt)};
  return transcribe(ocp, layout, 0.0);
}

}  // namespace

TEST_CASE("solver options are validated") {
  SolverOptions bad;
  bad.max_inner = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = SolverOptions{};
  bad.penalty_growth = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = SolverOptions{};
  bad.constraint_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_NOTHROW(SolverOptions{}.validate());
}

TEST_CASE("unconstrained quadratic recovers the generating coefficients") {
  const BasisSpec spec = make_spec(3, {}, false, 1.0, 10);
  NlpProblem prob = control_only_problem(spec);
  Vec c(4);
  c << 0.3, -0.7, 1.2, 0.4;
  const Vec y = prob.value_matrix(prob.ocp().m_x) * c;
  prob.set_node_objective(tracking_objective(y));

  for (const bool precond : {true, false}) {
    SolverOptions opts;
    opts.precondition = precond;
    opts.optimality_tol = 1e-9;
    const SolveResult res = solve(prob, Vec::Zero(prob.num_vars()), opts);
    CHECK(res.status == SolveStatus::optimal);
    CHECK(res.feasibility == doctest::Approx(0.0));
    CHECK((res.d_star - c).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(res.objective < 1e-10);
    CHECK(res.kkt_norm < 1e-6);
  }
}

TEST_CASE("equality-constrained quadratic reaches the analytic multiplier") {
  // Two nodes at t = 0, 1 with a first-order Bernstein basis make the node
  // values equal to the coefficients; minimizing sum U_k^2 subject to
  // U_0 + U_1 = 1 has solution (1/2, 1/2) with multiplier -1.
  NlpProblem prob = control_only_problem(make_spec(1, {}, false, 1.0, 1));
  prob.set_node_objective(tracking_objective(Vec::Zero(2)));
  NodeEqualities eq;
  eq.count = 1;
  eq.eval = [](const NodeTrajectory& nt, Vec& vals, Mat*, Mat* JU, Mat*, Mat*) {
    vals = Vec::Constant(1, nt.U(0, 0) + nt.U(1, 0) - 1.0);
    if (JU) {
      *JU = Mat::Ones(1, 2);
    }
  };
  prob.set_extra_equalities(eq);
  CHECK(prob.num_eq() == 1);

  const SolveResult res = solve(prob, Vec::Zero(2), SolverOptions{});
  CHECK(res.status == SolveStatus::optimal);
  CHECK(res.feasibility < 1e-8);
  CHECK(res.d_star(0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(res.d_star(1) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(res.objective == doctest::Approx(0.5).epsilon(1e-8));
  REQUIRE(res.eq_multipliers.size() == 1);
  CHECK(res.eq_multipliers(0) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("active inequality multiplier satisfies complementarity") {
  // Minimize (U_0 - 1)^2 + U_1^2 subject to U_0 <= 0.2: the bound is
  // active with multiplier mu = -2 (0.2 - 1) = 1.6.
  NlpProblem prob = control_only_problem(make_spec(1, {}, false, 1.0, 1));
  Vec target(2);
  target << 1.0, 0.0;
  prob.set_node_objective(tracking_objective(target));
  NodeInequalities iq;
  iq.count = 1;
  iq.eval = [](const NodeTrajectory& nt, Vec& vals, Mat*, Mat* JU, Mat*, Mat*) {
    vals = Vec::Constant(1, nt.U(0, 0) - 0.2);
    if (JU) {
      *JU = Mat::Zero(1, 2);
      (*JU)(0, 0) = 1.0;
    }
  };
  prob.set_extra_inequalities(iq);

  const SolveResult res = solve(prob, Vec::Zero(2), SolverOptions{});
  CHECK(res.status == SolveStatus::optimal);
  CHECK(res.d_star(0) == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(std::abs(res.d_star(1)) < 1e-6);
  REQUIRE(res.ineq_multipliers.size() == 1);
  CHECK(res.ineq_multipliers(0) == doctest::Approx(1.6).epsilon(1e-5));
  const double g = res.d_star(0) - 0.2;
  CHECK(std::abs(res.ineq_multipliers(0) * g) < 1e-6);
  CHECK(res.ineq_multipliers.minCoeff() >= 0.0);
}

TEST_CASE("double integrator transfer reproduces the analytic control") {
  const int nt = 50;
  NlpProblem prob = double_integrator(4, nt);
  const SolveResult res = solve(prob, Vec::Zero(prob.num_vars()), SolverOptions{});
  CHECK(res.status == SolveStatus::optimal);
  CHECK(res.feasibility < 1e-8);

  // The discrete quadrature objective of the exact control u = 6 - 12t is
  // 12 + 24/n_t with weight 1/(n_t + 1).
  CHECK(res.objective == doctest::Approx(12.0 + 24.0 / nt).epsilon(1e-6));

  const MixedSeries u = prob.layout().extract(res.d_star, 2);
  double umax_err = 0.0;
  double integral = 0.0;
  const int fine = 2000;
  for (int k = 0; k <= fine; ++k) {
    const double t = static_cast<double>(k) / fine;
    const double uk = u.eval(t)(0);
    umax_err = std::max(umax_err, std::abs(uk - (6.0 - 12.0 * t)));
    integral += uk * uk * ((k == 0 || k == fine) ? 0.5 : 1.0) / fine;
  }
  CHECK(umax_err < 1e-4);
  // The continuous effort integral of the recovered control is 12.
  CHECK(integral == doctest::Approx(12.0).epsilon(1e-3));

  // Multipliers: one block per node, then four boundary conditions.
  CHECK(res.eq_multipliers.size() == 2 * (nt + 1) + 4);
  CHECK(res.eq_multipliers.allFinite());
}

TEST_CASE("repeated solves are bitwise deterministic") {
  NlpProblem prob = double_integrator(4, 20);
  const SolveResult a = solve(prob, Vec::Zero(prob.num_vars()), SolverOptions{});
  const SolveResult b = solve(prob, Vec::Zero(prob.num_vars()), SolverOptions{});
  REQUIRE(a.iteration_log.size() == b.iteration_log.size());
  for (size_t i = 0; i < a.iteration_log.size(); ++i)
    CHECK(a.iteration_log[i] == b.iteration_log[i]);
  REQUIRE(a.d_star.size() == b.d_star.size());
  CHECK((a.d_star.array() == b.d_star.array()).all());
  CHECK(a.objective == b.objective);

  // Log lines carry iteration, objective, |c|, |grad L|, penalty.
  for (const auto& line : a.iteration_log) {
    int it = -1;
    double obj, cn, gn, pen;
    CHECK(std::sscanf(line.c_str(), "%d, %le, %le, %le, %le", &it, &obj, &cn, &gn, &pen) == 5);
    CHECK(it >= 0);
    CHECK(pen >= 10.0);
  }
}

TEST_CASE("warm start fit reproduces representable samples") {
  DecisionLayout layout;
  layout.state_specs = {make_spec(3, {1}, false, 2.0, 40)};
  layout.control_specs = {make_spec(2, {}, true, 2.0, 40)};

  const MixedSeries xs(layout.state_specs[0], Vec::LinSpaced(4, 0.0, 1.5),
                       Eigen::RowVectorXd::Zero(1), Mat::Constant(1, 1, 0.4),
                       Mat::Constant(1, 1, -0.2));
  const MixedSeries us(layout.control_specs[0], Vec::LinSpaced(3, 1.0, -1.0),
                       Eigen::RowVectorXd::Constant(1, 0.7), Mat(0, 1), Mat(0, 1));

  const auto grid = layout.state_specs[0].nodes();
  Mat samples(static_cast<Eigen::Index>(grid.size()), 2);
  for (size_t k = 0; k < grid.size(); ++k) {
    samples(static_cast<Eigen::Index>(k), 0) = xs.eval(grid[k])(0);
    samples(static_cast<Eigen::Index>(k), 1) = us.eval(grid[k])(0);
  }
  const Vec d = warm_start_from_fit(layout, samples, 1e-14);
  // The state basis has independent columns, so its coefficients are
  // recovered exactly; the control basis is redundant (dc plus a full
  // Bernstein block), so compare trajectories there instead.
  const Vec dx = d.head(layout.spec(0).coeff_count());
  CHECK((dx - xs.to_flat().col(0)).cwiseAbs().maxCoeff() < 1e-7);
  const MixedSeries ufit = layout.extract(d, 1);
  double uerr = 0.0;
  for (const double t : grid)
    uerr = std::max(uerr, std::abs(ufit.eval(t)(0) - us.eval(t)(0)));
  CHECK(uerr < 1e-7);

  CHECK_THROWS_AS(warm_start_from_fit(layout, Mat::Zero(3, 3), 1e-14),
                  std::invalid_argument);
}

TEST_CASE("solver rejects malformed starting points") {
  NlpProblem prob = double_integrator(3, 10);
  CHECK_THROWS_AS(solve(prob, Vec::Zero(3), SolverOptions{}), std::invalid_argument);
  Vec nan_init = Vec::Zero(prob.num_vars());
  nan_init(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve(prob, nan_init, SolverOptions{}), std::runtime_error);
}
