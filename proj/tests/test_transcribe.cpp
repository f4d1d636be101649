#include <cmath>
#include <random>

#include "bftraj/lsfit.hpp"
#include "bftraj/ocp.hpp"
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

// Nonlinear two-state, one-control test problem with a rate-dependent path
// constraint, used to validate Jacobian assembly against differences.
NlpProblem toy_problem() {
  OcpDefinition ocp;
  ocp.m_x = 2;
  ocp.m_u = 1;
  ocp.m_e = 2;
  ocp.m_h = 1;
  ocp.horizon = 1.0;
  ocp.running_cost = [](const Vec& x, const Vec& u) {
    return x(0) * x(0) + std::sin(x(1)) + u(0) * u(0);
  };
  ocp.terminal_cost = [](const Vec& x0, const Vec& x1) { return x0(1) * x1(0); };
  ocp.dynamics = [](const Vec& x, const Vec& u) {
    Vec f(2);
    f << x(1), u(0) * std::cos(x(0));
    return f;
  };
  ocp.boundary = [](const Vec& x0, const Vec& x1) {
    Vec e(2);
    e << x0(0), x1(0) - 1.0;
    return e;
  };
  ocp.path = [](const Vec& x, const Vec& u, const Vec& udot) {
    return Vec::Constant(1, u(0) * u(0) + 0.3 * udot(0) + 0.1 * x(1) - 2.0);
  };

  DecisionLayout layout;
  layout.state_specs = {make_spec(3, {1}, false, 1.0, 12), make_spec(3, {1}, false, 1.0, 12)};
  layout.control_specs = {make_spec(2, {2}, true, 1.0, 12)};
  return transcribe(ocp, layout, 0.0);
}

Vec toy_point(int n) {
  Vec d(n);
  for (int i = 0; i < n; ++i) d(i) = std::sin(1.7 * i + 0.3);
  return d;
}

}  // namespace

TEST_CASE("quadrature of a constant running cost is exact") {
  OcpDefinition ocp;
  ocp.m_x = 1;
  ocp.running_cost = [](const Vec&, const Vec&) { return 1.0; };
  ocp.dynamics = [](const Vec&, const Vec&) { return Vec::Zero(1); };
  DecisionLayout layout;
  layout.state_specs = {make_spec(4, {}, false, 1.0, 16)};
  NlpProblem nlp = transcribe(ocp, layout, 0.0);
  CHECK(nlp.objective(Vec::Zero(nlp.num_vars())) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("decision-vector dimension examples") {
  DecisionLayout seven;
  seven.state_specs = {};
  seven.control_specs = {make_spec(4, {5}, false, 1.0, 11)};
  CHECK(seven.total_len() == 7);

  DecisionLayout observer;
  std::vector<int> dense12;
  for (int k = 1; k <= 12; ++k) dense12.push_back(k);
  for (int q = 0; q < 3; ++q)
    observer.state_specs.push_back(make_spec(70, dense12, true, 60.0, 70));
  CHECK(observer.total_len() == 288);
}

TEST_CASE("dimension formula bound holds over random layouts") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    DecisionLayout layout;
    const int mx = 1 + static_cast<int>(rng() % 3), mu = static_cast<int>(rng() % 3);
    const int nb = 1 + static_cast<int>(rng() % 6);
    const int nf = static_cast<int>(rng() % 4);
    std::vector<int> h;
    for (int k = 1; k <= nf; ++k) h.push_back(k);
    const int nt = 2 * nf + 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < mx; ++i)
      layout.state_specs.push_back(make_spec(nb, h, false, 1.0, nt));
    for (int j = 0; j < mu; ++j)
      layout.control_specs.push_back(make_spec(nb, h, true, 1.0, nt));
    layout.free_time = (trial % 2) == 0;
    CHECK_NOTHROW(layout.validate());
    CHECK(layout.total_len() <= (nb + 2 * nf + 2) * (mx + mu) + 1);
    int expect = mx * (nb + 1 + 2 * nf) + mu * (nb + 2 + 2 * nf) + (layout.free_time ? 1 : 0);
    CHECK(layout.total_len() == expect);
    if (layout.free_time) CHECK(layout.free_time_slot().value() == expect - 1);
  }
}

TEST_CASE("eval_trajectory reproduces example-1 values and round-trips") {
  DecisionLayout layout;
  layout.state_specs = {make_spec(1, {1}, false, 1.0, 10)};
  // g = [0, 1], a1 = -sin(0.5), b1 = cos(0.5)
  Vec d(4);
  d << 0.0, 1.0, -std::sin(0.5), std::cos(0.5);
  const TrajectoryPoint p = eval_trajectory(layout, d, 0.25);
  CHECK(p.x(0) == doctest::Approx(1.1275826).epsilon(1e-7));

  const MixedSeries s = layout.extract(d, 0);
  const Vec back = layout.flatten({s});
  CHECK((back - d).cwiseAbs().maxCoeff() == 0.0);
  CHECK(layout.extract(back, 0).eval(0.25)(0) == p.x(0));
}

TEST_CASE("objective gradient matches finite differences") {
  NlpProblem nlp = toy_problem();
  const Vec d = toy_point(nlp.num_vars());
  Vec grad;
  nlp.objective(d, &grad);
  for (int i = 0; i < nlp.num_vars(); ++i) {
    Vec dp = d, dm = d;
    const double h = 1e-6;
    dp(i) += h;
    dm(i) -= h;
    const double fd = (nlp.objective(dp) - nlp.objective(dm)) / (2 * h);
    CHECK(grad(i) == doctest::Approx(fd).epsilon(2e-5));
  }
}

TEST_CASE("constraint jacobians match finite differences") {
  NlpProblem nlp = toy_problem();
  const Vec d = toy_point(nlp.num_vars());
  Mat Je, Ji;
  const Vec c = nlp.eq_constraints(d, &Je);
  const Vec g = nlp.ineq_constraints(d, &Ji);
  CHECK(c.size() == nlp.num_eq());
  CHECK(g.size() == nlp.num_ineq());
  const double h = 1e-6;
  for (int i = 0; i < nlp.num_vars(); ++i) {
    Vec dp = d, dm = d;
    dp(i) += h;
    dm(i) -= h;
    const Vec ce = (nlp.eq_constraints(dp) - nlp.eq_constraints(dm)) / (2 * h);
    const Vec gi = (nlp.ineq_constraints(dp) - nlp.ineq_constraints(dm)) / (2 * h);
    CHECK((Je.col(i) - ce).cwiseAbs().maxCoeff() <= 2e-5);
    CHECK((Ji.col(i) - gi).cwiseAbs().maxCoeff() <= 2e-5);
  }
}

TEST_CASE("feasibility transfer for the analytic double integrator") {
  // min int u^2, x(0)=(0,0) -> x(1)=(1,0): x = 3t^2 - 2t^3, v = 6t - 12 t^2 / 2
  OcpDefinition ocp;
  ocp.m_x = 2;
  ocp.m_u = 1;
  ocp.m_e = 4;
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

  const int nb = 8, nt = 20;
  DecisionLayout layout;
  layout.state_specs = {make_spec(nb, {}, false, 1.0, nt), make_spec(nb, {}, false, 1.0, nt)};
  layout.control_specs = {make_spec(nb, {}, false, 1.0, nt)};
  NlpProblem nlp = transcribe(ocp, layout, 0.0);

  // Least squares reproduces polynomials of degree <= n_B exactly, so the
  // analytic cubic/quadratic/affine trajectory transfers without defect.
  auto fit_exact = [&](const std::function<double(double)>& f) {
    const BasisSpec qspec = layout.state_specs[0];
    Eigen::MatrixXd y(nt + 1, 1);
    const auto ts = qspec.nodes();
    for (int k = 0; k <= nt; ++k) y(k, 0) = f(ts[static_cast<size_t>(k)]);
    return fit(FitProblem{y, qspec, 0.0}).first;
  };
  std::vector<MixedSeries> qs = {
      fit_exact([](double t) { return t * t * (3 - 2 * t); }),
      fit_exact([](double t) { return 6 * t - 6 * t * t; }),
      fit_exact([](double t) { return 6 - 12 * t; })};
  const Vec d = layout.flatten(qs);

  const Vec c = nlp.eq_constraints(d);
  CHECK(c.cwiseAbs().maxCoeff() <= 1e-6);

  // Quadrature objective: closed form 12 + 24/n_t for u = 6 - 12t.
  for (int ntq : {50, 500}) {
    DecisionLayout lq = layout;
    for (auto& s : lq.state_specs) s.node_count = ntq;
    for (auto& s : lq.control_specs) s.node_count = ntq;
    NlpProblem nlpq = transcribe(ocp, lq, 0.0);
    const double J = nlpq.objective(d);
    CHECK(J == doctest::Approx(12.0 + 24.0 / ntq).epsilon(1e-6));
  }}

TEST_CASE("extra node-level inequalities and their jacobian") {
  NlpProblem nlp = toy_problem();
  NodeInequalities extra;
  const int nn = nlp.num_nodes();
  extra.count = 2;
  extra.eval = [nn](const NodeTrajectory& nt, Vec& vals, Mat* JX, Mat* JU, Mat* JXd,
                    Mat* JUd) {
    // mean of x0 minus a cap, and a quadratic in the control derivative
    vals.resize(2);
    vals(0) = nt.X.col(0).mean() - 0.5;
    vals(1) = nt.Ud.col(0).squaredNorm() / nn - 0.2;
    if (JX) {
      *JX = Mat::Zero(2, 2 * nn);
      JX->row(0).segment(0, nn).setConstant(1.0 / nn);
    }
    if (JU) *JU = Mat::Zero(2, nn);
    if (JXd) *JXd = Mat::Zero(2, 2 * nn);
    if (JUd) {
      *JUd = Mat::Zero(2, nn);
      JUd->row(1) = 2.0 / nn * nt.Ud.col(0).transpose();
    }
  };
  nlp.set_extra_inequalities(extra);
  CHECK(nlp.num_ineq() == nn + 2);

  const Vec d = toy_point(nlp.num_vars());
  Mat Ji;
  nlp.ineq_constraints(d, &Ji);
  const double h = 1e-6;
  for (int i = 0; i < nlp.num_vars(); ++i) {
    Vec dp = d, dm = d;
    dp(i) += h;
    dm(i) -= h;
    const Vec gfd = (nlp.ineq_constraints(dp) - nlp.ineq_constraints(dm)) / (2 * h);
    CHECK((Ji.col(i) - gfd).cwiseAbs().maxCoeff() <= 2e-5);
  }
}

TEST_CASE("delta schedule") {
  CHECK(delta_schedule(100, 1.0) == doctest::Approx(0.1));
  CHECK(delta_schedule(4 * 25, 2.0) == doctest::Approx(0.5 * delta_schedule(25, 2.0)));
  CHECK_THROWS_AS(delta_schedule(0, 1.0), std::invalid_argument);
}

TEST_CASE("node objective replaces the quadrature objective") {
  NlpProblem nlp = toy_problem();
  nlp.set_node_objective([](const NodeTrajectory& nt, Mat* gX, Mat* gU) {
    if (gX) {
      *gX = Mat::Zero(nt.X.rows(), nt.X.cols());
      gX->col(0) = 2.0 * nt.X.col(0);
    }
    if (gU) *gU = Mat::Zero(nt.U.rows(), nt.U.cols());
    return nt.X.col(0).squaredNorm();
  });
  const Vec d = toy_point(nlp.num_vars());
  Vec grad;
  const double J = nlp.objective(d, &grad);
  CHECK(J > 0.0);
  const double h = 1e-6;
  for (int i = 0; i < nlp.num_vars(); i += 3) {
    Vec dp = d, dm = d;
    dp(i) += h;
    dm(i) -= h;
    CHECK(grad(i) ==
          doctest::Approx((nlp.objective(dp) - nlp.objective(dm)) / (2 * h)).epsilon(1e-5));
  }
}
