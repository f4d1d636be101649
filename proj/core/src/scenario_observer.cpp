#include <cmath>
#include <stdexcept>

#include "bftraj/scenarios.hpp"

namespace bft {

namespace {

// Bearing and elevation measurement rows (each 1x2, d/d(x,y)) at vehicle
// position (x, y) looking at the target from the fixed altitude.
void measurement_rows(const ObserverParams& p, double x, double y, Eigen::RowVector2d& ga,
                      Eigen::RowVector2d& gb) {
  const double dx = p.target_x - x, dy = p.target_y - y;
  const double rho2 = dx * dx + dy * dy;
  const double rho = std::sqrt(rho2);
  ga << -dy / rho2, dx / rho2;
  const double f = p.altitude / (rho2 + p.altitude * p.altitude);
  gb << f * dx / rho, f * dy / rho;
}

Eigen::Matrix2d fim_from_nodes(const ObserverParams& p, const Eigen::MatrixXd& X) {
  Eigen::Matrix2d M = Eigen::Matrix2d::Zero();
  for (int k = 0; k < X.rows(); ++k)
    M += observer_fim_increment(p, X(k, 0), X(k, 1));
  return M;
}

}  // namespace

void ObserverParams::validate() const {
  if (speed <= 0 || altitude <= 0 || duration <= 0 || measurement_steps < 2 ||
      sigma <= 0 || no_fly_radius <= 0 || bernstein_order < 1 || fourier_count < 0 ||
      node_count < 2)
    throw std::invalid_argument("observer: invalid parameters");
}

Eigen::Matrix2d observer_fim_increment(const ObserverParams& p, double x, double y) {
  Eigen::RowVector2d ga, gb;
  measurement_rows(p, x, y, ga, gb);
  return (ga.transpose() * ga + gb.transpose() * gb) / (p.sigma * p.sigma);
}

double observer_trace_crlb(const NlpProblem& problem, const Eigen::VectorXd& d,
                           const ObserverParams& p) {
  const NodeTrajectory nt = problem.eval_nodes(d, GridRef::aux);
  const Eigen::Matrix2d M =
      fim_from_nodes(p, nt.X) + p.fim_epsilon * Eigen::Matrix2d::Identity();
  return M.inverse().trace();
}

ScenarioProblem build_observer(const ObserverParams& p) {
  p.validate();
  BasisSpec spec;
  spec.bernstein_order = p.bernstein_order;
  for (int k = 1; k <= p.fourier_count; ++k) spec.harmonics.push_back(k);
  spec.include_dc = p.include_dc;
  spec.horizon = p.duration;
  spec.node_count = p.node_count;
  spec.validate();

  const double V = p.speed;
  OcpDefinition ocp;
  ocp.m_x = 2;  // x, y; the heading psi is the parameterized "control"
  ocp.m_u = 1;
  ocp.m_e = 2;
  ocp.m_h = 0;
  ocp.horizon = p.duration;
  ocp.dynamics = [V](const Eigen::VectorXd&, const Eigen::VectorXd& u) {
    Eigen::VectorXd f(2);
    f << V * std::cos(u(0)), V * std::sin(u(0));
    return f;
  };
  ocp.dynamics_jac = [V](const Eigen::VectorXd&, const Eigen::VectorXd& u,
                         Eigen::MatrixXd& fx, Eigen::MatrixXd& fu) {
    fx = Eigen::MatrixXd::Zero(2, 2);
    fu = Eigen::MatrixXd::Zero(2, 1);
    fu(0, 0) = -V * std::sin(u(0));
    fu(1, 0) = V * std::cos(u(0));
  };
  ocp.boundary = [](const Eigen::VectorXd& x0, const Eigen::VectorXd&) {
    return Eigen::VectorXd(x0);
  };
  ocp.boundary_jac = [](const Eigen::VectorXd&, const Eigen::VectorXd&,
                        Eigen::MatrixXd& ex0, Eigen::MatrixXd& ex1) {
    ex0 = Eigen::Matrix2d::Identity();
    ex1 = Eigen::Matrix2d::Zero();
  };

  DecisionLayout layout;
  layout.state_specs = {spec, spec};
  layout.control_specs = {spec};

  NlpProblem problem = transcribe(ocp, layout, 0.0);

  // Measurement grid: objective and no-fly inequality sample at the sensor
  // rate, denser than the dynamics-constraint grid.
  std::vector<double> meas(static_cast<size_t>(p.measurement_steps) + 1);
  for (int k = 0; k <= p.measurement_steps; ++k)
    meas[static_cast<size_t>(k)] = k * p.duration / p.measurement_steps;
  problem.set_aux_grid(meas);
  const int nm = p.measurement_steps + 1;

  const ObserverParams params = p;
  const double s_obj = p.objective_scale;
  NodeObjective obj = [params, s_obj, nm](const NodeTrajectory& nt, Eigen::MatrixXd* gX,
                                          Eigen::MatrixXd* gU) {
    const Eigen::Matrix2d M = fim_from_nodes(params, nt.X) +
                              params.fim_epsilon * Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d Mi = M.inverse();
    const double val = s_obj * Mi.trace();
    if (gX) {
      // d trace(M^-1)/dq = -trace(Mi dM/dq Mi); the per-node position
      // sensitivity of the measurement rows is taken by central
      // differences (the rows are smooth and cheap).
      const Eigen::Matrix2d W = Mi * Mi;
      *gX = Eigen::MatrixXd::Zero(nm, 2);
      const double h = 1e-5, s2 = params.sigma * params.sigma;
      for (int k = 0; k < nm; ++k) {
        const double x = nt.X(k, 0), y = nt.X(k, 1);
        Eigen::RowVector2d ga, gb, gap, gbp, gam, gbm;
        measurement_rows(params, x, y, ga, gb);
        for (int axis = 0; axis < 2; ++axis) {
          const double hx = axis == 0 ? h : 0.0, hy = axis == 1 ? h : 0.0;
          measurement_rows(params, x + hx, y + hy, gap, gbp);
          measurement_rows(params, x - hx, y - hy, gam, gbm);
          const Eigen::RowVector2d dga = (gap - gam) / (2 * h);
          const Eigen::RowVector2d dgb = (gbp - gbm) / (2 * h);
          const double tsum = 2.0 * (dga * W * ga.transpose() + dgb * W * gb.transpose())(0);
          (*gX)(k, axis) = -s_obj * tsum / s2;
        }
      }
    }
    if (gU) *gU = Eigen::MatrixXd::Zero(nm, 1);
    return val;
  };
  problem.set_node_objective(std::move(obj), GridRef::aux);

  // No-fly disk: R^2 - dist^2 <= 0 at every measurement node, scaled for
  // multiplier balance.
  const double tx = p.target_x, ty = p.target_y, R2 = p.no_fly_radius * p.no_fly_radius;
  NodeInequalities nofly;
  nofly.count = nm;
  nofly.eval = [tx, ty, R2, nm](const NodeTrajectory& nt, Eigen::VectorXd& vals,
                                Eigen::MatrixXd* JX, Eigen::MatrixXd* JU,
                                Eigen::MatrixXd* JXd, Eigen::MatrixXd* JUd) {
    vals.resize(nm);
    if (JX) *JX = Eigen::MatrixXd::Zero(nm, 2 * nm);
    for (int k = 0; k < nm; ++k) {
      const double dx = nt.X(k, 0) - tx, dy = nt.X(k, 1) - ty;
      vals(k) = (R2 - dx * dx - dy * dy) / 100.0;
      if (JX) {
        (*JX)(k, k) = -2.0 * dx / 100.0;
        (*JX)(k, nm + k) = -2.0 * dy / 100.0;
      }
    }
    if (JU) *JU = Eigen::MatrixXd::Zero(nm, nm);
    if (JXd) *JXd = Eigen::MatrixXd::Zero(nm, 2 * nm);
    if (JUd) *JUd = Eigen::MatrixXd::Zero(nm, nm);
  };
  problem.set_extra_inequalities(std::move(nofly), GridRef::aux);

  // Initializer: straight flight along the tangent of a 105 m standoff
  // circle, then a smoothstep blend (4 s window opening 2 s before tangent
  // arrival) into a 101 m clockwise orbit.
  const double r_aim = 105.0, r_orbit = 101.0, blend = 4.0;
  const double dist0 = std::hypot(tx - 0.0, ty - 0.0);
  const double theta = std::asin(r_aim / dist0);
  const double t_arrive = std::sqrt(dist0 * dist0 - r_aim * r_aim) / V;
  const double om = -V / r_orbit;
  auto heading_rate = [&](double t) {
    const double u = (t - (t_arrive - 2.0)) / blend;
    if (u < 0.0) return 0.0;
    if (u < 1.0) return om * (3 * u * u - 2 * u * u * u);
    return om;
  };
  const int nf = 6000;  // fine integration grid; measurement times land on it
  std::vector<double> psi_f(nf + 1), x_f(nf + 1), y_f(nf + 1);
  psi_f[0] = theta;
  x_f[0] = 0.0;
  y_f[0] = 0.0;
  const double hf = p.duration / nf;
  for (int k = 0; k < nf; ++k) {
    const double t0 = k * hf, t1 = (k + 1) * hf;
    psi_f[k + 1] = psi_f[k] + 0.5 * hf * (heading_rate(t0) + heading_rate(t1));
    x_f[k + 1] = x_f[k] + 0.5 * hf * (V * std::cos(psi_f[k]) + V * std::cos(psi_f[k + 1]));
    y_f[k + 1] = y_f[k] + 0.5 * hf * (V * std::sin(psi_f[k]) + V * std::sin(psi_f[k + 1]));
  }
  Eigen::VectorXd xs(nm), ys(nm), ps(nm), xds(nm), yds(nm), pds(nm);
  const int stride = nf / p.measurement_steps;
  for (int k = 0; k < nm; ++k) {
    const int i = k * stride;
    xs(k) = x_f[static_cast<size_t>(i)];
    ys(k) = y_f[static_cast<size_t>(i)];
    ps(k) = psi_f[static_cast<size_t>(i)];
    xds(k) = V * std::cos(ps(k));
    yds(k) = V * std::sin(ps(k));
    pds(k) = heading_rate(meas[static_cast<size_t>(k)]);
  }
  Eigen::VectorXd init(layout.total_len());
  const int nc = spec.coeff_count();
  init.segment(0 * nc, nc) = fit_with_derivatives(spec, meas, xs, xds);
  init.segment(1 * nc, nc) = fit_with_derivatives(spec, meas, ys, yds);
  init.segment(2 * nc, nc) = fit_with_derivatives(spec, meas, ps, pds);

  return ScenarioProblem{std::move(problem), std::move(init), false};
}

}  // namespace bft
