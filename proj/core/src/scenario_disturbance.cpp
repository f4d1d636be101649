#include <cmath>
#include <stdexcept>

#include "bftraj/scenarios.hpp"

namespace bft {

namespace {
constexpr double kPi = 3.14159265358979323846;

BasisSpec disturbance_spec(const DisturbanceRejectionParams& p, bool bernstein_only) {
  BasisSpec spec;
  spec.bernstein_order = p.bernstein_order;
  if (!bernstein_only) spec.harmonics = {p.harmonic};
  spec.include_dc = false;
  spec.horizon = p.horizon;
  spec.node_count = p.node_count;
  spec.validate();
  return spec;
}
}  // namespace

void DisturbanceRejectionParams::validate() const {
  if (horizon <= 0.0 || node_count < 2 || bernstein_order < 1 || harmonic < 1)
    throw std::invalid_argument("disturbance rejection: invalid sizes");
  const double cycles = omega * horizon / (2.0 * kPi);
  if (std::abs(cycles - harmonic) > 1e-9 * harmonic)
    throw std::invalid_argument(
        "disturbance rejection: omega*T/(2*pi) must equal the harmonic index");
}

double disturbance_field(const DisturbanceRejectionParams& p, double t) {
  return p.amplitude * std::sin(p.omega * t);
}

ScenarioProblem build_disturbance_rejection(const DisturbanceRejectionParams& p,
                                            bool bernstein_only) {
  p.validate();
  const BasisSpec spec = disturbance_spec(p, bernstein_only);

  OcpDefinition ocp;
  ocp.m_x = 3;  // x, v, tau
  ocp.m_u = 1;
  ocp.m_e = 6;
  ocp.m_h = 0;
  ocp.horizon = p.horizon;
  const double A = p.amplitude, om = p.omega;
  ocp.running_cost = [](const Eigen::VectorXd&, const Eigen::VectorXd& u) {
    return u(0) * u(0);
  };
  ocp.running_grad = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                        Eigen::VectorXd& gx, Eigen::VectorXd& gu) {
    gx = Eigen::VectorXd::Zero(x.size());
    gu = Eigen::VectorXd::Zero(1);
    gu(0) = 2.0 * u(0);
  };
  ocp.dynamics = [A, om](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd f(3);
    f << x(1), u(0) + A * std::sin(om * x(2)), 1.0;
    return f;
  };
  ocp.dynamics_jac = [A, om](const Eigen::VectorXd& x, const Eigen::VectorXd&,
                             Eigen::MatrixXd& fx, Eigen::MatrixXd& fu) {
    fx = Eigen::MatrixXd::Zero(3, 3);
    fx(0, 1) = 1.0;
    fx(1, 2) = A * om * std::cos(om * x(2));
    fu = Eigen::MatrixXd::Zero(3, 1);
    fu(1, 0) = 1.0;
  };
  const Eigen::Vector3d b0(p.x0, p.v0, 0.0);
  const Eigen::Vector3d b1(p.xf, p.vf, p.horizon);
  ocp.boundary = [b0, b1](const Eigen::VectorXd& x0, const Eigen::VectorXd& x1) {
    Eigen::VectorXd e(6);
    e << x0 - b0, x1 - b1;
    return e;
  };
  ocp.boundary_jac = [](const Eigen::VectorXd&, const Eigen::VectorXd&,
                        Eigen::MatrixXd& ex0, Eigen::MatrixXd& ex1) {
    ex0 = Eigen::MatrixXd::Zero(6, 3);
    ex1 = Eigen::MatrixXd::Zero(6, 3);
    ex0.topRows(3).setIdentity();
    ex1.bottomRows(3).setIdentity();
  };

  DecisionLayout layout;
  layout.state_specs = {spec, spec, spec};
  layout.control_specs = {spec};

  ScenarioProblem out{transcribe(ocp, layout, 0.0), Eigen::VectorXd(), true};

  // Warm start: rest-to-rest smoothstep for x, clock ramp for tau, and the
  // control that would realize that path against the disturbance.
  const std::vector<double> ts = spec.nodes();
  const int nn = static_cast<int>(ts.size());
  const double T = p.horizon, dx = p.xf - p.x0;
  Eigen::VectorXd xs(nn), vs(nn), taus(nn), us(nn), xds(nn), vds(nn), tauds(nn), uds(nn);
  for (int k = 0; k < nn; ++k) {
    const double s = ts[k] / T;
    xs(k) = p.x0 + dx * (3 * s * s - 2 * s * s * s);
    vs(k) = dx * (6 * s - 6 * s * s) / T;
    const double acc = dx * (6 - 12 * s) / (T * T);
    taus(k) = ts[k];
    us(k) = acc - disturbance_field(p, ts[k]);
    xds(k) = vs(k);
    vds(k) = acc;
    tauds(k) = 1.0;
    uds(k) = -dx * 12 / (T * T * T) - A * om * std::cos(om * ts[k]);
  }
  Eigen::VectorXd init(layout.total_len());
  const int nc = spec.coeff_count();
  init.segment(0 * nc, nc) = fit_with_derivatives(spec, ts, xs, xds);
  init.segment(1 * nc, nc) = fit_with_derivatives(spec, ts, vs, vds);
  init.segment(2 * nc, nc) = fit_with_derivatives(spec, ts, taus, tauds);
  init.segment(3 * nc, nc) = fit_with_derivatives(spec, ts, us, uds);
  out.init = std::move(init);
  return out;
}

void propagate_disturbance(const DisturbanceRejectionParams& p, const MixedSeries& u,
                           double t, double& x, double& v) {
  const MixedSeries u1 = u.antiderivative();
  const MixedSeries u2 = u1.antiderivative();
  const double A = p.amplitude, om = p.omega;
  v = p.v0 + u1.eval(t)(0) + A / om * (1.0 - std::cos(om * t));
  x = p.x0 + p.v0 * t + u2.eval(t)(0) + A / om * t - A / (om * om) * std::sin(om * t);
}

ReducedDisturbanceSolution solve_disturbance_reduced(const DisturbanceRejectionParams& p,
                                                     bool bernstein_only) {
  p.validate();
  BasisSpec spec = disturbance_spec(p, bernstein_only);
  const int nc = spec.coeff_count();

  // Terminal velocity/position are linear in the control coefficients:
  // evaluate the exact single and double antiderivatives of each basis
  // column at T.
  Eigen::MatrixXd At(2, nc);
  for (int j = 0; j < nc; ++j) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(nc, 1);
    e(j, 0) = 1.0;
    const MixedSeries phi = MixedSeries::from_flat(spec, e);
    const MixedSeries phi1 = phi.antiderivative();
    At(0, j) = phi1.eval(p.horizon)(0);
    At(1, j) = phi1.antiderivative().eval(p.horizon)(0);
  }
  const double A = p.amplitude, om = p.omega, T = p.horizon;
  Eigen::Vector2d rhs;
  rhs(0) = p.vf - p.v0 - A / om * (1.0 - std::cos(om * T));
  rhs(1) = p.xf - p.x0 - p.v0 * T - A / om * T + A / (om * om) * std::sin(om * T);

  // Gram matrix of the control basis by composite trapezoid on a fine grid
  // (exact closed forms exist but the 2e-12 quadrature error is far below
  // the metrics this mode feeds).
  const int nq = 20000;
  std::vector<double> tq(nq + 1);
  for (int k = 0; k <= nq; ++k) tq[static_cast<size_t>(k)] = k * T / nq;
  const Eigen::MatrixXd Bq = basis_matrix(spec, tq);
  Eigen::VectorXd wq = Eigen::VectorXd::Constant(nq + 1, T / nq);
  wq(0) *= 0.5;
  wq(nq) *= 0.5;
  const Eigen::MatrixXd G = Bq.transpose() * wq.asDiagonal() * Bq;

  // KKT system of min c'Gc subject to At c = rhs.
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nc + 2, nc + 2);
  K.topLeftCorner(nc, nc) = 2.0 * G;
  K.topRightCorner(nc, 2) = At.transpose();
  K.bottomLeftCorner(2, nc) = At;
  Eigen::VectorXd k_rhs = Eigen::VectorXd::Zero(nc + 2);
  k_rhs.tail(2) = rhs;
  const Eigen::VectorXd sol = K.fullPivLu().solve(k_rhs);
  const Eigen::VectorXd c = sol.head(nc);

  ReducedDisturbanceSolution out;
  out.u = MixedSeries::from_flat(spec, c);
  out.variable_count = nc;
  out.objective = c.dot(G * c);
  return out;
}

double disturbance_max_state_error(const DisturbanceRejectionParams& p,
                                   const MixedSeries& u, const MixedSeries* x_series,
                                   const MixedSeries* v_series, int rk4_steps) {
  const double T = p.horizon, h = T / rk4_steps;
  double x = p.x0, v = p.v0, err = 0.0;
  auto acc = [&](double t, double vel) {
    (void)vel;
    return u.eval(t)(0) + disturbance_field(p, t);
  };
  auto record = [&](double t) {
    double xr, vr;
    if (x_series && v_series) {
      xr = x_series->eval(t)(0);
      vr = v_series->eval(t)(0);
    } else {
      propagate_disturbance(p, u, t, xr, vr);
    }
    err = std::max(err, std::max(std::abs(x - xr), std::abs(v - vr)));
  };
  record(0.0);
  for (int k = 0; k < rk4_steps; ++k) {
    const double t = k * h;
    const double k1v = acc(t, v), k1x = v;
    const double k2v = acc(t + h / 2, v + h / 2 * k1v), k2x = v + h / 2 * k1v;
    const double k3v = acc(t + h / 2, v + h / 2 * k2v), k3x = v + h / 2 * k2v;
    const double k4v = acc(t + h, v + h * k3v), k4x = v + h * k3v;
    x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
    v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    record((k + 1) * h);
  }
  return err;
}

Eigen::VectorXd fit_with_derivatives(const BasisSpec& spec, const std::vector<double>& times,
                                     const Eigen::VectorXd& values,
                                     const Eigen::VectorXd& derivs, double beta) {
  const int nn = static_cast<int>(times.size());
  const int nc = spec.coeff_count();
  Eigen::MatrixXd S(2 * nn, nc);
  S.topRows(nn) = basis_matrix(spec, times);
  S.bottomRows(nn) = beta * basis_derivative_matrix(spec, times);
  Eigen::VectorXd b(2 * nn);
  b.head(nn) = values;
  b.tail(nn) = beta * derivs;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  return svd.solve(b);
}

}  // namespace bft
