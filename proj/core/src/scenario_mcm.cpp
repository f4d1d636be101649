#include <cmath>
#include <stdexcept>

#include "bftraj/scenarios.hpp"

namespace bft {

namespace {
constexpr double kPi = 3.14159265358979323846;

BasisSpec mcm_spec(const McmParams& p) {
  BasisSpec spec;
  spec.bernstein_order = p.bernstein_order;
  for (int k = 1; k <= p.fourier_count; ++k) spec.harmonics.push_back(k);
  spec.include_dc = p.include_dc;
  spec.horizon = p.horizon();
  spec.node_count = p.node_count;
  spec.validate();
  return spec;
}

// Detection-rate matrix gamma(k, j) = lambda0 * exp(-d_kj^2 / (2 sigma^2))
// for trajectory samples against all cell centers.
Eigen::MatrixXd detection_rates(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                const Eigen::MatrixXd& cells, const McmParams& p) {
  const int nn = static_cast<int>(x.size());
  const int m = static_cast<int>(cells.rows());
  const double inv2s2 = 1.0 / (2.0 * p.sensor_sigma * p.sensor_sigma);
  Eigen::MatrixXd g(nn, m);
  for (int k = 0; k < nn; ++k)
    for (int j = 0; j < m; ++j) {
      const double dx = x(k) - cells(j, 0), dy = y(k) - cells(j, 1);
      g(k, j) = p.lambda0 * std::exp(-(dx * dx + dy * dy) * inv2s2);
    }
  return g;
}

// Lawnmower pose plus heading rate (zero on legs, +-v/r on turns).
void lawnmower_state(const McmParams& p, double t, double& x, double& y, double& psi,
                     double& psid) {
  const double v = p.v_nominal, L = p.leg_x1 - p.leg_x0, r = p.spacing / 2.0;
  const double t_leg = L / v, t_turn = kPi * r / v;
  double tt = t;
  for (int i = 0; i < p.legs; ++i) {
    const bool east = (i % 2 == 0);
    const double yl = p.first_leg_y + i * p.spacing;
    if (tt <= t_leg) {
      x = east ? p.leg_x0 + v * tt : p.leg_x1 - v * tt;
      y = yl;
      psi = east ? 0.0 : kPi;
      psid = 0.0;
      return;
    }
    tt -= t_leg;
    if (i == p.legs - 1) break;
    if (tt <= t_turn) {
      const double a = tt * v / r;
      if (east) {
        x = p.leg_x1 + r * std::sin(a);
        psi = a;
        psid = v / r;
      } else {
        x = p.leg_x0 - r * std::sin(a);
        psi = kPi - a;
        psid = -v / r;
      }
      y = yl + r - r * std::cos(a);
      return;
    }
    tt -= t_turn;
  }
  const bool east = ((p.legs - 1) % 2 == 0);
  x = east ? p.leg_x1 : p.leg_x0;
  y = p.first_leg_y + (p.legs - 1) * p.spacing;
  psi = east ? 0.0 : kPi;
  psid = 0.0;
}

// Shared transcription skeleton: dynamics, speed/turn-rate path bounds and
// the start-position boundary; the objective is installed by the caller.
NlpProblem mcm_skeleton(const McmParams& p) {
  const BasisSpec spec = mcm_spec(p);
  OcpDefinition ocp;
  ocp.m_x = 2;  // x, y; controls are (v, psi)
  ocp.m_u = 2;
  ocp.m_e = 2;
  ocp.m_h = 3;
  ocp.horizon = p.horizon();
  ocp.dynamics = [](const Eigen::VectorXd&, const Eigen::VectorXd& u) {
    Eigen::VectorXd f(2);
    f << u(0) * std::cos(u(1)), u(0) * std::sin(u(1));
    return f;
  };
  ocp.dynamics_jac = [](const Eigen::VectorXd&, const Eigen::VectorXd& u,
                        Eigen::MatrixXd& fx, Eigen::MatrixXd& fu) {
    fx = Eigen::MatrixXd::Zero(2, 2);
    fu.resize(2, 2);
    fu << std::cos(u(1)), -u(0) * std::sin(u(1)),  //
        std::sin(u(1)), u(0) * std::cos(u(1));
  };
  const double vmin = p.v_min, vmax = p.v_max, umax2 = p.u_max * p.u_max;
  ocp.path = [vmin, vmax, umax2](const Eigen::VectorXd&, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& udot) {
    Eigen::VectorXd h(3);
    h << u(0) - vmax, vmin - u(0), udot(1) * udot(1) - umax2;
    return h;
  };
  ocp.path_jac = [](const Eigen::VectorXd&, const Eigen::VectorXd&,
                    const Eigen::VectorXd& udot, Eigen::MatrixXd& hx, Eigen::MatrixXd& hu,
                    Eigen::MatrixXd& hud) {
    hx = Eigen::MatrixXd::Zero(3, 2);
    hu = Eigen::MatrixXd::Zero(3, 2);
    hu(0, 0) = 1.0;
    hu(1, 0) = -1.0;
    hud = Eigen::MatrixXd::Zero(3, 2);
    hud(2, 1) = 2.0 * udot(1);
  };
  double xs0, ys0, psi0, psid0;
  lawnmower_state(p, 0.0, xs0, ys0, psi0, psid0);
  const Eigen::Vector2d start(xs0, ys0);
  ocp.boundary = [start](const Eigen::VectorXd& x0, const Eigen::VectorXd&) {
    return Eigen::VectorXd(x0 - start);
  };
  ocp.boundary_jac = [](const Eigen::VectorXd&, const Eigen::VectorXd&,
                        Eigen::MatrixXd& ex0, Eigen::MatrixXd& ex1) {
    ex0 = Eigen::Matrix2d::Identity();
    ex1 = Eigen::Matrix2d::Zero();
  };

  DecisionLayout layout;
  layout.state_specs = {spec, spec};
  layout.control_specs = {spec, spec};
  return transcribe(ocp, layout, 0.0);
}

}  // namespace

double McmParams::horizon() const {
  const double L = leg_x1 - leg_x0, r = spacing / 2.0;
  return (legs * L + (legs - 1) * kPi * r) / v_nominal;
}

Eigen::MatrixXd McmParams::cell_centers() const {
  const double step = field_size / cells_per_side;
  Eigen::MatrixXd cells(cell_count(), 2);
  int idx = 0;
  for (int iy = 0; iy < cells_per_side; ++iy)
    for (int ix = 0; ix < cells_per_side; ++ix)
      cells.row(idx++) << (ix + 0.5) * step, (iy + 0.5) * step;
  return cells;
}

void McmParams::validate() const {
  if (field_size <= 0 || cells_per_side < 1 || v_min <= 0 || v_max < v_min ||
      u_max <= 0 || sensor_sigma <= 0 || lambda0 <= 0 || alpha <= 0 || alpha > 1 ||
      bernstein_order < 1 || node_count < 2 || legs < 1 || spacing <= 0 ||
      leg_x1 <= leg_x0)
    throw std::invalid_argument("mcm: invalid parameters");
}

void mcm_lawnmower(const McmParams& p, double t, double& x, double& y, double& psi) {
  double psid;
  lawnmower_state(p, t, x, y, psi, psid);
}

double coverage_metric(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                       const std::vector<double>& times, const McmParams& p) {
  const Eigen::MatrixXd cells = p.cell_centers();
  const Eigen::MatrixXd g = detection_rates(x, y, cells, p);
  const int nn = static_cast<int>(times.size());
  Eigen::VectorXd wts(nn);
  for (int k = 0; k < nn; ++k) {
    const double prev = k > 0 ? times[static_cast<size_t>(k - 1)] : times[0];
    const double next =
        k < nn - 1 ? times[static_cast<size_t>(k + 1)] : times[static_cast<size_t>(k)];
    wts(k) = 0.5 * (next - prev);
  }
  const Eigen::VectorXd I = g.transpose() * wts;
  const double covered = (1.0 - (-I.array()).exp()).sum() * p.alpha;
  return 100.0 * covered / p.cell_count();
}

Eigen::VectorXd mcm_frozen_weights(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                   const std::vector<double>& times, const McmParams& p) {
  const Eigen::MatrixXd cells = p.cell_centers();
  const Eigen::MatrixXd g = detection_rates(x, y, cells, p);
  // Same flat node-sum weight the transcribed objective uses, so the
  // frozen-weight running cost is stationary exactly where the saturating
  // objective is.
  const double w = p.horizon() / static_cast<double>(times.size());
  const Eigen::VectorXd I = w * g.colwise().sum().transpose();
  return p.alpha * (-I.array()).exp();
}

ScenarioProblem build_mcm(const McmParams& p) {
  p.validate();
  NlpProblem problem = mcm_skeleton(p);
  const BasisSpec spec = mcm_spec(p);
  const int nn = problem.num_nodes();
  const double wq = problem.quad_weight();

  const McmParams params = p;
  const Eigen::MatrixXd cells = p.cell_centers();
  NodeObjective obj = [params, cells, nn, wq](const NodeTrajectory& nt,
                                              Eigen::MatrixXd* gX, Eigen::MatrixXd* gU) {
    const Eigen::VectorXd x = nt.X.col(0), y = nt.X.col(1), v = nt.U.col(0);
    const Eigen::MatrixXd g = detection_rates(x, y, cells, params);
    const int m = static_cast<int>(cells.rows());
    const Eigen::VectorXd I = wq * g.colwise().sum().transpose();
    const double scale = 100.0 / m;
    double val = -scale * params.alpha * (1.0 - (-I.array()).exp()).sum();
    val += wq * params.rho_v * (v.array() - params.v_nominal).square().sum();
    if (gX) {
      // d val/d I_j carried through the Gaussian rate.
      const Eigen::VectorXd cj = -scale * params.alpha * (-I.array()).exp();
      const double inv_s2 = 1.0 / (params.sensor_sigma * params.sensor_sigma);
      *gX = Eigen::MatrixXd::Zero(nn, 2);
      for (int k = 0; k < nn; ++k) {
        double gx = 0.0, gy = 0.0;
        for (int j = 0; j < m; ++j) {
          const double c = cj(j) * wq * g(k, j) * inv_s2;
          gx -= c * (x(k) - cells(j, 0));
          gy -= c * (y(k) - cells(j, 1));
        }
        (*gX)(k, 0) = gx;
        (*gX)(k, 1) = gy;
      }
    }
    if (gU) {
      *gU = Eigen::MatrixXd::Zero(nn, 2);
      gU->col(0) = wq * 2.0 * params.rho_v * (v.array() - params.v_nominal);
    }
    return val;
  };
  problem.set_node_objective(std::move(obj), GridRef::main);

  // Lawnmower initializer on the node grid.
  const std::vector<double> ts = spec.nodes();
  Eigen::VectorXd xs(nn), ys(nn), vs(nn), ps(nn), xds(nn), yds(nn), vds(nn), pds(nn);
  for (int k = 0; k < nn; ++k) {
    double x, y, psi, psid;
    lawnmower_state(p, ts[static_cast<size_t>(k)], x, y, psi, psid);
    xs(k) = x;
    ys(k) = y;
    ps(k) = psi;
    pds(k) = psid;
    vs(k) = p.v_nominal;
    vds(k) = 0.0;
    xds(k) = p.v_nominal * std::cos(psi);
    yds(k) = p.v_nominal * std::sin(psi);
  }
  Eigen::VectorXd init(4 * spec.coeff_count());
  const int nc = spec.coeff_count();
  init.segment(0 * nc, nc) = fit_with_derivatives(spec, ts, xs, xds);
  init.segment(1 * nc, nc) = fit_with_derivatives(spec, ts, ys, yds);
  init.segment(2 * nc, nc) = fit_with_derivatives(spec, ts, vs, vds);
  init.segment(3 * nc, nc) = fit_with_derivatives(spec, ts, ps, pds);

  return ScenarioProblem{std::move(problem), std::move(init), true};
}

NlpProblem mcm_frozen_weight_problem(const McmParams& p, const Eigen::VectorXd& weights) {
  p.validate();
  if (weights.size() != p.cell_count())
    throw std::invalid_argument("mcm frozen weights: wrong cell count");
  NlpProblem problem = mcm_skeleton(p);
  // Rebuild the OCP with the standard integral running cost at frozen cell
  // weights; transcription is otherwise identical.
  OcpDefinition ocp = problem.ocp();
  const McmParams params = p;
  const Eigen::MatrixXd cells = p.cell_centers();
  const Eigen::VectorXd w = weights;
  const double scale = 100.0 / p.cell_count();
  ocp.running_cost = [params, cells, w, scale](const Eigen::VectorXd& x,
                                               const Eigen::VectorXd& u) {
    Eigen::VectorXd px(1), py(1);
    px << x(0);
    py << x(1);
    const Eigen::MatrixXd g = detection_rates(px, py, cells, params);
    const double dv = u(0) - params.v_nominal;
    return -scale * g.row(0).dot(w) + params.rho_v * dv * dv;
  };
  ocp.running_grad = [params, cells, w, scale](const Eigen::VectorXd& x,
                                               const Eigen::VectorXd& u,
                                               Eigen::VectorXd& gx, Eigen::VectorXd& gu) {
    Eigen::VectorXd px(1), py(1);
    px << x(0);
    py << x(1);
    const Eigen::MatrixXd g = detection_rates(px, py, cells, params);
    const double inv_s2 = 1.0 / (params.sensor_sigma * params.sensor_sigma);
    gx = Eigen::VectorXd::Zero(2);
    for (int j = 0; j < cells.rows(); ++j) {
      const double c = -scale * w(j) * g(0, j) * inv_s2;
      gx(0) -= c * (x(0) - cells(j, 0));
      gx(1) -= c * (x(1) - cells(j, 1));
    }
    gu = Eigen::VectorXd::Zero(2);
    gu(0) = 2.0 * params.rho_v * (u(0) - params.v_nominal);
  };
  return transcribe(ocp, problem.layout(), 0.0);
}

}  // namespace bft
