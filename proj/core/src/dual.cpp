#include "bftraj/dual.hpp"

#include <cmath>

#include "bftraj/lsfit.hpp"

namespace bft {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace {

MixedSeries fit_series(const Mat& samples, const BasisSpec& spec) {
  if (samples.cols() == 0) return MixedSeries::zero(spec, 0);
  return fit(FitProblem{samples, spec, 1e-14}).first;
}

double rms_of(const Vec& v) {
  return v.size() > 0 ? std::sqrt(v.squaredNorm() / static_cast<double>(v.size())) : 0.0;
}

}  // namespace

DualCertificate extract_covectors(const NlpProblem& problem, const SolveResult& result) {
  if (result.status != SolveStatus::optimal)
    throw CertificateError("extract_covectors: solve did not report an optimum");
  if (result.eq_multipliers.size() != problem.num_eq() ||
      result.ineq_multipliers.size() != problem.num_ineq())
    throw CertificateError("extract_covectors: multipliers missing or misaligned");
  if (result.d_star.size() != problem.num_vars())
    throw CertificateError("extract_covectors: solution vector missing");

  const OcpDefinition& ocp = problem.ocp();
  const int nn = problem.num_nodes();
  const double w = problem.quad_weight();
  const BasisSpec& spec = problem.layout().spec(0);

  DualCertificate cert;
  cert.w = w;

  // Inequality multipliers sample the continuous mu directly after the /w
  // scaling; fit them for between-node evaluation.
  Mat muk(nn, ocp.m_h);
  for (int k = 0; k < nn; ++k)
    for (int j = 0; j < ocp.m_h; ++j) muk(k, j) = result.ineq_multipliers(k * ocp.m_h + j) / w;
  cert.mu_traj = fit_series(muk, spec);

  cert.nu_bar = result.eq_multipliers.segment(nn * ocp.m_x, ocp.m_e);

  const NodeTrajectory traj = problem.eval_nodes(result.d_star);

  Vec udep_rate = Vec::Zero(std::max(1, ocp.m_u));
  if (ocp.m_h > 0) {
    // A path constraint with no control dependence anywhere on the grid is
    // a pure state constraint; its costates may jump and the covector
    // mapping theorems do not apply.
    Vec udep = Vec::Zero(ocp.m_h);
    for (int k = 0; k < nn; ++k) {
      Mat hx, hu, hud;
      ocp.eval_path_jac(traj.X.row(k), traj.U.row(k), traj.Ud.row(k), hx, hu, hud);
      udep += hu.cwiseAbs().rowwise().sum() + hud.cwiseAbs().rowwise().sum();
      udep_rate += hud.cwiseAbs().colwise().sum().transpose();
    }
    for (int j = 0; j < ocp.m_h; ++j) {
      if (udep(j) < 1e-10 * nn) {
        cert.pure_state_constraint = true;
        cert.warnings.push_back(
            "path constraint " + std::to_string(j + 1) +
            " has no control dependence (pure state constraint); costates may be "
            "discontinuous and the covector mapping test is not applicable");
      }
    }
  }

  if (ocp.m_x == 0) {
    cert.lambda_traj = MixedSeries::zero(spec, 0);
    return cert;
  }

  // The raw node multipliers of the (redundant) defect blocks are
  // min-norm-like and carry the uniform-weight quadrature bias of the
  // transcription, amplified along poorly determined directions, so they do
  // not sample the continuous costate. Reconstruct the lambda-series
  // coefficients and nu_bar jointly by regulated least squares over the
  // conditions of Problem P_lambda that are linear in (lambda, nu) given the
  // primal solution and mu: the adjoint equation and the control
  // stationarity condition at the nodes (quadrature-weighted) plus the two
  // closure conditions. Controls whose rates enter a path constraint are
  // excluded from the stationarity rows (their continuous condition carries
  // a d/dt(h_udot' mu) term that is not linear-in-lambda data).
  std::vector<int> ctrl_rows;
  for (int j = 0; j < ocp.m_u; ++j)
    if (udep_rate(j) < 1e-10 * nn) ctrl_rows.push_back(j);

  std::vector<const Mat*> bv(static_cast<size_t>(ocp.m_x));
  std::vector<const Mat*> bd(static_cast<size_t>(ocp.m_x));
  std::vector<int> coff(static_cast<size_t>(ocp.m_x) + 1, 0);
  for (int i = 0; i < ocp.m_x; ++i) {
    bv[static_cast<size_t>(i)] = &problem.value_matrix(i);
    bd[static_cast<size_t>(i)] = &problem.deriv_matrix(i);
    coff[static_cast<size_t>(i) + 1] =
        coff[static_cast<size_t>(i)] + static_cast<int>(bv[static_cast<size_t>(i)]->cols());
  }
  const int ncoef = coff[static_cast<size_t>(ocp.m_x)];
  const int nun = ncoef + ocp.m_e;
  const int nrows =
      nn * (ocp.m_x + static_cast<int>(ctrl_rows.size())) + 2 * ocp.m_x;
  Mat a = Mat::Zero(nrows, nun);
  Vec b = Vec::Zero(nrows);
  const double nw = std::sqrt(w);
  int row = 0;
  for (int k = 0; k < nn; ++k) {
    const Vec x = traj.X.row(k), u = traj.U.row(k), ud = traj.Ud.row(k);
    Vec gx = Vec::Zero(ocp.m_x), gu = Vec::Zero(ocp.m_u);
    ocp.eval_running_grad(x, u, gx, gu);
    Mat fx, fu;
    ocp.eval_dynamics_jac(x, u, fx, fu);
    Vec hmx = Vec::Zero(ocp.m_x), hmu = Vec::Zero(ocp.m_u);
    if (ocp.m_h > 0) {
      Mat hx, hu, hud;
      ocp.eval_path_jac(x, u, ud, hx, hu, hud);
      hmx = hx.transpose() * muk.row(k).transpose();
      hmu = hu.transpose() * muk.row(k).transpose();
    }
    for (int r = 0; r < ocp.m_x; ++r) {
      a.block(row, coff[static_cast<size_t>(r)], 1,
              bd[static_cast<size_t>(r)]->cols()) = nw * bd[static_cast<size_t>(r)]->row(k);
      for (int i = 0; i < ocp.m_x; ++i)
        a.block(row, coff[static_cast<size_t>(i)], 1, bv[static_cast<size_t>(i)]->cols()) +=
            nw * fx(i, r) * bv[static_cast<size_t>(i)]->row(k);
      b(row) = -nw * (gx(r) + hmx(r));
      ++row;
    }
    for (const int j : ctrl_rows) {
      for (int i = 0; i < ocp.m_x; ++i)
        a.block(row, coff[static_cast<size_t>(i)], 1, bv[static_cast<size_t>(i)]->cols()) =
            nw * fu(i, j) * bv[static_cast<size_t>(i)]->row(k);
      b(row) = -nw * (gu(j) + hmu(j));
      ++row;
    }
  }
  {
    Vec gx0 = Vec::Zero(ocp.m_x), gx1 = Vec::Zero(ocp.m_x);
    ocp.eval_terminal_grad(traj.X.row(0), traj.X.row(nn - 1), gx0, gx1);
    Mat ex0, ex1;
    if (ocp.m_e > 0) ocp.eval_boundary_jac(traj.X.row(0), traj.X.row(nn - 1), ex0, ex1);
    for (int r = 0; r < ocp.m_x; ++r) {
      a.block(row, coff[static_cast<size_t>(r)], 1, bv[static_cast<size_t>(r)]->cols()) =
          bv[static_cast<size_t>(r)]->row(0);
      if (ocp.m_e > 0) a.block(row, ncoef, 1, ocp.m_e) = ex0.col(r).transpose();
      b(row) = -gx0(r);
      ++row;
    }
    for (int r = 0; r < ocp.m_x; ++r) {
      a.block(row, coff[static_cast<size_t>(r)], 1, bv[static_cast<size_t>(r)]->cols()) =
          bv[static_cast<size_t>(r)]->row(nn - 1);
      if (ocp.m_e > 0) a.block(row, ncoef, 1, ocp.m_e) = -ex1.col(r).transpose();
      b(row) = gx1(r);
      ++row;
    }
  }
  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  const Vec y = svd.solve(b);

  Mat lam(nn, ocp.m_x);
  for (int i = 0; i < ocp.m_x; ++i)
    lam.col(i) = *bv[static_cast<size_t>(i)] *
                 y.segment(coff[static_cast<size_t>(i)],
                           coff[static_cast<size_t>(i) + 1] - coff[static_cast<size_t>(i)]);
  cert.lambda_traj = fit_series(lam, spec);
  if (ocp.m_e > 0) cert.nu_bar = y.tail(ocp.m_e);
  return cert;
}

std::vector<FamilyResidual> stationarity_residuals(const NlpProblem& problem,
                                                   const SolveResult& result) {
  const Vec& d = result.d_star;
  Mat je, jg;
  problem.eq_constraints(d, &je);
  problem.ineq_constraints(d, &jg);
  Vec gobj;
  problem.objective(d, &gobj);
  const Vec gl = gobj + je.transpose() * result.eq_multipliers +
                 jg.transpose() * result.ineq_multipliers;

  const DecisionLayout& layout = problem.layout();
  const int mx = problem.ocp().m_x;
  std::vector<FamilyResidual> out;
  for (int q = 0; q < layout.quantity_count(); ++q) {
    const BasisSpec& spec = layout.spec(q);
    const std::string base =
        (q < mx ? "x" + std::to_string(q + 1) : "u" + std::to_string(q - mx + 1));
    const int off = layout.offset(q);
    const int nh = static_cast<int>(spec.harmonics.size());
    int pos = off;
    auto add = [&](const char* fam, int len) {
      if (len <= 0) return;
      const Vec seg = gl.segment(pos, len);
      out.push_back({base + ":" + fam, rms_of(seg), seg.cwiseAbs().maxCoeff()});
      pos += len;
    };
    add("bernstein", spec.bernstein_order + 1);
    add("dc", spec.include_dc ? 1 : 0);
    add("cos", nh);
    add("sin", nh);
  }
  return out;
}

std::pair<double, double> closure_residuals(const DualCertificate& cert,
                                            const NlpProblem& problem,
                                            const Eigen::VectorXd& d_star) {
  const OcpDefinition& ocp = problem.ocp();
  if (ocp.m_x == 0) return {0.0, 0.0};
  const TrajectoryPoint p0 = eval_trajectory(problem.layout(), d_star, 0.0);
  const TrajectoryPoint p1 = eval_trajectory(problem.layout(), d_star, ocp.horizon);
  Vec gx0, gx1;
  ocp.eval_terminal_grad(p0.x, p1.x, gx0, gx1);
  Vec r0 = cert.lambda_traj.eval(0.0) + gx0;
  Vec r1 = cert.lambda_traj.eval(ocp.horizon) - gx1;
  if (ocp.m_e > 0) {
    Mat ex0, ex1;
    ocp.eval_boundary_jac(p0.x, p1.x, ex0, ex1);
    r0 += ex0.transpose() * cert.nu_bar;
    r1 -= ex1.transpose() * cert.nu_bar;
  }
  return {r0.norm(), r1.norm()};
}

double adjoint_residuals(const DualCertificate& cert, const NlpProblem& problem,
                         const Eigen::VectorXd& d_star) {
  const OcpDefinition& ocp = problem.ocp();
  if (ocp.m_x == 0) return 0.0;
  const NodeTrajectory nt = problem.eval_nodes(d_star);
  const auto& grid = problem.grid();
  double acc = 0.0;
  for (size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    const Vec x = nt.X.row(static_cast<Eigen::Index>(k));
    const Vec u = nt.U.row(static_cast<Eigen::Index>(k));
    const Vec lam = cert.lambda_traj.eval(t);
    Vec gx, gu;
    ocp.eval_running_grad(x, u, gx, gu);
    Mat fx, fu;
    ocp.eval_dynamics_jac(x, u, fx, fu);
    Vec r = cert.lambda_traj.eval_derivative(t) + gx + fx.transpose() * lam;
    if (ocp.m_h > 0) {
      const Vec ud = nt.Ud.row(static_cast<Eigen::Index>(k));
      Mat hx, hu, hud;
      ocp.eval_path_jac(x, u, ud, hx, hu, hud);
      r += hx.transpose() * cert.mu_traj.eval(t);
    }
    acc += r.squaredNorm();
  }
  return std::sqrt(acc / (static_cast<double>(grid.size()) * ocp.m_x));
}

double hamiltonian_consistency(const DualCertificate& cert, const NlpProblem& problem,
                               const Eigen::VectorXd& d_star, int time_state) {
  const OcpDefinition& ocp = problem.ocp();
  if (ocp.m_x == 0) return 0.0;
  if (time_state >= ocp.m_x)
    throw std::invalid_argument("hamiltonian_consistency: time_state out of range");
  const NodeTrajectory nt = problem.eval_nodes(d_star);
  const auto& grid = problem.grid();
  const int nn = static_cast<int>(grid.size());

  Vec ham(nn);       // Hamiltonian, clock contribution excluded
  Vec dhdt(nn);      // explicit time dependence dH/dt through the clock state
  for (int k = 0; k < nn; ++k) {
    const double t = grid[k];
    const Vec x = nt.X.row(k), u = nt.U.row(k), ud = nt.Ud.row(k);
    const Vec lam = cert.lambda_traj.eval(t);
    const Vec f = ocp.dynamics(x, u);
    double h = ocp.running_cost ? ocp.running_cost(x, u) : 0.0;
    for (int i = 0; i < ocp.m_x; ++i)
      if (i != time_state) h += lam(i) * f(i);
    Vec mu;
    Mat hx, hu, hud;
    if (ocp.m_h > 0) {
      mu = cert.mu_traj.eval(t);
      ocp.eval_path_jac(x, u, ud, hx, hu, hud);
      h += mu.dot(ocp.path(x, u, ud));
    }
    ham(k) = h;
    if (time_state >= 0) {
      Mat fx, fu;
      ocp.eval_dynamics_jac(x, u, fx, fu);
      Vec gx, gu;
      ocp.eval_running_grad(x, u, gx, gu);
      double s = gx(time_state);
      for (int i = 0; i < ocp.m_x; ++i)
        if (i != time_state) s += lam(i) * fx(i, time_state);
      if (ocp.m_h > 0) s += mu.dot(hx.col(time_state));
      dhdt(k) = s;
    }
  }

  if (time_state < 0) {
    return rms_of((ham.array() - ham.mean()).matrix());
  }
  // Clock costate integrated backward from -H(t_f): lambda_tau_dot = -dH/dt.
  Vec lam_tau(nn);
  lam_tau(nn - 1) = -ham(nn - 1);
  for (int k = nn - 2; k >= 0; --k) {
    const double dt = grid[static_cast<size_t>(k) + 1] - grid[static_cast<size_t>(k)];
    lam_tau(k) = lam_tau(k + 1) + 0.5 * dt * (dhdt(k) + dhdt(k + 1));
  }
  return rms_of(lam_tau + ham);
}

ComplementarityReport complementarity_check(const DualCertificate& cert,
                                            const NlpProblem& problem,
                                            const Eigen::VectorXd& d_star) {
  ComplementarityReport rep;
  const OcpDefinition& ocp = problem.ocp();
  if (ocp.m_h == 0) return rep;
  const NodeTrajectory nt = problem.eval_nodes(d_star);
  const auto& grid = problem.grid();
  for (size_t k = 0; k < grid.size(); ++k) {
    const Vec mu = cert.mu_traj.eval(grid[k]);
    const Vec h = ocp.path(nt.X.row(static_cast<Eigen::Index>(k)),
                           nt.U.row(static_cast<Eigen::Index>(k)),
                           nt.Ud.row(static_cast<Eigen::Index>(k)));
    rep.max_product = std::max(rep.max_product, std::abs(mu.dot(h)));
    rep.max_negativity = std::max(rep.max_negativity, std::max(0.0, -mu.minCoeff()));
  }
  const int n_t = static_cast<int>(grid.size()) - 1;
  rep.delta_d = n_t * std::max(rep.max_product, rep.max_negativity);
  return rep;
}

DualCertificate verify_certificate(const NlpProblem& problem, const SolveResult& result,
                                   int time_state) {
  DualCertificate cert = extract_covectors(problem, result);
  cert.residuals.stationarity = stationarity_residuals(problem, result);
  const auto closure = closure_residuals(cert, problem, result.d_star);
  cert.residuals.closure0 = closure.first;
  cert.residuals.closure1 = closure.second;
  cert.residuals.adjoint_rms = adjoint_residuals(cert, problem, result.d_star);
  cert.residuals.hamiltonian_consistency_rms =
      hamiltonian_consistency(cert, problem, result.d_star, time_state);
  const ComplementarityReport comp = complementarity_check(cert, problem, result.d_star);
  cert.residuals.complementarity_max = comp.max_product;
  cert.residuals.mu_negativity_max = comp.max_negativity;
  return cert;
}

}  // namespace bft
