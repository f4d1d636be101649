#include "bftraj/solver.hpp"

#include <cmath>
#include <cstdio>

namespace bft {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

void SolverOptions::validate() const {
  if (max_outer < 1 || max_inner < 1)
    throw std::invalid_argument("SolverOptions: iteration limits must be positive");
  if (constraint_tol <= 0 || optimality_tol <= 0 || fd_step <= 0)
    throw std::invalid_argument("SolverOptions: tolerances must be positive");
  if (penalty_init <= 0 || penalty_growth <= 1.0 || penalty_max < penalty_init)
    throw std::invalid_argument("SolverOptions: invalid penalty schedule");
}

namespace {

// Per-quantity change of variables d_q = R^-1 z_q, installed by replacing
// the problem's node matrices with the orthonormal Q factor of the stacked
// [B; s*Bd] matrix.
struct Preconditioner {
  std::vector<Mat> stacked;   // original [B; s*Bd] per quantity
  std::vector<Mat> r_factor;  // upper-triangular R per quantity
  std::vector<Mat> q_factor;  // thin Q per quantity
};

Preconditioner apply_preconditioner(const NlpProblem& original, NlpProblem& work) {
  Preconditioner pc;
  const auto& layout = original.layout();
  for (int q = 0; q < layout.quantity_count(); ++q) {
    const Mat& bv = original.value_matrix(q);
    const Mat& bd = original.deriv_matrix(q);
    const BasisSpec& spec = layout.spec(q);
    const double s = spec.horizon / (2.0 * M_PI * std::max(1, spec.max_harmonic()));
    const auto nn = bv.rows();
    const auto m = bv.cols();
    Mat a(2 * nn, m);
    a.topRows(nn) = bv;
    a.bottomRows(nn) = s * bd;
    Eigen::HouseholderQR<Mat> qr(a);
    const Mat thin_q = qr.householderQ() * Mat::Identity(2 * nn, m);
    const Mat r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    work.substitute_basis(q, thin_q.topRows(nn), thin_q.bottomRows(nn) / s);
    if (original.has_aux_grid()) {
      // Baux R^-1 via a triangular solve (never form R^-1 explicitly).
      const Mat& av = original.value_matrix(q, GridRef::aux);
      const Mat& ad = original.deriv_matrix(q, GridRef::aux);
      const Mat avq =
          r.transpose().triangularView<Eigen::Lower>().solve(av.transpose()).transpose();
      const Mat adq =
          r.transpose().triangularView<Eigen::Lower>().solve(ad.transpose()).transpose();
      work.substitute_basis(q, avq, adq, GridRef::aux);
    }
    pc.stacked.push_back(std::move(a));
    pc.r_factor.push_back(r);
    pc.q_factor.push_back(thin_q);
  }
  return pc;
}

Vec to_working(const Preconditioner& pc, const DecisionLayout& layout, const Vec& d) {
  Vec z = d;
  for (int q = 0; q < layout.quantity_count(); ++q) {
    auto seg = z.segment(layout.offset(q), layout.spec(q).coeff_count());
    seg = pc.r_factor[static_cast<size_t>(q)] * seg;
  }
  return z;
}

// Recover coefficients from the converged working variables: project the
// node value/derivative trajectory back onto the original stacked basis by
// truncated-SVD least squares (min-norm where the basis is redundant).
Vec from_working(const Preconditioner& pc, const DecisionLayout& layout, const Vec& z) {
  Vec d = z;
  for (int q = 0; q < layout.quantity_count(); ++q) {
    auto seg = d.segment(layout.offset(q), layout.spec(q).coeff_count());
    const Vec target = pc.q_factor[static_cast<size_t>(q)] * seg;
    Eigen::BDCSVD<Mat> svd(pc.stacked[static_cast<size_t>(q)],
                           Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-12);
    seg = svd.solve(target);
  }
  return d;
}

std::string log_line(int iter, double obj, double cnorm, double gnorm, double penalty) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d, %.9e, %.3e, %.3e, %.1e", iter, obj, cnorm, gnorm,
                penalty);
  return buf;
}

}  // namespace

SolveResult solve(const NlpProblem& problem, const Eigen::VectorXd& init,
                  const SolverOptions& opts) {
  opts.validate();
  if (init.size() != problem.num_vars())
    throw std::invalid_argument("solve: init length does not match layout");

  NlpProblem work = problem;
  Preconditioner pc;
  const bool precond = opts.precondition;
  Vec z = init;
  if (precond) {
    pc = apply_preconditioner(problem, work);
    z = to_working(pc, problem.layout(), init);
  }

  {
    const double f0 = work.objective(z);
    const Vec c0 = work.eq_constraints(z);
    const Vec g0 = work.ineq_constraints(z);
    if (!std::isfinite(f0) || !c0.allFinite() || !g0.allFinite())
      throw std::runtime_error("solve: non-finite objective or constraints at init");
  }

  const int nz = static_cast<int>(z.size());
  const int ne = work.num_eq();
  const int ni = work.num_ineq();
  Vec lam = Vec::Zero(ne);
  Vec mu = Vec::Zero(ni);
  double rho = opts.penalty_init;
  const double feas_tol = std::max(opts.constraint_tol, work.delta());

  SolveResult result;
  double feas = std::numeric_limits<double>::infinity();
  double feas_prev = std::numeric_limits<double>::infinity();
  double grad_norm = 0.0;
  int it = 0;

  auto aug_lagrangian = [&](const Vec& zz) {
    const Vec c = work.eq_constraints(zz);
    const Vec g = work.ineq_constraints(zz);
    const Vec mp = (mu + rho * g).cwiseMax(0.0);
    return work.objective(zz) + lam.dot(c) + 0.5 * rho * c.squaredNorm() +
           (mp.squaredNorm() - mu.squaredNorm()) / (2.0 * rho);
  };

  for (it = 0; it < opts.max_outer; ++it) {
    double sig_lm = 1.0;
    const double gtol = opts.optimality_tol * std::max(1.0, std::sqrt(rho));
    for (int k = 0; k < opts.max_inner; ++k) {
      Mat je, jg;
      const Vec c = work.eq_constraints(z, &je);
      const Vec g = work.ineq_constraints(z, &jg);
      const Vec mp = (mu + rho * g).cwiseMax(0.0);
      Vec gobj;
      work.objective(z, &gobj);
      const Vec gr = gobj + je.transpose() * (lam + rho * c) + jg.transpose() * mp;
      grad_norm = gr.norm();
      if (grad_norm < gtol) break;
      Mat h = rho * (je.transpose() * je);
      for (int i = 0; i < ni; ++i)
        if (mp(i) > 0.0) h.noalias() += rho * jg.row(i).transpose() * jg.row(i);
      h.diagonal().array() += sig_lm;
      const Vec dz = h.ldlt().solve(-gr);
      const double slope = gr.dot(dz);
      if (!(slope < 0.0)) {
        sig_lm *= 10.0;
        continue;
      }
      const double f0 = aug_lagrangian(z);
      double a = 1.0;
      bool ok = false;
      while (a > 1e-12) {
        if (aug_lagrangian(z + a * dz) <= f0 + 1e-4 * a * slope) {
          ok = true;
          break;
        }
        a /= 2.0;
      }
      if (!ok) {
        sig_lm *= 10.0;
        continue;
      }
      z += a * dz;
      sig_lm = (a == 1.0) ? std::max(sig_lm / 3.0, 1e-9) : sig_lm * 2.0;
    }

    const Vec c = work.eq_constraints(z);
    const Vec g = work.ineq_constraints(z);
    feas = 0.0;
    if (ne > 0) feas = c.cwiseAbs().maxCoeff();
    if (ni > 0) feas = std::max(feas, g.maxCoeff());
    feas = std::max(feas, 0.0);
    lam += rho * c;
    mu = (mu + rho * g).cwiseMax(0.0);

    const std::string line = log_line(it, work.objective(z), ne > 0 ? c.norm() : 0.0,
                                      grad_norm, rho);
    result.iteration_log.push_back(line);
    if (opts.verbose) std::fputs((line + "\n").c_str(), stderr);

    if (feas < feas_tol) break;
    if (feas > 0.5 * feas_prev) rho = std::min(rho * opts.penalty_growth, opts.penalty_max);
    feas_prev = std::min(feas_prev, feas);
  }

  // The augmented-Lagrangian updates are blind to components of the
  // multipliers in the null space of the (typically redundant) constraint
  // Jacobian transpose, so the raw iterates are valid but arbitrary within
  // that null space. Refine them by a least-squares KKT fit in which the
  // dynamics-defect multipliers of every state are parametrized in that
  // state's trajectory basis; this makes the covector mapping well posed
  // on grids that oversample the coefficient space and returns the smooth
  // member of the multiplier set. Boundary, extra-equality, and active
  // inequality multipliers stay free. The reported KKT residual uses the
  // refined values.
  {
    Mat je, jg;
    const Vec c = work.eq_constraints(z, &je);
    const Vec g = work.ineq_constraints(z, &jg);
    (void)c;
    (void)g;
    Vec gobj;
    work.objective(z, &gobj);
    std::vector<int> active;
    for (int i = 0; i < ni; ++i)
      if (mu(i) > 0.0) active.push_back(i);
    const int na = static_cast<int>(active.size());
    const int mx = work.ocp().m_x;
    const int nn = work.num_nodes();
    if (ne + na > 0) {
      const int nfree = ne - mx * nn;  // boundary + extra equality rows
      int ncoef = 0;
      for (int i = 0; i < mx; ++i)
        ncoef += static_cast<int>(work.value_matrix(i).cols());
      Mat a(nz, ncoef + nfree + na);
      int col = 0;
      for (int i = 0; i < mx; ++i) {
        const Mat& bv = work.value_matrix(i);
        Mat jei(nn, nz);
        for (int k = 0; k < nn; ++k) jei.row(k) = je.row(k * mx + i);
        a.middleCols(col, bv.cols()) = jei.transpose() * bv;
        col += static_cast<int>(bv.cols());
      }
      for (int i = 0; i < nfree; ++i) a.col(col + i) = je.row(mx * nn + i);
      for (int i = 0; i < na; ++i)
        a.col(col + nfree + i) = jg.row(active[static_cast<size_t>(i)]);
      Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
      svd.setThreshold(1e-10);
      const Vec y = svd.solve(-gobj);
      col = 0;
      for (int i = 0; i < mx; ++i) {
        const Mat& bv = work.value_matrix(i);
        const Vec nodes = bv * y.segment(col, bv.cols());
        for (int k = 0; k < nn; ++k) lam(k * mx + i) = nodes(k);
        col += static_cast<int>(bv.cols());
      }
      lam.tail(nfree) = y.segment(col, nfree);
      mu.setZero();
      for (int i = 0; i < na; ++i)
        mu(active[static_cast<size_t>(i)]) = std::max(0.0, y(col + nfree + i));
    }
    const Vec gr = gobj + je.transpose() * lam + jg.transpose() * mu;
    result.kkt_norm = (nz > 0) ? gr.cwiseAbs().maxCoeff() : 0.0;
  }

  result.outer_iterations = std::min(it + 1, opts.max_outer);
  result.feasibility = feas;
  result.eq_multipliers = lam;
  result.ineq_multipliers = mu;
  result.objective = work.objective(z);
  result.d_star = precond ? from_working(pc, problem.layout(), z) : z;
  if (feas <= feas_tol)
    result.status = SolveStatus::optimal;
  else if (rho >= opts.penalty_max && feas > 1e3 * feas_tol)
    result.status = SolveStatus::infeasible;
  else
    result.status = SolveStatus::max_iter;
  return result;
}

Eigen::VectorXd warm_start_from_fit(const DecisionLayout& layout,
                                    const Eigen::MatrixXd& samples, double lambda) {
  if (samples.cols() != layout.quantity_count())
    throw std::invalid_argument("warm_start_from_fit: one sample column per quantity");
  std::vector<MixedSeries> qs;
  for (int q = 0; q < layout.quantity_count(); ++q) {
    FitProblem prob{samples.col(q), layout.spec(q), lambda};
    qs.push_back(fit(prob).first);
  }
  return layout.flatten(qs);
}

}  // namespace bft
