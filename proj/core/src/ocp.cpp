#include "bftraj/ocp.hpp"

#include <cmath>

namespace bft {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

void OcpDefinition::validate() const {
  if (m_x < 0 || m_u < 0 || m_e < 0 || m_h < 0)
    throw std::invalid_argument("OcpDefinition: negative dimension");
  if (horizon <= 0.0) throw std::invalid_argument("OcpDefinition: horizon must be positive");
  if (m_x > 0 && !dynamics) throw std::invalid_argument("OcpDefinition: dynamics missing");
  if (m_e > 0 && !boundary) throw std::invalid_argument("OcpDefinition: boundary missing");
  if (m_h > 0 && !path) throw std::invalid_argument("OcpDefinition: path missing");
  if (fd_step <= 0.0) throw std::invalid_argument("OcpDefinition: fd_step must be positive");
}

namespace {

double fd_h(double step, double v) { return step * std::max(1.0, std::abs(v)); }

// Central-difference gradient of a scalar function along each component.
void fd_scalar_grad(const std::function<double(const Vec&)>& f, const Vec& v, double step,
                    Vec& g) {
  g.resize(v.size());
  Vec p = v;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double h = fd_h(step, v(i));
    p(i) = v(i) + h;
    const double fp = f(p);
    p(i) = v(i) - h;
    const double fm = f(p);
    p(i) = v(i);
    g(i) = (fp - fm) / (2 * h);
  }
}

void fd_vector_jac(const std::function<Vec(const Vec&)>& f, const Vec& v, double step,
                   int rows, Mat& J) {
  J.resize(rows, v.size());
  Vec p = v;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double h = fd_h(step, v(i));
    p(i) = v(i) + h;
    const Vec fp = f(p);
    p(i) = v(i) - h;
    const Vec fm = f(p);
    p(i) = v(i);
    J.col(i) = (fp - fm) / (2 * h);
  }
}

}  // namespace

void OcpDefinition::eval_terminal_grad(const Vec& x0, const Vec& x1, Vec& gx0, Vec& gx1) const {
  if (!terminal_cost) {
    gx0 = Vec::Zero(m_x);
    gx1 = Vec::Zero(m_x);
    return;
  }
  if (terminal_grad) {
    terminal_grad(x0, x1, gx0, gx1);
    return;
  }
  fd_scalar_grad([&](const Vec& v) { return terminal_cost(v, x1); }, x0, fd_step, gx0);
  fd_scalar_grad([&](const Vec& v) { return terminal_cost(x0, v); }, x1, fd_step, gx1);
}

void OcpDefinition::eval_running_grad(const Vec& x, const Vec& u, Vec& gx, Vec& gu) const {
  if (!running_cost) {
    gx = Vec::Zero(m_x);
    gu = Vec::Zero(m_u);
    return;
  }
  if (running_grad) {
    running_grad(x, u, gx, gu);
    return;
  }
  fd_scalar_grad([&](const Vec& v) { return running_cost(v, u); }, x, fd_step, gx);
  fd_scalar_grad([&](const Vec& v) { return running_cost(x, v); }, u, fd_step, gu);
}

void OcpDefinition::eval_dynamics_jac(const Vec& x, const Vec& u, Mat& fx, Mat& fu) const {
  if (dynamics_jac) {
    dynamics_jac(x, u, fx, fu);
    return;
  }
  fd_vector_jac([&](const Vec& v) { return dynamics(v, u); }, x, fd_step, m_x, fx);
  fd_vector_jac([&](const Vec& v) { return dynamics(x, v); }, u, fd_step, m_x, fu);
}

void OcpDefinition::eval_boundary_jac(const Vec& x0, const Vec& x1, Mat& ex0, Mat& ex1) const {
  if (boundary_jac) {
    boundary_jac(x0, x1, ex0, ex1);
    return;
  }
  fd_vector_jac([&](const Vec& v) { return boundary(v, x1); }, x0, fd_step, m_e, ex0);
  fd_vector_jac([&](const Vec& v) { return boundary(x0, v); }, x1, fd_step, m_e, ex1);
}

void OcpDefinition::eval_path_jac(const Vec& x, const Vec& u, const Vec& udot, Mat& hx,
                                  Mat& hu, Mat& hud) const {
  if (path_jac) {
    path_jac(x, u, udot, hx, hu, hud);
    return;
  }
  fd_vector_jac([&](const Vec& v) { return path(v, u, udot); }, x, fd_step, m_h, hx);
  fd_vector_jac([&](const Vec& v) { return path(x, v, udot); }, u, fd_step, m_h, hu);
  fd_vector_jac([&](const Vec& v) { return path(x, u, v); }, udot, fd_step, m_h, hud);
}

const BasisSpec& DecisionLayout::spec(int q) const {
  const int mx = static_cast<int>(state_specs.size());
  if (q < 0 || q >= quantity_count())
    throw std::out_of_range("DecisionLayout: quantity index out of range");
  return q < mx ? state_specs[static_cast<size_t>(q)]
                : control_specs[static_cast<size_t>(q - mx)];
}

int DecisionLayout::offset(int q) const {
  int off = 0;
  for (int i = 0; i < q; ++i) off += spec(i).coeff_count();
  if (q > quantity_count()) throw std::out_of_range("DecisionLayout: quantity index");
  return off;
}

int DecisionLayout::total_len() const {
  return offset(quantity_count()) + (free_time ? 1 : 0);
}

std::optional<int> DecisionLayout::free_time_slot() const {
  if (!free_time) return std::nullopt;
  return offset(quantity_count());
}

void DecisionLayout::validate() const {
  if (quantity_count() == 0) throw std::invalid_argument("DecisionLayout: no quantities");
  const BasisSpec& first = spec(0);
  int max_nb = 0, max_nf = 0;
  for (int q = 0; q < quantity_count(); ++q) {
    const BasisSpec& s = spec(q);
    s.validate();
    if (s.node_count != first.node_count || s.horizon != first.horizon)
      throw std::invalid_argument("DecisionLayout: quantities must share grid and horizon");
    max_nb = std::max(max_nb, s.bernstein_order);
    max_nf = std::max(max_nf, static_cast<int>(s.harmonics.size()));
  }
  if (total_len() > (max_nb + 2 * max_nf + 2) * quantity_count() + 1)
    throw std::invalid_argument("DecisionLayout: dimension bound violated");
}

MixedSeries DecisionLayout::extract(const Eigen::VectorXd& d, int q) const {
  if (d.size() != total_len())
    throw std::invalid_argument("DecisionLayout::extract: wrong decision length");
  const BasisSpec& s = spec(q);
  return MixedSeries::from_flat(s, d.segment(offset(q), s.coeff_count()));
}

Eigen::VectorXd DecisionLayout::flatten(const std::vector<MixedSeries>& quantities) const {
  if (static_cast<int>(quantities.size()) != quantity_count())
    throw std::invalid_argument("DecisionLayout::flatten: wrong quantity count");
  Eigen::VectorXd d = Eigen::VectorXd::Zero(total_len());
  for (int q = 0; q < quantity_count(); ++q) {
    const auto& series = quantities[static_cast<size_t>(q)];
    if (series.dims() != 1)
      throw std::invalid_argument("DecisionLayout::flatten: series must be scalar");
    if (series.spec().coeff_count() != spec(q).coeff_count())
      throw std::invalid_argument("DecisionLayout::flatten: spec mismatch");
    d.segment(offset(q), spec(q).coeff_count()) = series.to_flat().col(0);
  }
  return d;
}

TrajectoryPoint eval_trajectory(const DecisionLayout& layout, const Eigen::VectorXd& d,
                                double t) {
  const int mx = static_cast<int>(layout.state_specs.size());
  const int mu = static_cast<int>(layout.control_specs.size());
  TrajectoryPoint p;
  p.x.resize(mx);
  p.xdot.resize(mx);
  p.u.resize(mu);
  for (int i = 0; i < mx; ++i) {
    const MixedSeries s = layout.extract(d, i);
    p.x(i) = s.eval(t)(0);
    p.xdot(i) = s.eval_derivative(t)(0);
  }
  for (int j = 0; j < mu; ++j) p.u(j) = layout.extract(d, mx + j).eval(t)(0);
  return p;
}

double delta_schedule(int n, double base) {
  if (n <= 0 || base <= 0.0) throw std::invalid_argument("delta_schedule: n and base positive");
  return base / std::sqrt(static_cast<double>(n));
}

NlpProblem::NlpProblem(OcpDefinition ocp, DecisionLayout layout, double delta)
    : ocp_(std::move(ocp)), layout_(std::move(layout)), delta_(delta) {
  ocp_.validate();
  layout_.validate();
  if (delta_ < 0.0) throw std::invalid_argument("NlpProblem: delta must be non-negative");
  if (static_cast<int>(layout_.state_specs.size()) != ocp_.m_x ||
      static_cast<int>(layout_.control_specs.size()) != ocp_.m_u)
    throw std::invalid_argument("NlpProblem: layout quantity counts do not match OCP");
  const BasisSpec& s0 = layout_.spec(0);
  if (s0.horizon != ocp_.horizon)
    throw std::invalid_argument("NlpProblem: layout horizon does not match OCP");
  grid_ = s0.nodes();
  w_ = ocp_.horizon / static_cast<double>(grid_.size());
  for (int q = 0; q < layout_.quantity_count(); ++q) {
    bval_.push_back(basis_matrix(layout_.spec(q), grid_));
    bder_.push_back(basis_derivative_matrix(layout_.spec(q), grid_));
  }
}

void NlpProblem::substitute_basis(int q, Eigen::MatrixXd value, Eigen::MatrixXd deriv,
                                  GridRef gref) {
  auto& vals = (gref == GridRef::main ? bval_ : aux_bval_);
  auto& ders = (gref == GridRef::main ? bder_ : aux_bder_);
  auto& bv = vals.at(static_cast<size_t>(q));
  if (value.rows() != bv.rows() || value.cols() != bv.cols() ||
      deriv.rows() != bv.rows() || deriv.cols() != bv.cols())
    throw std::invalid_argument("substitute_basis: shape mismatch");
  bv = std::move(value);
  ders[static_cast<size_t>(q)] = std::move(deriv);
}

void NlpProblem::set_aux_grid(const std::vector<double>& times) {
  if (times.empty()) throw std::invalid_argument("set_aux_grid: empty grid");
  aux_grid_ = times;
  aux_bval_.clear();
  aux_bder_.clear();
  for (int q = 0; q < layout_.quantity_count(); ++q) {
    aux_bval_.push_back(basis_matrix(layout_.spec(q), times));
    aux_bder_.push_back(basis_derivative_matrix(layout_.spec(q), times));
  }
}

NodeTrajectory NlpProblem::eval_nodes(const Eigen::VectorXd& d, GridRef gref) const {
  if (d.size() != num_vars())
    throw std::invalid_argument("NlpProblem: wrong decision vector length");
  const auto& vals = (gref == GridRef::main ? bval_ : aux_bval_);
  const auto& ders = (gref == GridRef::main ? bder_ : aux_bder_);
  if (vals.empty()) throw std::logic_error("NlpProblem: auxiliary grid not set");
  const auto nn = vals[0].rows();
  NodeTrajectory nt;
  nt.X.resize(nn, ocp_.m_x);
  nt.Xd.resize(nn, ocp_.m_x);
  nt.U.resize(nn, ocp_.m_u);
  nt.Ud.resize(nn, ocp_.m_u);
  for (int i = 0; i < ocp_.m_x; ++i) {
    const auto seg = d.segment(layout_.offset(i), layout_.spec(i).coeff_count());
    nt.X.col(i) = vals[static_cast<size_t>(i)] * seg;
    nt.Xd.col(i) = ders[static_cast<size_t>(i)] * seg;
  }
  for (int j = 0; j < ocp_.m_u; ++j) {
    const int q = ocp_.m_x + j;
    const auto seg = d.segment(layout_.offset(q), layout_.spec(q).coeff_count());
    nt.U.col(j) = vals[static_cast<size_t>(q)] * seg;
    nt.Ud.col(j) = ders[static_cast<size_t>(q)] * seg;
  }
  return nt;
}

void NlpProblem::chain_to_decision(const Eigen::MatrixXd* gX, const Eigen::MatrixXd* gU,
                                   const Eigen::MatrixXd* gXd, const Eigen::MatrixXd* gUd,
                                   GridRef gref, Eigen::VectorXd& out) const {
  const auto& vals = (gref == GridRef::main ? bval_ : aux_bval_);
  const auto& ders = (gref == GridRef::main ? bder_ : aux_bder_);
  out = Eigen::VectorXd::Zero(num_vars());
  for (int i = 0; i < ocp_.m_x; ++i) {
    auto seg = out.segment(layout_.offset(i), layout_.spec(i).coeff_count());
    if (gX) seg += vals[static_cast<size_t>(i)].transpose() * gX->col(i);
    if (gXd) seg += ders[static_cast<size_t>(i)].transpose() * gXd->col(i);
  }
  for (int j = 0; j < ocp_.m_u; ++j) {
    const int q = ocp_.m_x + j;
    auto seg = out.segment(layout_.offset(q), layout_.spec(q).coeff_count());
    if (gU) seg += vals[static_cast<size_t>(q)].transpose() * gU->col(j);
    if (gUd) seg += ders[static_cast<size_t>(q)].transpose() * gUd->col(j);
  }
}

double NlpProblem::objective(const Eigen::VectorXd& d, Eigen::VectorXd* grad) const {
  if (node_objective_) {
    const NodeTrajectory on = eval_nodes(d, node_objective_grid_);
    Mat gX, gU;
    const double val = node_objective_(on, grad ? &gX : nullptr, grad ? &gU : nullptr);
    if (grad) chain_to_decision(&gX, &gU, nullptr, nullptr, node_objective_grid_, *grad);
    return val;
  }
  const NodeTrajectory nt = eval_nodes(d);
  const int nn = num_nodes();
  double val = 0.0;
  Mat gX = Mat::Zero(nn, ocp_.m_x);
  Mat gU = Mat::Zero(nn, ocp_.m_u);
  if (ocp_.running_cost) {
    for (int k = 0; k < nn; ++k) {
      const Vec x = nt.X.row(k), u = nt.U.row(k);
      val += w_ * ocp_.running_cost(x, u);
      if (grad) {
        Vec gx, gu;
        ocp_.eval_running_grad(x, u, gx, gu);
        gX.row(k) += w_ * gx.transpose();
        gU.row(k) += w_ * gu.transpose();
      }
    }
  }
  if (ocp_.terminal_cost) {
    const Vec x0 = nt.X.row(0), x1 = nt.X.row(nn - 1);
    val += ocp_.terminal_cost(x0, x1);
    if (grad) {
      Vec g0, g1;
      ocp_.eval_terminal_grad(x0, x1, g0, g1);
      gX.row(0) += g0.transpose();
      gX.row(nn - 1) += g1.transpose();
    }
  }
  if (grad) chain_to_decision(&gX, &gU, nullptr, nullptr, GridRef::main, *grad);
  return val;
}

Eigen::VectorXd NlpProblem::eq_constraints(const Eigen::VectorXd& d, Eigen::MatrixXd* jac) const {
  const NodeTrajectory nt = eval_nodes(d);
  const int nn = num_nodes();
  Vec c(num_eq());
  if (jac) *jac = Mat::Zero(num_eq(), num_vars());
  for (int k = 0; k < nn && ocp_.m_x > 0; ++k) {
    const Vec x = nt.X.row(k), u = nt.U.row(k);
    c.segment(k * ocp_.m_x, ocp_.m_x) = ocp_.dynamics(x, u) - nt.Xd.row(k).transpose();
    if (jac) {
      Mat fx, fu;
      ocp_.eval_dynamics_jac(x, u, fx, fu);
      for (int i = 0; i < ocp_.m_x; ++i) {
        const int r = k * ocp_.m_x + i;
        for (int j = 0; j < ocp_.m_x; ++j)
          jac->row(r).segment(layout_.offset(j), layout_.spec(j).coeff_count()) +=
              fx(i, j) * bval_[static_cast<size_t>(j)].row(k);
        jac->row(r).segment(layout_.offset(i), layout_.spec(i).coeff_count()) -=
            bder_[static_cast<size_t>(i)].row(k);
        for (int j = 0; j < ocp_.m_u; ++j) {
          const int q = ocp_.m_x + j;
          jac->row(r).segment(layout_.offset(q), layout_.spec(q).coeff_count()) +=
              fu(i, j) * bval_[static_cast<size_t>(q)].row(k);
        }
      }
    }
  }
  if (ocp_.m_e > 0) {
    const Vec x0 = nt.X.row(0), x1 = nt.X.row(nn - 1);
    c.tail(ocp_.m_e) = ocp_.boundary(x0, x1);
    if (jac) {
      Mat ex0, ex1;
      ocp_.eval_boundary_jac(x0, x1, ex0, ex1);
      for (int i = 0; i < ocp_.m_e; ++i) {
        const int r = nn * ocp_.m_x + i;
        for (int j = 0; j < ocp_.m_x; ++j) {
          auto seg = jac->row(r).segment(layout_.offset(j), layout_.spec(j).coeff_count());
          seg += ex0(i, j) * bval_[static_cast<size_t>(j)].row(0);
          seg += ex1(i, j) * bval_[static_cast<size_t>(j)].row(nn - 1);
        }
      }
    }
  }
  if (extra_eq_.count > 0)
    append_extra_block(extra_eq_, extra_eq_grid_, d, nn * ocp_.m_x + ocp_.m_e, c, jac);
  return c;
}

void NlpProblem::append_extra_block(const NodeInequalities& extra, GridRef gref,
                                    const Eigen::VectorXd& d, int base, Eigen::VectorXd& out,
                                    Eigen::MatrixXd* jac) const {
  const NodeTrajectory ent = eval_nodes(d, gref);
  const auto& vmat = (gref == GridRef::main ? bval_ : aux_bval_);
  const auto& dmat = (gref == GridRef::main ? bder_ : aux_bder_);
  const int en = static_cast<int>(ent.X.rows() > 0 ? ent.X.rows() : ent.U.rows());
  Vec vals;
  Mat JX, JU, JXd, JUd;
  extra.eval(ent, vals, jac ? &JX : nullptr, jac ? &JU : nullptr, jac ? &JXd : nullptr,
             jac ? &JUd : nullptr);
  if (vals.size() != extra.count)
    throw std::invalid_argument("extra constraint block: wrong value count");
  out.segment(base, extra.count) = vals;
  if (!jac) return;
  for (int i = 0; i < ocp_.m_x; ++i) {
    const auto off = layout_.offset(i);
    const auto len = layout_.spec(i).coeff_count();
    if (JX.size() > 0)
      jac->block(base, off, extra.count, len) +=
          JX.middleCols(i * en, en) * vmat[static_cast<size_t>(i)];
    if (JXd.size() > 0)
      jac->block(base, off, extra.count, len) +=
          JXd.middleCols(i * en, en) * dmat[static_cast<size_t>(i)];
  }
  for (int j = 0; j < ocp_.m_u; ++j) {
    const int q = ocp_.m_x + j;
    const auto off = layout_.offset(q);
    const auto len = layout_.spec(q).coeff_count();
    if (JU.size() > 0)
      jac->block(base, off, extra.count, len) +=
          JU.middleCols(j * en, en) * vmat[static_cast<size_t>(q)];
    if (JUd.size() > 0)
      jac->block(base, off, extra.count, len) +=
          JUd.middleCols(j * en, en) * dmat[static_cast<size_t>(q)];
  }
}

Eigen::VectorXd NlpProblem::ineq_constraints(const Eigen::VectorXd& d,
                                             Eigen::MatrixXd* jac) const {
  const NodeTrajectory nt = eval_nodes(d);
  const int nn = num_nodes();
  Vec g(num_ineq());
  if (jac) *jac = Mat::Zero(num_ineq(), num_vars());
  for (int k = 0; k < nn && ocp_.m_h > 0; ++k) {
    const Vec x = nt.X.row(k), u = nt.U.row(k), ud = nt.Ud.row(k);
    g.segment(k * ocp_.m_h, ocp_.m_h) =
        ocp_.path(x, u, ud) - Vec::Constant(ocp_.m_h, delta_);
    if (jac) {
      Mat hx, hu, hud;
      ocp_.eval_path_jac(x, u, ud, hx, hu, hud);
      for (int i = 0; i < ocp_.m_h; ++i) {
        const int r = k * ocp_.m_h + i;
        for (int j = 0; j < ocp_.m_x; ++j)
          jac->row(r).segment(layout_.offset(j), layout_.spec(j).coeff_count()) +=
              hx(i, j) * bval_[static_cast<size_t>(j)].row(k);
        for (int j = 0; j < ocp_.m_u; ++j) {
          const int q = ocp_.m_x + j;
          auto seg = jac->row(r).segment(layout_.offset(q), layout_.spec(q).coeff_count());
          seg += hu(i, j) * bval_[static_cast<size_t>(q)].row(k);
          seg += hud(i, j) * bder_[static_cast<size_t>(q)].row(k);
        }
      }
    }
  }
  if (extra_ineq_.count > 0)
    append_extra_block(extra_ineq_, extra_grid_, d, nn * ocp_.m_h, g, jac);
  return g;
}

NlpProblem transcribe(const OcpDefinition& ocp, const DecisionLayout& layout, double delta) {
  return NlpProblem(ocp, layout, delta);
}

}  // namespace bft
