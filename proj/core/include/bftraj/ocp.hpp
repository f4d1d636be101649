#pragma once

// Continuous optimal control problem definition and its transcription into
// a finite nonlinear program over mixed Bernstein-Fourier coefficients:
// quadrature objective, dynamics defects and path constraints at the
// uniform node grid, boundary conditions, and dense Jacobians.

#include <functional>
#include <optional>
#include <vector>

#include "bftraj/mixed.hpp"

namespace bft {

// Problem data in natural (unscaled) units on [0, horizon]. Analytic
// partials are optional; empty std::function falls back to central finite
// differences with relative step fd_step.
struct OcpDefinition {
  int m_x = 0;  // states
  int m_u = 0;  // controls
  int m_e = 0;  // boundary conditions
  int m_h = 0;  // path constraints
  double horizon = 1.0;

  using Vec = Eigen::VectorXd;
  using Mat = Eigen::MatrixXd;

  std::function<double(const Vec& x0, const Vec& x1)> terminal_cost;           // E
  std::function<double(const Vec& x, const Vec& u)> running_cost;              // F
  std::function<Vec(const Vec& x, const Vec& u)> dynamics;                     // f
  std::function<Vec(const Vec& x0, const Vec& x1)> boundary;                   // e
  std::function<Vec(const Vec& x, const Vec& u, const Vec& udot)> path;        // h <= 0

  // Analytic partials (all optional). Shapes: gx0,gx1: m_x; fx: m_x x m_x,
  // fu: m_x x m_u; ex0,ex1: m_e x m_x; hx: m_h x m_x, hu/hud: m_h x m_u.
  std::function<void(const Vec&, const Vec&, Vec& gx0, Vec& gx1)> terminal_grad;
  std::function<void(const Vec&, const Vec&, Vec& gx, Vec& gu)> running_grad;
  std::function<void(const Vec&, const Vec&, Mat& fx, Mat& fu)> dynamics_jac;
  std::function<void(const Vec&, const Vec&, Mat& ex0, Mat& ex1)> boundary_jac;
  std::function<void(const Vec&, const Vec&, const Vec&, Mat& hx, Mat& hu, Mat& hud)> path_jac;

  double fd_step = 1e-7;  // relative central-difference step

  void validate() const;

  // Partials with finite-difference fallback applied.
  void eval_terminal_grad(const Vec& x0, const Vec& x1, Vec& gx0, Vec& gx1) const;
  void eval_running_grad(const Vec& x, const Vec& u, Vec& gx, Vec& gu) const;
  void eval_dynamics_jac(const Vec& x, const Vec& u, Mat& fx, Mat& fu) const;
  void eval_boundary_jac(const Vec& x0, const Vec& x1, Mat& ex0, Mat& ex1) const;
  void eval_path_jac(const Vec& x, const Vec& u, const Vec& udot, Mat& hx, Mat& hu,
                     Mat& hud) const;
};

// Coefficient layout of the decision vector: one MixedSeries per quantity,
// states first, then controls, followed by the (reserved, always inert)
// free-time slot. All specs must share node_count and horizon.
struct DecisionLayout {
  std::vector<BasisSpec> state_specs;
  std::vector<BasisSpec> control_specs;
  bool free_time = false;  // reserved; the slot is never optimized

  int quantity_count() const {
    return static_cast<int>(state_specs.size() + control_specs.size());
  }
  const BasisSpec& spec(int q) const;
  int offset(int q) const;
  int total_len() const;
  std::optional<int> free_time_slot() const;

  void validate() const;

  MixedSeries extract(const Eigen::VectorXd& d, int q) const;
  Eigen::VectorXd flatten(const std::vector<MixedSeries>& quantities) const;
};

struct TrajectoryPoint {
  Eigen::VectorXd x, u, xdot;
};

TrajectoryPoint eval_trajectory(const DecisionLayout& layout, const Eigen::VectorXd& d,
                                double t);

// Advisory relaxation schedule delta = base / sqrt(n); scenarios use 0.
double delta_schedule(int n, double base);

// Quantity values on the node grid, one column per state/control.
struct NodeTrajectory {
  Eigen::MatrixXd X, Xd;  // (n_t+1) x m_x
  Eigen::MatrixXd U, Ud;  // (n_t+1) x m_u
};

// Objective defined directly on node values, replacing E + w*sum F when
// installed (used by the observer's information objective). Gradient
// outputs may be null.
using NodeObjective = std::function<double(const NodeTrajectory&, Eigen::MatrixXd* gX,
                                           Eigen::MatrixXd* gU)>;

// Additional inequality block defined on node values (g <= 0), with dense
// Jacobians with respect to vec(X), vec(U), vec(Xd), vec(Ud) stored
// column-major; Jacobian outputs may be null.
struct NodeInequalities {
  int count = 0;
  std::function<void(const NodeTrajectory&, Eigen::VectorXd& vals, Eigen::MatrixXd* JX,
                     Eigen::MatrixXd* JU, Eigen::MatrixXd* JXd, Eigen::MatrixXd* JUd)>
      eval;
};

// Additional equality block defined on node values (g = 0), same calling
// convention as NodeInequalities.
using NodeEqualities = NodeInequalities;

// Which node grid a node-level objective or inequality block samples: the
// constraint grid or the optional denser auxiliary grid (e.g. a sensor
// measurement grid).
enum class GridRef { main, aux };

// The transcribed NLP. Every evaluation flows through per-quantity node
// matrices (values and derivatives at the grid), which a solver may
// substitute to work in a better-conditioned trajectory basis.
class NlpProblem {
 public:
  NlpProblem() = default;
  NlpProblem(OcpDefinition ocp, DecisionLayout layout, double delta);

  const OcpDefinition& ocp() const { return ocp_; }
  const DecisionLayout& layout() const { return layout_; }
  double delta() const { return delta_; }
  double quad_weight() const { return w_; }  // t_f/(n_t+1)
  const std::vector<double>& grid() const { return grid_; }
  int num_nodes() const { return static_cast<int>(grid_.size()); }
  int num_vars() const { return layout_.total_len(); }
  int num_eq() const { return ocp_.m_x * num_nodes() + ocp_.m_e + extra_eq_.count; }
  int num_ineq() const { return ocp_.m_h * num_nodes() + extra_ineq_.count; }

  const Eigen::MatrixXd& value_matrix(int q, GridRef g = GridRef::main) const {
    return (g == GridRef::main ? bval_ : aux_bval_)[static_cast<size_t>(q)];
  }
  const Eigen::MatrixXd& deriv_matrix(int q, GridRef g = GridRef::main) const {
    return (g == GridRef::main ? bder_ : aux_bder_)[static_cast<size_t>(q)];
  }
  // Swap the node matrices of quantity q (column count must be preserved).
  void substitute_basis(int q, Eigen::MatrixXd value, Eigen::MatrixXd deriv,
                        GridRef g = GridRef::main);

  // Optional denser grid for node-level objectives/inequalities.
  void set_aux_grid(const std::vector<double>& times);
  bool has_aux_grid() const { return !aux_grid_.empty(); }
  const std::vector<double>& aux_grid() const { return aux_grid_; }

  void set_node_objective(NodeObjective obj, GridRef g = GridRef::main) {
    node_objective_ = std::move(obj);
    node_objective_grid_ = g;
  }
  void set_extra_inequalities(NodeInequalities extra, GridRef g = GridRef::main) {
    extra_ineq_ = std::move(extra);
    extra_grid_ = g;
  }
  void set_extra_equalities(NodeEqualities extra, GridRef g = GridRef::main) {
    extra_eq_ = std::move(extra);
    extra_eq_grid_ = g;
  }
  bool has_node_objective() const { return static_cast<bool>(node_objective_); }

  NodeTrajectory eval_nodes(const Eigen::VectorXd& d, GridRef g = GridRef::main) const;

  double objective(const Eigen::VectorXd& d, Eigen::VectorXd* grad = nullptr) const;
  // Dynamics defects f(x,u) - xdot at every node (node-major, states
  // inner), then boundary e. Jacobian is num_eq x num_vars when requested.
  Eigen::VectorXd eq_constraints(const Eigen::VectorXd& d,
                                 Eigen::MatrixXd* jac = nullptr) const;
  // Path h - delta at every node (node-major), then any extra block.
  Eigen::VectorXd ineq_constraints(const Eigen::VectorXd& d,
                                   Eigen::MatrixXd* jac = nullptr) const;

 private:
  OcpDefinition ocp_;
  DecisionLayout layout_;
  double delta_ = 0.0;
  double w_ = 0.0;
  std::vector<double> grid_, aux_grid_;
  std::vector<Eigen::MatrixXd> bval_, bder_;          // per quantity, (n_t+1) x n_q
  std::vector<Eigen::MatrixXd> aux_bval_, aux_bder_;  // per quantity, aux rows
  NodeObjective node_objective_;
  GridRef node_objective_grid_ = GridRef::main;
  NodeInequalities extra_ineq_;
  GridRef extra_grid_ = GridRef::main;
  NodeEqualities extra_eq_;
  GridRef extra_eq_grid_ = GridRef::main;

  // Appends an extra node-level block (values + chained Jacobian rows
  // starting at row base) shared by the equality and inequality paths.
  void append_extra_block(const NodeInequalities& extra, GridRef gref,
                          const Eigen::VectorXd& d, int base, Eigen::VectorXd& out,
                          Eigen::MatrixXd* jac) const;

  // Scatters a node-space gradient into decision space through the stored
  // matrices of grid g; any of the four blocks may be null.
  void chain_to_decision(const Eigen::MatrixXd* gX, const Eigen::MatrixXd* gU,
                         const Eigen::MatrixXd* gXd, const Eigen::MatrixXd* gUd, GridRef g,
                         Eigen::VectorXd& out) const;
};

NlpProblem transcribe(const OcpDefinition& ocp, const DecisionLayout& layout, double delta);

}  // namespace bft
