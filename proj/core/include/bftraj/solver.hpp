#pragma once

// Deterministic augmented-Lagrangian solver for the transcribed NLP.
// Inner iterations are damped Gauss-Newton steps on the augmented
// Lagrangian with explicit constraint Jacobians and Armijo backtracking.
// By default the solve runs in an orthonormal per-quantity trajectory
// basis (QR of stacked value/derivative node matrices), which removes the
// severe ill-conditioning of high-order Bernstein bases; coefficients are
// recovered afterwards by a truncated-SVD least-squares projection.

#include <string>
#include <vector>

#include "bftraj/lsfit.hpp"
#include "bftraj/ocp.hpp"

namespace bft {

struct SolverOptions {
  int max_outer = 80;
  int max_inner = 120;
  double constraint_tol = 1e-8;
  double optimality_tol = 1e-6;
  double penalty_init = 10.0;
  double penalty_growth = 5.0;  // applied only when feasibility stalls
  double penalty_max = 1e8;
  double fd_step = 1e-7;  // relative, for problems without analytic partials
  int seed = 0;           // reserved for randomized restarts (none used)
  bool precondition = true;
  bool verbose = false;

  void validate() const;
};

enum class SolveStatus { optimal, max_iter, infeasible };

struct SolveResult {
  Eigen::VectorXd d_star;
  double objective = 0.0;
  Eigen::VectorXd eq_multipliers;    // nodewise dynamics blocks, then boundary
  Eigen::VectorXd ineq_multipliers;  // >= 0
  SolveStatus status = SolveStatus::max_iter;
  std::vector<std::string> iteration_log;  // "iter, objective, |c|, |gradL|, penalty"
  int outer_iterations = 0;
  double feasibility = 0.0;  // max(|c|_inf, max(g, 0))
  double kkt_norm = 0.0;     // |grad f + Je' lam + Jg' mu|_inf at the solution
};

SolveResult solve(const NlpProblem& problem, const Eigen::VectorXd& init,
                  const SolverOptions& opts);

// Builds an initial decision vector by fitting reference samples (one
// column per quantity, rows on the layout node grid) with regulated LS.
Eigen::VectorXd warm_start_from_fit(const DecisionLayout& layout,
                                    const Eigen::MatrixXd& samples, double lambda);

}  // namespace bft
