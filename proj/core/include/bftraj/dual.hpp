#pragma once

// Covector extraction and optimality verification: maps the NLP's nodewise
// multipliers to costate and path-multiplier trajectories through the
// quadrature-weight scaling lambda(t_k) = lam_k / w, fits them to mixed
// series for between-node evaluation, and computes the residuals of the
// first-order necessary conditions (stationarity, closure, adjoint,
// complementarity, Hamiltonian consistency).

#include <string>
#include <utility>
#include <vector>

#include "bftraj/ocp.hpp"
#include "bftraj/solver.hpp"

namespace bft {

// Discrete-Lagrangian gradient norms for one coefficient family of one
// quantity (Bernstein block, dc term, cosine block, or sine block).
struct FamilyResidual {
  std::string name;  // e.g. "x1:bernstein", "u1:cos"
  double rms = 0.0;
  double max = 0.0;
};

struct ComplementarityReport {
  double max_product = 0.0;    // max_k |mu(t_k)^T h(t_k)|
  double max_negativity = 0.0; // max_k max(-mu_i(t_k), 0)
  double delta_d = 0.0;        // smallest delta_D with both <= delta_D / n_t
};

struct DualResiduals {
  std::vector<FamilyResidual> stationarity;
  double closure0 = 0.0;
  double closure1 = 0.0;
  double complementarity_max = 0.0;
  double mu_negativity_max = 0.0;
  double adjoint_rms = 0.0;
  double hamiltonian_consistency_rms = 0.0;
};

struct DualCertificate {
  MixedSeries lambda_traj;  // costates, one dimension per state
  MixedSeries mu_traj;      // path multipliers, one dimension per constraint
  Eigen::VectorXd nu_bar;   // boundary-condition multipliers
  DualResiduals residuals;
  double w = 0.0;  // quadrature weight horizon/(n_t+1) used for scaling
  // True when some path constraint has (numerically) no control
  // dependence; costates may then be discontinuous and the covector
  // mapping assertions do not apply.
  bool pure_state_constraint = false;
  std::vector<std::string> warnings;
};

// Thrown when a SolveResult lacks the multipliers the mapping needs.
struct CertificateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scales the nodewise multipliers by 1/w and fits them to mixed series by
// regulated least squares (lambda = 1e-14); residuals are left unfilled.
DualCertificate extract_covectors(const NlpProblem& problem, const SolveResult& result);

// Norms of the discrete Lagrangian gradient grad f + Je' lam + Jg' mu at
// d_star, split per quantity and coefficient family.
std::vector<FamilyResidual> stationarity_residuals(const NlpProblem& problem,
                                                   const SolveResult& result);

// Transversality residuals at both endpoints:
//   ||lambda(0) + e_x0' nu + E_x0|| and ||lambda(t_f) - e_x1' nu - E_x1||.
std::pair<double, double> closure_residuals(const DualCertificate& cert,
                                            const NlpProblem& problem,
                                            const Eigen::VectorXd& d_star);

// RMS over the node grid of lambda_dot + F_x + f_x' lambda + h_x' mu.
double adjoint_residuals(const DualCertificate& cert, const NlpProblem& problem,
                         const Eigen::VectorXd& d_star);

// Constancy of the Hamiltonian H = F + lambda' f + mu' h along the
// solution. Autonomous case (time_state < 0): RMS deviation of H(t_k) from
// its mean. Time-augmented case: state index time_state carries the clock
// (tau_dot = 1); its dynamics contribution is excluded from H, the clock
// costate is integrated backward from -H(t_f) via trapezoid quadrature of
// -dH/dt, and the RMS of lambda_tau + H over the grid is returned.
double hamiltonian_consistency(const DualCertificate& cert, const NlpProblem& problem,
                               const Eigen::VectorXd& d_star, int time_state = -1);

// Complementary slackness and dual feasibility of the path multipliers,
// reported as the smallest delta_D such that |mu' h| <= delta_D / n_t and
// mu >= -(delta_D / n_t) at every node.
ComplementarityReport complementarity_check(const DualCertificate& cert,
                                            const NlpProblem& problem,
                                            const Eigen::VectorXd& d_star);

// Runs the full verification: extraction plus every residual family.
DualCertificate verify_certificate(const NlpProblem& problem, const SolveResult& result,
                                   int time_state = -1);

}  // namespace bft
