#pragma once

// The three benchmark problems as ready-to-run transcriptions: sinusoidal
// disturbance rejection of a double integrator, a fixed-speed UAV observer
// minimizing the trace of the Cramer-Rao lower bound, and an AUV
// mine-countermeasure coverage sweep. Each builder freezes the published
// parameters and returns the transcribed NLP plus a deterministic
// initializer.

#include <vector>

#include "bftraj/ocp.hpp"

namespace bft {

// A scenario bundle: the transcribed problem, a deterministic starting
// point, and whether the covector mapping applies (false when the problem
// carries a pure state constraint or a non-integral objective).
struct ScenarioProblem {
  NlpProblem problem;
  Eigen::VectorXd init;
  bool cmt_applicable = true;
};

// ----------------------------------------------------------------------
// Disturbance rejection: double integrator x'' = u + A sin(omega t) driven
// from (0,0) to (10,0) in T seconds at minimum control effort.

struct DisturbanceRejectionParams {
  double amplitude = 5.0;        // A
  double omega = 3.14159265358979323846;  // rad/s
  double horizon = 10.0;         // T, seconds
  double x0 = 0.0, v0 = 0.0;     // initial position/velocity
  double xf = 10.0, vf = 0.0;    // final position/velocity
  int bernstein_order = 4;
  int harmonic = 5;              // omega = 2*pi*harmonic/T must hold
  int node_count = 50;

  // Throws std::invalid_argument unless omega*T/(2*pi) equals the harmonic
  // index (the disturbance must land exactly on a Fourier column).
  void validate() const;
};

double disturbance_field(const DisturbanceRejectionParams& p, double t);

// Full transcription with time augmentation: states (x, v, tau), control u,
// autonomous dynamics (x' = v, v' = u + A sin(omega tau), tau' = 1) so the
// Hamiltonian check applies. bernstein_only drops the harmonic columns from
// every quantity (same polynomial order), the degraded comparison mode.
ScenarioProblem build_disturbance_rejection(const DisturbanceRejectionParams& p,
                                            bool bernstein_only = false);

// Reduced control-only mode: only the control series is free (7
// coefficients at the default orders); the states follow by exact linear
// propagation of u plus the disturbance, so the problem collapses to an
// equality-constrained quadratic program solved in closed form.
struct ReducedDisturbanceSolution {
  MixedSeries u;
  int variable_count = 0;
  double objective = 0.0;  // integral of u^2
};
ReducedDisturbanceSolution solve_disturbance_reduced(const DisturbanceRejectionParams& p,
                                                     bool bernstein_only = false);

// Exact position/velocity at time t under the control series u: double
// antiderivative of u plus the closed-form disturbance response.
void propagate_disturbance(const DisturbanceRejectionParams& p, const MixedSeries& u,
                           double t, double& x, double& v);

// Max |state - oracle| over the grid of a dense fixed-step RK4 propagation
// of the control series (the Table-1 error metric). x_series/v_series are
// the parameterized states; pass nullptr to compare against the exact
// propagation instead (reduced mode).
double disturbance_max_state_error(const DisturbanceRejectionParams& p,
                                   const MixedSeries& u, const MixedSeries* x_series,
                                   const MixedSeries* v_series, int rk4_steps = 100000);

// ----------------------------------------------------------------------
// Observer trajectory: constant-speed UAV at fixed altitude measuring
// bearing and elevation to a ground target; minimize trace of the CRLB
// accumulated over a 10 Hz measurement grid while staying outside a no-fly
// disk around the target.

struct ObserverParams {
  double speed = 30.0;           // m/s
  double altitude = 20.0;        // m
  double target_x = 400.0, target_y = 0.0;
  double duration = 60.0;        // s
  int measurement_steps = 600;   // 10 Hz -> 601 samples including t=0
  double sigma = 3e-3;           // rad, per measurement channel
  double no_fly_radius = 100.0;  // m
  int bernstein_order = 70;
  int fourier_count = 12;        // dense harmonics 1..n_F
  bool include_dc = true;
  int node_count = 70;           // dynamics-constraint grid
  double fim_epsilon = 1e-12;    // regularization of the FIM inverse
  double objective_scale = 1000.0;  // internal solver scaling of trace(CRLB)

  void validate() const;
};

// States (x, y), quantity psi treated as the control; dynamics at the
// node_count grid, FIM objective and no-fly inequality on the measurement
// grid (set as the auxiliary grid). cmt_applicable is false: the no-fly
// disk is a pure state constraint.
ScenarioProblem build_observer(const ObserverParams& p);

// Per-sample Fisher information increment (bearing + elevation rows over
// sigma^2) at vehicle position (x, y).
Eigen::Matrix2d observer_fim_increment(const ObserverParams& p, double x, double y);

// Unscaled trace of the regularized CRLB over the measurement grid of the
// solved problem.
double observer_trace_crlb(const NlpProblem& problem, const Eigen::VectorXd& d,
                           const ObserverParams& p);

// ----------------------------------------------------------------------
// MCM coverage: AUV (x, y, v, psi) sweeping a 100x100 m field of 400 cells
// with a Gaussian sensor, maximizing expected coverage while regulating
// speed; turn rate bounded through the derivative of the heading series.

struct McmParams {
  double field_size = 100.0;     // m, square field
  int cells_per_side = 20;       // 20x20 = 400 cells at the cell centers
  double v_nominal = 2.0;        // m/s
  double v_min = 1.8, v_max = 2.2;
  double u_max = 0.5;            // rad/s turn-rate bound
  double sensor_sigma = 10.0;    // m
  double lambda0 = 0.3;          // peak detection rate, 1/s
  double alpha = 0.9;            // detection-probability ceiling
  double rho_v = 0.01;           // speed-regulation weight
  int bernstein_order = 40;
  int fourier_count = 10;        // dense harmonics 1..n_F
  bool include_dc = false;
  int node_count = 60;

  // Lawnmower initializer: eastbound/westbound legs joined by half-circle
  // turns of radius spacing/2, traversed at v_nominal.
  int legs = 6;
  double spacing = 8.0;
  double leg_x0 = 25.0, leg_x1 = 75.0;
  double first_leg_y = 30.0;

  // Mission time = path length of the lawnmower at v_nominal.
  double horizon() const;
  int cell_count() const { return cells_per_side * cells_per_side; }
  // cell_count x 2 matrix of cell-center coordinates.
  Eigen::MatrixXd cell_centers() const;

  void validate() const;
};

// Quantities (x, y, v, psi): states (x, y), controls (v, psi); dynamics
// x' = v cos psi, y' = v sin psi; path constraints bound v and the squared
// heading rate; objective is expected coverage (saturating per cell) plus
// the speed-regulation term.
ScenarioProblem build_mcm(const McmParams& p);

// Lawnmower reference pose at time t.
void mcm_lawnmower(const McmParams& p, double t, double& x, double& y, double& psi);

// Percent coverage of a node trajectory: per cell j, P_j = alpha*(1 -
// exp(-I_j)) with I_j the trapezoid integral of the Gaussian detection rate
// along (x, y); returns (100/M) * sum_j P_j.
double coverage_metric(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                       const std::vector<double>& times, const McmParams& p);

// Frozen cell weights alpha*exp(-I_j) of a solved trajectory. The
// saturating objective's gradient coincides with the gradient of the
// paper-form running cost -sum_j w_j gamma_j + rho_v (v - v_nom)^2 at these
// weights, so the solution is a stationary point of that standard problem;
// dual verification runs against it.
Eigen::VectorXd mcm_frozen_weights(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                   const std::vector<double>& times, const McmParams& p);

// The same transcription with the standard integral running cost at the
// given frozen weights (covector extraction and residual reports use this).
NlpProblem mcm_frozen_weight_problem(const McmParams& p, const Eigen::VectorXd& weights);

// ----------------------------------------------------------------------
// Shared initializer helper: coefficients per quantity from value +
// derivative samples on the given times by min-norm (truncated-SVD) least
// squares with the derivative rows scaled by beta (well-behaved at high
// Bernstein order where plain normal equations are rank deficient).
Eigen::VectorXd fit_with_derivatives(const BasisSpec& spec, const std::vector<double>& times,
                                     const Eigen::VectorXd& values,
                                     const Eigen::VectorXd& derivs, double beta = 2.0);

}  // namespace bft
