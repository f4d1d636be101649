#pragma once

// Bernstein and Fourier basis evaluation on a horizon [0, t_f]:
// single-point values, stable full-grid evaluation, the Bernstein
// differentiation matrix, and full-period integration weights.

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bft {

// Descriptor of one mixed Bernstein-Fourier basis: polynomial order,
// selected harmonic indices, DC-column flag, horizon and uniform grid size.
struct BasisSpec {
  int bernstein_order = 0;     // n_B
  std::vector<int> harmonics;  // strictly increasing mode indices, all >= 1
  bool include_dc = false;     // whether the constant a_0/2 column exists
  double horizon = 1.0;        // t_f > 0
  int node_count = 1;          // n_t; uniform grid t_k = k*t_f/n_t

  int max_harmonic() const { return harmonics.empty() ? 0 : harmonics.back(); }

  // Coefficients per output dimension: (n_B+1) + dc + 2*|harmonics|.
  int coeff_count() const {
    return bernstein_order + 1 + (include_dc ? 1 : 0) +
           2 * static_cast<int>(harmonics.size());
  }

  bool nyquist_ok() const { return node_count > 2 * max_harmonic(); }

  // Throws std::invalid_argument on any violated invariant.
  void validate() const;

  // t_k = k*t_f/n_t, k = 0..n_t (multiply before dividing for
  // reproducible grids).
  std::vector<double> nodes() const;
};

// binom(n, k) by the multiplicative recurrence; finite up to n ~ 1000.
double binomial(int n, int k);

// b_{k,n}(t) = binom(n,k) t^k (t_f - t)^(n-k) / t_f^n.
// Throws std::domain_error when k or t is out of range.
double bernstein_eval(int k, int n, double t, double t_f);

// All of b_{0,n}(t) .. b_{n,n}(t) via the de Casteljau-style recurrence
// (numerically stable at high order near the endpoints).
Eigen::VectorXd bernstein_eval_all(int n, double t, double t_f);

// (n+1) x n bidiagonal matrix D with D(k,k) = -n and D(k+1,k) = +n;
// maps order-n coefficients c to order-(n-1) derivative coefficients
// via (1/t_f) * D^T c. Throws std::domain_error for n = 0.
Eigen::MatrixXd bernstein_diff_matrix(int n);

// (cos(2*pi*k*t/t_f), sin(2*pi*k*t/t_f)). k = 0 is a domain error: the DC
// term is represented only by the constant 1/2 column.
std::pair<double, double> fourier_eval(int k, double t, double t_f);

// Row layout of the basis matrix: [Bernstein 0..n_B | 1/2 if dc |
// cosines by harmonic | sines by harmonic], evaluated at the given times.
Eigen::MatrixXd basis_matrix(const BasisSpec& spec,
                             const std::vector<double>& times);
Eigen::MatrixXd basis_matrix(const BasisSpec& spec);  // at spec.nodes()

// Same column layout, rows evaluate d/dt of every basis function.
Eigen::MatrixXd basis_derivative_matrix(const BasisSpec& spec,
                                        const std::vector<double>& times);
Eigen::MatrixXd basis_derivative_matrix(const BasisSpec& spec);

struct IntegrationWeights {
  double w;          // t_f/(n_B+1), applied to each Bernstein coefficient
  double dc_weight;  // t_f/2, applied to a_0
};

// Full-period integral rule: Bernstein coefficients each contribute w,
// the DC coefficient contributes dc_weight, harmonics contribute zero.
IntegrationWeights integration_weights(const BasisSpec& spec);

}  // namespace bft
