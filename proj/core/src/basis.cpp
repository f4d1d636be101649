#include "bftraj/basis.hpp"

#include <cmath>

namespace bft {

void BasisSpec::validate() const {
  if (horizon <= 0.0) throw std::invalid_argument("BasisSpec: horizon must be positive");
  if (node_count < 1) throw std::invalid_argument("BasisSpec: node_count must be >= 1");
  if (bernstein_order < 0) throw std::invalid_argument("BasisSpec: bernstein_order must be >= 0");
  int prev = 0;
  for (int k : harmonics) {
    if (k < 1) throw std::invalid_argument("BasisSpec: harmonic indices must be >= 1");
    if (k <= prev) throw std::invalid_argument("BasisSpec: harmonics must be strictly increasing");
    prev = k;
  }
  if (!nyquist_ok())
    throw std::invalid_argument("BasisSpec: node_count must exceed twice the highest harmonic");
}

std::vector<double> BasisSpec::nodes() const {
  std::vector<double> t(node_count + 1);
  for (int k = 0; k <= node_count; ++k) t[k] = k * horizon / node_count;
  return t;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c *= static_cast<double>(n - k + i) / i;
  return c;
}

double bernstein_eval(int k, int n, double t, double t_f) {
  if (k < 0 || k > n) throw std::domain_error("bernstein_eval: index k out of [0, n]");
  if (t < 0.0 || t > t_f) throw std::domain_error("bernstein_eval: t outside [0, t_f]");
  const double s = t / t_f;
  return binomial(n, k) * std::pow(s, k) * std::pow(1.0 - s, n - k);
}

Eigen::VectorXd bernstein_eval_all(int n, double t, double t_f) {
  if (t < 0.0 || t > t_f) throw std::domain_error("bernstein_eval_all: t outside [0, t_f]");
  // Extended precision keeps the partition of unity within 1e-14 up to
  // order ~200.
  const long double s = static_cast<long double>(t) / t_f;
  std::vector<long double> b(static_cast<size_t>(n) + 1, 0.0L);
  b[0] = 1.0L;
  for (int m = 1; m <= n; ++m) {
    b[static_cast<size_t>(m)] = b[static_cast<size_t>(m) - 1] * s;
    for (int k = m - 1; k >= 1; --k)
      b[static_cast<size_t>(k)] =
          b[static_cast<size_t>(k)] * (1.0L - s) + b[static_cast<size_t>(k) - 1] * s;
    b[0] *= (1.0L - s);
  }
  Eigen::VectorXd out(n + 1);
  for (int k = 0; k <= n; ++k) out[k] = static_cast<double>(b[static_cast<size_t>(k)]);
  return out;
}

Eigen::MatrixXd bernstein_diff_matrix(int n) {
  if (n < 1) throw std::domain_error("bernstein_diff_matrix: order must be >= 1");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n + 1, n);
  for (int k = 0; k < n; ++k) {
    d(k, k) = -n;
    d(k + 1, k) = n;
  }
  return d;
}

std::pair<double, double> fourier_eval(int k, double t, double t_f) {
  if (k < 1) throw std::domain_error("fourier_eval: mode index must be >= 1 (DC is the 1/2 column)");
  if (t < 0.0 || t > t_f) throw std::domain_error("fourier_eval: t outside [0, t_f]");
  const double arg = 2.0 * M_PI * k * t / t_f;
  return {std::cos(arg), std::sin(arg)};
}

Eigen::MatrixXd basis_matrix(const BasisSpec& spec, const std::vector<double>& times) {
  spec.validate();
  const int n = spec.bernstein_order;
  const int nh = static_cast<int>(spec.harmonics.size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(times.size()), spec.coeff_count());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double t = times[static_cast<size_t>(i)];
    m.row(i).segment(0, n + 1) = bernstein_eval_all(n, t, spec.horizon).transpose();
    int col = n + 1;
    if (spec.include_dc) m(i, col++) = 0.5;
    for (int j = 0; j < nh; ++j) {
      auto [c, s] = fourier_eval(spec.harmonics[static_cast<size_t>(j)], t, spec.horizon);
      m(i, col + j) = c;
      m(i, col + nh + j) = s;
    }
  }
  return m;
}

Eigen::MatrixXd basis_matrix(const BasisSpec& spec) { return basis_matrix(spec, spec.nodes()); }

Eigen::MatrixXd basis_derivative_matrix(const BasisSpec& spec, const std::vector<double>& times) {
  spec.validate();
  const int n = spec.bernstein_order;
  const int nh = static_cast<int>(spec.harmonics.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(times.size()),
                                            spec.coeff_count());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double t = times[static_cast<size_t>(i)];
    if (n >= 1) {
      // d/dt b_{k,n} = (n/t_f) (b_{k-1,n-1} - b_{k,n-1})
      Eigen::VectorXd lower = bernstein_eval_all(n - 1, t, spec.horizon);
      for (int k = 0; k <= n; ++k) {
        double acc = 0.0;
        if (k >= 1) acc += lower[k - 1];
        if (k <= n - 1) acc -= lower[k];
        m(i, k) = n / spec.horizon * acc;
      }
    }
    int col = n + 1 + (spec.include_dc ? 1 : 0);
    for (int j = 0; j < nh; ++j) {
      const int k = spec.harmonics[static_cast<size_t>(j)];
      const double w = 2.0 * M_PI * k / spec.horizon;
      auto [c, s] = fourier_eval(k, t, spec.horizon);
      m(i, col + j) = -w * s;
      m(i, col + nh + j) = w * c;
    }
  }
  return m;
}

Eigen::MatrixXd basis_derivative_matrix(const BasisSpec& spec) {
  return basis_derivative_matrix(spec, spec.nodes());
}

IntegrationWeights integration_weights(const BasisSpec& spec) {
  spec.validate();
  return {spec.horizon / (spec.bernstein_order + 1), spec.horizon / 2.0};
}

}  // namespace bft
