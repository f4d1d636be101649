#pragma once

// Mixed Bernstein-Fourier approximant: T_n(t) = sum_k g_k b_{k,nB}(t)
// + a0/2 + sum_{k in harmonics} (a_k cos + b_k sin), vector-valued.

#include <functional>
#include <iosfwd>
#include <string>

#include "bftraj/basis.hpp"

namespace bft {

class MixedSeries {
 public:
  MixedSeries() = default;
  // Shapes: g is (nB+1) x m, a0 is 1 x m (zero when include_dc is false),
  // cos/sin are |harmonics| x m.
  MixedSeries(BasisSpec spec, Eigen::MatrixXd g, Eigen::RowVectorXd a0,
              Eigen::MatrixXd cos_coeffs, Eigen::MatrixXd sin_coeffs);

  static MixedSeries zero(const BasisSpec& spec, int dims);

  // Coefficients from a known decomposition f = nonperiodic + p with p
  // periodic on [0, t_f]: g_k = f(k t_f/nB) - p(k t_f/nB); Fourier
  // coefficients of p by composite trapezoid on quad_points subintervals
  // (pass 0 for the default max(256, 8*max harmonic)). Throws
  // std::invalid_argument when p(0) != p(t_f) beyond 1e-9 * scale.
  static MixedSeries construct_from_decomposition(
      const std::function<Eigen::VectorXd(double)>& f,
      const std::function<Eigen::VectorXd(double)>& p, const BasisSpec& spec,
      int quad_points = 0);

  // Build from one flat coefficient column per dimension, ordered like
  // basis_matrix columns: [Bernstein | DC | cosines | sines].
  static MixedSeries from_flat(const BasisSpec& spec, const Eigen::MatrixXd& coeffs);
  Eigen::MatrixXd to_flat() const;  // coeff_count x dims

  const BasisSpec& spec() const { return spec_; }
  int dims() const { return static_cast<int>(g_.cols()); }
  const Eigen::MatrixXd& g_coeffs() const { return g_; }
  const Eigen::RowVectorXd& a0() const { return a0_; }
  const Eigen::MatrixXd& cos_coeffs() const { return cos_; }
  const Eigen::MatrixXd& sin_coeffs() const { return sin_; }

  Eigen::VectorXd eval(double t) const;
  Eigen::VectorXd eval_derivative(double t) const;

  // Full-period integral: w * sum_k g_k + a0 * t_f / 2; the harmonic
  // coefficients are never touched (their full-period integral is zero).
  Eigen::VectorXd integral() const;

  // Series F with F' = this and F(0) = 0, exact: Bernstein order nB+1,
  // same harmonics, no DC (the DC ramp and the sine-cosine constants are
  // absorbed into the Bernstein part).
  MixedSeries antiderivative() const;

  MixedSeries operator+(const MixedSeries& other) const;
  MixedSeries scaled(double factor) const;

  // One row per coefficient, one column per dimension; the header encodes
  // the spec so the file round-trips.
  void write_csv(std::ostream& os) const;
  static MixedSeries read_csv(std::istream& is);

 private:
  BasisSpec spec_;
  Eigen::MatrixXd g_;       // (nB+1) x m
  Eigen::RowVectorXd a0_;   // 1 x m
  Eigen::MatrixXd cos_;     // |harmonics| x m
  Eigen::MatrixXd sin_;     // |harmonics| x m
};

}  // namespace bft
