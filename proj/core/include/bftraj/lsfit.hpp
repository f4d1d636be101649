#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bftraj/mixed.hpp"

namespace bft {

// Coefficient identification from uniformly sampled data by (optionally
// Tikhonov-regulated) least squares.
struct FitProblem {
  Eigen::MatrixXd samples;  // (n_t+1) x m, at the spec's uniform nodes
  BasisSpec spec;
  double lambda = 1e-14;

  void validate() const;
};

struct FitReport {
  double rms = 0.0;
  double condition_estimate = 0.0;
};

// Thrown when lambda = 0 and the basis matrix is rank deficient.
struct RankDeficiencyError : std::runtime_error {
  RankDeficiencyError(std::string msg, std::vector<int> cols)
      : std::runtime_error(std::move(msg)), dependent_columns(std::move(cols)) {}
  std::vector<int> dependent_columns;
};

// full_svd_condition replaces the cheap pivot-ratio condition estimate with
// the exact singular-value ratio.
std::pair<MixedSeries, FitReport> fit(const FitProblem& problem,
                                      bool full_svd_condition = false);
std::pair<MixedSeries, FitReport> fit_bernstein_only(const FitProblem& problem,
                                                     bool full_svd_condition = false);
std::pair<MixedSeries, FitReport> fit_fourier_only(const FitProblem& problem,
                                                   bool full_svd_condition = false);

// Human-readable names for the flat coefficient columns of a spec, in
// basis_matrix order ("b0".."bn", "dc", cosines, then sines).
std::vector<std::string> column_names(const BasisSpec& spec);

}  // namespace bft
