#include "bftraj/lsfit.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace bft {

void FitProblem::validate() const {
  spec.validate();
  if (samples.rows() != spec.node_count + 1)
    throw std::invalid_argument("FitProblem: samples rows must equal node_count + 1");
  if (!samples.allFinite()) throw std::invalid_argument("FitProblem: non-finite samples");
  if (lambda < 0.0) throw std::invalid_argument("FitProblem: lambda must be non-negative");
  if (lambda == 0.0 && samples.rows() < spec.coeff_count())
    throw std::invalid_argument(
        "FitProblem: underdetermined (n_t + 1 < coefficient count) and lambda = 0");
}

std::vector<std::string> column_names(const BasisSpec& spec) {
  std::vector<std::string> names;
  for (int k = 0; k <= spec.bernstein_order; ++k) names.push_back("b" + std::to_string(k));
  if (spec.include_dc) names.push_back("dc");
  for (int h : spec.harmonics) names.push_back("cos" + std::to_string(h));
  for (int h : spec.harmonics) names.push_back("sin" + std::to_string(h));
  return names;
}

namespace {

// Solves min ||B d - y||^2 + lambda ||d||^2 on a column subset of the full
// basis matrix and re-embeds the solution as a full flat coefficient matrix.
std::pair<MixedSeries, FitReport> fit_subset(const FitProblem& problem,
                                             const std::vector<int>& cols,
                                             bool full_svd_condition) {
  problem.validate();
  const Eigen::MatrixXd B_full = basis_matrix(problem.spec);
  const auto n_rows = B_full.rows();
  const auto n_cols = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd B(n_rows, n_cols);
  for (Eigen::Index j = 0; j < n_cols; ++j) B.col(j) = B_full.col(cols[static_cast<size_t>(j)]);

  // Stacked form [B; sqrt(lambda) I]: its LS minimizer is exactly the
  // Tikhonov solution, without forming B^T B.
  Eigen::MatrixXd A(n_rows + (problem.lambda > 0.0 ? n_cols : 0), n_cols);
  Eigen::MatrixXd rhs(A.rows(), problem.samples.cols());
  A.topRows(n_rows) = B;
  rhs.topRows(n_rows) = problem.samples;
  if (problem.lambda > 0.0) {
    A.bottomRows(n_cols) =
        std::sqrt(problem.lambda) * Eigen::MatrixXd::Identity(n_cols, n_cols);
    rhs.bottomRows(n_cols).setZero();
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (problem.lambda == 0.0 && qr.rank() < n_cols) {
    const auto perm = qr.colsPermutation().indices();
    std::vector<int> dependent;
    for (Eigen::Index j = qr.rank(); j < n_cols; ++j)
      dependent.push_back(cols[static_cast<size_t>(perm(j))]);
    const auto names = column_names(problem.spec);
    std::ostringstream msg;
    msg << "rank-deficient basis matrix at lambda = 0; dependent columns:";
    for (int c : dependent) msg << ' ' << names[static_cast<size_t>(c)];
    throw RankDeficiencyError(msg.str(), std::move(dependent));
  }
  const Eigen::MatrixXd d = qr.solve(rhs);

  FitReport report;
  report.rms = (B * d - problem.samples).norm() / std::sqrt(static_cast<double>(n_rows));
  if (full_svd_condition) {
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues();
    report.condition_estimate = sv(0) / sv(sv.size() - 1);
  } else {
    const auto& R = qr.matrixR();
    double mx = 0.0, mn = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n_cols; ++j) {
      const double p = std::abs(R(j, j));
      mx = std::max(mx, p);
      mn = std::min(mn, p);
    }
    report.condition_estimate = mn > 0.0 ? mx / mn : std::numeric_limits<double>::infinity();
  }

  Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(problem.spec.coeff_count(), d.cols());
  for (Eigen::Index j = 0; j < n_cols; ++j) flat.row(cols[static_cast<size_t>(j)]) = d.row(j);
  return {MixedSeries::from_flat(problem.spec, flat), report};
}

std::vector<int> all_columns(const BasisSpec& spec) {
  std::vector<int> cols(static_cast<size_t>(spec.coeff_count()));
  for (size_t j = 0; j < cols.size(); ++j) cols[j] = static_cast<int>(j);
  return cols;
}

}  // namespace

std::pair<MixedSeries, FitReport> fit(const FitProblem& problem, bool full_svd_condition) {
  return fit_subset(problem, all_columns(problem.spec), full_svd_condition);
}

std::pair<MixedSeries, FitReport> fit_bernstein_only(const FitProblem& problem,
                                                     bool full_svd_condition) {
  std::vector<int> cols(static_cast<size_t>(problem.spec.bernstein_order + 1));
  for (size_t j = 0; j < cols.size(); ++j) cols[j] = static_cast<int>(j);
  return fit_subset(problem, cols, full_svd_condition);
}

std::pair<MixedSeries, FitReport> fit_fourier_only(const FitProblem& problem,
                                                   bool full_svd_condition) {
  std::vector<int> cols;
  for (int j = problem.spec.bernstein_order + 1; j < problem.spec.coeff_count(); ++j)
    cols.push_back(j);
  if (cols.empty())
    throw std::invalid_argument("fit_fourier_only: spec has no Fourier/DC columns");
  return fit_subset(problem, cols, full_svd_condition);
}

}  // namespace bft
