#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "bftraj/lsfit.hpp"
#include "doctest.h"

using namespace bft;

namespace {

Eigen::MatrixXd sample(const BasisSpec& spec, const std::function<double(double)>& f) {
  const auto ts = spec.nodes();
  Eigen::MatrixXd y(static_cast<Eigen::Index>(ts.size()), 1);
  for (size_t i = 0; i < ts.size(); ++i) y(static_cast<Eigen::Index>(i), 0) = f(ts[i]);
  return y;
}

}  // namespace

TEST_CASE("affine data is fit exactly by an order-1 Bernstein basis") {
  BasisSpec spec;
  spec.bernstein_order = 1;
  spec.node_count = 10;
  FitProblem prob{sample(spec, [](double t) { return 2 + 3 * t; }), spec, 0.0};
  auto [series, report] = fit(prob);
  CHECK(series.g_coeffs()(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(series.g_coeffs()(1, 0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(report.rms <= 1e-12);
}

TEST_CASE("dc column with a full Bernstein set is rank deficient at lambda 0") {
  BasisSpec spec;
  spec.bernstein_order = 3;
  spec.include_dc = true;
  spec.node_count = 20;
  FitProblem prob{sample(spec, [](double t) { return t * t; }), spec, 0.0};
  CHECK_THROWS_AS(fit(prob), RankDeficiencyError);
  try {
    fit(prob);
  } catch (const RankDeficiencyError& e) {
    CHECK(e.dependent_columns.size() == 1);
    CHECK(std::string(e.what()).find("dependent columns") != std::string::npos);
  }
}

TEST_CASE("example-1 signal recovered through the regulated fit") {
  BasisSpec spec;
  spec.bernstein_order = 1;
  spec.harmonics = {1};
  spec.node_count = 100;
  FitProblem prob{
      sample(spec, [](double t) { return t + std::sin(2 * M_PI * t - 0.5); }), spec, 1e-14};
  auto [series, report] = fit(prob);
  CHECK(report.rms <= 1e-7);
  CHECK(series.g_coeffs()(0, 0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(series.g_coeffs()(1, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(series.cos_coeffs()(0, 0) - -std::sin(0.5)) <= 1e-6);
  CHECK(std::abs(series.sin_coeffs()(0, 0) - std::cos(0.5)) <= 1e-6);
}

TEST_CASE("restricted fitters") {
  BasisSpec spec;
  spec.bernstein_order = 2;
  spec.harmonics = {1, 2};
  spec.include_dc = true;
  spec.node_count = 60;
  FitProblem prob{sample(spec, [](double t) { return 1 - 0.5 * t; }), spec, 0.0};

  auto [bs, br] = fit_bernstein_only(prob);
  CHECK(br.rms <= 1e-12);
  CHECK(bs.cos_coeffs().cwiseAbs().maxCoeff() == 0.0);

  auto [fs, fr] = fit_fourier_only(prob);
  CHECK(fr.rms > 1e-2);  // non-periodic trend cannot be matched
  CHECK(fs.g_coeffs().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("normal-equation residual for the regulated solve") {
  BasisSpec spec;
  spec.bernstein_order = 5;
  spec.harmonics = {1, 3};
  spec.include_dc = true;
  spec.node_count = 80;
  FitProblem prob{
      sample(spec, [](double t) { return std::exp(t) * std::sin(5 * t); }), spec, 1e-10};
  auto [series, report] = fit(prob);
  (void)report;
  const Eigen::MatrixXd B = basis_matrix(spec);
  const Eigen::VectorXd d = series.to_flat().col(0);
  const Eigen::VectorXd bty = B.transpose() * prob.samples.col(0);
  const Eigen::VectorXd res =
      (B.transpose() * B + prob.lambda * Eigen::MatrixXd::Identity(d.size(), d.size())) * d -
      bty;
  CHECK(res.norm() <= 1e-10 * bty.norm());
}

TEST_CASE("rms is monotone in lambda") {
  BasisSpec spec;
  spec.bernstein_order = 6;
  spec.harmonics = {2};
  spec.node_count = 50;
  FitProblem prob{
      sample(spec, [](double t) { return std::cos(7 * t) + 0.3 * t; }), spec, 0.0};
  double prev = -1.0;
  for (double lam : {1e-12, 1e-6, 1e-2, 1.0}) {
    prob.lambda = lam;
    auto [series, report] = fit(prob);
    (void)series;
    CHECK(report.rms >= prev - 1e-14);
    prev = report.rms;
  }
}

TEST_CASE("row permutation leaves the solution unchanged") {
  BasisSpec spec;
  spec.bernstein_order = 3;
  spec.harmonics = {1};
  spec.node_count = 40;
  FitProblem prob{
      sample(spec, [](double t) { return t * t + std::sin(2 * M_PI * t); }), spec, 1e-14};
  auto [s1, r1] = fit(prob);
  (void)r1;

  // Solve the permuted problem directly against the permuted matrix.
  std::vector<int> order(static_cast<size_t>(spec.node_count + 1));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937 rng(3);
  std::shuffle(order.begin(), order.end(), rng);
  const Eigen::MatrixXd B = basis_matrix(spec);
  Eigen::MatrixXd Bp(B.rows(), B.cols());
  Eigen::MatrixXd yp(B.rows(), 1);
  for (Eigen::Index i = 0; i < B.rows(); ++i) {
    Bp.row(i) = B.row(order[static_cast<size_t>(i)]);
    yp.row(i) = prob.samples.row(order[static_cast<size_t>(i)]);
  }
  Eigen::MatrixXd A(B.rows() + B.cols(), B.cols());
  A << Bp, std::sqrt(prob.lambda) * Eigen::MatrixXd::Identity(B.cols(), B.cols());
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(A.rows(), 1);
  rhs.topRows(B.rows()) = yp;
  const Eigen::VectorXd dp = A.colPivHouseholderQr().solve(rhs);
  CHECK((dp - s1.to_flat().col(0)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("column names") {
  BasisSpec spec;
  spec.bernstein_order = 1;
  spec.harmonics = {2};
  spec.include_dc = true;
  spec.node_count = 10;
  const auto names = column_names(spec);
  CHECK(names == std::vector<std::string>{"b0", "b1", "dc", "cos2", "sin2"});
}

TEST_CASE("underdetermined problems require regularization") {
  BasisSpec spec;
  spec.bernstein_order = 12;
  spec.node_count = 5;
  FitProblem prob{Eigen::MatrixXd::Zero(6, 1), spec, 0.0};
  CHECK_THROWS_AS(fit(prob), std::invalid_argument);
  prob.lambda = 1e-10;
  CHECK_NOTHROW(fit(prob));
}
