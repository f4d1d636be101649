// bftraj: fit sampled data, solve the benchmark scenarios, verify
// optimality certificates, and tabulate the basis comparison.
//
// Exit codes: 0 success, 2 input error, 3 numerical failure, 4 bad or
// incomplete artifact.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bftraj/dual.hpp"
#include "bftraj/io.hpp"
#include "bftraj/lsfit.hpp"
#include "bftraj/scenarios.hpp"
#include "bftraj/solver.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using Vec = Eigen::VectorXd;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitArtifact = 4;

struct CliError : std::runtime_error {
  int code;
  CliError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

json load_config(const std::string& path, const std::vector<std::string>& allowed) {
  std::ifstream in(path);
  if (!in) throw CliError(kExitInput, "cannot open config: " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw CliError(kExitInput, std::string("config parse error: ") + e.what());
  }
  if (!cfg.is_object()) throw CliError(kExitInput, "config must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw CliError(kExitInput, "config: unknown key '" + key + "'");
  }
  return cfg;
}

std::vector<double> dense_times(double t_f, int n) {
  std::vector<double> ts(static_cast<size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) ts[static_cast<size_t>(k)] = k * t_f / n;
  return ts;
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec json_to_vec(const json& a) {
  Vec v(a.size());
  int i = 0;
  for (const auto& x : a) v(i++) = x.get<double>();
  return v;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw CliError(kExitInput, "cannot write " + path.string());
  out << content;
}

// Continuous-quadrature value of int u^2 for reporting (the node-sum NLP
// objective carries an O(1/n_t) bias).
double control_effort(const bft::MixedSeries& u, double t_f, int n = 20000) {
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double uk = u.eval(k * t_f / n)(0);
    sum += (k == 0 || k == n ? 0.5 : 1.0) * uk * uk;
  }
  return sum * t_f / n;
}

json solve_summary(const bft::SolveResult& res) {
  return json{{"status", res.status == bft::SolveStatus::optimal  ? "optimal"
                         : res.status == bft::SolveStatus::max_iter ? "max_iter"
                                                                    : "infeasible"},
              {"objective", res.objective},
              {"feasibility", res.feasibility},
              {"kkt_norm", res.kkt_norm},
              {"outer_iterations", res.outer_iterations}};
}

void write_scenario_outputs(const fs::path& outdir, const bft::NlpProblem& problem,
                            const bft::SolveResult& res, json artifact, bool plots) {
  fs::create_directories(outdir);
  {
    std::ofstream os(outdir / "trajectory_nodes.csv");
    bft::write_trajectory_csv(os, problem.layout(), res.d_star, problem.grid());
  }
  const double t_f = problem.ocp().horizon;
  const auto dense = dense_times(t_f, 10 * (problem.num_nodes() - 1));
  {
    std::ofstream os(outdir / "trajectory_dense.csv");
    bft::write_trajectory_csv(os, problem.layout(), res.d_star, dense);
  }
  {
    std::ofstream os(outdir / "solution.json");
    os << artifact.dump(2) << '\n';
  }
  {
    std::ofstream os(outdir / "solver_log.txt");
    for (const auto& line : res.iteration_log) os << line << '\n';
  }
  if (plots) {
    const int m_x = static_cast<int>(problem.layout().state_specs.size());
    const int m_u = static_cast<int>(problem.layout().control_specs.size());
    std::vector<bft::PlotSeries> states, controls;
    for (int q = 0; q < m_x + m_u; ++q) {
      bft::PlotSeries s;
      s.label = (q < m_x ? "x_" + std::to_string(q + 1)
                         : "u_" + std::to_string(q - m_x + 1));
      const bft::MixedSeries series = problem.layout().extract(res.d_star, q);
      for (double t : dense) {
        s.x.push_back(t);
        s.y.push_back(series.eval(t)(0));
      }
      (q < m_x ? states : controls).push_back(std::move(s));
    }
    std::ofstream st(outdir / "states.svg"), ct(outdir / "controls.svg");
    bft::write_svg_plot(st, "states", states);
    bft::write_svg_plot(ct, "controls", controls);
  }
}

// ------------------------------------------------------------------- fit

int cmd_fit(const std::string& input, const std::string& outdir_s, int nb,
            const std::vector<int>& harmonics, bool dc, double lambda, bool compare) {
  bft::DataSet data;
  if (input == "synthetic") {
    data = bft::synthetic_dataset();
  } else {
    std::ifstream in(input);
    if (!in) throw CliError(kExitInput, "cannot open " + input);
    try {
      data = bft::read_dataset_csv(in);
    } catch (const bft::CsvError& e) {
      throw CliError(kExitInput, e.what());
    }
  }
  bft::FitProblem fp;
  fp.samples = data.y;
  fp.lambda = lambda;
  fp.spec.bernstein_order = nb;
  fp.spec.harmonics = harmonics;
  fp.spec.include_dc = dc;
  fp.spec.horizon = data.t.back();
  fp.spec.node_count = static_cast<int>(data.t.size()) - 1;
  try {
    fp.spec.validate();
    fp.validate();
  } catch (const std::exception& e) {
    throw CliError(kExitInput, e.what());
  }

  const fs::path outdir(outdir_s);
  fs::create_directories(outdir);
  json report;
  try {
    const auto [series, rep] = bft::fit(fp, true);
    std::ofstream cs(outdir / "coefficients.csv");
    series.write_csv(cs);
    report["mixed"] = {{"rms", rep.rms}, {"condition", rep.condition_estimate}};
    if (compare) {
      const auto [bs, brep] = bft::fit_bernstein_only(fp, true);
      const auto [fsr, frep] = bft::fit_fourier_only(fp, true);
      report["bernstein_only"] = {{"rms", brep.rms}, {"condition", brep.condition_estimate}};
      report["fourier_only"] = {{"rms", frep.rms}, {"condition", frep.condition_estimate}};
      std::ostringstream table;
      table << "basis,rms\nmixed," << rep.rms << "\nbernstein_only," << brep.rms
            << "\nfourier_only," << frep.rms << '\n';
      write_file(outdir / "rms_table.csv", table.str());
    }
  } catch (const bft::RankDeficiencyError& e) {
    throw CliError(kExitNumerical, std::string("rank deficiency: ") + e.what());
  }
  report["lambda"] = lambda;
  report["samples"] = data.y.size();
  write_file(outdir / "fit_report.json", report.dump(2) + "\n");
  std::cout << report.dump(2) << '\n';
  return 0;
}

// ----------------------------------------------------------------- solve

bft::DisturbanceRejectionParams disturbance_params(const json& cfg) {
  bft::DisturbanceRejectionParams p;
  if (cfg.contains("node_count")) p.node_count = cfg["node_count"].get<int>();
  if (cfg.contains("bernstein_order")) p.bernstein_order = cfg["bernstein_order"].get<int>();
  if (cfg.contains("amplitude")) p.amplitude = cfg["amplitude"].get<double>();
  return p;
}

bft::McmParams mcm_params(const json& cfg) {
  bft::McmParams p;
  if (cfg.contains("node_count")) p.node_count = cfg["node_count"].get<int>();
  if (cfg.contains("bernstein_order")) p.bernstein_order = cfg["bernstein_order"].get<int>();
  if (cfg.contains("fourier_count")) p.fourier_count = cfg["fourier_count"].get<int>();
  return p;
}

bft::ObserverParams observer_params(const json& cfg) {
  bft::ObserverParams p;
  if (cfg.contains("node_count")) p.node_count = cfg["node_count"].get<int>();
  if (cfg.contains("bernstein_order")) p.bernstein_order = cfg["bernstein_order"].get<int>();
  if (cfg.contains("fourier_count")) p.fourier_count = cfg["fourier_count"].get<int>();
  return p;
}

// The analytic-oracle problem (criterion-3 layout): double integrator
// rest-to-rest transfer on [0, 1] minimizing control effort.
bft::ScenarioProblem build_double_integrator(int nb, int nt) {
  bft::OcpDefinition ocp;
  ocp.m_x = 2;
  ocp.m_u = 1;
  ocp.m_e = 4;
  ocp.horizon = 1.0;
  ocp.running_cost = [](const Vec&, const Vec& u) { return u(0) * u(0); };
  ocp.running_grad = [](const Vec& x, const Vec& u, Vec& gx, Vec& gu) {
    gx = Vec::Zero(x.size());
    gu = Vec::Zero(1);
    gu(0) = 2 * u(0);
  };
  ocp.dynamics = [](const Vec& x, const Vec& u) {
    Vec f(2);
    f << x(1), u(0);
    return f;
  };
  ocp.dynamics_jac = [](const Vec&, const Vec&, Eigen::MatrixXd& fx, Eigen::MatrixXd& fu) {
    fx = Eigen::MatrixXd::Zero(2, 2);
    fx(0, 1) = 1;
    fu = Eigen::MatrixXd::Zero(2, 1);
    fu(1, 0) = 1;
  };
  ocp.boundary = [](const Vec& x0, const Vec& x1) {
    Vec e(4);
    e << x0(0), x0(1), x1(0) - 1.0, x1(1);
    return e;
  };
  ocp.boundary_jac = [](const Vec&, const Vec&, Eigen::MatrixXd& ex0, Eigen::MatrixXd& ex1) {
    ex0 = Eigen::MatrixXd::Zero(4, 2);
    ex1 = Eigen::MatrixXd::Zero(4, 2);
    ex0.topRows(2).setIdentity();
    ex1.bottomRows(2).setIdentity();
  };
  bft::BasisSpec spec;
  spec.bernstein_order = nb;
  spec.horizon = 1.0;
  spec.node_count = nt;
  bft::DecisionLayout layout;
  layout.state_specs = {spec, spec};
  layout.control_specs = {spec};
  bft::ScenarioProblem sc{bft::transcribe(ocp, layout, 0.0),
                          Vec::Zero(layout.total_len()), true};
  return sc;
}

int cmd_solve(const std::string& scenario, const std::string& config,
              const std::string& outdir_s, int nt_override, bool slow, bool plots) {
  json cfg = json::object();
  if (!config.empty())
    cfg = load_config(config, {"scenario", "node_count", "bernstein_order",
                               "fourier_count", "amplitude"});
  std::string name = scenario;
  if (name.empty() && cfg.contains("scenario")) name = cfg["scenario"].get<std::string>();
  if (name.empty()) throw CliError(kExitInput, "no scenario given");
  if (nt_override > 0) cfg["node_count"] = nt_override;

  const fs::path outdir(outdir_s);
  json artifact;
  artifact["scenario"] = name;
  artifact["config"] = cfg;
  bft::SolverOptions opts;

  if (name == "disturbance") {
    const auto p = disturbance_params(cfg);
    auto sc = bft::build_disturbance_rejection(p);
    const auto res = bft::solve(sc.problem, sc.init, opts);
    if (res.feasibility > 1e-6)
      throw CliError(kExitNumerical, "disturbance solve did not converge");
    const auto reduced = bft::solve_disturbance_reduced(p);
    const bft::MixedSeries u = sc.problem.layout().extract(res.d_star, 3);
    const bft::MixedSeries xs = sc.problem.layout().extract(res.d_star, 0);
    const bft::MixedSeries vs = sc.problem.layout().extract(res.d_star, 1);
    artifact["solve"] = solve_summary(res);
    artifact["metrics"] = {
        {"variables", reduced.variable_count},
        {"max_error", bft::disturbance_max_state_error(p, reduced.u, nullptr, nullptr)},
        {"max_error_full", bft::disturbance_max_state_error(p, u, &xs, &vs)},
        {"control_effort", control_effort(u, p.horizon)},
        {"control_effort_reduced", reduced.objective}};
    artifact["decision"] = vec_to_json(res.d_star);
    artifact["eq_multipliers"] = vec_to_json(res.eq_multipliers);
    artifact["ineq_multipliers"] = vec_to_json(res.ineq_multipliers);
    write_scenario_outputs(outdir, sc.problem, res, artifact, plots);
  } else if (name == "mcm") {
    const auto p = mcm_params(cfg);
    auto sc = bft::build_mcm(p);
    const auto res = bft::solve(sc.problem, sc.init, opts);
    if (res.feasibility > 1e-6)
      throw CliError(kExitNumerical, "mcm solve did not converge");
    const auto nodes = sc.problem.eval_nodes(res.d_star);
    const auto nodes0 = sc.problem.eval_nodes(sc.init);
    const double cov = bft::coverage_metric(nodes.X.col(0), nodes.X.col(1),
                                            sc.problem.grid(), p);
    const double cov0 = bft::coverage_metric(nodes0.X.col(0), nodes0.X.col(1),
                                             sc.problem.grid(), p);
    const Vec w = bft::mcm_frozen_weights(nodes.X.col(0), nodes.X.col(1),
                                          sc.problem.grid(), p);
    artifact["solve"] = solve_summary(res);
    artifact["metrics"] = {{"coverage_percent", cov},
                           {"initial_coverage_percent", cov0},
                           {"improvement_points", cov - cov0},
                           {"v_min", nodes.U.col(0).minCoeff()},
                           {"v_max", nodes.U.col(0).maxCoeff()},
                           {"max_turn_rate_sq", nodes.Ud.col(1).array().square().maxCoeff()}};
    artifact["decision"] = vec_to_json(res.d_star);
    artifact["eq_multipliers"] = vec_to_json(res.eq_multipliers);
    artifact["ineq_multipliers"] = vec_to_json(res.ineq_multipliers);
    artifact["frozen_weights"] = vec_to_json(w);
    write_scenario_outputs(outdir, sc.problem, res, artifact, plots);
  } else if (name == "observer") {
    if (!slow)
      throw CliError(kExitInput, "the observer scenario is slow; pass --slow to run it");
    const auto p = observer_params(cfg);
    auto sc = bft::build_observer(p);
    const auto res = bft::solve(sc.problem, sc.init, opts);
    if (res.feasibility > 1e-5)
      throw CliError(kExitNumerical, "observer solve did not converge");
    const double crlb = bft::observer_trace_crlb(sc.problem, res.d_star, p);
    const auto nodes = sc.problem.eval_nodes(res.d_star, bft::GridRef::aux);
    double min_dist = std::numeric_limits<double>::infinity();
    for (int k = 0; k < nodes.X.rows(); ++k)
      min_dist = std::min(min_dist, std::hypot(nodes.X(k, 0) - p.target_x,
                                               nodes.X(k, 1) - p.target_y));
    artifact["solve"] = solve_summary(res);
    artifact["metrics"] = {{"trace_crlb", crlb}, {"min_distance", min_dist}};
    artifact["cmt_applicable"] = false;
    artifact["decision"] = vec_to_json(res.d_star);
    artifact["eq_multipliers"] = vec_to_json(res.eq_multipliers);
    artifact["ineq_multipliers"] = vec_to_json(res.ineq_multipliers);
    write_scenario_outputs(outdir, sc.problem, res, artifact, plots);
  } else if (name == "double_integrator") {
    auto sc = build_double_integrator(4, cfg.value("node_count", 50));
    opts.optimality_tol = 1e-8;
    const auto res = bft::solve(sc.problem, sc.init, opts);
    if (res.feasibility > 1e-6)
      throw CliError(kExitNumerical, "double integrator solve did not converge");
    const bft::MixedSeries u = sc.problem.layout().extract(res.d_star, 2);
    artifact["solve"] = solve_summary(res);
    artifact["metrics"] = {{"control_effort", control_effort(u, 1.0)}};
    artifact["decision"] = vec_to_json(res.d_star);
    artifact["eq_multipliers"] = vec_to_json(res.eq_multipliers);
    artifact["ineq_multipliers"] = vec_to_json(res.ineq_multipliers);
    write_scenario_outputs(outdir, sc.problem, res, artifact, plots);
  } else {
    throw CliError(kExitInput, "unknown scenario: " + name);
  }
  std::cout << artifact["metrics"].dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- verify

json residuals_to_json(const bft::DualCertificate& cert) {
  json fam = json::array();
  for (const auto& f : cert.residuals.stationarity)
    fam.push_back({{"family", f.name}, {"rms", f.rms}, {"max", f.max}});
  json out;
  out["stationarity"] = fam;
  out["closure0"] = cert.residuals.closure0;
  out["closure1"] = cert.residuals.closure1;
  out["complementarity_max"] = cert.residuals.complementarity_max;
  out["mu_negativity_max"] = cert.residuals.mu_negativity_max;
  out["adjoint_rms"] = cert.residuals.adjoint_rms;
  out["hamiltonian_consistency_rms"] = cert.residuals.hamiltonian_consistency_rms;
  out["nu_bar"] = vec_to_json(cert.nu_bar);
  out["warnings"] = cert.warnings;
  return out;
}

int cmd_verify(const std::string& artifact_path, const std::string& outdir_s) {
  std::ifstream in(artifact_path);
  if (!in) throw CliError(kExitArtifact, "cannot open artifact: " + artifact_path);
  json artifact;
  try {
    in >> artifact;
  } catch (const json::exception& e) {
    throw CliError(kExitArtifact, std::string("artifact parse error: ") + e.what());
  }
  const std::string name = artifact.value("scenario", "");
  const fs::path outdir(outdir_s);
  fs::create_directories(outdir);

  if (name == "observer") {
    json note = {{"scenario", name},
                 {"notice", "CMT not applicable: pure state constraint (no-fly disk)"}};
    write_file(outdir / "verification.json", note.dump(2) + "\n");
    std::cout << note.dump(2) << '\n';
    return 0;
  }
  if (!artifact.contains("decision") || !artifact.contains("eq_multipliers"))
    throw CliError(kExitArtifact, "artifact is missing the solution or multipliers");

  const json cfg = artifact.value("config", json::object());
  bft::SolveResult res;
  res.d_star = json_to_vec(artifact["decision"]);
  res.eq_multipliers = json_to_vec(artifact["eq_multipliers"]);
  res.ineq_multipliers = json_to_vec(artifact["ineq_multipliers"]);
  res.status = bft::SolveStatus::optimal;

  bft::NlpProblem problem;
  int time_state = -1;
  double stat_lo = 0.0, stat_hi = 1e-3, adjoint_max = 1e-3;
  if (name == "disturbance") {
    problem = bft::build_disturbance_rejection(disturbance_params(cfg)).problem;
    time_state = 2;
    stat_hi = 1e-2;
    adjoint_max = 1e-2;
  } else if (name == "mcm") {
    if (!artifact.contains("frozen_weights"))
      throw CliError(kExitArtifact, "mcm artifact is missing the frozen cell weights");
    problem = bft::mcm_frozen_weight_problem(mcm_params(cfg),
                                             json_to_vec(artifact["frozen_weights"]));
    stat_lo = 1e-4;
    stat_hi = 1e-1;
    adjoint_max = 1e-2;
  } else if (name == "double_integrator") {
    problem = build_double_integrator(4, cfg.value("node_count", 50)).problem;
  } else {
    throw CliError(kExitArtifact, "unknown scenario in artifact: " + name);
  }

  bft::DualCertificate cert;
  try {
    cert = bft::verify_certificate(problem, res, time_state);
  } catch (const bft::CertificateError& e) {
    throw CliError(kExitNumerical, std::string("certificate: ") + e.what());
  }
  json report = residuals_to_json(cert);
  report["scenario"] = name;

  bool pass = cert.residuals.closure0 <= adjoint_max &&
              cert.residuals.closure1 <= adjoint_max &&
              cert.residuals.adjoint_rms <= adjoint_max &&
              cert.residuals.mu_negativity_max <= 1e-8;
  double stat_rms_max = 0.0;
  for (const auto& f : cert.residuals.stationarity)
    stat_rms_max = std::max(stat_rms_max, f.rms);
  pass = pass && stat_rms_max <= stat_hi && stat_rms_max >= stat_lo;
  report["pass"] = pass;
  write_file(outdir / "verification.json", report.dump(2) + "\n");

  // Residual trajectory CSV: costate samples on the node grid.
  std::ostringstream rc;
  rc << "t";
  const int m_x = problem.ocp().m_x;
  for (int i = 0; i < m_x; ++i) rc << ",lambda_" << (i + 1);
  rc << ",mu_max\n";
  for (double t : problem.grid()) {
    rc << t;
    const Vec lam = cert.lambda_traj.eval(t);
    for (int i = 0; i < m_x; ++i) rc << ',' << lam(i);
    const Vec mu = cert.mu_traj.dims() > 0 ? cert.mu_traj.eval(t) : Vec::Zero(1);
    rc << ',' << mu.cwiseAbs().maxCoeff() << '\n';
  }
  write_file(outdir / "residuals.csv", rc.str());
  std::cout << report.dump(2) << '\n';
  return pass ? 0 : kExitNumerical;
}

// ----------------------------------------------------------------- bench

int cmd_bench(const std::string& outdir_s) {
  const fs::path outdir(outdir_s);
  fs::create_directories(outdir);
  std::ostringstream table;
  table << "mode,bernstein_order,variables,cpu_seconds,max_error\n";
  bft::DisturbanceRejectionParams p;

  auto timed = [](auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    const double err = fn();
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return std::pair<double, double>(dt, err);
  };

  {
    const auto [dt, err] = timed([&] {
      const auto sol = bft::solve_disturbance_reduced(p);
      return bft::disturbance_max_state_error(p, sol.u, nullptr, nullptr);
    });
    table << "mixed," << p.bernstein_order << ",7," << dt << ',' << err << '\n';
  }
  for (int nb : {4, 8, 16}) {
    bft::DisturbanceRejectionParams pb = p;
    pb.bernstein_order = nb;
    const int vars = 4 * (nb + 1);
    const auto [dt, err] = timed([&] {
      auto sc = bft::build_disturbance_rejection(pb, true);
      bft::SolverOptions opts;
      opts.constraint_tol = 1e-6;
      opts.max_outer = 40;
      const auto res = bft::solve(sc.problem, sc.init, opts);
      const bft::MixedSeries u = sc.problem.layout().extract(res.d_star, 3);
      const bft::MixedSeries xs = sc.problem.layout().extract(res.d_star, 0);
      const bft::MixedSeries vs = sc.problem.layout().extract(res.d_star, 1);
      return bft::disturbance_max_state_error(pb, u, &xs, &vs);
    });
    table << "bernstein_only," << nb << ',' << vars << ',' << dt << ',' << err << '\n';
  }
  write_file(outdir / "bench.csv", table.str());
  std::cout << table.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixed Bernstein-Fourier trajectory optimization"};
  app.require_subcommand(1);

  // fit
  std::string fit_input, fit_out = "out";
  int fit_nb = 7;
  std::vector<int> fit_harmonics = {1, 2, 3, 4, 5, 6, 7};
  bool fit_dc = true, fit_compare = false;
  double fit_lambda = 1e-14;
  auto* fit = app.add_subcommand("fit", "fit a sampled signal");
  fit->add_option("input", fit_input, "input CSV (t,y) or 'synthetic'")->required();
  fit->add_option("--out", fit_out, "output directory");
  fit->add_option("--nb", fit_nb, "Bernstein order");
  fit->add_option("--harmonics", fit_harmonics, "harmonic indices")->delimiter(',');
  fit->add_flag("--dc", fit_dc, "include the DC column");
  fit->add_option("--lambda", fit_lambda, "Tikhonov weight");
  fit->add_flag("--compare", fit_compare, "also fit restricted bases");

  // solve
  std::string sv_scenario, sv_config, sv_out = "out";
  int sv_nt = 0;
  bool sv_slow = false, sv_plots = false;
  auto* sv = app.add_subcommand("solve", "solve a scenario");
  sv->add_option("scenario", sv_scenario,
                 "disturbance | mcm | observer | double_integrator "
                 "(may also come from the config file)");
  sv->add_option("--config", sv_config, "JSON config with parameter overrides");
  sv->add_option("--out", sv_out, "output directory");
  sv->add_option("--nt", sv_nt, "node-count override");
  sv->add_flag("--slow", sv_slow, "allow long-running scenarios");
  sv->add_flag("--plots", sv_plots, "write SVG plots");

  // verify
  std::string vf_artifact, vf_out = "out";
  auto* vf = app.add_subcommand("verify", "verify a solution artifact");
  vf->add_option("artifact", vf_artifact, "solution.json from solve")->required();
  vf->add_option("--out", vf_out, "output directory");

  // bench
  std::string bn_out = "out";
  auto* bn = app.add_subcommand("bench", "basis comparison table");
  bn->add_option("--out", bn_out, "output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (fit->parsed())
      return cmd_fit(fit_input, fit_out, fit_nb, fit_harmonics, fit_dc, fit_lambda,
                     fit_compare);
    if (sv->parsed()) return cmd_solve(sv_scenario, sv_config, sv_out, sv_nt, sv_slow,
                                       sv_plots);
    if (vf->parsed()) return cmd_verify(vf_artifact, vf_out);
    if (bn->parsed()) return cmd_bench(bn_out);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
