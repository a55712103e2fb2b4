// Command-line front end: config-driven solves, QMC convergence runs, CBC
// vector construction, weight tables, mesh diagnostics, and rate fitting.
// Diagnostics go to stderr; data goes to files or stdout.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dgqmc/cbc.hpp"
#include "dgqmc/config.hpp"
#include "dgqmc/conforming.hpp"
#include "dgqmc/dgfem.hpp"
#include "dgqmc/experiment.hpp"
#include "dgqmc/field.hpp"
#include "dgqmc/lattice.hpp"
#include "dgqmc/mesh.hpp"
#include "dgqmc/qmc_weights.hpp"
#include "dgqmc/version.hpp"

namespace {

using namespace dgqmc;

std::vector<double> parse_sample(const std::string& text, int s) {
  std::vector<double> y(static_cast<std::size_t>(s), 0.0);
  if (text.empty()) return y;
  std::stringstream ss(text);
  std::string item;
  std::size_t idx = 0;
  while (std::getline(ss, item, ',')) {
    if (idx >= y.size())
      throw validation_error("--y has more entries than the truncation dimension");
    y[idx++] = std::stod(item);
  }
  return y;
}

/// Tailored per-dimension factors for the configured model (unit analytic
/// constants), plus the lambda choice from the summability exponent.
std::pair<PodWeights, double> model_weights(const ExperimentConfig& config,
                                            std::optional<double> lambda_override = {}) {
  const RandomFieldSpec spec = config.field_spec();
  const double p = 1.0 / config.decay + config.cbc_p_slack;
  const double lambda = lambda_override.value_or(lambda_from_p(p, 0.25));
  std::vector<double> beta(static_cast<std::size_t>(config.s));
  for (int j = 0; j < config.s; ++j)
    beta[static_cast<std::size_t>(j)] = spec.basis[static_cast<std::size_t>(j)].amplitude;
  if (config.mode == FieldMode::affine) {
    const double a_min = coefficient_bounds(spec).a_min;
    for (double& v : beta) v /= a_min;
    return {weights_affine(beta, lambda), lambda};
  }
  return {weights_lognormal(beta, lambda), lambda};
}

int run_solve_one(const std::string& config_path, const std::string& y_text,
                  const std::string& dump_path) {
  const ExperimentConfig config = parse_config(config_path);
  const RunManifest manifest = make_manifest("solve-one", config);
  write_manifest(manifest, std::cerr);

  const RandomFieldSpec spec = config.field_spec();
  const std::vector<double> y = parse_sample(y_text, config.s);
  const Mesh mesh = build_structured_mesh(config.mesh_m);
  const DGSpace space(mesh, config.degree);

  const PenaltyPolicy policy = config.eta_analytic
                                   ? PenaltyPolicy::analytic()
                                   : PenaltyPolicy::constant(config.eta_value);
  const double ctr = discrete_trace_constant(space);
  const PenaltyResult penalty = penalty_value(spec, y, config.theta, policy, ctr);
  if (penalty.below_threshold)
    std::cerr << "warning: eta = " << penalty.eta
              << " is below the coercivity threshold " << penalty.stability_threshold
              << " for theta = " << config.theta << "\n";

  auto a_eval = [&spec, &y](double x1, double x2) {
    return eval_coefficient(spec, y, x1, x2);
  };
  auto sys = assemble_ipdg(space, a_eval, config.theta, penalty.eta);
  sys.load = assemble_load(space, [](double x, double) { return x; });
  sys.sample = y;
  const std::vector<double> u = solve_system(sys);

  const auto table = tabulate_coefficient(space, a_eval);
  std::cout << "dofs = " << space.dofs() << "\n"
            << "eta = " << penalty.eta << "\n"
            << "dg_norm = " << dg_norm(space, u, table, penalty.eta) << "\n"
            << "l2_norm = " << l2_norm(space, u) << "\n";

  if (!dump_path.empty()) {
    std::ofstream out(dump_path);
    if (!out) throw io_error("solve-one: cannot write " + dump_path);
    out.precision(17);
    for (double v : u) out << v << "\n";
    std::cerr << "wrote " << space.dofs() << " dof values to " << dump_path << "\n";
  }
  return 0;
}

int run_qmc(const std::string& config_path, int threads) {
  const ExperimentConfig config = parse_config(config_path);
  const RunManifest manifest = make_manifest("qmc-run", config);
  write_manifest(manifest, config.out + ".manifest");
  std::cerr << "manifest written to " << config.out << ".manifest\n";

  const ConvergenceReport report = run_convergence(config, threads);
  emit_table(report, config.out);

  std::cout.precision(15);
  for (std::size_t i = 0; i < report.n_values.size(); ++i)
    std::cout << report.n_values[i] << " " << report.errors[i] << "\n";
  if (report.fit_valid)
    std::cerr << "fit: error ~ " << report.fit.coefficient << " * n^("
              << report.fit.rate << "), residual " << report.fit.residual << "\n";
  std::cerr << "wall time " << report.wall_seconds << " s, table " << config.out << "\n";
  return 0;
}

int run_cbc(const std::string& config_path, std::optional<std::uint64_t> n_override,
            const std::string& out_override) {
  const ExperimentConfig config = parse_config(config_path);
  const std::uint64_t n = n_override.value_or(config.n_list.back());
  const std::string out = out_override.empty() ? "lattice_vector.txt" : out_override;

  const RunManifest manifest = make_manifest("cbc", config);
  write_manifest(manifest, out + ".manifest");

  const auto [weights, lambda] = model_weights(config);
  const CbcResult result = cbc_construct(n, config.s, weights);
  save_generating_vector(out, result.vector);
  std::cerr << "cbc: n = " << n << ", s = " << config.s << ", lambda = " << lambda
            << ", truncation order " << result.truncation_order << "\n";
  std::cerr << "shift-averaged worst-case error^2 at s: " << result.error_sq.back()
            << "\n";
  std::cout << "wrote " << out << "\n";
  return 0;
}

int run_weights(const std::string& config_path, std::optional<double> lambda_override,
                const std::string& out_path) {
  const ExperimentConfig config = parse_config(config_path);
  const RunManifest manifest = make_manifest("weights", config);
  write_manifest(manifest, std::cerr);

  const auto [weights, lambda] = model_weights(config, lambda_override);

  std::cout.precision(15);
  std::cout << "# lambda = " << lambda << "\n";
  std::cout << "# order 1 weights gamma_{j}\n";
  for (int j = 0; j < config.s; ++j)
    std::cout << (j + 1) << " " << weights.gamma(std::vector<int>{j}) << "\n";
  const int head = std::min(config.s, 5);
  std::cout << "# order 2 and 3 weights over the leading " << head << " dimensions\n";
  for (int a = 0; a < head; ++a)
    for (int b = a + 1; b < head; ++b)
      std::cout << "{" << (a + 1) << "," << (b + 1) << "} "
                << weights.gamma(std::vector<int>{a, b}) << "\n";
  for (int a = 0; a < head; ++a)
    for (int b = a + 1; b < head; ++b)
      for (int c = b + 1; c < head; ++c)
        std::cout << "{" << (a + 1) << "," << (b + 1) << "," << (c + 1) << "} "
                  << weights.gamma(std::vector<int>{a, b, c}) << "\n";

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw io_error("weights: cannot write " + out_path);
    out.precision(17);
    for (int j = 0; j < config.s; ++j)
      out << (j + 1) << " " << weights.dim_factor(j) << "\n";
    std::cerr << "wrote per-dimension factors to " << out_path << "\n";
  }
  return 0;
}

int run_mesh_info(int m, bool dump) {
  const Mesh mesh = build_structured_mesh(m);
  const MeshQuality q = mesh_quality_report(mesh);
  std::cout << "vertices = " << mesh.vertices.size() << "\n"
            << "elements = " << mesh.elements.size() << "\n"
            << "faces = " << mesh.faces.size() << "\n"
            << "min_angle_deg = " << q.min_angle_deg << "\n"
            << "max_diameter_ratio = " << q.max_diameter_ratio << "\n"
            << "quality_ok = " << (q.ok ? "yes" : "no") << "\n";
  if (dump) {
    std::cout.precision(17);
    std::cout << "# vertices: x y\n";
    for (const Point2& p : mesh.vertices) std::cout << p.x << " " << p.y << "\n";
    std::cout << "# elements: v0 v1 v2\n";
    for (const auto& t : mesh.elements)
      std::cout << t[0] << " " << t[1] << " " << t[2] << "\n";
    std::cout << "# faces: v0 v1 plus minus nx ny h\n";
    for (const Face& f : mesh.faces)
      std::cout << f.vertices[0] << " " << f.vertices[1] << " " << f.plus_element << " "
                << f.minus_element << " " << f.normal[0] << " " << f.normal[1] << " "
                << f.diameter << "\n";
  }
  return 0;
}

int run_rates(const std::string& table_path) {
  const auto rows = read_table(table_path);
  const RateFit fit = fit_rate(rows);
  std::cout.precision(15);
  std::cout << "C = " << fit.coefficient << "\n"
            << "r = " << fit.rate << "\n"
            << "residual = " << fit.residual << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lattice-rule uncertainty quantification for interior-penalty DG"};
  app.set_version_flag("--version", dgqmc::version_string);
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  app.add_option("--threads", threads, "worker pool cap for sample solves");
  app.require_subcommand(1);

  std::string config_path, y_text, dump_path, out_path, table_path;
  int mesh_m = 16;
  bool dump_mesh = false;

  CLI::App* solve = app.add_subcommand("solve-one", "single PDE solve at a parameter sample");
  solve->add_option("config", config_path, "configuration file")->required();
  solve->add_option("--y", y_text, "comma-separated sample (zero padded)");
  solve->add_option("--dump", dump_path, "write dof values to this file");

  CLI::App* qmc = app.add_subcommand("qmc-run", "convergence study and table emission");
  qmc->add_option("config", config_path, "configuration file")->required();

  CLI::App* cbc = app.add_subcommand("cbc", "construct and save a generating vector");
  cbc->add_option("config", config_path, "configuration file")->required();
  std::uint64_t n_value = 0;
  CLI::Option* n_opt = cbc->add_option("--n", n_value, "point count (default: largest n_list entry)");
  cbc->add_option("--out", out_path, "output vector file (default lattice_vector.txt)");

  CLI::App* weights = app.add_subcommand("weights", "print the tailored weight table");
  weights->add_option("config", config_path, "configuration file")->required();
  double lambda_value = 0.0;
  CLI::Option* lambda_opt = weights->add_option("--lambda", lambda_value, "override lambda");
  weights->add_option("--out", out_path, "write per-dimension factors to this file");

  CLI::App* mesh = app.add_subcommand("mesh-info", "mesh quality report");
  mesh->add_option("--m", mesh_m, "subdivisions per side")->required();
  mesh->add_flag("--dump", dump_mesh, "print the vertex/element/face listing");

  CLI::App* rates = app.add_subcommand("rates", "fit C * n^r to an existing table");
  rates->add_option("table", table_path, "two-column n/error table")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve_one(config_path, y_text, dump_path);
    if (qmc->parsed()) return run_qmc(config_path, threads);
    if (cbc->parsed())
      return run_cbc(config_path,
                     n_opt->count() > 0 ? std::optional<std::uint64_t>(n_value)
                                        : std::nullopt,
                     out_path);
    if (weights->parsed())
      return run_weights(config_path,
                         lambda_opt->count() > 0 ? std::optional<double>(lambda_value)
                                                 : std::nullopt,
                         out_path);
    if (mesh->parsed()) return run_mesh_info(mesh_m, dump_mesh);
    if (rates->parsed()) return run_rates(table_path);
  } catch (const dgqmc::validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const dgqmc::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const dgqmc::io_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
