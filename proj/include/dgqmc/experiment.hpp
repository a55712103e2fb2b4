#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dgqmc/cbc.hpp"
#include "dgqmc/conforming.hpp"
#include "dgqmc/dgfem.hpp"
#include "dgqmc/errors.hpp"
#include "dgqmc/field.hpp"
#include "dgqmc/lattice.hpp"
#include "dgqmc/mesh.hpp"
#include "dgqmc/qmc_weights.hpp"

namespace dgqmc {

enum class ErrorMode { spread, reference };
enum class Discretization { dg, conforming };

struct ExperimentConfig {
  FieldMode mode = FieldMode::affine;
  double a0 = 5.0;
  double decay = 1.3;
  int s = 100;
  int mesh_m = 16;
  int degree = 1;
  int theta = -1;
  bool eta_analytic = true;
  double eta_value = 0.0;
  std::vector<std::uint64_t> n_list = {16384, 32768, 65536, 131072, 262144, 524288};
  int shifts = 16;
  std::uint64_t seed = 1;
  std::string vector_source = "cbc";  // "cbc" or a generating-vector file path
  std::string out = "qmc_table.txt";
  Discretization discretization = Discretization::dg;
  ErrorMode error_mode = ErrorMode::spread;
  double cbc_p_slack = 0.01;  // p = 1/decay + slack feeds the lambda choice

  void validate() const {
    if (s < 1) throw validation_error("config: s must be >= 1");
    if (!(decay > 1.0)) throw validation_error("config: decay must be > 1");
    if (!(a0 > 0.0)) throw validation_error("config: a0 must be positive");
    if (mesh_m < 1) throw validation_error("config: mesh_m must be >= 1");
    if (degree != 1 && degree != 2) throw validation_error("config: degree must be 1 or 2");
    if (theta != -1 && theta != 0 && theta != 1)
      throw validation_error("config: theta must be -1, 0, or 1");
    if (!eta_analytic && !(eta_value > 0.0))
      throw validation_error("config: eta must be 'analytic' or a positive number");
    if (n_list.empty()) throw validation_error("config: n_list must not be empty");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
      if (!is_power_of_two(n_list[i]))
        throw validation_error("config: n_list entries must be powers of two");
      if (i > 0 && n_list[i] <= n_list[i - 1])
        throw validation_error("config: n_list must be strictly increasing");
    }
    if (shifts < 2) throw validation_error("config: shifts must be >= 2 (spread estimator)");
  }

  RandomFieldSpec field_spec() const {
    return RandomFieldSpec::constant_base(mode, a0, s, decay);
  }
};

struct RateFit {
  double coefficient = 0.0;  // C in C * n^r
  double rate = 0.0;         // r
  double residual = 0.0;     // rms log-residual
};

/// Least-squares fit of log e = log C + r log n.
inline RateFit fit_rate(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw validation_error("fit_rate: need at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [n, e] : points) {
    if (!(n > 0.0) || !(e > 0.0))
      throw validation_error("fit_rate: points must be positive");
    const double x = std::log(n), y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(points.size());
  RateFit fit;
  fit.rate = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.coefficient = std::exp((sy - fit.rate * sx) / m);
  double rss = 0.0;
  for (const auto& [n, e] : points) {
    const double r = std::log(e) - (std::log(fit.coefficient) + fit.rate * std::log(n));
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / m);
  return fit;
}

/// Unbiased spread estimator for randomly shifted rules:
///   sqrt( 1/(R(R-1)) sum_r ||Q_r - Qbar||^2 ).
inline double rms_error_estimate(
    const std::vector<std::vector<double>>& shift_means,
    const std::function<double(std::span<const double>)>& l2_norm_of) {
  const std::size_t R = shift_means.size();
  if (R < 2) throw validation_error("rms_error_estimate: need at least two shifts");
  const std::size_t width = shift_means.front().size();
  std::vector<double> mean(width, 0.0);
  for (const auto& q : shift_means) {
    if (q.size() != width)
      throw validation_error("rms_error_estimate: inconsistent mean widths");
    for (std::size_t k = 0; k < width; ++k) mean[k] += q[k];
  }
  for (double& v : mean) v /= static_cast<double>(R);
  double acc = 0.0;
  std::vector<double> diff(width);
  for (const auto& q : shift_means) {
    for (std::size_t k = 0; k < width; ++k) diff[k] = q[k] - mean[k];
    const double d = l2_norm_of(diff);
    acc += d * d;
  }
  return std::sqrt(acc / (static_cast<double>(R) * static_cast<double>(R - 1)));
}

struct ConvergenceReport {
  std::vector<std::uint64_t> n_values;
  std::vector<double> errors;
  RateFit fit;
  bool fit_valid = false;  // false when some error vanished (degenerate integrand)
  double wall_seconds = 0.0;
  std::string config_echo;
  std::string vector_origin;
};

/// Worker-local sample evaluator: y -> dof vector.
using SampleEvaluator = std::function<std::vector<double>(std::span<const double>)>;
using EvaluatorFactory = std::function<SampleEvaluator()>;

namespace detail {

/// Per-shift means of evaluator results over the shifted lattice point set,
/// fanned out over a bounded worker pool. Points are consumed in fixed blocks
/// and block sums merged pairwise, so results are identical for every pool
/// size. A failing evaluator aborts the run with sample provenance.
inline std::vector<std::vector<double>> shift_means_parallel(
    const GeneratingVector& gv, std::uint64_t n, int s, const ShiftSet& shifts,
    SampleDomain domain, const EvaluatorFactory& factory, std::size_t width,
    int threads) {
  constexpr std::uint64_t block = 64;
  const std::uint64_t blocks_per_shift = (n + block - 1) / block;
  const std::uint64_t total_blocks = blocks_per_shift * static_cast<std::uint64_t>(shifts.count);

  std::vector<std::vector<std::vector<double>>> block_sums(
      static_cast<std::size_t>(shifts.count),
      std::vector<std::vector<double>>(blocks_per_shift));

  std::atomic<std::uint64_t> next{0};
  std::mutex error_mutex;
  std::string first_error;
  std::atomic<bool> failed{false};

  auto worker = [&]() {
    SampleEvaluator evaluate = factory();
    std::vector<double> y(static_cast<std::size_t>(s));
    std::vector<double> delta;
    int delta_shift = -1;
    while (true) {
      const std::uint64_t task = next.fetch_add(1);
      if (task >= total_blocks || failed.load()) break;
      const int r = static_cast<int>(task / blocks_per_shift);
      const std::uint64_t b = task % blocks_per_shift;
      if (r != delta_shift) {
        delta = shifts.shift(r);
        delta_shift = r;
      }
      std::vector<double> acc(width, 0.0);
      const std::uint64_t lo = b * block;
      const std::uint64_t hi = std::min(n, lo + block);
      for (std::uint64_t i = lo; i < hi; ++i) {
        // lattice index i+1; row n is the zero point
        for (int j = 0; j < s; ++j) {
          const double t =
              static_cast<double>(((i + 1) * gv.z[static_cast<std::size_t>(j)]) % n) /
              static_cast<double>(n);
          const double w = fractional(t + delta[static_cast<std::size_t>(j)]);
          y[static_cast<std::size_t>(j)] =
              domain == SampleDomain::centered_uniform
                  ? w - 0.5
                  : inverse_normal_cdf(w > 0.0 ? w : min_cdf_argument);
        }
        try {
          const std::vector<double> result = evaluate(y);
          if (result.size() != width)
            throw numerical_error("evaluator result width mismatch");
          for (std::size_t k = 0; k < width; ++k) acc[k] += result[k];
        } catch (const std::exception& e) {
          std::scoped_lock lock(error_mutex);
          if (!failed.exchange(true)) {
            std::ostringstream os;
            os << "sample evaluation failed (shift " << r << ", point " << (i + 1)
               << ", y = [";
            for (int j = 0; j < s; ++j) os << (j ? ", " : "") << y[static_cast<std::size_t>(j)];
            os << "]): " << e.what();
            first_error = os.str();
          }
          return;
        }
      }
      block_sums[static_cast<std::size_t>(r)][b] = std::move(acc);
    }
  };

  const int pool = std::max(1, threads);
  std::vector<std::thread> team;
  team.reserve(static_cast<std::size_t>(pool) - 1);
  for (int t = 1; t < pool; ++t) team.emplace_back(worker);
  worker();
  for (auto& th : team) th.join();
  if (failed.load()) throw numerical_error(first_error);

  std::vector<std::vector<double>> means(static_cast<std::size_t>(shifts.count));
  for (int r = 0; r < shifts.count; ++r) {
    auto& sums = block_sums[static_cast<std::size_t>(r)];
    for (std::uint64_t stride = 1; stride < blocks_per_shift; stride *= 2)
      for (std::uint64_t b = 0; b + stride < blocks_per_shift; b += 2 * stride)
        for (std::size_t k = 0; k < width; ++k) sums[b][k] += sums[b + stride][k];
    means[static_cast<std::size_t>(r)] = std::move(sums[0]);
    for (double& v : means[static_cast<std::size_t>(r)])
      v /= static_cast<double>(n);
  }
  return means;
}

inline std::string canonical_echo(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "mode = " << to_string(c.mode) << "\n"
     << "a0 = " << c.a0 << "\n"
     << "decay = " << c.decay << "\n"
     << "s = " << c.s << "\n"
     << "mesh_m = " << c.mesh_m << "\n"
     << "degree = " << c.degree << "\n"
     << "theta = " << c.theta << "\n";
  if (c.eta_analytic)
    os << "eta = analytic\n";
  else
    os << "eta = " << c.eta_value << "\n";
  os << "n_list = ";
  for (std::size_t i = 0; i < c.n_list.size(); ++i) os << (i ? "," : "") << c.n_list[i];
  os << "\n"
     << "shifts = " << c.shifts << "\n"
     << "seed = " << c.seed << "\n"
     << "vector = " << c.vector_source << "\n"
     << "discretization = " << (c.discretization == Discretization::dg ? "dg" : "conforming")
     << "\n"
     << "error_mode = " << (c.error_mode == ErrorMode::spread ? "spread" : "reference")
     << "\n"
     << "out = " << c.out << "\n";
  return os.str();
}

}  // namespace detail

/// Resolves the generating vector named by the config: an existing lattice
/// file, or a CBC construction with the model's tailored weights at the
/// largest requested n.
inline GeneratingVector resolve_generating_vector(const ExperimentConfig& config) {
  const std::uint64_t n_max = config.n_list.back();
  if (config.vector_source != "cbc")
    return load_generating_vector(config.vector_source, n_max, config.s);

  const RandomFieldSpec spec = config.field_spec();
  const double p = 1.0 / config.decay + config.cbc_p_slack;
  const double lambda = lambda_from_p(p, 0.25);
  std::vector<double> beta(static_cast<std::size_t>(config.s));
  for (int j = 0; j < config.s; ++j)
    beta[static_cast<std::size_t>(j)] = spec.basis[static_cast<std::size_t>(j)].amplitude;

  if (config.mode == FieldMode::affine) {
    const double a_min = coefficient_bounds(spec).a_min;
    std::vector<double> b(beta);
    for (double& v : b) v /= a_min;  // C_DG = alpha = 1 defaults
    return cbc_construct(n_max, config.s, weights_affine(b, lambda)).vector;
  }
  return cbc_construct(n_max, config.s, weights_lognormal(beta, lambda)).vector;
}

/// Generic convergence driver over an injected evaluator; the production
/// entry point run_convergence builds the PDE pipelines on top of this.
inline ConvergenceReport run_convergence_with(
    const ExperimentConfig& config, const GeneratingVector& gv,
    const EvaluatorFactory& factory, std::size_t width,
    const std::function<double(std::span<const double>)>& l2_norm_of, int threads) {
  config.validate();
  if (gv.z.size() < static_cast<std::size_t>(config.s))
    throw validation_error("run_convergence: generating vector shorter than s");

  const auto start = std::chrono::steady_clock::now();
  const ShiftSet shifts(config.seed, config.shifts, config.s);
  const SampleDomain domain = config.mode == FieldMode::affine
                                  ? SampleDomain::centered_uniform
                                  : SampleDomain::normal;

  ConvergenceReport report;
  report.config_echo = detail::canonical_echo(config);
  report.vector_origin = config.vector_source;

  std::vector<std::vector<double>> grand_means;
  for (const std::uint64_t n : config.n_list) {
    const auto means = detail::shift_means_parallel(gv, n, config.s, shifts, domain,
                                                    factory, width, threads);
    if (config.error_mode == ErrorMode::spread) {
      report.n_values.push_back(n);
      report.errors.push_back(rms_error_estimate(means, l2_norm_of));
    } else {
      std::vector<double> grand(width, 0.0);
      for (const auto& q : means)
        for (std::size_t k = 0; k < width; ++k) grand[k] += q[k];
      for (double& v : grand) v /= static_cast<double>(config.shifts);
      grand_means.push_back(std::move(grand));
    }
  }

  if (config.error_mode == ErrorMode::reference) {
    const std::vector<double>& ref = grand_means.back();
    std::vector<double> diff(width);
    for (std::size_t i = 0; i + 1 < grand_means.size(); ++i) {
      for (std::size_t k = 0; k < width; ++k) diff[k] = grand_means[i][k] - ref[k];
      report.n_values.push_back(config.n_list[i]);
      report.errors.push_back(l2_norm_of(diff));
    }
    if (report.n_values.size() < 2)
      throw validation_error("run_convergence: reference mode needs >= 3 n values");
  }

  bool all_positive = true;
  for (double e : report.errors) all_positive = all_positive && e > 0.0;
  if (all_positive && report.n_values.size() >= 2) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < report.n_values.size(); ++i)
      pts.emplace_back(static_cast<double>(report.n_values[i]), report.errors[i]);
    report.fit = fit_rate(pts);
    report.fit_valid = true;
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace detail {

/// Shared immutable state of the DG sample pipeline: space, assembler
/// pattern, load vector, and the basis-expansion table at all quadrature
/// points (so each sample costs one fused multiply-add sweep, not sin calls).
struct DgPipeline {
  RandomFieldSpec spec;
  Mesh mesh;
  DGSpace space;
  IpdgAssembler assembler;
  Eigen::VectorXd load;
  int theta;
  bool eta_analytic;
  double eta_fixed;  // used when analytic-affine or constant override
  std::vector<double> psi_vol;   // (point, j)
  std::vector<double> psi_face;  // (point, j)
  std::vector<double> a0_vol, a0_face;

  DgPipeline(const ExperimentConfig& config, const SpatialFunction& f)
      : spec(config.field_spec()),
        mesh(build_structured_mesh(config.mesh_m)),
        space(mesh, config.degree),
        assembler(space),
        theta(config.theta),
        eta_analytic(config.eta_analytic) {
    load = assemble_load(space, f);
    if (!config.eta_analytic) {
      eta_fixed = config.eta_value;
    } else if (spec.mode == FieldMode::affine) {
      eta_fixed = penalty_value(spec, {}, theta, PenaltyPolicy::analytic()).eta;
    } else {
      eta_fixed = 0.0;  // per-sample
    }

    const int s = spec.dimension;
    psi_vol.resize(space.total_volume_points() * static_cast<std::size_t>(s));
    a0_vol.resize(space.total_volume_points());
    for (std::size_t p = 0; p < space.total_volume_points(); ++p) {
      a0_vol[p] = spec.a0(space.vol_x(p), space.vol_y(p));
      for (int j = 0; j < s; ++j)
        psi_vol[p * static_cast<std::size_t>(s) + static_cast<std::size_t>(j)] =
            spec.basis[static_cast<std::size_t>(j)].evaluate(space.vol_x(p), space.vol_y(p));
    }
    psi_face.resize(space.total_face_points() * static_cast<std::size_t>(s));
    a0_face.resize(space.total_face_points());
    for (std::size_t p = 0; p < space.total_face_points(); ++p) {
      a0_face[p] = spec.a0(space.face_x(p), space.face_y(p));
      for (int j = 0; j < s; ++j)
        psi_face[p * static_cast<std::size_t>(s) + static_cast<std::size_t>(j)] =
            spec.basis[static_cast<std::size_t>(j)].evaluate(space.face_x(p), space.face_y(p));
    }
  }

  double eta_for(std::span<const double> y) const {
    if (!eta_analytic || spec.mode == FieldMode::affine) return eta_fixed;
    return penalty_value(spec, y, theta, PenaltyPolicy::analytic()).eta;
  }

  void coefficient_for(std::span<const double> y, CoefficientTable& table) const {
    const int s = spec.dimension;
    table.volume.resize(a0_vol.size());
    table.face.resize(a0_face.size());
    const bool affine = spec.mode == FieldMode::affine;
    for (std::size_t p = 0; p < a0_vol.size(); ++p) {
      double expansion = 0.0;
      const double* row = psi_vol.data() + p * static_cast<std::size_t>(s);
      for (int j = 0; j < s; ++j) expansion += y[static_cast<std::size_t>(j)] * row[j];
      const double a = affine ? a0_vol[p] + expansion : a0_vol[p] * std::exp(expansion);
      if (!(a > 0.0)) throw numerical_error("coefficient nonpositive at a quadrature point");
      table.volume[p] = a;
    }
    for (std::size_t p = 0; p < a0_face.size(); ++p) {
      double expansion = 0.0;
      const double* row = psi_face.data() + p * static_cast<std::size_t>(s);
      for (int j = 0; j < s; ++j) expansion += y[static_cast<std::size_t>(j)] * row[j];
      const double a = affine ? a0_face[p] + expansion : a0_face[p] * std::exp(expansion);
      if (!(a > 0.0)) throw numerical_error("coefficient nonpositive at a quadrature point");
      table.face[p] = a;
    }
  }
};

}  // namespace detail

/// Convergence study for the configured PDE pipeline (default load f(x) = x1).
inline ConvergenceReport run_convergence(const ExperimentConfig& config, int threads = 1,
                                         const SpatialFunction& f =
                                             [](double x, double) { return x; }) {
  config.validate();
  const GeneratingVector gv = resolve_generating_vector(config);

  if (config.discretization == Discretization::conforming) {
    const RandomFieldSpec spec = config.field_spec();
    auto shared = std::make_shared<ConformingP1>(config.mesh_m);
    const std::size_t width = static_cast<std::size_t>(shared->dofs());
    EvaluatorFactory factory = [spec, f, m = config.mesh_m]() -> SampleEvaluator {
      auto solver = std::make_shared<ConformingP1>(m);
      return [spec, f, solver](std::span<const double> y) {
        std::vector<double> yv(y.begin(), y.end());
        return solver->solve(
            [&spec, yv](double x1, double x2) {
              return eval_coefficient(spec, yv, x1, x2);
            },
            f);
      };
    };
    auto l2 = [shared](std::span<const double> diff) { return shared->l2_norm(diff); };
    return run_convergence_with(config, gv, factory, width, l2, threads);
  }

  auto pipeline = std::make_shared<detail::DgPipeline>(config, f);
  if (config.theta != 1) {
    // representative stability check at y = 0 (exact for y-independent eta)
    const std::vector<double> origin(static_cast<std::size_t>(config.s), 0.0);
    const PenaltyPolicy policy = config.eta_analytic
                                     ? PenaltyPolicy::analytic()
                                     : PenaltyPolicy::constant(config.eta_value);
    const PenaltyResult check =
        penalty_value(pipeline->spec, origin, config.theta, policy,
                      discrete_trace_constant(pipeline->space));
    if (check.below_threshold)
      std::cerr << "warning: eta = " << check.eta
                << " is below the coercivity threshold " << check.stability_threshold
                << " for theta = " << config.theta << "\n";
  }
  const std::size_t width = static_cast<std::size_t>(pipeline->space.dofs());
  EvaluatorFactory factory = [pipeline]() -> SampleEvaluator {
    auto solver = std::make_shared<SystemSolver>(pipeline->assembler, pipeline->theta);
    auto table = std::make_shared<CoefficientTable>();
    return [pipeline, solver, table](std::span<const double> y) {
      pipeline->coefficient_for(y, *table);
      const double eta = pipeline->eta_for(y);
      Eigen::SparseMatrix<double> A =
          pipeline->assembler.assemble(*table, pipeline->theta, eta);
      Eigen::VectorXd u = solver->solve(A, pipeline->load);
      return std::vector<double>(u.data(), u.data() + u.size());
    };
  };
  auto l2 = [pipeline](std::span<const double> diff) {
    return l2_norm(pipeline->space, diff);
  };
  return run_convergence_with(config, gv, factory, width, l2, threads);
}

/// Writes the plot-ready table: "n error" rows at full double precision, no
/// header, plus a sidecar .meta file with the config echo and fitted model.
inline void emit_table(const ConvergenceReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("emit_table: cannot write " + path);
  out.precision(17);
  for (std::size_t i = 0; i < report.n_values.size(); ++i)
    out << report.n_values[i] << " " << report.errors[i] << "\n";
  if (!out) throw io_error("emit_table: write failed for " + path);

  std::ofstream meta(path + ".meta");
  if (!meta) throw io_error("emit_table: cannot write " + path + ".meta");
  meta.precision(17);
  meta << "# fitted model: error = C * n^r\n"
       << "fit_C = " << report.fit.coefficient << "\n"
       << "fit_r = " << report.fit.rate << "\n"
       << "fit_residual = " << report.fit.residual << "\n"
       << "wall_seconds = " << report.wall_seconds << "\n"
       << "vector = " << report.vector_origin << "\n"
       << "# resolved configuration\n"
       << report.config_echo;
  if (!meta) throw io_error("emit_table: write failed for " + path + ".meta");
}

/// Reads a two-column "n error" table (the emit_table layout).
inline std::vector<std::pair<double, double>> read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("read_table: cannot open " + path);
  std::vector<std::pair<double, double>> rows;
  double n = 0.0, e = 0.0;
  while (in >> n >> e) rows.emplace_back(n, e);
  if (rows.empty()) throw io_error("read_table: no rows in " + path);
  return rows;
}

}  // namespace dgqmc
