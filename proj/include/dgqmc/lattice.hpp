#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dgqmc/errors.hpp"
#include "dgqmc/rng.hpp"
#include "dgqmc/special_functions.hpp"

namespace dgqmc {

/// Rank-1 lattice generating vector; components are kept reduced mod n.
struct GeneratingVector {
  std::vector<std::uint64_t> z;
  std::uint64_t n = 0;
};

inline bool is_power_of_two(std::uint64_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Reads a generating vector from a text file in either published layout:
/// one integer per line, or "index value" pairs per line. Components are
/// reduced mod n.
inline GeneratingVector load_generating_vector(const std::string& path, std::uint64_t n,
                                               int s) {
  if (s < 1) throw validation_error("load_generating_vector: dimension must be >= 1");
  std::ifstream in(path);
  if (!in) throw io_error("load_generating_vector: cannot open " + path);

  std::vector<std::uint64_t> entries;
  std::string line;
  bool pair_layout = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    long long first = 0;
    if (!(ls >> first)) {
      if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      throw io_error("load_generating_vector: unparsable line '" + line + "'");
    }
    long long second = 0;
    if (ls >> second) {
      pair_layout = true;
      entries.push_back(static_cast<std::uint64_t>(second));
    } else {
      if (pair_layout)
        throw io_error("load_generating_vector: mixed single/pair layout");
      entries.push_back(static_cast<std::uint64_t>(first));
    }
  }
  if (entries.size() < static_cast<std::size_t>(s))
    throw io_error("load_generating_vector: file holds " + std::to_string(entries.size()) +
                   " entries, need " + std::to_string(s));

  GeneratingVector gv;
  gv.n = n;
  gv.z.assign(entries.begin(), entries.begin() + s);
  for (auto& c : gv.z) c %= n;
  return gv;
}

inline void save_generating_vector(const std::string& path, const GeneratingVector& gv) {
  std::ofstream out(path);
  if (!out) throw io_error("save_generating_vector: cannot write " + path);
  for (std::size_t j = 0; j < gv.z.size(); ++j)
    out << (j + 1) << " " << gv.z[j] << "\n";
  if (!out) throw io_error("save_generating_vector: write failed for " + path);
}

/// Lattice node t_i = {i z / n} for i = 1..n; row n is the zero point.
/// Computed in integer arithmetic, so every coordinate is an exact dyadic
/// rational when n is a power of two.
inline std::vector<double> lattice_points(const GeneratingVector& gv, std::uint64_t n,
                                          int s) {
  if (n < 1) throw validation_error("lattice_points: need n >= 1");
  if (static_cast<std::size_t>(s) > gv.z.size())
    throw validation_error("lattice_points: dimension exceeds generating vector length");
  std::vector<double> pts(n * static_cast<std::size_t>(s));
  for (std::uint64_t i = 1; i <= n; ++i)
    for (int j = 0; j < s; ++j)
      pts[(i - 1) * s + static_cast<std::size_t>(j)] =
          static_cast<double>((i * gv.z[static_cast<std::size_t>(j)]) % n) /
          static_cast<double>(n);
  return pts;
}

/// R independent uniform shifts in [0,1)^s from the counter-based generator;
/// shift r is reproducible in isolation from (seed, r).
struct ShiftSet {
  std::uint64_t seed = 0;
  int count = 0;
  int dimension = 0;

  ShiftSet(std::uint64_t seed_, int count_, int dimension_)
      : seed(seed_), count(count_), dimension(dimension_) {}

  double entry(int r, int j) const {
    return counter_uniform(seed, static_cast<std::uint64_t>(r),
                           static_cast<std::uint64_t>(j));
  }

  std::vector<double> shift(int r) const {
    std::vector<double> delta(static_cast<std::size_t>(dimension));
    for (int j = 0; j < dimension; ++j) delta[static_cast<std::size_t>(j)] = entry(r, j);
    return delta;
  }
};

enum class SampleDomain { centered_uniform, normal };

/// Shifted sample block: n x s row-major values, either in [-1/2,1/2) or
/// transformed to the real line.
struct SampleMatrix {
  std::uint64_t n = 0;
  int s = 0;
  SampleDomain domain = SampleDomain::centered_uniform;
  std::vector<double> data;

  std::span<const double> row(std::uint64_t i) const {
    return {data.data() + i * static_cast<std::size_t>(s), static_cast<std::size_t>(s)};
  }
};

inline double fractional(double x) { return x - std::floor(x); }

/// {t + delta} - 1/2, mapped entrywise into [-1/2, 1/2).
inline SampleMatrix shift_center_uniform(const std::vector<double>& points,
                                         std::span<const double> delta) {
  const int s = static_cast<int>(delta.size());
  SampleMatrix out;
  out.n = points.size() / delta.size();
  out.s = s;
  out.domain = SampleDomain::centered_uniform;
  out.data.resize(points.size());
  for (std::size_t idx = 0; idx < points.size(); ++idx)
    out.data[idx] = fractional(points[idx] + delta[idx % delta.size()]) - 0.5;
  return out;
}

/// Smallest positive value fed to the inverse CDF when a shifted coordinate
/// collapses to zero (exact lattice point with zero shift).
inline constexpr double min_cdf_argument = 0x1.0p-53;

/// Phi^{-1}({t + delta}) entrywise.
inline SampleMatrix shift_transform_normal(const std::vector<double>& points,
                                           std::span<const double> delta) {
  const int s = static_cast<int>(delta.size());
  SampleMatrix out;
  out.n = points.size() / delta.size();
  out.s = s;
  out.domain = SampleDomain::normal;
  out.data.resize(points.size());
  for (std::size_t idx = 0; idx < points.size(); ++idx) {
    const double w = fractional(points[idx] + delta[idx % delta.size()]);
    out.data[idx] = inverse_normal_cdf(w > 0.0 ? w : min_cdf_argument);
  }
  return out;
}

/// Deterministic mean of `count` vectors produced by `row(i)`: entries are
/// accumulated sequentially inside fixed-size blocks and the block sums are
/// merged pairwise, so the result does not depend on worker scheduling.
inline std::vector<double> fixed_order_mean(
    std::uint64_t count, std::size_t width,
    const std::function<void(std::uint64_t, std::span<double>)>& add_row) {
  constexpr std::uint64_t block = 64;
  const std::uint64_t nblocks = (count + block - 1) / block;
  std::vector<std::vector<double>> sums(nblocks, std::vector<double>(width, 0.0));
  for (std::uint64_t b = 0; b < nblocks; ++b) {
    const std::uint64_t hi = std::min(count, (b + 1) * block);
    for (std::uint64_t i = b * block; i < hi; ++i) add_row(i, sums[b]);
  }
  for (std::uint64_t stride = 1; stride < nblocks; stride *= 2)
    for (std::uint64_t b = 0; b + stride < nblocks; b += 2 * stride)
      for (std::size_t k = 0; k < width; ++k) sums[b][k] += sums[b + stride][k];
  std::vector<double> mean = std::move(sums[0]);
  for (double& v : mean) v /= static_cast<double>(count);
  return mean;
}

struct QmcEstimate {
  std::vector<std::vector<double>> shift_means;
  std::vector<double> grand_mean;
};

/// Randomly shifted lattice estimator: per-shift means Q_r and their average.
/// The evaluator may return scalars (width-1 vectors) or dof vectors.
inline QmcEstimate qmc_estimate(
    const std::function<std::vector<double>(std::span<const double>)>& evaluator,
    const std::vector<SampleMatrix>& samples_per_shift) {
  if (samples_per_shift.empty())
    throw validation_error("qmc_estimate: need at least one shift");
  QmcEstimate est;
  std::size_t width = 0;
  for (const SampleMatrix& samples : samples_per_shift) {
    std::vector<std::vector<double>> rows(samples.n);
    for (std::uint64_t i = 0; i < samples.n; ++i) {
      rows[i] = evaluator(samples.row(i));
      if (width == 0) width = rows[i].size();
      if (rows[i].size() != width)
        throw numerical_error("qmc_estimate: evaluator result width changed");
    }
    est.shift_means.push_back(fixed_order_mean(
        samples.n, width, [&](std::uint64_t i, std::span<double> acc) {
          for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += rows[i][k];
        }));
  }
  est.grand_mean.assign(width, 0.0);
  for (const auto& q : est.shift_means)
    for (std::size_t k = 0; k < width; ++k) est.grand_mean[k] += q[k];
  for (double& v : est.grand_mean) v /= static_cast<double>(est.shift_means.size());
  return est;
}

}  // namespace dgqmc
