#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "dgqmc/errors.hpp"
#include "dgqmc/lattice.hpp"
#include "dgqmc/qmc_weights.hpp"

namespace dgqmc {

struct CbcOptions {
  int max_order = 8;                       // POD order truncation
  std::uint64_t max_capacity = 1ull << 36; // limit on n * s * max_order work
};

struct CbcResult {
  GeneratingVector vector;
  std::vector<double> error_sq;  // shift-averaged worst-case error^2 per dimension
  int truncation_order = 0;
};

/// Shift-averaged worst-case error squared of a lattice rule in the weighted
/// unanchored space, evaluated directly from the subset sum
///   e^2(z) = sum_{u != 0} gamma_u (1/n) sum_i prod_{j in u} B2({i z_j / n}),
/// with B2(x) = x^2 - x + 1/6. Exponential in s; test/oracle use only.
inline double lattice_worst_case_error_sq(const GeneratingVector& gv, int s,
                                          const PodWeights& weights) {
  const std::uint64_t n = gv.n;
  double total = 0.0;
  for (std::uint64_t mask = 1; mask < (1ull << s); ++mask) {
    std::vector<int> subset;
    for (int j = 0; j < s; ++j)
      if (mask & (1ull << j)) subset.push_back(j);
    double point_sum = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
      double prod = 1.0;
      for (int j : subset) {
        const double x = static_cast<double>((i * gv.z[static_cast<std::size_t>(j)]) % n) /
                         static_cast<double>(n);
        prod *= x * x - x + 1.0 / 6.0;
      }
      point_sum += prod;
    }
    total += weights.gamma(subset) * point_sum / static_cast<double>(n);
  }
  return total;
}

/// Component-by-component construction over the odd residues mod n. Greedy
/// per dimension, ties resolved toward the smallest candidate. Uses the
/// per-point POD order recursion
///   P_l(i) <- P_l(i) + c_j B2({i z_j / n}) P_{l-1}(i)
/// truncated at max_order, so a candidate's cost is one weighted kernel sum.
inline CbcResult cbc_construct(std::uint64_t n, int s, const PodWeights& weights,
                               const CbcOptions& options = {}) {
  if (!is_power_of_two(n)) throw validation_error("cbc_construct: n must be a power of two");
  if (s < 1) throw validation_error("cbc_construct: dimension must be >= 1");
  if (s > weights.dimension())
    throw validation_error("cbc_construct: weights cover fewer dimensions than requested");
  const int q = std::min(options.max_order, s);
  if (static_cast<std::uint64_t>(s) * n * static_cast<std::uint64_t>(q) >
      options.max_capacity)
    throw validation_error("cbc_construct: n * s * order exceeds configured capacity");

  // Kernel table over the cyclic group: B2(i/n).
  std::vector<double> kernel(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n);
    kernel[i] = x * x - x + 1.0 / 6.0;
  }

  // P[l-1][i] = sum over subsets of chosen dims with |u| = l of
  // prod c_j B2({i z_j / n}); starts empty.
  std::vector<std::vector<double>> P(static_cast<std::size_t>(q),
                                     std::vector<double>(n, 0.0));
  std::vector<double> order_gamma(static_cast<std::size_t>(q) + 1, 0.0);
  for (int l = 1; l <= q; ++l)
    order_gamma[static_cast<std::size_t>(l)] = weights.pod_order(l);

  CbcResult result;
  result.truncation_order = q;
  result.vector.n = n;
  result.vector.z.reserve(static_cast<std::size_t>(s));

  std::vector<double> marginal(n, 0.0);  // sum_l Gamma'_l P_{l-1}(i)
  for (int dim = 0; dim < s; ++dim) {
    for (std::uint64_t i = 0; i < n; ++i) {
      double w = order_gamma[1];
      for (int l = 2; l <= q; ++l)
        w += order_gamma[static_cast<std::size_t>(l)] * P[static_cast<std::size_t>(l - 2)][i];
      marginal[i] = w;
    }
    const double c = weights.pod_dim(dim);

    std::uint64_t best_z = 1;
    double best_delta = 0.0;
    bool first = true;
    for (std::uint64_t z = 1; z < std::max<std::uint64_t>(n, 2); z += 2) {
      double delta = 0.0;
      for (std::uint64_t i = 0; i < n; ++i) delta += kernel[(i * z) % n] * marginal[i];
      delta *= c / static_cast<double>(n);
      if (first || delta < best_delta) {
        best_delta = delta;
        best_z = z;
        first = false;
      }
    }

    result.vector.z.push_back(best_z % n);
    for (std::uint64_t i = 0; i < n; ++i) {
      const double omega = c * kernel[(i * best_z) % n];
      for (int l = q - 1; l >= 1; --l)
        P[static_cast<std::size_t>(l)][i] += omega * P[static_cast<std::size_t>(l - 1)][i];
      P[0][i] += omega;
    }

    double err = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int l = 1; l <= q; ++l)
        acc += order_gamma[static_cast<std::size_t>(l)] * P[static_cast<std::size_t>(l - 1)][i];
      err += acc;
    }
    result.error_sq.push_back(err / static_cast<double>(n));
  }
  return result;
}

}  // namespace dgqmc
