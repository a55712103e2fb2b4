#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "dgqmc/errors.hpp"
#include "dgqmc/field.hpp"
#include "dgqmc/special_functions.hpp"

namespace dgqmc {

/// rho(lambda) = 2 zeta(2 lambda) / (2 pi^2)^lambda for lambda in (1/2, 1].
inline double varrho_uniform(double lambda) {
  if (!(lambda > 0.5 && lambda <= 1.0))
    throw validation_error("varrho_uniform: lambda must lie in (1/2, 1]");
  return 2.0 * riemann_zeta(2.0 * lambda) /
         std::pow(2.0 * std::numbers::pi * std::numbers::pi, lambda);
}

/// rho_j(lambda) = 2 (sqrt(2 pi) exp(alpha^2/eta*) / (pi^{2-2 eta*} (1-eta*) eta*))^lambda
///                 * zeta(lambda + 1/2),   eta* = (2 lambda - 1) / (4 lambda).
inline double varrho_lognormal(double lambda, double alpha) {
  if (!(lambda > 0.5 && lambda <= 1.0))
    throw validation_error("varrho_lognormal: lambda must lie in (1/2, 1]");
  if (!(alpha > 0.0)) throw validation_error("varrho_lognormal: alpha must be positive");
  const double eta = (2.0 * lambda - 1.0) / (4.0 * lambda);
  const double base = std::sqrt(2.0 * std::numbers::pi) * std::exp(alpha * alpha / eta) /
                      (std::pow(std::numbers::pi, 2.0 - 2.0 * eta) * (1.0 - eta) * eta);
  return 2.0 * std::pow(base, lambda) * riemann_zeta(lambda + 0.5);
}

/// lambda = p/(2-p) on p in (2/3, 1); 1/(2-2 eps) with eps in (0, 1/2) on
/// p in (0, 2/3].
inline double lambda_from_p(double p, std::optional<double> eps = std::nullopt) {
  if (!(p > 0.0 && p < 1.0)) throw validation_error("lambda_from_p: p must lie in (0,1)");
  if (p > 2.0 / 3.0) return p / (2.0 - p);
  if (!eps || !(*eps > 0.0 && *eps < 0.5))
    throw validation_error("lambda_from_p: p <= 2/3 needs eps in (0, 1/2)");
  return 1.0 / (2.0 - 2.0 * *eps);
}

/// alpha_j = (beta_j + sqrt(beta_j^2 + 1 - 1/(2 lambda))) / 2, lifted just
/// above beta_j whenever the closed form does not separate.
struct AlphaResult {
  double alpha = 0.0;
  bool lifted = false;
};

inline AlphaResult alpha_lognormal(double beta, double lambda) {
  if (!(lambda > 0.5 && lambda <= 1.0))
    throw validation_error("alpha_lognormal: lambda must lie in (1/2, 1]");
  if (beta < 0.0) throw validation_error("alpha_lognormal: beta must be nonnegative");
  const double alpha = 0.5 * (beta + std::sqrt(beta * beta + 1.0 - 0.5 / lambda));
  if (alpha > beta) return {alpha, false};
  return {beta * (1.0 + 1e-6), true};
}

/// Product-and-order-dependent weights gamma_u = (Gamma_{|u|} prod b~_j)^{2/(1+lambda)}.
/// Order factors default to |u|!; zero per-dimension factors mark inactive
/// dimensions. The CBC construction consumes the exponentiated POD form.
class PodWeights {
 public:
  enum class OrderKind { factorial, flat };

  PodWeights(std::vector<double> dim_factors, double lambda,
             OrderKind order = OrderKind::factorial)
      : dim_factors_(std::move(dim_factors)), lambda_(lambda), order_(order) {
    if (!(lambda_ > 0.5 && lambda_ <= 1.0))
      throw validation_error("PodWeights: lambda must lie in (1/2, 1]");
    for (double b : dim_factors_)
      if (b < 0.0 || !std::isfinite(b))
        throw validation_error("PodWeights: per-dimension factors must be >= 0");
  }

  int dimension() const { return static_cast<int>(dim_factors_.size()); }
  double lambda() const { return lambda_; }
  double dim_factor(int j) const { return dim_factors_[static_cast<std::size_t>(j)]; }

  double order_factor(int order) const {
    if (order_ == OrderKind::flat) return 1.0;
    double f = 1.0;
    for (int i = 2; i <= order; ++i) f *= i;
    return f;
  }

  /// gamma_u for an explicit subset of dimension indices (0-based).
  double gamma(std::span<const int> subset) const {
    double prod = order_factor(static_cast<int>(subset.size()));
    for (int j : subset) prod *= dim_factors_[static_cast<std::size_t>(j)];
    return std::pow(prod, 2.0 / (1.0 + lambda_));
  }

  /// Exponentiated POD pieces: gamma_u = pod_order(|u|) * prod pod_dim(j).
  double pod_order(int order) const {
    return std::pow(order_factor(order), 2.0 / (1.0 + lambda_));
  }
  double pod_dim(int j) const {
    return std::pow(dim_factors_[static_cast<std::size_t>(j)], 2.0 / (1.0 + lambda_));
  }

 private:
  std::vector<double> dim_factors_;
  double lambda_;
  OrderKind order_;
};

/// Affine-model weights: b~_j = b_j / sqrt(rho(lambda)).
inline PodWeights weights_affine(std::span<const double> b, double lambda) {
  const double root = std::sqrt(varrho_uniform(lambda));
  std::vector<double> factors(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (!(b[j] > 0.0)) throw validation_error("weights_affine: b_j must be positive");
    factors[j] = b[j] / root;
  }
  return PodWeights(std::move(factors), lambda);
}

/// Lognormal-model weights:
///   b~_j = beta_j / (2 log(2) exp(beta_j^2/2) Phi(beta_j)
///                    sqrt((alpha_j - beta_j) rho_j(lambda))).
inline PodWeights weights_lognormal(std::span<const double> beta, double lambda) {
  std::vector<double> factors(beta.size(), 0.0);
  for (std::size_t j = 0; j < beta.size(); ++j) {
    if (beta[j] < 0.0)
      throw validation_error("weights_lognormal: beta_j must be nonnegative");
    if (beta[j] == 0.0) continue;  // inactive dimension
    const AlphaResult ar = alpha_lognormal(beta[j], lambda);
    const double gap = ar.alpha - beta[j];
    if (!(gap > 0.0))
      throw validation_error("weights_lognormal: alpha_j - beta_j not positive");
    factors[j] = beta[j] / (2.0 * std::numbers::ln2 * std::exp(0.5 * beta[j] * beta[j]) *
                            normal_cdf(beta[j]) *
                            std::sqrt(gap * varrho_lognormal(lambda, ar.alpha)));
  }
  return PodWeights(std::move(factors), lambda);
}

/// Ordered Bell numbers, Lambda_0 = 1 and
/// Lambda_k = sum_{l=1..k} C(k,l) Lambda_{k-l}; exact in 64 bits up to k = 18.
inline std::uint64_t ordered_bell(int k) {
  if (k < 0) throw validation_error("ordered_bell: negative order");
  if (k > 18) throw validation_error("ordered_bell: overflows 64 bits beyond k = 18");
  std::vector<std::uint64_t> bell(static_cast<std::size_t>(k) + 1, 0);
  bell[0] = 1;
  std::vector<std::vector<std::uint64_t>> choose(static_cast<std::size_t>(k) + 1);
  for (int i = 0; i <= k; ++i) {
    choose[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(i) + 1, 1);
    for (int j = 1; j < i; ++j)
      choose[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          choose[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] +
          choose[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)];
  }
  for (int m = 1; m <= k; ++m) {
    std::uint64_t acc = 0;
    for (int l = 1; l <= m; ++l)
      acc += choose[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)] *
             bell[static_cast<std::size_t>(m - l)];
    bell[static_cast<std::size_t>(m)] = acc;
  }
  return bell[static_cast<std::size_t>(k)];
}

/// Upper envelope k! / (log 2)^k of the ordered Bell numbers.
inline double ordered_bell_bound(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f / std::pow(std::numbers::ln2, k);
}

enum class RegularitySetting { affine, lognormal_first_order };

/// Analytic constants entering the diagnostic parametric-regularity bounds;
/// the values are not pinned by theory, so they default to 1.
struct RegularityConstants {
  double c_dg = 1.0;
  double alpha = 1.0;
  double sigma = 1.0;
  double c_poincare = 1.0;
  double f_norm = 1.0;
};

/// Diagnostic bound on ||d^nu u_h||. Affine:
///   |nu|! b^nu (C_Poin / alpha) ||f||,  b_j = C_DG beta_j / (alpha a_min).
/// Lognormal (first order only, needs y):
///   (4 C_DG)^{|nu|} |nu|!/(log 2)^{|nu|} beta^nu sigma/(alpha sqrt(a_min(y))) ||f||.
inline double regularity_bound(RegularitySetting setting, std::span<const int> nu,
                               const RandomFieldSpec& spec,
                               const RegularityConstants& c = {},
                               std::span<const double> y = {}) {
  if (nu.size() > static_cast<std::size_t>(spec.dimension))
    throw validation_error("regularity_bound: multi-index longer than dimension");
  int order = 0;
  for (int v : nu) {
    if (v < 0) throw validation_error("regularity_bound: negative multi-index entry");
    order += v;
  }
  double factorial = 1.0;
  for (int i = 2; i <= order; ++i) factorial *= i;

  if (setting == RegularitySetting::affine) {
    const double a_min = coefficient_bounds(spec).a_min;
    double bpow = 1.0;
    for (std::size_t j = 0; j < nu.size(); ++j) {
      const double bj = c.c_dg * spec.basis[j].amplitude / (c.alpha * a_min);
      for (int rep = 0; rep < nu[j]; ++rep) bpow *= bj;
    }
    return factorial * bpow * c.c_poincare / c.alpha * c.f_norm;
  }

  for (int v : nu)
    if (v > 1)
      throw validation_error(
          "regularity_bound: lognormal bound covers first-order indices only");
  if (y.size() != static_cast<std::size_t>(spec.dimension))
    throw validation_error("regularity_bound: lognormal bound needs the sample y");
  const double a_min = coefficient_bounds(spec, y).a_min;
  double betapow = 1.0;
  for (std::size_t j = 0; j < nu.size(); ++j)
    if (nu[j] == 1) betapow *= spec.basis[j].amplitude;
  return std::pow(4.0 * c.c_dg, order) * factorial /
         std::pow(std::numbers::ln2, order) * betapow * c.sigma /
         (c.alpha * std::sqrt(a_min)) * c.f_norm;
}

}  // namespace dgqmc
