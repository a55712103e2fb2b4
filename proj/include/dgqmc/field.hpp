#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dgqmc/errors.hpp"

namespace dgqmc {

enum class FieldMode { affine, lognormal };

inline const char* to_string(FieldMode m) {
  return m == FieldMode::affine ? "affine" : "lognormal";
}

/// One term of the sine-product expansion:
///   psi(x) = amplitude * sin(k pi x1) * sin(l pi x2),
/// amplitude = (k^2 + l^2)^(-decay) = sup-norm of psi over the unit square.
struct BasisTerm {
  int k = 0;
  int l = 0;
  double amplitude = 0.0;

  double evaluate(double x1, double x2) const {
    return amplitude * std::sin(k * std::numbers::pi * x1) *
           std::sin(l * std::numbers::pi * x2);
  }
};

/// First s index pairs of Z+ x Z+ ordered by k^2 + l^2 ascending, so the
/// amplitude sequence is nonincreasing. Equal-norm pairs tie-break
/// lexicographically by (k, l).
inline std::vector<BasisTerm> order_basis(int s, double decay) {
  if (s < 1) throw validation_error("order_basis: truncation dimension must be >= 1");
  if (!(decay > 1.0)) throw validation_error("order_basis: decay exponent must be > 1");

  // Enumerate a generous index box and sort; k^2+l^2 <= bound covers the first
  // s terms whenever the box holds at least s pairs below the bound.
  const int box = static_cast<int>(std::ceil(std::sqrt(2.0 * s))) + 2;
  std::vector<std::pair<long long, std::pair<int, int>>> pool;
  pool.reserve(static_cast<std::size_t>(box) * box);
  for (int k = 1; k <= box; ++k)
    for (int l = 1; l <= box; ++l)
      pool.push_back({static_cast<long long>(k) * k + static_cast<long long>(l) * l,
                      {k, l}});
  std::sort(pool.begin(), pool.end());

  std::vector<BasisTerm> terms;
  terms.reserve(s);
  for (int j = 0; j < s; ++j) {
    const auto [norm, kl] = pool[static_cast<std::size_t>(j)];
    terms.push_back({kl.first, kl.second,
                     std::pow(static_cast<double>(norm), -decay)});
  }
  return terms;
}

/// Parametric diffusion coefficient
///   affine:    a(x,y) = a0(x) + sum_j y_j psi_j(x),   y_j in [-1/2, 1/2]
///   lognormal: a(x,y) = a0(x) exp(sum_j y_j psi_j(x)), y_j standard normal.
struct RandomFieldSpec {
  FieldMode mode = FieldMode::affine;
  std::function<double(double, double)> a0;
  double a0_min = 0.0;
  double a0_max = 0.0;
  double decay = 1.3;
  int dimension = 0;
  std::vector<BasisTerm> basis;

  static RandomFieldSpec constant_base(FieldMode mode, double a0_value, int s,
                                       double decay) {
    RandomFieldSpec spec;
    spec.mode = mode;
    spec.a0 = [a0_value](double, double) { return a0_value; };
    spec.a0_min = a0_value;
    spec.a0_max = a0_value;
    spec.decay = decay;
    spec.dimension = s;
    spec.basis = order_basis(s, decay);
    spec.validate();
    return spec;
  }

  static RandomFieldSpec affine(int s, double a0_value = 5.0, double decay = 1.3) {
    return constant_base(FieldMode::affine, a0_value, s, decay);
  }

  static RandomFieldSpec lognormal(int s, double a0_value = 1.0, double decay = 1.3) {
    return constant_base(FieldMode::lognormal, a0_value, s, decay);
  }

  double amplitude_sum() const {
    double sum = 0.0;
    for (const auto& t : basis) sum += t.amplitude;
    return sum;
  }

  void validate() const {
    if (dimension < 1 || basis.size() != static_cast<std::size_t>(dimension))
      throw validation_error("RandomFieldSpec: basis does not match dimension");
    for (std::size_t j = 1; j < basis.size(); ++j)
      if (basis[j].amplitude > basis[j - 1].amplitude)
        throw validation_error("RandomFieldSpec: amplitudes must be nonincreasing");
    if (mode == FieldMode::affine) {
      if (!(a0_min - 0.5 * amplitude_sum() > 0.0))
        throw validation_error(
            "RandomFieldSpec: affine base too small, coefficient can vanish");
    } else {
      if (!(a0_min > 0.0))
        throw validation_error("RandomFieldSpec: lognormal base must be positive");
    }
  }
};

/// Parameter sample together with its domain.
struct ParameterVector {
  enum class Domain { centered_box, real_line };
  std::vector<double> values;
  Domain domain = Domain::centered_box;

  void validate() const {
    for (double v : values) {
      if (!std::isfinite(v))
        throw validation_error("ParameterVector: entries must be finite");
      if (domain == Domain::centered_box && (v < -0.5 || v > 0.5))
        throw validation_error("ParameterVector: uniform entries must lie in [-1/2,1/2]");
    }
  }
};

inline double eval_coefficient(const RandomFieldSpec& spec, std::span<const double> y,
                               double x1, double x2) {
  if (y.size() != static_cast<std::size_t>(spec.dimension))
    throw validation_error("eval_coefficient: parameter dimension mismatch");
  double expansion = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j)
    expansion += y[j] * spec.basis[j].evaluate(x1, x2);
  return spec.mode == FieldMode::affine ? spec.a0(x1, x2) + expansion
                                        : spec.a0(x1, x2) * std::exp(expansion);
}

struct CoefficientBounds {
  double a_min = 0.0;
  double a_max = 0.0;
};

/// Affine: global envelope a0 -/+ (1/2) sum beta_j, independent of y.
/// Lognormal: the y-dependent envelopes a0_min exp(-sum beta_j |y_j|) and
/// a0_max exp(+sum beta_j |y_j|).
inline CoefficientBounds coefficient_bounds(const RandomFieldSpec& spec,
                                            std::span<const double> y = {}) {
  if (spec.mode == FieldMode::affine) {
    const double half_sum = 0.5 * spec.amplitude_sum();
    CoefficientBounds b{spec.a0_min - half_sum, spec.a0_max + half_sum};
    if (!(b.a_min > 0.0))
      throw validation_error("coefficient_bounds: affine lower bound nonpositive");
    return b;
  }
  if (y.size() != static_cast<std::size_t>(spec.dimension))
    throw validation_error("coefficient_bounds: parameter dimension mismatch");
  double weighted = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j)
    weighted += std::abs(y[j]) * spec.basis[j].amplitude;
  return {spec.a0_min * std::exp(-weighted), spec.a0_max * std::exp(weighted)};
}

}  // namespace dgqmc
