#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "dgqmc/field.hpp"
#include "dgqmc/qmc_weights.hpp"
#include "dgqmc/special_functions.hpp"

using namespace dgqmc;

TEST_CASE("varrho_uniform closed form and range") {
  CHECK(varrho_uniform(1.0) == Catch::Approx(1.0 / 6.0).epsilon(1e-13));
  // composed from the frozen zeta(1.5) value
  const double expected = 2.0 * 2.6123753486854883 /
                          std::pow(2.0 * std::numbers::pi * std::numbers::pi, 0.75);
  CHECK(varrho_uniform(0.75) == Catch::Approx(expected).epsilon(1e-13));
  CHECK_THROWS_AS(varrho_uniform(0.5), validation_error);
  CHECK_THROWS_AS(varrho_uniform(1.2), validation_error);
}

TEST_CASE("varrho_lognormal against the composed formula") {
  // lambda = 1 gives eta* = 1/4
  const double alpha = 0.7;
  const double direct = 2.0 *
                        (std::sqrt(2.0 * std::numbers::pi) * std::exp(4.0 * alpha * alpha) /
                         (std::pow(std::numbers::pi, 1.5) * 0.75 * 0.25)) *
                        riemann_zeta(1.5);
  CHECK(varrho_lognormal(1.0, alpha) == Catch::Approx(direct).epsilon(1e-13));

  // monotone increasing in alpha
  double prev = varrho_lognormal(0.8, 0.1);
  for (double a : {0.3, 0.6, 1.1, 1.9}) {
    const double cur = varrho_lognormal(0.8, a);
    CHECK(cur > prev);
    prev = cur;
  }

  CHECK_THROWS_AS(varrho_lognormal(0.5, 1.0), validation_error);
  CHECK_THROWS_AS(varrho_lognormal(0.9, 0.0), validation_error);
}

TEST_CASE("lambda_from_p branches") {
  CHECK(lambda_from_p(0.8) == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(lambda_from_p(0.5, 0.1) == Catch::Approx(1.0 / 1.8).epsilon(1e-15));
  CHECK(lambda_from_p(2.0 / 3.0, 0.25) == Catch::Approx(1.0 / 1.5).epsilon(1e-15));
  CHECK_THROWS_AS(lambda_from_p(1.0), validation_error);
  CHECK_THROWS_AS(lambda_from_p(0.0, 0.1), validation_error);
  CHECK_THROWS_AS(lambda_from_p(0.5), validation_error);
  CHECK_THROWS_AS(lambda_from_p(0.5, 0.6), validation_error);
  // stays inside (1/2, 1]
  for (double p : {0.01, 0.3, 0.67, 0.7, 0.9, 0.99}) {
    const double l = lambda_from_p(p, 0.25);
    CHECK(l > 0.5);
    CHECK(l <= 1.0);
  }
}

TEST_CASE("alpha_lognormal formula and guard") {
  CHECK(alpha_lognormal(0.0, 1.0).alpha ==
        Catch::Approx(0.5 * std::sqrt(0.5)).epsilon(1e-14));
  const double beta = 0.40613;
  CHECK(alpha_lognormal(beta, 1.0).alpha ==
        Catch::Approx(0.5 * (beta + std::sqrt(beta * beta + 0.5))).epsilon(1e-12));
  CHECK_FALSE(alpha_lognormal(beta, 1.0).lifted);
  // the formula always separates from beta for lambda > 1/2; the guard is a
  // floor that keeps alpha strictly above beta in all cases
  for (double b : {0.1, 1.0, 10.0, 100.0}) {
    const auto r = alpha_lognormal(b, 0.51);
    CHECK(std::isfinite(r.alpha));
    CHECK(r.alpha > b);
  }
}

TEST_CASE("affine weights: empty set, singletons, ratio identity") {
  const std::vector<double> b{0.4, 0.25, 0.1};
  const auto w = weights_affine(b, 1.0);
  CHECK(w.gamma(std::vector<int>{}) == 1.0);
  // lambda = 1: varrho = 1/6 and the exponent is 1, so gamma_{j} = sqrt6 b_j
  for (int j = 0; j < 3; ++j)
    CHECK(w.gamma(std::vector<int>{j}) ==
          Catch::Approx(std::sqrt(6.0) * b[static_cast<std::size_t>(j)]).epsilon(1e-13));

  // gamma_{u + j} / gamma_u = ((|u|+1) b~_j)^{2/(1+lambda)} exactly
  for (double lambda : {0.6, 0.8, 1.0}) {
    const auto wl = weights_affine(b, lambda);
    const double e = 2.0 / (1.0 + lambda);
    const std::vector<std::vector<int>> subsets{{}, {0}, {1}, {0, 1}, {1, 2}};
    for (const auto& u : subsets)
      for (int j = 0; j < 3; ++j) {
        if (std::find(u.begin(), u.end(), j) != u.end()) continue;
        std::vector<int> uj = u;
        uj.push_back(j);
        const double ratio = wl.gamma(uj) / wl.gamma(u);
        const double expected = std::pow(
            (static_cast<double>(u.size()) + 1.0) * b[static_cast<std::size_t>(j)] /
                std::sqrt(varrho_uniform(lambda)),
            e);
        CHECK(ratio == Catch::Approx(expected).epsilon(1e-12));
      }
  }
}

TEST_CASE("lognormal weights against the step-by-step oracle") {
  const double beta1 = 0.40613;
  const double lambda = 2.0 / 3.0;
  const auto w = weights_lognormal(std::vector<double>{beta1}, lambda);
  CHECK(w.gamma(std::vector<int>{}) == 1.0);

  // oracle: compose alpha, varrho_j, and Phi independently
  const double alpha = 0.5 * (beta1 + std::sqrt(beta1 * beta1 + 1.0 - 1.0 / (2.0 * lambda)));
  const double rho = varrho_lognormal(lambda, alpha);
  const double denominator = 2.0 * std::log(2.0) * std::exp(0.5 * beta1 * beta1) *
                             normal_cdf(beta1) * std::sqrt((alpha - beta1) * rho);
  const double expected = std::pow(beta1 / denominator, 2.0 / (1.0 + lambda));
  CHECK(w.gamma(std::vector<int>{0}) == Catch::Approx(expected).epsilon(1e-12));

  // inactive dimension: zero factor, zero singleton weight
  const auto w0 = weights_lognormal(std::vector<double>{0.0, beta1}, lambda);
  CHECK(w0.gamma(std::vector<int>{0}) == 0.0);
  CHECK(w0.gamma(std::vector<int>{1}) > 0.0);
}

TEST_CASE("pod weight invariants") {
  CHECK_THROWS_AS(PodWeights({-0.5}, 1.0), validation_error);
  CHECK_THROWS_AS(PodWeights({0.5}, 0.4), validation_error);
  const PodWeights flat({1.0, 1.0}, 1.0, PodWeights::OrderKind::flat);
  CHECK(flat.gamma(std::vector<int>{0, 1}) == 1.0);
}

TEST_CASE("ordered bell numbers") {
  const std::uint64_t expected[] = {1, 1, 3, 13, 75, 541};
  for (int k = 0; k <= 5; ++k) CHECK(ordered_bell(k) == expected[k]);
  CHECK(ordered_bell(6) == 4683);

  for (int k = 0; k <= 15; ++k)
    CHECK(static_cast<double>(ordered_bell(k)) <= ordered_bell_bound(k) * (1.0 + 1e-12));
  CHECK(ordered_bell_bound(3) == Catch::Approx(6.0 / std::pow(std::numbers::ln2, 3)).epsilon(1e-12));
  CHECK(ordered_bell_bound(3) == Catch::Approx(18.0167).epsilon(1e-4));

  CHECK_THROWS_AS(ordered_bell(-1), validation_error);
  CHECK_THROWS_AS(ordered_bell(19), validation_error);
}

TEST_CASE("regularity bounds") {
  const auto affine = RandomFieldSpec::affine(2);
  const RegularityConstants c;

  // base case: the a priori bound itself
  const std::vector<int> nu0{0, 0};
  CHECK(regularity_bound(RegularitySetting::affine, nu0, affine, c) ==
        Catch::Approx(1.0).epsilon(1e-14));

  // first derivative: b_1 times the baseline
  const double a_min = coefficient_bounds(affine).a_min;
  const double b1 = affine.basis[0].amplitude / a_min;
  const std::vector<int> nu1{1, 0};
  CHECK(regularity_bound(RegularitySetting::affine, nu1, affine, c) ==
        Catch::Approx(b1).epsilon(1e-13));

  // lognormal first-order mixed index |nu| = 2
  const auto lognormal = RandomFieldSpec::lognormal(2);
  const std::vector<double> y{0.3, -0.4};
  const std::vector<int> nu11{1, 1};
  const double amin_y = coefficient_bounds(lognormal, y).a_min;
  const double expected = 16.0 * 2.0 / (std::numbers::ln2 * std::numbers::ln2) *
                          lognormal.basis[0].amplitude * lognormal.basis[1].amplitude /
                          std::sqrt(amin_y);
  CHECK(regularity_bound(RegularitySetting::lognormal_first_order, nu11, lognormal, c, y) ==
        Catch::Approx(expected).epsilon(1e-13));

  // second-order lognormal indices are out of the first-order theory
  const std::vector<int> nu2{2, 0};
  CHECK_THROWS_AS(
      regularity_bound(RegularitySetting::lognormal_first_order, nu2, lognormal, c, y),
      validation_error);
}
