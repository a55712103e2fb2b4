#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "dgqmc/rng.hpp"
#include "dgqmc/special_functions.hpp"

using namespace dgqmc;

TEST_CASE("riemann_zeta closed forms") {
  CHECK(riemann_zeta(2.0) == Catch::Approx(std::numbers::pi * std::numbers::pi / 6.0).epsilon(1e-13));
  CHECK(riemann_zeta(4.0) == Catch::Approx(std::pow(std::numbers::pi, 4) / 90.0).epsilon(1e-13));
}

TEST_CASE("riemann_zeta against frozen multiprecision values") {
  const std::pair<double, double> reference[] = {
      {1.3, 3.9319492118095437}, {1.5, 2.6123753486854883},
      {1.7, 2.0542887568377513}, {2.6, 1.3054778090727806},
      {3.5, 1.1267338673170566}, {6.0, 1.0173430619844491},
  };
  for (const auto& [x, value] : reference)
    CHECK(riemann_zeta(x) == Catch::Approx(value).epsilon(1e-13));
}

TEST_CASE("riemann_zeta rejects x <= 1") {
  CHECK_THROWS_AS(riemann_zeta(1.0), validation_error);
  CHECK_THROWS_AS(riemann_zeta(0.5), validation_error);
}

TEST_CASE("inverse normal cdf median and quantile") {
  CHECK(inverse_normal_cdf(0.5) == 0.0);
  // Newton-polished value of the 97.5% quantile
  CHECK(inverse_normal_cdf(0.975) == Catch::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("inverse normal cdf round trip accuracy") {
  for (int i = 0; i <= 2000; ++i) {
    const double w = 1e-10 + (1.0 - 2e-10) * i / 2000.0;
    const double x = inverse_normal_cdf(w);
    CHECK(std::abs(normal_cdf(x) - w) <= 1e-12);
  }
}

TEST_CASE("inverse normal cdf symmetry") {
  for (int i = 1; i <= 1000; ++i) {
    const double w = counter_uniform(2024, 0, static_cast<std::uint64_t>(i));
    if (w <= 0.0 || w >= 1.0) continue;
    CHECK(inverse_normal_cdf(1.0 - w) == Catch::Approx(-inverse_normal_cdf(w)).margin(1e-12));
  }
}

TEST_CASE("inverse normal cdf domain") {
  CHECK_THROWS_AS(inverse_normal_cdf(0.0), validation_error);
  CHECK_THROWS_AS(inverse_normal_cdf(1.0), validation_error);
  CHECK_THROWS_AS(inverse_normal_cdf(-0.2), validation_error);
}

TEST_CASE("counter rng is reproducible and order free") {
  const double a = counter_uniform(42, 3, 17);
  const double b = counter_uniform(42, 3, 17);
  CHECK(a == b);
  CHECK(counter_uniform(42, 3, 18) != a);
  CHECK(counter_uniform(43, 3, 17) != a);
  for (int i = 0; i < 1000; ++i) {
    const double u = counter_uniform(7, 1, static_cast<std::uint64_t>(i));
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}
