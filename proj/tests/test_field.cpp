#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dgqmc/field.hpp"
#include "dgqmc/rng.hpp"

using namespace dgqmc;

namespace {

// Enumeration oracle: all (k,l) with k^2 + l^2 <= bound, sorted the same way.
std::vector<std::pair<int, int>> enumerate_pairs(long long bound) {
  std::vector<std::pair<long long, std::pair<int, int>>> pool;
  for (int k = 1; static_cast<long long>(k) * k < bound; ++k)
    for (int l = 1; static_cast<long long>(k) * k + static_cast<long long>(l) * l <= bound; ++l)
      pool.push_back({static_cast<long long>(k) * k + static_cast<long long>(l) * l, {k, l}});
  std::sort(pool.begin(), pool.end());
  std::vector<std::pair<int, int>> out;
  for (const auto& e : pool) out.push_back(e.second);
  return out;
}

}  // namespace

TEST_CASE("order_basis first terms") {
  const auto one = order_basis(1, 1.3);
  REQUIRE(one.size() == 1);
  CHECK(one[0].k == 1);
  CHECK(one[0].l == 1);
  CHECK(one[0].amplitude == Catch::Approx(std::pow(2.0, -1.3)).epsilon(1e-14));

  const auto three = order_basis(3, 1.3);
  REQUIRE(three.size() == 3);
  CHECK(three[0].k == 1);
  CHECK(three[0].l == 1);
  CHECK(three[1].k == 1);
  CHECK(three[1].l == 2);
  CHECK(three[2].k == 2);
  CHECK(three[2].l == 1);
  CHECK(three[1].amplitude == Catch::Approx(std::pow(5.0, -1.3)).epsilon(1e-14));
  CHECK(three[2].amplitude == Catch::Approx(std::pow(5.0, -1.3)).epsilon(1e-14));
}

TEST_CASE("order_basis matches the enumeration oracle") {
  const auto terms = order_basis(50, 1.3);
  const auto oracle = enumerate_pairs(200);
  REQUIRE(oracle.size() >= 50);
  for (int j = 0; j < 50; ++j) {
    CHECK(terms[static_cast<std::size_t>(j)].k == oracle[static_cast<std::size_t>(j)].first);
    CHECK(terms[static_cast<std::size_t>(j)].l == oracle[static_cast<std::size_t>(j)].second);
  }
}

TEST_CASE("order_basis rejects bad arguments") {
  CHECK_THROWS_AS(order_basis(0, 1.3), validation_error);
  CHECK_THROWS_AS(order_basis(5, 1.0), validation_error);
}

TEST_CASE("amplitudes are nonincreasing and p-summable") {
  const auto terms = order_basis(10000, 1.3);
  bool monotone = true;
  for (std::size_t j = 1; j < terms.size(); ++j)
    monotone = monotone && terms[j].amplitude <= terms[j - 1].amplitude;
  CHECK(monotone);
  // partial-sum increments shrink toward a plateau: the 10^4-th term of the
  // amplitude series is ~4.6e-6, of the p-th power series ~7e-5
  double sum = 0.0, sum_p = 0.0;
  const double p = 1.0 / 1.3 + 0.01;
  for (const auto& t : terms) {
    sum += t.amplitude;
    sum_p += std::pow(t.amplitude, p);
  }
  CHECK(std::isfinite(sum));
  CHECK(std::isfinite(sum_p));
  CHECK(terms.back().amplitude < 5e-6);
  CHECK(std::pow(terms.back().amplitude, p) < 1e-4);
}

TEST_CASE("eval_coefficient examples") {
  const auto lognormal = RandomFieldSpec::lognormal(3);
  const std::vector<double> zero(3, 0.0);
  CHECK(eval_coefficient(lognormal, zero, 0.3, 0.7) == Catch::Approx(1.0).epsilon(1e-15));

  const auto affine1 = RandomFieldSpec::affine(1);
  const std::vector<double> half{0.5};
  CHECK(eval_coefficient(affine1, half, 0.5, 0.5) ==
        Catch::Approx(5.0 + 0.5 * std::pow(2.0, -1.3)).epsilon(1e-14));
  CHECK(eval_coefficient(affine1, std::vector<double>{0.0}, 0.123, 0.77) ==
        Catch::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("eval_coefficient rejects dimension mismatch") {
  const auto spec = RandomFieldSpec::affine(4);
  const std::vector<double> y(3, 0.0);
  CHECK_THROWS_AS(eval_coefficient(spec, y, 0.5, 0.5), validation_error);
}

TEST_CASE("coefficient_bounds affine and lognormal") {
  const auto affine1 = RandomFieldSpec::affine(1);
  const auto ab = coefficient_bounds(affine1);
  const double beta1 = std::pow(2.0, -1.3);
  CHECK(ab.a_min == Catch::Approx(5.0 - beta1 / 2.0).epsilon(1e-14));
  CHECK(ab.a_max == Catch::Approx(5.0 + beta1 / 2.0).epsilon(1e-14));

  const auto log1 = RandomFieldSpec::lognormal(1);
  const auto lb0 = coefficient_bounds(log1, std::vector<double>{0.0});
  CHECK(lb0.a_min == 1.0);
  CHECK(lb0.a_max == 1.0);
  const auto lb1 = coefficient_bounds(log1, std::vector<double>{1.0});
  CHECK(lb1.a_min == Catch::Approx(std::exp(-beta1)).epsilon(1e-14));
  CHECK(lb1.a_max == Catch::Approx(std::exp(beta1)).epsilon(1e-14));
}

TEST_CASE("affine positivity violation is rejected") {
  CHECK_THROWS_AS(RandomFieldSpec::affine(1, 0.1), validation_error);
}

TEST_CASE("coefficient stays within bounds on a dense grid") {
  for (const auto mode : {FieldMode::affine, FieldMode::lognormal}) {
    const auto spec = mode == FieldMode::affine ? RandomFieldSpec::affine(8)
                                                : RandomFieldSpec::lognormal(8);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> y(8);
      for (int j = 0; j < 8; ++j) {
        const double u = counter_uniform(99, static_cast<std::uint64_t>(trial),
                                         static_cast<std::uint64_t>(j));
        y[static_cast<std::size_t>(j)] = mode == FieldMode::affine ? u - 0.5 : 3.0 * (u - 0.5);
      }
      const auto bounds = coefficient_bounds(spec, y);
      for (int ix = 0; ix <= 20; ++ix)
        for (int iy = 0; iy <= 20; ++iy) {
          const double a = eval_coefficient(spec, y, ix / 20.0, iy / 20.0);
          CHECK(a >= bounds.a_min - 1e-12);
          CHECK(a <= bounds.a_max + 1e-12);
        }
    }
  }
}

TEST_CASE("lognormal coefficient is log-linear in y") {
  const auto spec = RandomFieldSpec::lognormal(1);
  const std::vector<double> y1{0.4}, y2{0.9}, ysum{1.3};
  const double a1 = eval_coefficient(spec, y1, 0.3, 0.6);
  const double a2 = eval_coefficient(spec, y2, 0.3, 0.6);
  const double asum = eval_coefficient(spec, ysum, 0.3, 0.6);
  CHECK(asum == Catch::Approx(a1 * a2).epsilon(1e-12));
}

TEST_CASE("parameter vector domain validation") {
  ParameterVector box{{0.2, -0.5}, ParameterVector::Domain::centered_box};
  CHECK_NOTHROW(box.validate());
  ParameterVector bad{{0.7}, ParameterVector::Domain::centered_box};
  CHECK_THROWS_AS(bad.validate(), validation_error);
  ParameterVector line{{3.7, -11.0}, ParameterVector::Domain::real_line};
  CHECK_NOTHROW(line.validate());
}
