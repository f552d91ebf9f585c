#include <doctest.h>

#include <cmath>
#include <vector>

#include "dualbound/rng.hpp"
#include "dualbound/stats.hpp"

using namespace dualbound;

TEST_CASE("path rng is a pure function of seed, stream and path") {
  PathRng a(42, 0, 7);
  PathRng b(42, 0, 7);
  for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());

  PathRng c(42, 0, 8);
  PathRng d(42, 1, 7);
  PathRng e(43, 0, 7);
  PathRng base(42, 0, 7);
  bool differs_c = false, differs_d = false, differs_e = false;
  for (int i = 0; i < 8; ++i) {
    const std::uint64_t x = base.next_u64();
    differs_c |= (c.next_u64() != x);
    differs_d |= (d.next_u64() != x);
    differs_e |= (e.next_u64() != x);
  }
  CHECK(differs_c);
  CHECK(differs_d);
  CHECK(differs_e);
}

TEST_CASE("uniforms lie strictly inside (0,1)") {
  PathRng rng(1, 3, 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("inverse normal cdf hits reference quantiles") {
  CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(inverse_normal_cdf(0.975) ==
        doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(inverse_normal_cdf(0.9) ==
        doctest::Approx(1.2815515655446004).epsilon(1e-12));
  CHECK(inverse_normal_cdf(0.0013498980316300945) ==
        doctest::Approx(-3.0).epsilon(1e-10));
  CHECK_THROWS_AS(inverse_normal_cdf(0.0), std::domain_error);
  CHECK_THROWS_AS(inverse_normal_cdf(1.0), std::domain_error);
}

TEST_CASE("inverse normal cdf round-trips through the normal cdf") {
  auto normal_cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  for (double u : {1e-12, 1e-6, 1e-3, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0 - 1e-6,
                   1.0 - 1e-12}) {
    const double x = inverse_normal_cdf(u);
    CHECK(normal_cdf(x) == doctest::Approx(u).epsilon(1e-12));
    CHECK(inverse_normal_cdf(1.0 - u) == doctest::Approx(-x).epsilon(1e-9));
  }
}

TEST_CASE("normal draws have standard moments") {
  PathRng rng(2024, 3, 11);
  const std::size_t n = 200000;
  std::vector<double> z(n), z2(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = rng.normal();
    z2[i] = z[i] * z[i];
  }
  const BoundEstimate m = estimate_mean(z, 1.0);
  const BoundEstimate v = estimate_mean(z2, 1.0);
  CHECK(std::abs(m.mean) <= 4.0 * m.std_error);
  CHECK(std::abs(v.mean - 1.0) <= 4.0 * v.std_error);
}

TEST_CASE("pairwise sum matches naive summation order-independently") {
  std::vector<double> values;
  PathRng rng(5, 3, 0);
  for (int i = 0; i < 1000; ++i) values.push_back(rng.normal());
  double naive = 0.0;
  for (double v : values) naive += v;
  CHECK(pairwise_sum(values) == doctest::Approx(naive).epsilon(1e-12));
}

TEST_CASE("estimate_mean basics and degenerate flag") {
  std::vector<double> same = {1.0, 1.0, 1.0};
  const BoundEstimate a = estimate_mean(same);
  CHECK(a.mean == 1.0);
  CHECK(a.half_width == 0.0);
  CHECK(a.degenerate);

  std::vector<double> two = {0.0, 2.0};
  const BoundEstimate b = estimate_mean(two);
  CHECK(b.mean == doctest::Approx(1.0));
  CHECK(b.half_width == doctest::Approx(1.96));
  CHECK_FALSE(b.degenerate);

  CHECK_THROWS_AS(estimate_mean(std::vector<double>{}), std::invalid_argument);
}
