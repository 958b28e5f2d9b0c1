#include <bit>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "majority/kernels.hpp"

using namespace majority;

namespace {

// Adoption probability by enumerating all 2^j ordered samples.
double enumerated_q(int j, double a) {
  double total = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << j); ++mask) {
    const int ones = std::popcount(mask);
    const double w = std::pow(a, ones) * std::pow(1.0 - a, j - ones);
    if (2 * ones > j) total += w;
    if (2 * ones == j) total += w / 2.0;
  }
  return total;
}

double lgamma_pmf(std::int64_t m, double p, std::int64_t k) {
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == m ? 1.0 : 0.0;
  const double md = static_cast<double>(m), kd = static_cast<double>(k);
  return std::exp(std::lgamma(md + 1) - std::lgamma(kd + 1) - std::lgamma(md - kd + 1) + kd * std::log(p) +
                  (md - kd) * std::log1p(-p));
}

double choose(int a, int b) {
  double r = 1.0;
  for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
  return r;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("binomial pmf agrees with the log-gamma formula") {
    for (std::int64_t m : {1, 2, 7, 12, 33, 64})
      for (double p : {0.0, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0}) {
        const auto v = binom_pmf_vector(m, p);
        REQUIRE(v.size() == static_cast<std::size_t>(m + 1));
        for (std::int64_t k = 0; k <= m; ++k) CHECK(std::abs(v[k] - lgamma_pmf(m, p, k)) < 1e-13);
      }
  }

  TEST_CASE("cdf and upper tail are complementary") {
    for (std::int64_t m : {5, 12, 64})
      for (double p : {0.1, 0.5, 0.9})
        for (std::int64_t k = 1; k <= m; ++k)
          CHECK(binom_cdf(m, p, k - 1) + binom_upper_tail(m, p, k) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(binom_upper_tail(12, 0.3, 0) == 1.0);
    CHECK(binom_cdf(12, 0.3, 12) == 1.0);
  }

  TEST_CASE("adoption curve matches sample enumeration") {
    for (int j = 1; j <= 14; ++j)
      for (double a = 0.0; a <= 1.0; a += 0.0625)
        CHECK(std::abs(adoption_probability(ProcessSpec(j), a) - enumerated_q(j, a)) < 1e-12);
  }

  TEST_CASE("adoption curve endpoints and symmetry") {
    for (int j = 1; j <= 64; ++j) {
      const ProcessSpec spec(j);
      CHECK(adoption_probability(spec, 0.0) == 0.0);
      CHECK(adoption_probability(spec, 1.0) == 1.0);
      CHECK(adoption_probability(spec, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
      for (double a : {0.1, 0.37, 0.62})
        CHECK(adoption_probability(spec, 1.0 - a) == doctest::Approx(1.0 - adoption_probability(spec, a)).epsilon(1e-12));
    }
    CHECK(adoption_probability(ProcessSpec(1), 0.3) == doctest::Approx(0.3));
    CHECK(adoption_probability(ProcessSpec(3), 0.6) == doctest::Approx(0.648));
  }

  TEST_CASE("tie-break gain equals the difference of enumerated curves") {
    for (int h = 1; h <= 7; ++h)
      for (double a = 0.5; a <= 1.0; a += 0.05) {
        const double direct = enumerated_q(2 * h + 1, a) - enumerated_q(2 * h, a);
        const double formula = (2 * a - 1) / 2 * choose(2 * h, h) * std::pow(a * (1 - a), h);
        CHECK(std::abs(tie_break_gain(h, a) - direct) < 1e-12);
        CHECK(std::abs(tie_break_gain(h, a) - formula) < 1e-12);
      }
    CHECK_THROWS_AS(tie_break_gain(2, 0.4), ValidationError);
    CHECK(signed_tie_break_gain(2, 0.4) < 0.0);
    CHECK(signed_tie_break_gain(2, 0.4) ==
          doctest::Approx(enumerated_q(5, 0.4) - enumerated_q(4, 0.4)).epsilon(1e-12));
  }

  TEST_CASE("sequential kernel row for j=3, n=10, s=6") {
    const StepKernel k = sequential_kernel(ProcessSpec(3), 10);
    CHECK(k.layout() == StepKernel::Layout::Tridiagonal);
    CHECK(k.up(6) == doctest::Approx(0.4 * 0.648));
    CHECK(k.up(6) == doctest::Approx(0.2592));
    CHECK(k.down(6) == doctest::Approx(0.6 * 0.352));
    CHECK(k.stay(6) + k.up(6) + k.down(6) == doctest::Approx(1.0));
    CHECK(k.absorbing(0));
    CHECK(k.absorbing(10));
    CHECK_FALSE(k.absorbing(5));
    CHECK(k.max_row_error() < 1e-15);
  }

  TEST_CASE("gossip kernel row for j=3, n=2, s=1") {
    const StepKernel k = gossip_kernel(ProcessSpec(3), 2);
    CHECK(k.prob(1, 0) == doctest::Approx(0.25));
    CHECK(k.prob(1, 1) == doctest::Approx(0.5));
    CHECK(k.prob(1, 2) == doctest::Approx(0.25));
    CHECK(k.prob(2, 2) == 1.0);
    CHECK(k.tail(1, 1) == doctest::Approx(0.75));
  }

  TEST_CASE("gossip kernel refuses populations above the dense limit") {
    CHECK_THROWS_AS(gossip_kernel(ProcessSpec(3), kDenseKernelLimit + 1), CapacityError);
    CHECK_NOTHROW(gossip_kernel(ProcessSpec(3), 200));
  }

  TEST_CASE("inverse cdf picks the right support point") {
    const StepKernel k = sequential_kernel(ProcessSpec(3), 10);
    CHECK(k.inverse_cdf(6, 0.0) == 5);
    CHECK(k.inverse_cdf(6, k.down(6) - 1e-12) == 5);
    CHECK(k.inverse_cdf(6, k.down(6)) == 6);
    CHECK(k.inverse_cdf(6, 0.999999) == 7);
    CHECK(k.inverse_cdf(10, 0.5) == 10);
    const StepKernel g = gossip_kernel(ProcessSpec(3), 2);
    CHECK(g.inverse_cdf(1, 0.0) == 0);
    CHECK(g.inverse_cdf(1, 0.3) == 1);
    CHECK(g.inverse_cdf(1, 0.8) == 2);
  }

  TEST_CASE("folding sums the two mirror images") {
    for (ModelKind model : {ModelKind::Sequential, ModelKind::Gossip})
      for (std::int64_t n : {7, 10}) {
        const StepKernel raw = step_kernel(model, ProcessSpec(4), n);
        const StepKernel f = fold(raw);
        CHECK(f.folded());
        CHECK(f.first_state() == (n + 1) / 2);
        CHECK(f.layout() == raw.layout());
        CHECK(f.max_row_error() < 1e-14);
        for (std::int64_t y = f.first_state(); y <= n; ++y)
          for (std::int64_t r = f.first_state(); r <= n; ++r) {
            const double expect = r == n - r ? raw.prob(y, r) : raw.prob(y, r) + raw.prob(y, n - r);
            CHECK(f.prob(y, r) == doctest::Approx(expect).epsilon(1e-14));
            // Either preimage gives the same folded row.
            const double mirror = r == n - r ? raw.prob(n - y, r) : raw.prob(n - y, r) + raw.prob(n - y, n - r);
            CHECK(f.prob(y, r) == doctest::Approx(mirror).epsilon(1e-12));
          }
        CHECK(f.absorbing(n));
        for (std::int64_t y = f.first_state(); y < n; ++y) CHECK_FALSE(f.absorbing(y));
      }
  }

  TEST_CASE("drift matches the closed form and exact rational values") {
    // n = 10, s = 4: (32 - 120 + 100) / 1000
    CHECK(drift_closed_form(10, 4) == doctest::Approx(0.012));
    CHECK(drift_delta_s(10, 4) == doctest::Approx(0.012).epsilon(1e-14));
    for (std::int64_t n : {3, 10, 57, 400})
      for (std::int64_t s = 1; s < n; ++s) CHECK(std::abs(drift_delta_s(n, s) - drift_closed_form(n, s)) < 1e-14);
    CHECK_THROWS_AS(drift_delta_s(10, 0), ValidationError);
    CHECK_THROWS_AS(drift_delta_s(10, 10), ValidationError);
  }

  TEST_CASE("ruin ratio equals down/up of the 3-Majority kernel") {
    const std::int64_t n = 200;
    const StepKernel k = sequential_kernel(ProcessSpec(3), n);
    for (std::int64_t s = n / 2; s < n; ++s)
      CHECK(ruin_ratio(n, static_cast<double>(s - n / 2)) == doctest::Approx(k.down(s) / k.up(s)).epsilon(1e-12));
    CHECK(ruin_ratio(n, 0.0) == 1.0);
    CHECK_THROWS_AS(ruin_ratio(n, -1.0), ValidationError);
    // Slope at zero bias is -2/n per unit bias (to first order).
    const double h = 1e-3;
    CHECK((ruin_ratio(n, h) - 1.0) / h == doctest::Approx(-2.0 / n).epsilon(1e-3));
  }
}
