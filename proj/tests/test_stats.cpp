#include <cmath>
#include <vector>

#include "doctest.h"
#include "majority/stats.hpp"

using namespace majority;

namespace {

// U of x by counting pairs directly, ties counting one half.
double brute_u(const std::vector<double>& x, const std::vector<double>& y) {
  double u = 0.0;
  for (double a : x)
    for (double b : y) u += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  return u;
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("summary of a small sample") {
    const std::vector<double> v{4, 1, 3, 2};
    const Summary s = summarize(v);
    CHECK(s.count == 4);
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(s.min == 1);
    CHECK(s.max == 4);
    CHECK(s.q1 == doctest::Approx(1.75));
    CHECK(s.median == doctest::Approx(2.5));
    CHECK(s.q3 == doctest::Approx(3.25));
    const std::vector<double> one{7};
    CHECK(summarize(one).sd == 0.0);
    CHECK(summarize(std::vector<double>{}).count == 0);
  }

  TEST_CASE("normal cdf reference points") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_cdf(-3.0) == doctest::Approx(0.0013498980316301).epsilon(1e-10));
  }

  TEST_CASE("rank test on fully separated samples") {
    const std::vector<double> x{1, 2, 3}, y{4, 5, 6};
    const RankTest r = mann_whitney(x, y);
    CHECK(r.u == 0.0);
    // mean 4.5, sd sqrt(5.25); the p-value uses a continuity shift of 0.5.
    CHECK(r.z == doctest::Approx(-4.5 / std::sqrt(5.25)));
    CHECK(r.p_less == doctest::Approx(normal_cdf(-4.0 / std::sqrt(5.25))));
    CHECK(r.p_less == doctest::Approx(0.0404).epsilon(1e-2));
    CHECK(r.p_greater > 0.95);
    CHECK(r.p_two_sided == doctest::Approx(2 * r.p_less));
  }

  TEST_CASE("rank test U matches pair counting with ties") {
    const std::vector<double> x{1, 2, 2, 5, 7, 7, 9}, y{2, 3, 7, 8, 8, 10};
    CHECK(mann_whitney(x, y).u == doctest::Approx(brute_u(x, y)));
    CHECK(mann_whitney(y, x).u == doctest::Approx(brute_u(y, x)));
    const std::vector<double> same{3, 3, 3};
    CHECK(mann_whitney(same, same).p_two_sided == doctest::Approx(1.0));
  }

  TEST_CASE("chi-square p-values") {
    // 1 dof statistic 3.84146 has p = 0.05.
    const std::vector<std::int64_t> obs{60, 40};
    const std::vector<double> p{0.5, 0.5};
    const GofResult g = chi_square_gof(obs, p);
    CHECK(g.statistic == doctest::Approx(4.0));
    CHECK(g.dof == 1);
    CHECK(g.p_value == doctest::Approx(0.0455002638963584).epsilon(1e-9));
    const std::vector<std::int64_t> perfect{25, 50, 25};
    CHECK(chi_square_gof(perfect, std::vector<double>{0.25, 0.5, 0.25}).p_value == doctest::Approx(1.0));
  }

  TEST_CASE("sparse categories are pooled") {
    const std::vector<std::int64_t> obs{1, 0, 1, 48, 50};
    const std::vector<double> p{0.01, 0.01, 0.01, 0.47, 0.5};
    const GofResult g = chi_square_gof(obs, p);
    // Expected 1, 1, 1, 47 pool into one bin, 50 stands alone.
    CHECK(g.bins == 2);
    CHECK(g.dof == 1);
  }

  TEST_CASE("proportion bands") {
    CHECK(binomial_se(0.5, 100) == doctest::Approx(0.05));
    const ProportionBand b = agresti_coull(0, 10, 3.0);
    CHECK(b.centre == doctest::Approx(4.5 / 19.0));
    CHECK(b.se == doctest::Approx(std::sqrt(b.centre * (1 - b.centre) / 19.0)));
    CHECK(b.lower(3) < 0.0);
    const ProportionBand c = agresti_coull(50, 100, 2.0);
    CHECK(c.centre == doctest::Approx(0.5));
    CHECK(c.upper(2) - c.lower(2) == doctest::Approx(4 * std::sqrt(0.25 / 104)));
  }
}
