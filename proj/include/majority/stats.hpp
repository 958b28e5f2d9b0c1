#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace majority {

struct Summary {
  std::int64_t count = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

Summary summarize(std::span<const double> values);

// Linear interpolation between order statistics (R type 7). `sorted` must be
// ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double p);

double normal_cdf(double z);

/// Mann-Whitney U test with average ranks for ties, tie-corrected variance
/// and a continuity correction.
struct RankTest {
  double u = 0.0;  // U statistic of the first sample
  double z = 0.0;
  double p_two_sided = 1.0;
  double p_less = 1.0;     // H1: first sample tends to be smaller
  double p_greater = 1.0;  // H1: first sample tends to be larger
};

RankTest mann_whitney(std::span<const double> x, std::span<const double> y);

/// Pearson chi-square goodness of fit. Categories are pooled left to right
/// until each pooled bin expects at least `min_expected` counts; the
/// leftover tail joins the last bin.
struct GofResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int bins = 0;
};

GofResult chi_square_gof(std::span<const std::int64_t> observed, std::span<const double> probs,
                         double min_expected = 5.0);

double binomial_se(double p, std::int64_t trials);

/// Agresti-Coull interval at z standard errors: centre (x + z^2/2)/(n + z^2)
/// and its standard error.
struct ProportionBand {
  double centre = 0.0;
  double se = 0.0;
  double lower(double z) const { return centre - z * se; }
  double upper(double z) const { return centre + z * se; }
};

ProportionBand agresti_coull(std::int64_t successes, std::int64_t trials, double z = 3.0);

}  // namespace majority
