#include "majority/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "majority/core.hpp"

namespace majority {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Summary summarize(std::span<const double> values) {
  Summary out;
  if (values.empty()) return out;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  out.count = static_cast<std::int64_t>(sorted.size());
  out.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(out.count);
  if (out.count > 1) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(out.count - 1));
  }
  out.min = sorted.front();
  out.max = sorted.back();
  out.q1 = quantile_sorted(sorted, 0.25);
  out.median = quantile_sorted(sorted, 0.5);
  out.q3 = quantile_sorted(sorted, 0.75);
  return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

RankTest mann_whitney(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw ValidationError("rank test needs two non-empty samples");
  const auto n1 = static_cast<double>(x.size());
  const auto n2 = static_cast<double>(y.size());
  struct Item {
    double v;
    bool first;
  };
  std::vector<Item> all;
  all.reserve(x.size() + y.size());
  for (double v : x) all.push_back({v, true});
  for (double v : y) all.push_back({v, false});
  std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.v < b.v; });

  double rank_sum = 0.0;
  double tie_term = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t k = i;
    while (k < all.size() && all[k].v == all[i].v) ++k;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(k)) / 2.0;
    for (std::size_t m = i; m < k; ++m)
      if (all[m].first) rank_sum += avg;
    const auto t = static_cast<double>(k - i);
    tie_term += t * t * t - t;
    i = k;
  }

  RankTest out;
  out.u = rank_sum - n1 * (n1 + 1.0) / 2.0;
  const double total = n1 + n2;
  const double mu = n1 * n2 / 2.0;
  const double var = n1 * n2 / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
  if (!(var > 0.0)) return out;
  const double sd = std::sqrt(var);
  out.z = (out.u - mu) / sd;
  out.p_less = normal_cdf((out.u - mu + 0.5) / sd);
  out.p_greater = 1.0 - normal_cdf((out.u - mu - 0.5) / sd);
  out.p_two_sided = std::min(1.0, 2.0 * std::min(out.p_less, out.p_greater));
  return out;
}

GofResult chi_square_gof(std::span<const std::int64_t> observed, std::span<const double> probs,
                         double min_expected) {
  if (observed.size() != probs.size() || observed.empty())
    throw ValidationError("goodness of fit needs matching, non-empty observed and probability vectors");
  const auto total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::int64_t{0}));
  std::vector<double> exp_bins;
  std::vector<double> obs_bins;
  double e = 0.0;
  double o = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    e += probs[i] * total;
    o += static_cast<double>(observed[i]);
    if (e >= min_expected) {
      exp_bins.push_back(e);
      obs_bins.push_back(o);
      e = o = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (exp_bins.empty()) {
      exp_bins.push_back(e);
      obs_bins.push_back(o);
    } else {
      exp_bins.back() += e;
      obs_bins.back() += o;
    }
  }

  GofResult out;
  out.bins = static_cast<int>(exp_bins.size());
  out.dof = out.bins - 1;
  for (std::size_t i = 0; i < exp_bins.size(); ++i) {
    if (exp_bins[i] > 0.0) {
      const double d = obs_bins[i] - exp_bins[i];
      out.statistic += d * d / exp_bins[i];
    } else if (obs_bins[i] > 0.0) {
      // Counts where the model puts no mass at all.
      out.statistic = std::numeric_limits<double>::infinity();
    }
  }
  if (out.dof < 1) {
    out.p_value = std::isinf(out.statistic) ? 0.0 : 1.0;
    return out;
  }
  if (std::isinf(out.statistic)) {
    out.p_value = 0.0;
    return out;
  }
  const boost::math::chi_squared dist(out.dof);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

double binomial_se(double p, std::int64_t trials) {
  if (trials < 1) throw ValidationError("standard error needs at least one trial");
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

ProportionBand agresti_coull(std::int64_t successes, std::int64_t trials, double z) {
  if (trials < 0 || successes < 0 || successes > trials) throw ValidationError("invalid proportion counts");
  const double nt = static_cast<double>(trials) + z * z;
  const double centre = (static_cast<double>(successes) + z * z / 2.0) / nt;
  return {centre, std::sqrt(centre * (1.0 - centre) / nt)};
}

}  // namespace majority
