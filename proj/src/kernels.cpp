#include "majority/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace majority {
namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ValidationError(std::string(what) + " must lie in [0, 1], got " + std::to_string(p));
}

void check_count(std::int64_t trials, std::int64_t k) {
  if (trials < 0) throw ValidationError("binomial trial count must be non-negative");
  if (k < 0 || k > trials)
    throw ValidationError("binomial count k=" + std::to_string(k) + " outside [0, " +
                          std::to_string(trials) + "]");
}

double central_binomial(int half_j) {
  double c = 1.0;
  for (int i = 1; i <= half_j; ++i) c = c * static_cast<double>(half_j + i) / static_cast<double>(i);
  return c;
}

// Upper tail of an already built pmf vector, summed from the top.
double upper_sum(const std::vector<double>& pmf, std::size_t from) {
  double sum = 0.0;
  for (std::size_t k = pmf.size(); k-- > from;) sum += pmf[k];
  return sum;
}

double fraction(std::int64_t s, std::int64_t n) {
  return static_cast<double>(s) / static_cast<double>(n);
}

}  // namespace

std::vector<double> binom_pmf_vector(std::int64_t trials, double p) {
  if (trials < 0) throw ValidationError("binomial trial count must be non-negative");
  check_probability(p, "success probability");
  const auto m = static_cast<std::size_t>(trials);
  std::vector<double> pmf(m + 1, 0.0);
  if (p == 0.0) {
    pmf.front() = 1.0;
    return pmf;
  }
  if (p == 1.0) {
    pmf.back() = 1.0;
    return pmf;
  }

  const double odds = p / (1.0 - p);
  const auto mode = std::min(m, static_cast<std::size_t>(std::floor((static_cast<double>(m) + 1.0) * p)));
  pmf[mode] = 1.0;
  for (std::size_t k = mode; k < m; ++k) {
    const double next = pmf[k] * (static_cast<double>(m - k) / static_cast<double>(k + 1)) * odds;
    if (next == 0.0) break;
    pmf[k + 1] = next;
  }
  for (std::size_t k = mode; k > 0; --k) {
    const double prev = pmf[k] * (static_cast<double>(k) / static_cast<double>(m - k + 1)) / odds;
    if (prev == 0.0) break;
    pmf[k - 1] = prev;
  }

  double total = 0.0;
  for (double w : pmf) total += w;
  for (double& w : pmf) w /= total;
  return pmf;
}

double binom_pmf(std::int64_t trials, double p, std::int64_t k) {
  check_count(trials, k);
  return binom_pmf_vector(trials, p)[static_cast<std::size_t>(k)];
}

double binom_cdf(std::int64_t trials, double p, std::int64_t k) {
  check_count(trials, k);
  if (k == trials) return 1.0;
  const auto pmf = binom_pmf_vector(trials, p);
  double sum = 0.0;
  for (std::int64_t i = 0; i <= k; ++i) sum += pmf[static_cast<std::size_t>(i)];
  return sum;
}

double binom_upper_tail(std::int64_t trials, double p, std::int64_t k) {
  if (k <= 0) {
    check_probability(p, "success probability");
    return 1.0;
  }
  if (k > trials) {
    check_probability(p, "success probability");
    return 0.0;
  }
  return upper_sum(binom_pmf_vector(trials, p), static_cast<std::size_t>(k));
}

double adoption_probability(ProcessSpec spec, double alpha) {
  check_probability(alpha, "alpha");
  const int j = spec.j();
  const auto pmf = binom_pmf_vector(j, alpha);
  const int half = j / 2;
  double q = upper_sum(pmf, static_cast<std::size_t>(half + 1));
  if (spec.has_ties()) q += 0.5 * pmf[static_cast<std::size_t>(half)];
  return q;
}

double signed_tie_break_gain(int half_j, double alpha) {
  if (half_j < 1 || 2 * half_j + 1 > kMaxSampleSize)
    throw ValidationError("half sample size must lie in [1, " + std::to_string((kMaxSampleSize - 1) / 2) +
                          "], got " + std::to_string(half_j));
  check_probability(alpha, "alpha");
  return (2.0 * alpha - 1.0) / 2.0 * central_binomial(half_j) *
         std::pow(alpha * (1.0 - alpha), half_j);
}

double tie_break_gain(int half_j, double alpha) {
  if (alpha < 0.5)
    throw ValidationError("tie_break_gain is defined for the majority side (alpha >= 1/2), got " +
                          std::to_string(alpha));
  return signed_tie_break_gain(half_j, alpha);
}

// ---------------------------------------------------------------------------

StepKernel StepKernel::tridiagonal(ModelKind model, int j, std::int64_t n, std::int64_t first_state,
                                   std::vector<double> down, std::vector<double> stay,
                                   std::vector<double> up, bool folded) {
  StepKernel k;
  k.model_ = model;
  k.j_ = j;
  k.n_ = n;
  k.first_ = first_state;
  k.folded_ = folded;
  k.layout_ = Layout::Tridiagonal;
  const auto size = static_cast<std::size_t>(n - first_state + 1);
  if (down.size() != size || stay.size() != size || up.size() != size)
    throw ValidationError("tridiagonal kernel bands must have one entry per state");
  if (down.front() != 0.0 || up.back() != 0.0)
    throw ValidationError("tridiagonal kernel leaks mass outside [first_state, n]");
  k.down_ = std::move(down);
  k.stay_ = std::move(stay);
  k.up_ = std::move(up);
  return k;
}

StepKernel StepKernel::dense(ModelKind model, int j, std::int64_t n, std::int64_t first_state,
                             std::vector<double> rows, bool folded) {
  StepKernel k;
  k.model_ = model;
  k.j_ = j;
  k.n_ = n;
  k.first_ = first_state;
  k.folded_ = folded;
  k.layout_ = Layout::Dense;
  const auto size = static_cast<std::size_t>(n - first_state + 1);
  if (rows.size() != size * size) throw ValidationError("dense kernel must be square over its states");
  k.dense_ = std::move(rows);
  return k;
}

std::size_t StepKernel::index(std::int64_t s) const {
  if (s < first_ || s > n_)
    throw ValidationError("state " + std::to_string(s) + " outside kernel range [" +
                          std::to_string(first_) + ", " + std::to_string(n_) + "]");
  return static_cast<std::size_t>(s - first_);
}

std::span<const double> StepKernel::dense_row(std::int64_t s) const {
  const auto size = static_cast<std::size_t>(state_count());
  return std::span<const double>(dense_).subspan(index(s) * size, size);
}

double StepKernel::prob(std::int64_t s, std::int64_t r) const {
  const auto i = index(s);
  if (r < first_ || r > n_) return 0.0;
  if (layout_ == Layout::Dense) return dense_row(s)[static_cast<std::size_t>(r - first_)];
  if (r == s) return stay_[i];
  if (r == s + 1) return up_[i];
  if (r == s - 1) return down_[i];
  return 0.0;
}

double StepKernel::tail(std::int64_t s, std::int64_t d) const {
  const auto i = index(s);
  if (d <= first_) return 1.0;
  if (d > n_) return 0.0;
  if (layout_ == Layout::Tridiagonal) {
    if (d <= s - 1) return 1.0;
    if (d == s) return stay_[i] + up_[i];
    if (d == s + 1) return up_[i];
    return 0.0;
  }
  const auto r = dense_row(s);
  double sum = 0.0;
  for (std::size_t k = r.size(); k-- > static_cast<std::size_t>(d - first_);) sum += r[k];
  return sum;
}

std::vector<double> StepKernel::row(std::int64_t s) const {
  if (layout_ == Layout::Dense) {
    auto r = dense_row(s);
    return {r.begin(), r.end()};
  }
  std::vector<double> out(static_cast<std::size_t>(state_count()), 0.0);
  const auto i = index(s);
  out[i] = stay_[i];
  if (s < n_) out[i + 1] = up_[i];
  if (s > first_) out[i - 1] = down_[i];
  return out;
}

bool StepKernel::absorbing(std::int64_t s) const { return prob(s, s) >= 1.0 - 1e-15; }

std::int64_t StepKernel::inverse_cdf(std::int64_t s, double u) const {
  const auto i = index(s);
  if (layout_ == Layout::Tridiagonal) {
    const double down = down_[i], stay = stay_[i], up = up_[i];
    if (u < down) return s - 1;
    if (u < down + stay) return s;
    if (up > 0.0) return s + 1;
    return stay > 0.0 ? s : s - 1;
  }
  const auto r = dense_row(s);
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (r[k] <= 0.0) continue;
    cumulative += r[k];
    last_positive = k;
    if (u < cumulative) return first_ + static_cast<std::int64_t>(k);
  }
  return first_ + static_cast<std::int64_t>(last_positive);
}

double StepKernel::max_row_error() const {
  double worst = 0.0;
  for (std::int64_t s = first_; s <= n_; ++s) {
    double sum = 0.0;
    if (layout_ == Layout::Tridiagonal) {
      const auto i = index(s);
      sum = down_[i] + stay_[i] + up_[i];
    } else {
      for (double p : dense_row(s)) sum += p;
    }
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

// ---------------------------------------------------------------------------

StepKernel sequential_kernel(ProcessSpec spec, std::int64_t n) {
  if (n < 1) throw ValidationError("population size n must be positive");
  const auto size = static_cast<std::size_t>(n + 1);
  std::vector<double> down(size), stay(size), up(size);
  for (std::int64_t s = 0; s <= n; ++s) {
    const double alpha = fraction(s, n);
    const double beta = fraction(n - s, n);
    const double q = adoption_probability(spec, alpha);
    const auto i = static_cast<std::size_t>(s);
    up[i] = beta * q;
    down[i] = alpha * (1.0 - q);
    stay[i] = 1.0 - up[i] - down[i];
  }
  return StepKernel::tridiagonal(ModelKind::Sequential, spec.j(), n, 0, std::move(down),
                                 std::move(stay), std::move(up));
}

StepKernel gossip_kernel(ProcessSpec spec, std::int64_t n) {
  if (n < 1) throw ValidationError("population size n must be positive");
  if (n > kDenseKernelLimit)
    throw CapacityError("dense gossip kernel limited to n <= " + std::to_string(kDenseKernelLimit) +
                        " (got " + std::to_string(n) + "); use Monte Carlo (simulate) instead");
  const auto size = static_cast<std::size_t>(n + 1);
  std::vector<double> rows(size * size);
  for (std::int64_t s = 0; s <= n; ++s) {
    const auto pmf = binom_pmf_vector(n, adoption_probability(spec, fraction(s, n)));
    std::copy(pmf.begin(), pmf.end(), rows.begin() + static_cast<std::ptrdiff_t>(s) * static_cast<std::ptrdiff_t>(size));
  }
  return StepKernel::dense(ModelKind::Gossip, spec.j(), n, 0, std::move(rows));
}

StepKernel step_kernel(ModelKind model, ProcessSpec spec, std::int64_t n) {
  return model == ModelKind::Gossip ? gossip_kernel(spec, n) : sequential_kernel(spec, n);
}

StepKernel fold(const StepKernel& raw) {
  if (raw.folded() || raw.first_state() != 0)
    throw ValidationError("fold expects a raw a-count kernel over [0, n]");
  const std::int64_t n = raw.n();
  const std::int64_t lo = (n + 1) / 2;
  const auto size = static_cast<std::size_t>(n - lo + 1);
  auto folded_index = [&](std::int64_t r) {
    return static_cast<std::size_t>(std::max(r, n - r) - lo);
  };

  if (raw.layout() == StepKernel::Layout::Tridiagonal) {
    std::vector<double> down(size, 0.0), stay(size, 0.0), up(size, 0.0);
    for (std::int64_t y = lo; y <= n; ++y) {
      const auto i = static_cast<std::size_t>(y - lo);
      const std::int64_t targets[3] = {y - 1, y, y + 1};
      const double probs[3] = {raw.down(y), raw.stay(y), raw.up(y)};
      for (int k = 0; k < 3; ++k) {
        if (probs[k] == 0.0) continue;
        const auto f = folded_index(targets[k]);
        if (f + 1 == i) down[i] += probs[k];
        else if (f == i) stay[i] += probs[k];
        else up[i] += probs[k];
      }
    }
    return StepKernel::tridiagonal(raw.model(), raw.j(), n, lo, std::move(down), std::move(stay),
                                   std::move(up), true);
  }

  std::vector<double> rows(size * size, 0.0);
  for (std::int64_t y = lo; y <= n; ++y) {
    const auto src = raw.dense_row(y);
    double* dst = rows.data() + static_cast<std::size_t>(y - lo) * size;
    for (std::int64_t r = 0; r <= n; ++r) dst[folded_index(r)] += src[static_cast<std::size_t>(r)];
  }
  return StepKernel::dense(raw.model(), raw.j(), n, lo, std::move(rows), true);
}

// ---------------------------------------------------------------------------

double drift_delta_s(std::int64_t n, std::int64_t s_minority) {
  if (n < 2 || s_minority < 1 || s_minority > n - 1)
    throw ValidationError("drift_delta_s needs 1 <= s <= n - 1");
  const double x = fraction(s_minority, n);
  // Majority agent adopts b: the sample holds >= 2 minority opinions.
  const double to_minority = fraction(n - s_minority, n) * binom_upper_tail(3, x, 2);
  // Minority agent adopts a: the sample holds <= 1 minority opinion.
  const double to_majority = x * binom_cdf(3, x, 1);
  return (to_majority - to_minority) / static_cast<double>(s_minority);
}

double drift_closed_form(std::int64_t n, std::int64_t s_minority) {
  const std::int64_t num = 2 * s_minority * s_minority - 3 * s_minority * n + n * n;
  const double nd = static_cast<double>(n);
  return static_cast<double>(num) / (nd * nd * nd);
}

double ruin_ratio(std::int64_t n, double delta) {
  if (n < 1) throw ValidationError("population size n must be positive");
  if (!(delta >= 0.0 && 2.0 * delta <= static_cast<double>(n)))
    throw ValidationError("ruin_ratio needs 0 <= delta <= n/2");
  const double a = 0.5 + delta / static_cast<double>(n);
  return (1.0 - a) * (1.0 + 2.0 * a) / (a * (3.0 - 2.0 * a));
}

}  // namespace majority
