#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "majority/core.hpp"

namespace majority {

// ---------------------------------------------------------------------------
// Binomial primitives
//
// The pmf vector is built from the mode outward with the multiplicative ratio
// pmf(k+1)/pmf(k) = (m-k)/(k+1) * p/(1-p) and normalised at the end, so no
// factorials or powers are formed. Absolute error stays below 1e-14 for
// m <= 64; larger m is accepted (gossip rows) with error growing ~ m * eps.
// ---------------------------------------------------------------------------

std::vector<double> binom_pmf_vector(std::int64_t trials, double p);
double binom_pmf(std::int64_t trials, double p, std::int64_t k);
double binom_cdf(std::int64_t trials, double p, std::int64_t k);
// P[Bin(trials, p) >= k], summed from the top so small upper tails keep
// their relative precision.
double binom_upper_tail(std::int64_t trials, double p, std::int64_t k);

// ---------------------------------------------------------------------------
// Adoption curve
// ---------------------------------------------------------------------------

/// q(alpha): probability that an updating agent ends up holding opinion a
/// when a fraction alpha of the population holds a.
///   odd j = 2m+1:  P[Bin(j, alpha) >= m+1]
///   even j = 2m:   P[Bin(j, alpha) >= m+1] + P[Bin(j, alpha) = m] / 2
double adoption_probability(ProcessSpec spec, double alpha);

/// Gain in the b -> a flip probability when the fair tie-break of P_{2j} is
/// replaced by one more sample (P_{2j+1}):
///   ((2 alpha - 1) / 2) * C(2j, j) * alpha^j * (1 - alpha)^j.
/// Defined on the majority side; alpha < 1/2 is a domain error.
double tie_break_gain(int half_j, double alpha);

/// Same closed form on the whole of [0, 1]; negative below 1/2, where it is
/// still the exact difference q_{2j+1} - q_{2j}.
double signed_tie_break_gain(int half_j, double alpha);

// ---------------------------------------------------------------------------
// Step kernels
// ---------------------------------------------------------------------------

/// Exact one-step transition law of the count chain on states
/// [first_state, n]. Sequential kernels are tridiagonal; gossip kernels are
/// dense rows. Raw kernels track the a-count (first_state = 0); folded
/// kernels track the majority count max(s, n - s) (first_state = ceil(n/2)).
class StepKernel {
 public:
  enum class Layout { Tridiagonal, Dense };

  static StepKernel tridiagonal(ModelKind model, int j, std::int64_t n, std::int64_t first_state,
                                std::vector<double> down, std::vector<double> stay,
                                std::vector<double> up, bool folded = false);
  // rows: (n - first_state + 1)^2 entries, row-major, next-state index r - first_state.
  static StepKernel dense(ModelKind model, int j, std::int64_t n, std::int64_t first_state,
                          std::vector<double> rows, bool folded = false);

  ModelKind model() const noexcept { return model_; }
  // Sample size the kernel was built for; 0 for hand-built kernels.
  int j() const noexcept { return j_; }
  std::int64_t n() const noexcept { return n_; }
  std::int64_t first_state() const noexcept { return first_; }
  std::int64_t state_count() const noexcept { return n_ - first_ + 1; }
  bool folded() const noexcept { return folded_; }
  Layout layout() const noexcept { return layout_; }

  double prob(std::int64_t s, std::int64_t r) const;
  // P[next >= d | current = s]
  double tail(std::int64_t s, std::int64_t d) const;
  // Whole row, indexed by r - first_state.
  std::vector<double> row(std::int64_t s) const;
  std::span<const double> dense_row(std::int64_t s) const;

  // Tridiagonal accessors (valid only for Layout::Tridiagonal).
  double up(std::int64_t s) const { return up_[index(s)]; }
  double down(std::int64_t s) const { return down_[index(s)]; }
  double stay(std::int64_t s) const { return stay_[index(s)]; }

  bool absorbing(std::int64_t s) const;

  /// Smallest r with P[next <= r | s] > u. u = 0 gives the row's minimum
  /// support point.
  std::int64_t inverse_cdf(std::int64_t s, double u) const;

  // Largest |row sum - 1|.
  double max_row_error() const;

 private:
  StepKernel() = default;
  std::size_t index(std::int64_t s) const;

  ModelKind model_ = ModelKind::Sequential;
  int j_ = 0;
  std::int64_t n_ = 0;
  std::int64_t first_ = 0;
  bool folded_ = false;
  Layout layout_ = Layout::Tridiagonal;
  std::vector<double> down_, stay_, up_;
  std::vector<double> dense_;
};

inline constexpr std::int64_t kDenseKernelLimit = 4096;

/// up(s) = (1 - s/n) q(s/n), down(s) = (s/n)(1 - q(s/n)), stay = remainder.
StepKernel sequential_kernel(ProcessSpec spec, std::int64_t n);

/// Row s is the Binomial(n, q(s/n)) pmf. Throws CapacityError above
/// kDenseKernelLimit; use Monte Carlo there.
StepKernel gossip_kernel(ProcessSpec spec, std::int64_t n);

StepKernel step_kernel(ModelKind model, ProcessSpec spec, std::int64_t n);

/// Majority-count kernel: row y is the law of max(S', n - S') started from
/// any state with majority count y. Absorbing only at n.
StepKernel fold(const StepKernel& raw);

// ---------------------------------------------------------------------------
// 3-Majority sequential drift
// ---------------------------------------------------------------------------

/// Expected one-step decrease of the minority count, divided by the minority
/// count s, computed from the binomial transition probabilities.
double drift_delta_s(std::int64_t n, std::int64_t s_minority);

/// (2 s^2 - 3 s n + n^2) / n^3
double drift_closed_form(std::int64_t n, std::int64_t s_minority);

/// Down/up ratio of productive 3-Majority sequential steps at bias delta
/// (a-count n/2 + delta):  (1 - a)(1 + 2a) / (a (3 - 2a)),  a = 1/2 + delta/n.
double ruin_ratio(std::int64_t n, double delta);

}  // namespace majority
