#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "majority/kernels.hpp"

namespace majority {

/// Expected absorption time and probability of absorbing at n, per start
/// state. Vectors are indexed by s - first_state.
struct AbsorptionProfile {
  std::int64_t n = 0;
  std::int64_t first_state = 0;
  std::vector<double> expected_time;
  std::vector<double> win_probability;
  // Largest relative residual of the solved expected-time system.
  double residual = 0.0;

  double expected(std::int64_t s) const { return expected_time.at(static_cast<std::size_t>(s - first_state)); }
  double win(std::int64_t s) const { return win_probability.at(static_cast<std::size_t>(s - first_state)); }
};

/// Solves E_s = 1 + sum_r K(s, r) E_r over the transient states (absorbing
/// states have E = 0). Tridiagonal elimination for sequential kernels, a
/// pivoted LU for dense ones. Throws NumericError if the system is singular.
AbsorptionProfile expected_absorption(const StepKernel& kernel);

/// values[t] = P[T > t | X_0 = s0] for t = 0..t_max.
struct SurvivalCurve {
  std::int64_t s0 = 0;
  std::vector<double> values;
};

SurvivalCurve survival(const StepKernel& kernel, std::int64_t s0, std::int64_t t_max);

/// Steps the survival function of every start state at once:
/// S_0(s) = [s transient], S_{t+1}(s) = sum_r K(s, r) S_t(r).
class SurvivalPropagator {
 public:
  explicit SurvivalPropagator(const StepKernel& kernel);

  std::int64_t time() const noexcept { return t_; }
  // Indexed by s - first_state.
  const std::vector<double>& values() const noexcept { return current_; }
  void advance();

 private:
  const StepKernel& kernel_;
  std::vector<std::size_t> transient_;
  std::vector<double> current_, next_;
  std::int64_t t_ = 0;
};

/// ceil(10 n ln n) steps for sequential kernels, ceil(10 ln n) rounds for
/// gossip kernels (at least 1).
std::int64_t default_horizon(ModelKind model, std::int64_t n);

struct MonotonicityVerdict {
  bool pass = true;
  // First violating triple: tail(s, d) < tail(s_prime, d) - tol with s > s_prime.
  struct Violation {
    std::int64_t s, s_prime, d;
    double gap;
  };
  std::optional<Violation> violation;
};

/// Checks P[next >= d | s] >= P[next >= d | s'] - tol for every s > s' and
/// every d. A running maximum over s' makes the all-pairs check O(states^2).
MonotonicityVerdict verify_state_monotonicity(const StepKernel& kernel, double tol = 1e-12);

struct DominanceVerdict {
  bool pass = true;
  bool rows_pass = true;
  bool survival_pass = true;
  // Extremes of tail_high(s, d) - tail_low(s, d) over the checked rows.
  double max_row_gap = 0.0;
  double min_row_gap = 0.0;
  struct RowViolation {
    std::int64_t s, d;
    double gap;
  };
  struct SurvivalViolation {
    std::int64_t s0, t;
    double gap;
  };
  std::optional<RowViolation> row_violation;
  std::optional<SurvivalViolation> survival_violation;
};

/// (i) Row-CDF dominance of `high` over `low` at every majority state
/// (s > n/2 for raw kernels, every state for folded ones) within row_tol.
/// (ii) survival(high, s0, t) <= survival(low, s0, t) + survival_tol for all
/// s0 and t <= t_max (default horizon when absent).
DominanceVerdict verify_process_dominance(const StepKernel& low, const StepKernel& high,
                                          std::optional<std::int64_t> t_max = std::nullopt,
                                          double row_tol = 1e-12, double survival_tol = 1e-9);

}  // namespace majority
