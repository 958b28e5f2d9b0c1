#include "majority/chain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

namespace majority {
namespace {

struct Solution {
  std::vector<double> time;
  std::vector<double> win;
};

// Thomas elimination on the full state range; absorbing rows are identity rows.
Solution solve_tridiagonal(const StepKernel& k) {
  const auto size = static_cast<std::size_t>(k.state_count());
  const std::int64_t lo = k.first_state();
  std::vector<double> lower(size), diag(size), upper(size), rhs_time(size), rhs_win(size);
  for (std::size_t i = 0; i < size; ++i) {
    const std::int64_t s = lo + static_cast<std::int64_t>(i);
    if (k.absorbing(s)) {
      diag[i] = 1.0;
      rhs_win[i] = s == k.n() ? 1.0 : 0.0;
      continue;
    }
    lower[i] = -k.down(s);
    upper[i] = -k.up(s);
    diag[i] = k.up(s) + k.down(s);
    rhs_time[i] = 1.0;
  }

  std::vector<double> c(size), t(size), w(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double pivot = diag[i] - (i > 0 ? lower[i] * c[i - 1] : 0.0);
    if (!(std::abs(pivot) > 0.0))
      throw NumericError("singular tridiagonal absorption system at state " +
                         std::to_string(lo + static_cast<std::int64_t>(i)));
    c[i] = upper[i] / pivot;
    t[i] = (rhs_time[i] - (i > 0 ? lower[i] * t[i - 1] : 0.0)) / pivot;
    w[i] = (rhs_win[i] - (i > 0 ? lower[i] * w[i - 1] : 0.0)) / pivot;
  }
  for (std::size_t i = size - 1; i-- > 0;) {
    t[i] -= c[i] * t[i + 1];
    w[i] -= c[i] * w[i + 1];
  }
  return {std::move(t), std::move(w)};
}

Solution solve_dense(const StepKernel& k) {
  const auto size = static_cast<std::size_t>(k.state_count());
  const std::int64_t lo = k.first_state();
  std::vector<std::size_t> transient;
  for (std::size_t i = 0; i < size; ++i)
    if (!k.absorbing(lo + static_cast<std::int64_t>(i))) transient.push_back(i);

  Solution out{std::vector<double>(size, 0.0), std::vector<double>(size, 0.0)};
  if (k.absorbing(k.n())) out.win.back() = 1.0;
  if (transient.empty()) return out;

  const auto m = static_cast<Eigen::Index>(transient.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd rhs(m, 2);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto row = k.dense_row(lo + static_cast<std::int64_t>(transient[static_cast<std::size_t>(r)]));
    for (Eigen::Index c = 0; c < m; ++c) a(r, c) -= row[transient[static_cast<std::size_t>(c)]];
    rhs(r, 0) = 1.0;
    rhs(r, 1) = k.absorbing(k.n()) ? row.back() : 0.0;
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::MatrixXd x = lu.solve(rhs);
  for (Eigen::Index r = 0; r < m; ++r) {
    out.time[transient[static_cast<std::size_t>(r)]] = x(r, 0);
    out.win[transient[static_cast<std::size_t>(r)]] = x(r, 1);
  }
  return out;
}

double relative_residual(const StepKernel& k, const std::vector<double>& e) {
  double worst = 0.0;
  const std::int64_t lo = k.first_state();
  for (std::int64_t s = lo; s <= k.n(); ++s) {
    if (k.absorbing(s)) continue;
    const auto row = k.row(s);
    double acc = 1.0;
    for (std::size_t r = 0; r < row.size(); ++r) acc += row[r] * e[r];
    const double lhs = e[static_cast<std::size_t>(s - lo)];
    worst = std::max(worst, std::abs(lhs - acc) / std::max(1.0, std::abs(lhs)));
  }
  return worst;
}

void require_compatible(const StepKernel& low, const StepKernel& high) {
  if (low.n() != high.n() || low.model() != high.model() || low.folded() != high.folded() ||
      low.first_state() != high.first_state())
    throw ValidationError("dominance check needs kernels with the same n, model and state range");
}

}  // namespace

AbsorptionProfile expected_absorption(const StepKernel& kernel) {
  bool any_absorbing = false;
  for (std::int64_t s = kernel.first_state(); s <= kernel.n() && !any_absorbing; ++s)
    any_absorbing = kernel.absorbing(s);
  if (!any_absorbing) throw NumericError("kernel has no absorbing state; absorption time is infinite");

  Solution sol = kernel.layout() == StepKernel::Layout::Tridiagonal ? solve_tridiagonal(kernel)
                                                                     : solve_dense(kernel);
  AbsorptionProfile profile;
  profile.n = kernel.n();
  profile.first_state = kernel.first_state();
  profile.residual = relative_residual(kernel, sol.time);
  for (double v : sol.time)
    if (!std::isfinite(v)) throw NumericError("absorption system produced a non-finite expected time");
  if (profile.residual > 1e-6)
    throw NumericError("absorption system is ill-conditioned: relative residual " +
                       std::to_string(profile.residual));
  profile.expected_time = std::move(sol.time);
  profile.win_probability = std::move(sol.win);
  return profile;
}

SurvivalPropagator::SurvivalPropagator(const StepKernel& kernel) : kernel_(kernel) {
  const auto size = static_cast<std::size_t>(kernel.state_count());
  current_.assign(size, 0.0);
  next_.assign(size, 0.0);
  for (std::size_t i = 0; i < size; ++i) {
    if (kernel.absorbing(kernel.first_state() + static_cast<std::int64_t>(i))) continue;
    transient_.push_back(i);
    current_[i] = 1.0;
  }
}

void SurvivalPropagator::advance() {
  const std::int64_t lo = kernel_.first_state();
  const bool tri = kernel_.layout() == StepKernel::Layout::Tridiagonal;
  for (std::size_t i : transient_) {
    const std::int64_t s = lo + static_cast<std::int64_t>(i);
    double acc = 0.0;
    if (tri) {
      acc = kernel_.stay(s) * current_[i];
      if (i > 0) acc += kernel_.down(s) * current_[i - 1];
      if (i + 1 < current_.size()) acc += kernel_.up(s) * current_[i + 1];
    } else {
      const auto row = kernel_.dense_row(s);
      for (std::size_t r : transient_) acc += row[r] * current_[r];
    }
    next_[i] = acc;
  }
  std::swap(current_, next_);
  ++t_;
}

SurvivalCurve survival(const StepKernel& kernel, std::int64_t s0, std::int64_t t_max) {
  if (t_max < 0) throw ValidationError("survival horizon must be non-negative");
  if (s0 < kernel.first_state() || s0 > kernel.n()) throw ValidationError("start state outside kernel range");
  SurvivalCurve curve{s0, {}};
  curve.values.reserve(static_cast<std::size_t>(t_max + 1));
  SurvivalPropagator prop(kernel);
  const auto i = static_cast<std::size_t>(s0 - kernel.first_state());
  curve.values.push_back(prop.values()[i]);
  for (std::int64_t t = 1; t <= t_max; ++t) {
    prop.advance();
    curve.values.push_back(prop.values()[i]);
  }
  return curve;
}

std::int64_t default_horizon(ModelKind model, std::int64_t n) {
  const double ln = std::log(static_cast<double>(n));
  const double h = model == ModelKind::Sequential ? 10.0 * static_cast<double>(n) * ln : 10.0 * ln;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(h)));
}

MonotonicityVerdict verify_state_monotonicity(const StepKernel& kernel, double tol) {
  MonotonicityVerdict verdict;
  const std::int64_t lo = kernel.first_state();
  const auto size = static_cast<std::size_t>(kernel.state_count());
  // best[d] = max over visited s' of tail(s', d), argbest the s' attaining it.
  std::vector<double> best(size, -1.0);
  std::vector<std::int64_t> argbest(size, lo);
  std::vector<double> tails(size);
  double worst_gap = 0.0;
  for (std::int64_t s = lo; s <= kernel.n(); ++s) {
    if (kernel.layout() == StepKernel::Layout::Dense) {
      const auto row = kernel.dense_row(s);
      double acc = 0.0;
      for (std::size_t d = size; d-- > 0;) {
        acc += row[d];
        tails[d] = acc;
      }
    } else {
      for (std::size_t d = 0; d < size; ++d) tails[d] = kernel.tail(s, lo + static_cast<std::int64_t>(d));
    }
    for (std::size_t d = 0; d < size; ++d) {
      if (s > lo) {
        const double gap = tails[d] - best[d];
        if (gap < -tol && gap < worst_gap) {
          worst_gap = gap;
          verdict.pass = false;
          verdict.violation = MonotonicityVerdict::Violation{s, argbest[d], lo + static_cast<std::int64_t>(d), gap};
        }
      }
      if (tails[d] > best[d]) {
        best[d] = tails[d];
        argbest[d] = s;
      }
    }
  }
  return verdict;
}

DominanceVerdict verify_process_dominance(const StepKernel& low, const StepKernel& high,
                                          std::optional<std::int64_t> t_max, double row_tol,
                                          double survival_tol) {
  require_compatible(low, high);
  DominanceVerdict verdict;
  const std::int64_t n = low.n();
  const std::int64_t lo = low.first_state();

  bool first = true;
  for (std::int64_t s = lo; s <= n; ++s) {
    if (!low.folded() && 2 * s <= n) continue;
    for (std::int64_t d = lo; d <= n; ++d) {
      const double gap = high.tail(s, d) - low.tail(s, d);
      if (first) {
        verdict.max_row_gap = verdict.min_row_gap = gap;
        first = false;
      }
      verdict.max_row_gap = std::max(verdict.max_row_gap, gap);
      if (gap < verdict.min_row_gap) verdict.min_row_gap = gap;
      if (gap < -row_tol && (!verdict.row_violation || gap < verdict.row_violation->gap)) {
        verdict.rows_pass = false;
        verdict.row_violation = DominanceVerdict::RowViolation{s, d, gap};
      }
    }
  }

  const std::int64_t horizon = t_max.value_or(default_horizon(low.model(), n));
  SurvivalPropagator lp(low), hp(high);
  for (std::int64_t t = 0; t <= horizon; ++t) {
    if (t > 0) {
      lp.advance();
      hp.advance();
    }
    const auto& lv = lp.values();
    const auto& hv = hp.values();
    for (std::size_t i = 0; i < lv.size(); ++i) {
      const double gap = hv[i] - lv[i];
      if (gap > survival_tol && (!verdict.survival_violation || gap > verdict.survival_violation->gap)) {
        verdict.survival_pass = false;
        verdict.survival_violation = DominanceVerdict::SurvivalViolation{lo + static_cast<std::int64_t>(i), t, gap};
      }
    }
  }
  verdict.pass = verdict.rows_pass && verdict.survival_pass;
  return verdict;
}

}  // namespace majority
