#include "majority/checks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "majority/chain.hpp"
#include "majority/kernels.hpp"
#include "majority/simulate.hpp"

namespace majority {
namespace {

constexpr double kRowTol = 1e-12;
constexpr double kDriftTol = 1e-14;
constexpr std::size_t kKeptFailures = 8;

using Task = std::function<CheckCase()>;

struct CheckPlan {
  std::string description;
  double tolerance = 0.0;
  std::vector<Task> tasks;
};

std::string cell(std::string_view model, int j, std::int64_t n) {
  return std::string(model) + " j=" + std::to_string(j) + " n=" + std::to_string(n);
}

std::vector<double> alpha_grid(int resolution) {
  std::vector<double> grid;
  const int points = std::max(resolution, 2);
  for (int k = 0; k < points; ++k) grid.push_back(static_cast<double>(k) / static_cast<double>(points - 1));
  return grid;
}

void require_options(const ExactCheckOptions& o) {
  if (o.j_max < 1 || o.j_max > kMaxSampleSize) throw ValidationError("j-max must lie in [1, 64]");
  if (o.n_max < 2) throw ValidationError("n-max must be at least 2");
  if (o.n_max > kDenseKernelLimit) throw CapacityError("n-max above the dense kernel limit");
  if (o.grid_resolution < 2) throw ValidationError("grid resolution must be at least 2");
  if (o.drift_n_max < 2) throw ValidationError("drift n-max must be at least 2");
}

// --- kernels: state monotonicity -----------------------------------------

CheckPlan monotonicity_plan(ModelKind model, const ExactCheckOptions& o) {
  CheckPlan plan{"row-CDF monotone in the current state, " + std::string(to_string(model)) + " kernels", kRowTol, {}};
  for (int j = 1; j <= o.j_max; ++j)
    for (std::int64_t n = 2; n <= o.n_max; ++n)
      plan.tasks.push_back([model, j, n] {
        const StepKernel k = step_kernel(model, ProcessSpec(j), n);
        const auto v = verify_state_monotonicity(k, kRowTol);
        CheckCase c{cell(to_string(model), j, n), v.pass, 0.0, {}};
        if (v.violation) {
          c.error = -v.violation->gap;
          c.detail = "tail(" + std::to_string(v.violation->s) + ", " + std::to_string(v.violation->d) + ") < tail(" +
                     std::to_string(v.violation->s_prime) + ", " + std::to_string(v.violation->d) + ")";
        }
        return c;
      });
  return plan;
}

// --- adoption-curve identities --------------------------------------------

CheckPlan tie_gain_plan(const ExactCheckOptions& o) {
  CheckPlan plan{"q_{2i+1} - q_{2i} equals the closed-form tie-break gain on an alpha grid", kRowTol, {}};
  const int i_max = std::min(o.j_max, (kMaxSampleSize - 1) / 2);
  for (int i = 1; i <= i_max; ++i)
    plan.tasks.push_back([i, grid = alpha_grid(o.grid_resolution)] {
      CheckCase c{"i=" + std::to_string(i), true, 0.0, {}};
      for (double a : grid) {
        const double diff = adoption_probability(ProcessSpec(2 * i + 1), a) - adoption_probability(ProcessSpec(2 * i), a);
        const double err = std::abs(diff - signed_tie_break_gain(i, a));
        if (err > c.error) {
          c.error = err;
          c.detail = "alpha=" + std::to_string(a);
        }
      }
      c.pass = c.error <= kRowTol;
      return c;
    });
  return plan;
}

CheckPlan odd_even_plan(const ExactCheckOptions& o) {
  CheckPlan plan{"q_{2i-1} equals q_{2i} on an alpha grid", kRowTol, {}};
  const int i_max = std::min(o.j_max, kMaxSampleSize / 2);
  for (int i = 1; i <= i_max; ++i)
    plan.tasks.push_back([i, grid = alpha_grid(o.grid_resolution)] {
      CheckCase c{"i=" + std::to_string(i), true, 0.0, {}};
      for (double a : grid) {
        const double err =
            std::abs(adoption_probability(ProcessSpec(2 * i - 1), a) - adoption_probability(ProcessSpec(2 * i), a));
        if (err > c.error) {
          c.error = err;
          c.detail = "alpha=" + std::to_string(a);
        }
      }
      c.pass = c.error <= kRowTol;
      return c;
    });
  return plan;
}

// --- process dominance and identity ----------------------------------------

CheckPlan dominance_plan(const ExactCheckOptions& o) {
  CheckPlan plan{"row-CDF of P_{2i+1} dominates P_{2i} at majority states, both models", kRowTol, {}};
  for (ModelKind model : {ModelKind::Sequential, ModelKind::Gossip})
    for (int j = 2; j + 1 <= std::min(o.j_max + 1, kMaxSampleSize); j += 2)
      for (std::int64_t n = 2; n <= o.n_max; ++n)
        plan.tasks.push_back([model, j, n] {
          const StepKernel low = step_kernel(model, ProcessSpec(j), n);
          const StepKernel high = step_kernel(model, ProcessSpec(j + 1), n);
          const auto v = verify_process_dominance(low, high, std::int64_t{0}, kRowTol);
          CheckCase c{cell(to_string(model), j, n) + " vs j=" + std::to_string(j + 1), v.rows_pass, 0.0, {}};
          if (v.row_violation) {
            c.error = -v.row_violation->gap;
            c.detail = "s=" + std::to_string(v.row_violation->s) + " d=" + std::to_string(v.row_violation->d);
          }
          return c;
        });
  return plan;
}

CheckPlan identity_plan(const ExactCheckOptions& o) {
  CheckPlan plan{"kernels of P_{2i-1} and P_{2i} coincide entrywise, both models", kRowTol, {}};
  for (ModelKind model : {ModelKind::Sequential, ModelKind::Gossip})
    for (int j = 1; j + 1 <= std::min(o.j_max, kMaxSampleSize); j += 2)
      for (std::int64_t n = 2; n <= o.n_max; ++n)
        plan.tasks.push_back([model, j, n] {
          const StepKernel low = step_kernel(model, ProcessSpec(j), n);
          const StepKernel high = step_kernel(model, ProcessSpec(j + 1), n);
          CheckCase c{cell(to_string(model), j, n) + " vs j=" + std::to_string(j + 1), true, 0.0, {}};
          for (std::int64_t s = 0; s <= n; ++s) {
            const auto a = low.row(s);
            const auto b = high.row(s);
            for (std::size_t r = 0; r < a.size(); ++r) {
              const double err = std::abs(a[r] - b[r]);
              if (err > c.error) {
                c.error = err;
                c.detail = "s=" + std::to_string(s) + " r=" + std::to_string(r);
              }
            }
          }
          c.pass = c.error <= kRowTol;
          return c;
        });
  return plan;
}

// Folded (majority-count) kernels: monotone in the state and ordered in j.
// This is what makes the majority-frame coupling order-preserving.
CheckPlan folded_plan(const ExactCheckOptions& o) {
  CheckPlan plan{"folded kernels are monotone and P_{k+1} dominates P_k on every state, both models", kRowTol, {}};
  for (ModelKind model : {ModelKind::Sequential, ModelKind::Gossip})
    for (int j = 1; j + 1 <= std::min(o.j_max, kMaxSampleSize); ++j)
      for (std::int64_t n = 2; n <= o.n_max; ++n)
        plan.tasks.push_back([model, j, n] {
          const StepKernel low = fold(step_kernel(model, ProcessSpec(j), n));
          const StepKernel high = fold(step_kernel(model, ProcessSpec(j + 1), n));
          const auto mono = verify_state_monotonicity(low, kRowTol);
          const auto dom = verify_process_dominance(low, high, std::int64_t{0}, kRowTol);
          CheckCase c{cell(to_string(model), j, n) + " vs j=" + std::to_string(j + 1), mono.pass && dom.rows_pass,
                      0.0, {}};
          if (mono.violation) {
            c.error = -mono.violation->gap;
            c.detail = "monotonicity at s=" + std::to_string(mono.violation->s);
          }
          if (dom.row_violation && -dom.row_violation->gap > c.error) {
            c.error = -dom.row_violation->gap;
            c.detail = "dominance at s=" + std::to_string(dom.row_violation->s);
          }
          return c;
        });
  return plan;
}

// --- 3-Majority drift and ruin ratio ----------------------------------------

// Minority count s = (1 - eps) n / 2 on the integer grid s = 1 .. n/2 - 1 of
// even n, so eps = 1 - 2 s / n.
double stated_drift(std::int64_t n, double eps) { return (1.0 + eps / 2.0) * eps / (4.0 * static_cast<double>(n)); }

CheckPlan drift_plan(const ExactCheckOptions& o) {
  CheckPlan plan{"drift from the transition law matches (2s^2 - 3sn + n^2)/n^3, decreases in s on s < 3n/4, "
                 "and bounds (1 + eps/2) eps / (4n) from above at s = (1 - eps) n / 2",
                 kDriftTol,
                 {}};
  for (std::int64_t n = 2; n <= o.drift_n_max; ++n)
    plan.tasks.push_back([n] {
      CheckCase c{"n=" + std::to_string(n), true, 0.0, {}};
      double prev = 0.0;
      for (std::int64_t s = 1; s <= n - 1; ++s) {
        const double exact = drift_delta_s(n, s);
        const double closed = drift_closed_form(n, s);
        const double err = std::abs(exact - closed);
        if (err > c.error) {
          c.error = err;
          c.detail = "closed form at s=" + std::to_string(s);
        }
        if (s > 1 && 4 * s < 3 * n && !(closed < prev)) {
          c.pass = false;
          c.detail = "not decreasing at s=" + std::to_string(s);
        }
        prev = closed;
        if (n % 2 == 0 && 2 * s < n) {
          const double eps = 1.0 - 2.0 * static_cast<double>(s) / static_cast<double>(n);
          if (closed < stated_drift(n, eps) - kDriftTol) {
            c.pass = false;
            c.detail = "below the stated lower bound at s=" + std::to_string(s);
          }
        }
      }
      c.pass = c.pass && c.error <= kDriftTol;
      return c;
    });
  return plan;
}

// The literal equality delta_{(1-eps)n/2} = (1 + eps/2) eps / (4n). It does not
// hold: the closed form there is eps (1 + eps) / (2n). Kept so the
// discrepancy can be reproduced from the command line.
CheckPlan drift_epsilon_plan(const ExactCheckOptions& o) {
  CheckPlan plan{"drift at s = (1 - eps) n / 2 equals (1 + eps/2) eps / (4n)", kDriftTol, {}};
  for (std::int64_t n = 4; n <= o.drift_n_max; n += 2)
    plan.tasks.push_back([n] {
      CheckCase c{"n=" + std::to_string(n), true, 0.0, {}};
      for (std::int64_t s = 1; 2 * s < n; ++s) {
        const double eps = 1.0 - 2.0 * static_cast<double>(s) / static_cast<double>(n);
        const double err = std::abs(drift_delta_s(n, s) - stated_drift(n, eps));
        if (err > c.error) {
          c.error = err;
          c.detail = "eps=" + std::to_string(eps) + ": drift " + std::to_string(drift_delta_s(n, s)) +
                     ", formula " + std::to_string(stated_drift(n, eps));
        }
      }
      c.pass = c.error <= kDriftTol;
      return c;
    });
  return plan;
}

CheckPlan ratio_plan(const ExactCheckOptions&) {
  CheckPlan plan{"ruin ratio is 1 at zero bias, strictly decreasing, below 1 for positive bias, "
                 "and equals down/up of the 3-Majority sequential kernel",
                 kRowTol,
                 {}};
  for (std::int64_t n : {10, 64, 100, 1000, 10000, 100000})
    plan.tasks.push_back([n] {
      CheckCase c{"n=" + std::to_string(n), true, 0.0, {}};
      c.error = std::abs(ruin_ratio(n, 0.0) - 1.0);
      if (c.error > 1e-15) {
        c.pass = false;
        c.detail = "ratio at zero bias";
      }
      constexpr int kSteps = 2000;
      double prev = ruin_ratio(n, 0.0);
      for (int k = 1; k <= kSteps; ++k) {
        const double delta = static_cast<double>(n) / 2.0 * k / kSteps;
        const double r = ruin_ratio(n, delta);
        if (!(r < prev) || !(r < 1.0)) {
          c.pass = false;
          c.detail = "not strictly decreasing below 1 at delta=" + std::to_string(delta);
        }
        prev = r;
      }
      if (n % 2 == 0 && n <= 1000) {
        const StepKernel k = sequential_kernel(ProcessSpec(3), n);
        for (std::int64_t s = n / 2; s < n; ++s) {
          const double kernel_ratio = k.down(s) / k.up(s);
          const double err = std::abs(kernel_ratio - ruin_ratio(n, static_cast<double>(s - n / 2))) /
                             std::max(1.0, kernel_ratio);
          if (err > c.error) c.error = err;
          if (err > kRowTol) {
            c.pass = false;
            c.detail = "kernel ratio mismatch at s=" + std::to_string(s);
          }
        }
      }
      return c;
    });
  return plan;
}

CheckPlan make_plan(std::string_view name, const ExactCheckOptions& o) {
  require_options(o);
  if (name == "lemma5") return monotonicity_plan(ModelKind::Sequential, o);
  if (name == "lemma11") return monotonicity_plan(ModelKind::Gossip, o);
  if (name == "lemma7") return tie_gain_plan(o);
  if (name == "lemma9") return odd_even_plan(o);
  if (name == "lemma8") return dominance_plan(o);
  if (name == "lemma10") return identity_plan(o);
  if (name == "folded") return folded_plan(o);
  if (name == "drift") return drift_plan(o);
  if (name == "drift-epsilon") return drift_epsilon_plan(o);
  if (name == "ratio") return ratio_plan(o);
  std::string known;
  for (const auto& k : exact_check_names()) known += (known.empty() ? "" : "|") + k;
  throw ValidationError("unknown check '" + std::string(name) + "' (expected " + known + ")");
}

CheckReport aggregate(std::string_view name, const CheckPlan& plan, std::vector<CheckCase> results) {
  CheckReport report;
  report.name = std::string(name);
  report.description = plan.description;
  report.tolerance = plan.tolerance;
  report.cases = results.size();
  for (auto& c : results) {
    report.worst_error = std::max(report.worst_error, c.error);
    if (c.pass) continue;
    report.pass = false;
    ++report.failures;
    if (report.failed.size() < kKeptFailures) report.failed.push_back(std::move(c));
  }
  return report;
}

}  // namespace

const std::vector<std::string>& exact_check_names() {
  static const std::vector<std::string> names{"lemma5", "lemma7",  "lemma8", "lemma9",        "lemma10",
                                              "lemma11", "folded", "drift",  "drift-epsilon", "ratio"};
  return names;
}

CheckReport run_exact_check(std::string_view name, const ExactCheckOptions& options) {
  const CheckPlan plan = make_plan(name, options);
  std::vector<CheckCase> results(plan.tasks.size());
  const int workers = options.threads > 0 ? options.threads : worker_count();
  const auto count = static_cast<std::int64_t>(plan.tasks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::int64_t i = 0; i < count; ++i) results[static_cast<std::size_t>(i)] = plan.tasks[static_cast<std::size_t>(i)]();
  return aggregate(name, plan, std::move(results));
}

CheckReport run_exact_check_serial(std::string_view name, const ExactCheckOptions& options) {
  const CheckPlan plan = make_plan(name, options);
  std::vector<CheckCase> results;
  results.reserve(plan.tasks.size());
  for (const auto& task : plan.tasks) results.push_back(task());
  return aggregate(name, plan, std::move(results));
}

std::string format_report(const CheckReport& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.description << "\n";
  os.precision(3);
  os << "  cases " << r.cases << ", failures " << r.failures << ", worst deviation " << std::scientific
     << r.worst_error << " (tolerance " << r.tolerance << ")\n";
  for (const auto& c : r.failed) os << "  failed " << c.label << ": " << c.detail << "\n";
  return os.str();
}

}  // namespace majority
