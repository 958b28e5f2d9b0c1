#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "majority/core.hpp"
#include "majority/rng.hpp"
#include "majority/simulate.hpp"
#include "majority/stats.hpp"

namespace majority {

/// How the initial a-count is chosen for a population of n.
///   balanced   floor(n / 2)
///   bias:Z     ceil(n/2 + Z sqrt(n ln n))
///   count:S    S
struct InitialRule {
  enum class Kind { Balanced, Bias, Count };
  Kind kind = Kind::Balanced;
  double zeta = 0.0;
  std::int64_t count = 0;

  static InitialRule parse(std::string_view text);
  std::string to_string() const;
  // Throws ValidationError when the rule lands outside [0, n].
  std::int64_t resolve(std::int64_t n) const;
};

struct ExperimentConfig {
  ModelKind model = ModelKind::Sequential;
  std::vector<int> js{3};
  std::vector<std::int64_t> ns{1000};
  std::int64_t runs = 100;
  InitialRule init{};
  std::uint64_t seed = 42;
  double step_cap_multiplier = 100.0;

  void validate() const;
};

/// Flat `key = value` lines mirroring the CLI flags (model, j, n, runs, init,
/// seed, step-cap). Lists are comma separated; `a..b` expands an integer
/// range. '#' starts a comment.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);
ExperimentConfig load_config(const std::filesystem::path& path);

std::vector<std::int64_t> parse_int_list(std::string_view text);

/// n ln n (sequential) or ln n (gossip); `log2` switches to base 2.
double normalizer(ModelKind model, std::int64_t n, bool log2 = false);

struct CellStats {
  ModelKind model = ModelKind::Sequential;
  int j = 0;
  std::int64_t n = 0;
  std::int64_t s0 = 0;
  std::int64_t runs = 0;
  std::int64_t censored = 0;
  Summary steps;       // converged runs only
  Summary normalized;  // steps / normalizer, natural log
  double mean_normalized_log2 = 0.0;
  double winner_a_fraction = 0.0;  // among converged runs
};

CellStats cell_stats(std::span<const RunRecord> records);

/// Seeds of one grid cell. Distinct (model, j, n) get unrelated streams.
SeedPolicy cell_seed_policy(std::uint64_t master, ModelKind model, int j, std::int64_t n);

struct GridResult {
  std::vector<CellStats> cells;                 // js-major, then ns
  std::vector<std::vector<RunRecord>> records;  // parallel to cells
};

GridResult run_grid(const ExperimentConfig& config, int threads = 0);

/// runs.csv, cells.csv and summary.json under dir.
void write_grid(const ExperimentConfig& config, const GridResult& result, const std::filesystem::path& dir);

const std::vector<std::string>& cell_header();
std::vector<std::string> cell_fields(const CellStats& cell);
std::vector<CellStats> read_cells(const std::filesystem::path& csv_path);

/// Writes fig4_<model>.dat (n, j, normalized means in both bases),
/// fig5_<model>_n<N>.dat (j and the five-number summary of normalized time)
/// and plots.json. Returns the written paths.
std::vector<std::filesystem::path> emit_plot_data(std::span<const CellStats> cells, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Checks of the convergence statements
// ---------------------------------------------------------------------------

struct PreservationResult {
  std::int64_t n = 0;
  double zeta = 0.0;
  std::int64_t s0 = 0;
  std::int64_t runs = 0;
  std::int64_t preserved = 0;
  std::int64_t censored = 0;
  double fraction = 0.0;
  double mean_normalized_time = 0.0;
};

/// Starts at s0 = ceil(n/2 + zeta sqrt(n ln n)) and counts runs absorbed at n.
PreservationResult check_majority_preservation(ModelKind model, int j, std::int64_t n, double zeta,
                                               std::int64_t runs, SeedPolicy seeds, int threads = 0);

struct BiasDoublingResult {
  std::int64_t n = 0;
  std::int64_t delta0 = 0;
  std::int64_t target = 0;  // min(2 delta0, n/2)
  std::int64_t window = 0;  // productive steps allowed
  std::int64_t runs = 0;
  double floor_violation_rate = 0.0;  // bias fell below delta0/2 before reaching target
  double doubled_rate = 0.0;          // target reached within the window
  Summary doubling_steps;             // productive steps, doubled runs only
};

/// 3-Majority sequential chain restricted to productive steps, started at
/// bias delta0 (a-count n/2 + delta0, n even).
BiasDoublingResult check_bias_doubling(std::int64_t n, std::int64_t delta0, std::int64_t window, std::int64_t runs,
                                       SeedPolicy seeds, int threads = 0);

struct DriftTailResult {
  std::int64_t n = 0;
  double eps = 0.0;
  double r = 0.0;
  std::int64_t s0 = 0;  // minority count
  double delta = 0.0;
  std::int64_t time_bound = 0;
  std::int64_t runs = 0;
  std::int64_t exceeded = 0;
  double fraction = 0.0;
  double bound = 0.0;  // e^{-r}
  double se = 0.0;     // binomial standard error at the bound
};

/// 3-Majority sequential from minority s0 = floor((1/2 - eps) n): fraction of
/// runs whose minority is not extinct by ceil((r + ln s0) / delta) with
/// delta = (1 + eps/2) eps / (4n).
DriftTailResult check_drift_tail(std::int64_t n, double eps, double r, std::int64_t runs, SeedPolicy seeds,
                                 int threads = 0);

}  // namespace majority
