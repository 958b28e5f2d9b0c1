#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "majority/core.hpp"
#include "majority/rng.hpp"

namespace majority {

/// Outcome of one Monte Carlo run. `steps` counts interactions (sequential)
/// or rounds (gossip). A censored run hit its step cap before consensus and
/// has no winner.
struct RunRecord {
  std::uint64_t run_index = 0;
  std::uint64_t master_seed = 0;
  std::int64_t n = 0;
  int j = 0;
  ModelKind model = ModelKind::Sequential;
  std::int64_t s0 = 0;
  std::optional<Opinion> winner;
  std::int64_t steps = 0;
  double parallel_time = 0.0;
  bool censored = false;
  std::int64_t final_s = 0;
};

/// Optional per-run observer: samples (t, s) every `cadence` steps (0 = off)
/// and tracks the lowest bias s - n/2 seen.
class TrajectoryProbe {
 public:
  explicit TrajectoryProbe(std::int64_t cadence = 0) : cadence_(cadence) {}

  void observe(std::int64_t t, std::int64_t s, std::int64_t n);
  // Forces a sample at t (used for the final state).
  void finish(std::int64_t t, std::int64_t s, std::int64_t n);

  const std::vector<std::pair<std::int64_t, std::int64_t>>& samples() const noexcept { return samples_; }
  std::optional<double> bias_floor() const noexcept { return floor_; }

 private:
  std::int64_t cadence_;
  std::vector<std::pair<std::int64_t, std::int64_t>> samples_;
  std::optional<double> floor_;
};

/// One updating agent draws j opinions (with replacement, self allowed) from
/// a population with s of n holding a, stopping as soon as the majority is
/// decided; ties of even j take one fair bit. Returns true for "adopt a".
bool sampled_decision(ProcessSpec spec, std::int64_t s, std::int64_t n, Stream& stream);

/// Sequential model: one uniform agent updates from its own sample.
std::int64_t sequential_step(ProcessSpec spec, MajorityState state, Stream& stream);

/// Gossip model: next a-count ~ Binomial(n, q(s/n)).
std::int64_t gossip_round(ProcessSpec spec, MajorityState state, Stream& stream);

/// Literal gossip round: every agent samples and decides individually.
/// O(n j); kept as the reference the binomial shortcut is tested against.
std::int64_t gossip_round_per_agent(ProcessSpec spec, MajorityState state, Stream& stream);

/// ceil(multiplier * n ln n) interactions or ceil(multiplier * ln n) rounds,
/// at least 1.
std::int64_t default_step_cap(ModelKind model, std::int64_t n, double multiplier = 100.0);

RunRecord run_to_consensus(ProcessSpec spec, ModelKind model, std::int64_t n, std::int64_t s0,
                           Stream& stream, std::int64_t step_cap, TrajectoryProbe* probe = nullptr);

struct BatchConfig {
  ProcessSpec spec{3};
  ModelKind model = ModelKind::Sequential;
  std::int64_t n = 1000;
  std::int64_t s0 = 500;
  std::int64_t runs = 100;
  SeedPolicy seeds{};
  std::int64_t step_cap = 0;  // 0 selects default_step_cap
};

/// Worker count: MAJORITY_LAB_THREADS when set to a positive integer,
/// otherwise the OpenMP default.
int worker_count();

/// Runs are independent and each owns the stream derived from its index, so
/// the result vector is identical for any thread count.
std::vector<RunRecord> run_batch(const BatchConfig& config, int threads = 0);

/// Single-threaded reference for run_batch.
std::vector<RunRecord> run_batch_serial(const BatchConfig& config);

}  // namespace majority
