#include "majority/simulate.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "majority/kernels.hpp"

namespace majority {

void TrajectoryProbe::observe(std::int64_t t, std::int64_t s, std::int64_t n) {
  const double bias = static_cast<double>(s) - static_cast<double>(n) / 2.0;
  if (!floor_ || bias < *floor_) floor_ = bias;
  if (cadence_ > 0 && t % cadence_ == 0) samples_.emplace_back(t, s);
}

void TrajectoryProbe::finish(std::int64_t t, std::int64_t s, std::int64_t n) {
  const double bias = static_cast<double>(s) - static_cast<double>(n) / 2.0;
  if (!floor_ || bias < *floor_) floor_ = bias;
  if (cadence_ > 0 && (samples_.empty() || samples_.back().first < t)) samples_.emplace_back(t, s);
}

bool sampled_decision(ProcessSpec spec, std::int64_t s, std::int64_t n, Stream& stream) {
  const int j = spec.j();
  const int decisive = spec.decisive();
  const auto count = static_cast<std::uint64_t>(s);
  const auto total = static_cast<std::uint64_t>(n);
  int seen_a = 0;
  int seen_b = 0;
  for (int i = 0; i < j; ++i) {
    if (stream.chance(count, total)) {
      if (++seen_a >= decisive) return true;
    } else {
      if (++seen_b >= decisive) return false;
    }
  }
  // Only an even-j tie (j/2 each) gets here.
  return stream.coin();
}

std::int64_t sequential_step(ProcessSpec spec, MajorityState state, Stream& stream) {
  const std::int64_t n = state.n;
  const std::int64_t s = state.s;
  if (s == 0 || s == n) return s;
  const bool updater_a = stream.chance(static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(n));
  const bool adopts_a = sampled_decision(spec, s, n, stream);
  if (updater_a && !adopts_a) return s - 1;
  if (!updater_a && adopts_a) return s + 1;
  return s;
}

std::int64_t gossip_round(ProcessSpec spec, MajorityState state, Stream& stream) {
  if (state.s == 0 || state.s == state.n) return state.s;
  return stream.binomial(state.n, adoption_probability(spec, state.alpha()));
}

std::int64_t gossip_round_per_agent(ProcessSpec spec, MajorityState state, Stream& stream) {
  std::int64_t next = 0;
  for (std::int64_t agent = 0; agent < state.n; ++agent)
    if (sampled_decision(spec, state.s, state.n, stream)) ++next;
  return next;
}

std::int64_t default_step_cap(ModelKind model, std::int64_t n, double multiplier) {
  const double ln = std::log(static_cast<double>(std::max<std::int64_t>(n, 2)));
  const double cap = model == ModelKind::Sequential ? multiplier * static_cast<double>(n) * ln
                                                    : multiplier * ln;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(cap)));
}

RunRecord run_to_consensus(ProcessSpec spec, ModelKind model, std::int64_t n, std::int64_t s0,
                           Stream& stream, std::int64_t step_cap, TrajectoryProbe* probe) {
  const MajorityState start = validate_state(n, s0);
  if (step_cap < 1) throw ValidationError("step_cap must be at least 1");

  RunRecord rec;
  rec.n = n;
  rec.j = spec.j();
  rec.model = model;
  rec.s0 = s0;

  std::int64_t s = start.s;
  std::int64_t t = 0;
  if (probe) probe->observe(0, s, n);
  if (model == ModelKind::Sequential) {
    while (s != 0 && s != n && t < step_cap) {
      s = sequential_step(spec, MajorityState{n, s}, stream);
      ++t;
      if (probe) probe->observe(t, s, n);
    }
  } else {
    while (s != 0 && s != n && t < step_cap) {
      s = gossip_round(spec, MajorityState{n, s}, stream);
      ++t;
      if (probe) probe->observe(t, s, n);
    }
  }
  if (probe) probe->finish(t, s, n);

  rec.steps = t;
  rec.final_s = s;
  rec.censored = s != 0 && s != n;
  if (!rec.censored) rec.winner = s == n ? Opinion::A : Opinion::B;
  rec.parallel_time = model == ModelKind::Sequential ? static_cast<double>(t) / static_cast<double>(n)
                                                     : static_cast<double>(t);
  return rec;
}

int worker_count() {
  if (const char* env = std::getenv("MAJORITY_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return omp_get_max_threads();
}

namespace {

void validate_batch(const BatchConfig& config) {
  validate_state(config.n, config.s0);
  if (config.runs < 1) throw ValidationError("runs must be at least 1");
  if (config.step_cap < 0) throw ValidationError("step_cap must be non-negative");
}

RunRecord run_one(const BatchConfig& config, std::int64_t cap, std::int64_t index) {
  Stream stream = derive_stream(config.seeds, static_cast<std::uint64_t>(index));
  RunRecord rec = run_to_consensus(config.spec, config.model, config.n, config.s0, stream, cap);
  rec.run_index = static_cast<std::uint64_t>(index);
  rec.master_seed = config.seeds.master_seed;
  return rec;
}

}  // namespace

std::vector<RunRecord> run_batch(const BatchConfig& config, int threads) {
  validate_batch(config);
  const std::int64_t cap = config.step_cap > 0 ? config.step_cap : default_step_cap(config.model, config.n);
  std::vector<RunRecord> out(static_cast<std::size_t>(config.runs));
  const int workers = threads > 0 ? threads : worker_count();
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::int64_t i = 0; i < config.runs; ++i) out[static_cast<std::size_t>(i)] = run_one(config, cap, i);
  return out;
}

std::vector<RunRecord> run_batch_serial(const BatchConfig& config) {
  validate_batch(config);
  const std::int64_t cap = config.step_cap > 0 ? config.step_cap : default_step_cap(config.model, config.n);
  std::vector<RunRecord> out;
  out.reserve(static_cast<std::size_t>(config.runs));
  for (std::int64_t i = 0; i < config.runs; ++i) out.push_back(run_one(config, cap, i));
  return out;
}

}  // namespace majority
