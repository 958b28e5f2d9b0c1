#include "majority/coupling.hpp"

#include <algorithm>
#include <sstream>

#include "majority/simulate.hpp"

namespace majority {

std::pair<std::int64_t, std::int64_t> quantile_couple_step(const StepKernel& low, const StepKernel& high,
                                                           std::int64_t s_low, std::int64_t s_high, double u) {
  if (low.n() != high.n() || low.first_state() != high.first_state())
    throw ValidationError("coupled kernels must share n and state range");
  if (s_high < s_low)
    throw ValidationError("quantile coupling precondition violated: s_high (" + std::to_string(s_high) +
                          ") < s_low (" + std::to_string(s_low) + ")");
  if (!(u >= 0.0 && u < 1.0)) throw ValidationError("coupling uniform must lie in [0, 1)");
  return {low.inverse_cdf(s_low, u), high.inverse_cdf(s_high, u)};
}

std::string_view to_string(CouplingFrame frame) {
  return frame == CouplingFrame::Majority ? "majority" : "initial-majority";
}

CouplingFrame parse_frame(std::string_view text) {
  if (text == "majority") return CouplingFrame::Majority;
  if (text == "initial-majority") return CouplingFrame::InitialMajority;
  throw ValidationError("unknown coupling frame '" + std::string(text) + "' (expected majority|initial-majority)");
}

// ---------------------------------------------------------------------------

DominanceViolation::DominanceViolation(Detail detail, const std::vector<CoupledStep>& trace)
    : std::runtime_error("dominance violated at t=" + std::to_string(detail.t) + " (" +
                         std::string(to_string(detail.frame)) + " frame): low " +
                         std::to_string(detail.low_before) + "->" + std::to_string(detail.low_after) + ", high " +
                         std::to_string(detail.high_before) + "->" + std::to_string(detail.high_after)),
      detail_(detail),
      trace_(trace) {}

std::string DominanceViolation::dump() const {
  std::ostringstream os;
  os << what() << "\n";
  if (detail_.run_index) os << "run_index " << *detail_.run_index << "\n";
  if (detail_.seed) os << "seed " << *detail_.seed << "\n";
  os.precision(17);
  os << "u " << detail_.u << "\n";
  os << "t x_low x_high maj_low maj_high dominated\n";
  for (const auto& s : trace_)
    os << s.t << ' ' << s.x_low << ' ' << s.x_high << ' ' << s.maj_low << ' ' << s.maj_high << ' '
       << (s.dominated ? 1 : 0) << "\n";
  return os.str();
}

DominanceViolation DominanceViolation::with_run(std::uint64_t run_index, std::uint64_t seed) const {
  Detail d = detail_;
  d.run_index = run_index;
  d.seed = seed;
  return DominanceViolation(d, trace_);
}

// ---------------------------------------------------------------------------

namespace {

// Monotone coupling of Bin(n, p_low) and Bin(n, p_high): per-agent shared
// uniforms, realised by thinning the complement of the smaller count.
std::pair<std::int64_t, std::int64_t> coupled_binomials(std::int64_t n, double p_low, double p_high,
                                                        Stream& stream) {
  if (p_high >= p_low) {
    const std::int64_t low = stream.binomial(n, p_low);
    const double extra = p_low < 1.0 ? std::clamp((p_high - p_low) / (1.0 - p_low), 0.0, 1.0) : 0.0;
    return {low, low + stream.binomial(n - low, extra)};
  }
  const std::int64_t high = stream.binomial(n, p_high);
  const double extra = p_high < 1.0 ? std::clamp((p_low - p_high) / (1.0 - p_high), 0.0, 1.0) : 0.0;
  return {high + stream.binomial(n - high, extra), high};
}

void require_even(int j_even) {
  if (j_even < 2 || j_even % 2 != 0 || j_even + 1 > kMaxSampleSize)
    throw ValidationError("structural gossip coupling needs an even j_low with j_low + 1 <= 64");
}

}  // namespace

StructuralRound structural_gossip_round(int j_even, std::int64_t n, std::int64_t x, Stream& stream) {
  require_even(j_even);
  const MajorityState state = validate_state(n, x);
  const int h = j_even / 2;
  const double beta = state.alpha();
  const double p_a = binom_upper_tail(j_even, beta, h + 1);
  const double p_u = binom_pmf(j_even, beta, h);
  const double p_b = std::max(0.0, 1.0 - p_a - p_u);

  StructuralRound r;
  r.z_a = stream.binomial(n, p_a);
  const std::int64_t rest = n - r.z_a;
  r.z_b = p_a < 1.0 ? stream.binomial(rest, std::clamp(p_b / (1.0 - p_a), 0.0, 1.0)) : 0;
  r.m_u = rest - r.z_b;
  r.z_u_low = stream.binomial(r.m_u, 0.5);
  if (beta >= 0.5) {
    r.z_u_high = r.z_u_low + stream.binomial(r.m_u - r.z_u_low, std::clamp(2.0 * beta - 1.0, 0.0, 1.0));
  } else {
    r.z_u_high = stream.binomial(r.z_u_low, std::clamp(2.0 * beta, 0.0, 1.0));
  }
  return r;
}

StructuralRound structural_gossip_round_per_agent(int j_even, std::int64_t n, std::int64_t x, Stream& stream) {
  require_even(j_even);
  const MajorityState state = validate_state(n, x);
  const int h = j_even / 2;
  const double beta = state.alpha();
  StructuralRound r;
  for (std::int64_t agent = 0; agent < n; ++agent) {
    int seen_a = 0;
    for (int k = 0; k < j_even; ++k)
      if (stream.chance(static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(n))) ++seen_a;
    if (seen_a > h) {
      ++r.z_a;
    } else if (seen_a < h) {
      ++r.z_b;
    } else {
      ++r.m_u;
      const double u = stream.uniform();
      if (u < 0.5) ++r.z_u_low;
      if (u < beta) ++r.z_u_high;
    }
  }
  return r;
}

std::pair<std::int64_t, std::int64_t> resolve_undecided(std::span<const double> uniforms, double beta) {
  std::int64_t low = 0;
  std::int64_t high = 0;
  for (double u : uniforms) {
    if (u < 0.5) ++low;
    if (u < beta) ++high;
  }
  return {low, high};
}

// ---------------------------------------------------------------------------

Coupler::Coupler(ModelKind model, int j_low, std::int64_t n, CouplingFrame frame)
    : model_(model), low_(j_low), high_(j_low + 1), n_(n), frame_(frame) {
  if (j_low < 2) throw ValidationError("coupling needs j_low >= 2");
  validate_state(n, 0);
  const bool need_raw = frame == CouplingFrame::Majority || model == ModelKind::Sequential;
  if (need_raw) {
    raw_low_.emplace(step_kernel(model, low_, n));
    raw_high_.emplace(step_kernel(model, high_, n));
  }
  if (frame == CouplingFrame::Majority) {
    folded_low_.emplace(fold(*raw_low_));
    folded_high_.emplace(fold(*raw_high_));
  }
}

namespace {

std::int64_t majority_count(std::int64_t n, std::int64_t s) { return std::max(s, n - s); }

// Given the folded move to majority count y, picks the raw successor among
// {y, n - y} in proportion to the raw row.
std::int64_t orient(const StepKernel& raw, std::int64_t s, std::int64_t y, Stream& stream) {
  const std::int64_t other = raw.n() - y;
  if (other == y) return y;
  const double p_same = raw.prob(s, y);
  const double p_other = raw.prob(s, other);
  if (!(p_other > 0.0)) return y;
  if (!(p_same > 0.0)) return other;
  return stream.uniform() * (p_same + p_other) < p_same ? y : other;
}

}  // namespace

std::pair<std::int64_t, std::int64_t> Coupler::step_majority(std::int64_t x_low, std::int64_t x_high, double u,
                                                             Stream& stream) const {
  const auto [y_low, y_high] =
      quantile_couple_step(*folded_low_, *folded_high_, majority_count(n_, x_low), majority_count(n_, x_high), u);
  const std::int64_t next_low = orient(*raw_low_, x_low, y_low, stream);
  const std::int64_t next_high = orient(*raw_high_, x_high, y_high, stream);
  return {next_low, next_high};
}

// Works in oriented coordinates (count of the initial majority opinion). The
// raw kernels are symmetric under s -> n - s, so they apply unchanged.
std::pair<std::int64_t, std::int64_t> Coupler::step_initial(std::int64_t x_low, std::int64_t x_high, double u,
                                                            Stream& stream) const {
  if (model_ == ModelKind::Sequential) return quantile_couple_step(*raw_low_, *raw_high_, x_low, x_high, u);

  if (x_low == x_high && (x_low == 0 || x_low == n_)) return {x_low, x_high};
  if (x_low == x_high) {
    if (low_.j() % 2 == 0) {
      const StructuralRound r = structural_gossip_round(low_.j(), n_, x_low, stream);
      return {r.next_low(), r.next_high()};
    }
    // Odd j_low: identical adoption curves, one shared draw.
    const std::int64_t next = stream.binomial(n_, adoption_probability(low_, MajorityState{n_, x_low}.alpha()));
    return {next, next};
  }
  const auto alpha = [this](std::int64_t x) { return static_cast<double>(x) / static_cast<double>(n_); };
  const double p_low = (x_low == 0 || x_low == n_) ? alpha(x_low) : adoption_probability(low_, alpha(x_low));
  const double p_high = (x_high == 0 || x_high == n_) ? alpha(x_high) : adoption_probability(high_, alpha(x_high));
  return coupled_binomials(n_, p_low, p_high, stream);
}

CoupledTrace Coupler::run(std::int64_t s0, Stream& stream, std::int64_t step_cap, bool record) const {
  validate_state(n_, s0);
  if (step_cap < 1) throw ValidationError("step_cap must be at least 1");

  CoupledTrace trace;
  trace.j_low = low_.j();
  trace.j_high = high_.j();
  trace.model = model_;
  trace.frame = frame_;
  trace.n = n_;
  trace.s0 = s0;

  // Oriented coordinate: raw a-count in the majority frame, count of the
  // initial majority opinion otherwise.
  const bool mirror = frame_ == CouplingFrame::InitialMajority && 2 * s0 < n_;
  const auto raw = [&](std::int64_t x) { return mirror ? n_ - x : x; };
  const auto ordered_pair = [&](std::int64_t x_low, std::int64_t x_high) {
    return frame_ == CouplingFrame::Majority ? std::pair{majority_count(n_, x_low), majority_count(n_, x_high)}
                                             : std::pair{x_low, x_high};
  };
  const auto absorbed = [&](std::int64_t x) { return x == 0 || x == n_; };
  const auto winner = [&](std::int64_t x) { return raw(x) == n_ ? Opinion::A : Opinion::B; };

  std::int64_t x_low = raw(s0);
  std::int64_t x_high = x_low;
  std::vector<CoupledStep> steps;
  const auto push = [&](std::int64_t t, bool dominated) {
    steps.push_back({t, raw(x_low), raw(x_high), majority_count(n_, x_low), majority_count(n_, x_high), dominated});
  };
  // The trace is always kept in memory while running so a violation can dump it.
  push(0, true);
  if (absorbed(x_low)) {
    trace.t_low = trace.t_high = 0;
    trace.winner_low = trace.winner_high = winner(x_low);
  }

  std::int64_t t = 0;
  while (!(absorbed(x_low) && absorbed(x_high)) && t < step_cap) {
    const double u = stream.uniform();
    const auto [next_low, next_high] =
        frame_ == CouplingFrame::Majority ? step_majority(x_low, x_high, u, stream) : step_initial(x_low, x_high, u, stream);
    const auto [before_low, before_high] = ordered_pair(x_low, x_high);
    x_low = next_low;
    x_high = next_high;
    ++t;
    const auto [ord_low, ord_high] = ordered_pair(x_low, x_high);
    const bool dominated = ord_high >= ord_low;
    push(t, dominated);
    if (!dominated) {
      DominanceViolation::Detail d;
      d.frame = frame_;
      d.t = t;
      d.low_before = before_low;
      d.high_before = before_high;
      d.low_after = ord_low;
      d.high_after = ord_high;
      d.u = u;
      throw DominanceViolation(d, steps);
    }
    if (!trace.t_low && absorbed(x_low)) {
      trace.t_low = t;
      trace.winner_low = winner(x_low);
    }
    if (!trace.t_high && absorbed(x_high)) {
      trace.t_high = t;
      trace.winner_high = winner(x_high);
    }
  }
  trace.length = t;
  trace.censored = !(absorbed(x_low) && absorbed(x_high));
  if (record) trace.steps = std::move(steps);
  return trace;
}

CoupledTrace run_coupled_sequential(int j_low, std::int64_t n, std::int64_t s0, Stream& stream,
                                    std::int64_t step_cap, CouplingFrame frame) {
  return Coupler(ModelKind::Sequential, j_low, n, frame).run(s0, stream, step_cap);
}

CoupledTrace run_coupled_gossip(int j_low, std::int64_t n, std::int64_t s0, Stream& stream,
                                std::int64_t round_cap, CouplingFrame frame) {
  return Coupler(ModelKind::Gossip, j_low, n, frame).run(s0, stream, round_cap);
}

// ---------------------------------------------------------------------------

EmpiricalDominance estimate_dominance_empirical(int j_low, ModelKind model, std::int64_t n, std::int64_t s0,
                                                std::int64_t runs, SeedPolicy seeds, std::int64_t step_cap,
                                                int threads) {
  if (runs < 1) throw ValidationError("runs must be at least 1");
  const std::int64_t cap = step_cap > 0 ? step_cap : default_step_cap(model, n);

  BatchConfig cfg;
  cfg.model = model;
  cfg.n = n;
  cfg.s0 = s0;
  cfg.runs = runs;
  cfg.step_cap = cap;
  cfg.spec = ProcessSpec(j_low);
  cfg.seeds = SeedPolicy{seeds.derive(2 * static_cast<std::uint64_t>(j_low))};
  const auto low = run_batch(cfg, threads);
  cfg.spec = ProcessSpec(j_low + 1);
  cfg.seeds = SeedPolicy{seeds.derive(2 * static_cast<std::uint64_t>(j_low) + 1)};
  const auto high = run_batch(cfg, threads);

  EmpiricalDominance out;
  out.j_low = j_low;
  out.j_high = j_low + 1;
  out.model = model;
  out.n = n;
  out.s0 = s0;
  out.runs = runs;

  // Censored runs count as surviving past the cap.
  std::vector<double> t_low, t_high;
  for (const auto& r : low) {
    t_low.push_back(r.censored ? static_cast<double>(cap + 1) : static_cast<double>(r.steps));
    out.censored_low += r.censored ? 1 : 0;
  }
  for (const auto& r : high) {
    t_high.push_back(r.censored ? static_cast<double>(cap + 1) : static_cast<double>(r.steps));
    out.censored_high += r.censored ? 1 : 0;
  }
  out.rank = mann_whitney(t_high, t_low);

  std::vector<std::int64_t> grid{0};
  for (double v : t_low) grid.push_back(static_cast<std::int64_t>(v));
  for (double v : t_high) grid.push_back(static_cast<std::int64_t>(v));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  while (!grid.empty() && grid.back() > cap) grid.pop_back();

  std::sort(t_low.begin(), t_low.end());
  std::sort(t_high.begin(), t_high.end());
  const auto surviving = [](const std::vector<double>& sorted, std::int64_t t) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), static_cast<double>(t));
    return static_cast<std::int64_t>(sorted.end() - it);
  };
  constexpr double kSigmas = 3.0;
  for (std::int64_t t : grid) {
    const std::int64_t sl = surviving(t_low, t);
    const std::int64_t sh = surviving(t_high, t);
    out.times.push_back(t);
    out.raw_low.push_back(static_cast<double>(sl) / static_cast<double>(runs));
    out.raw_high.push_back(static_cast<double>(sh) / static_cast<double>(runs));
    const ProportionBand bl = agresti_coull(sl, runs, kSigmas);
    const ProportionBand bh = agresti_coull(sh, runs, kSigmas);
    out.survival_low.push_back(bl);
    out.survival_high.push_back(bh);
    if (bh.lower(kSigmas) > bl.upper(kSigmas)) out.flagged.push_back(t);
  }
  return out;
}

}  // namespace majority
