#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "majority/core.hpp"
#include "majority/kernels.hpp"
#include "majority/rng.hpp"
#include "majority/stats.hpp"

namespace majority {

/// Inverse-CDF coupling of one step: both rows are inverted at the same u.
/// Requires s_high >= s_low and kernels on the same state range.
std::pair<std::int64_t, std::int64_t> quantile_couple_step(const StepKernel& low, const StepKernel& high,
                                                           std::int64_t s_low, std::int64_t s_high, double u);

/// Coordinate in which the coupled pair is ordered.
///   Majority: the majority count max(s, n - s). Both processes are coupled
///     through their folded kernels, which are monotone and ordered on the
///     whole state range, so the order survives crossings of n/2. Raw
///     a-counts are then recovered by choosing between y and n - y with the
///     raw kernel's odds.
///   InitialMajority: the count of whichever opinion held the majority at
///     t = 0, coupled directly (quantile rows for sequential, the
///     shared-sample construction for gossip). Order can break once the
///     pair drifts to the other side of n/2.
enum class CouplingFrame { Majority, InitialMajority };

std::string_view to_string(CouplingFrame frame);
CouplingFrame parse_frame(std::string_view text);

struct CoupledStep {
  std::int64_t t = 0;
  std::int64_t x_low = 0;  // raw a-counts
  std::int64_t x_high = 0;
  std::int64_t maj_low = 0;  // majority counts
  std::int64_t maj_high = 0;
  bool dominated = true;
};

struct CoupledTrace {
  int j_low = 0;
  int j_high = 0;
  ModelKind model = ModelKind::Sequential;
  CouplingFrame frame = CouplingFrame::Majority;
  std::int64_t n = 0;
  std::int64_t s0 = 0;
  std::vector<CoupledStep> steps;  // t = 0, 1, ...; empty when not recorded
  std::optional<std::int64_t> t_low, t_high;
  std::optional<Opinion> winner_low, winner_high;
  std::int64_t length = 0;
  bool censored = false;
  bool all_dominated = true;
};

class DominanceViolation : public std::runtime_error {
 public:
  struct Detail {
    CouplingFrame frame = CouplingFrame::Majority;
    std::int64_t t = 0;
    std::int64_t low_before = 0, high_before = 0;
    std::int64_t low_after = 0, high_after = 0;
    double u = 0.0;
    std::optional<std::uint64_t> run_index;
    std::optional<std::uint64_t> seed;
  };

  DominanceViolation(Detail detail, const std::vector<CoupledStep>& trace);

  const Detail& detail() const noexcept { return detail_; }
  // Paired trajectory up to and including the violating step.
  const std::vector<CoupledStep>& trace() const noexcept { return trace_; }
  std::string dump() const;

  DominanceViolation with_run(std::uint64_t run_index, std::uint64_t seed) const;

 private:
  Detail detail_;
  std::vector<CoupledStep> trace_;
};

/// Counts of one structural gossip round started from a common state, in the
/// frame where `a` is the reference opinion with fraction beta = x / n.
struct StructuralRound {
  std::int64_t z_a = 0;  // first 2h samples hold >= h+1 of a
  std::int64_t z_b = 0;  // >= h+1 of b
  std::int64_t m_u = 0;  // exactly h of each
  std::int64_t z_u_low = 0;
  std::int64_t z_u_high = 0;
  std::int64_t next_low() const { return z_a + z_u_low; }
  std::int64_t next_high() const { return z_a + z_u_high; }
};

/// P_{2h} vs P_{2h+1} from a common state x. Undecided agents share one
/// uniform each: low adopts a below 1/2 (the fair tie bit), high adopts a
/// below beta (the extra sample).
StructuralRound structural_gossip_round(int j_even, std::int64_t n, std::int64_t x, Stream& stream);

/// The same construction agent by agent; the reference for the trinomial draw.
StructuralRound structural_gossip_round_per_agent(int j_even, std::int64_t n, std::int64_t x, Stream& stream);

/// (#u < 1/2, #u < beta) over the given shared uniforms.
std::pair<std::int64_t, std::int64_t> resolve_undecided(std::span<const double> uniforms, double beta);

/// Couples P_{j_low} with P_{j_low + 1}. Kernels are built once and the
/// object can run any number of traces.
class Coupler {
 public:
  Coupler(ModelKind model, int j_low, std::int64_t n, CouplingFrame frame = CouplingFrame::Majority);

  ModelKind model() const noexcept { return model_; }
  int j_low() const noexcept { return low_.j(); }
  std::int64_t n() const noexcept { return n_; }
  CouplingFrame frame() const noexcept { return frame_; }

  /// Throws DominanceViolation on the first step whose flag is false.
  CoupledTrace run(std::int64_t s0, Stream& stream, std::int64_t step_cap, bool record = true) const;

 private:
  std::pair<std::int64_t, std::int64_t> step_majority(std::int64_t x_low, std::int64_t x_high, double u,
                                                      Stream& stream) const;
  std::pair<std::int64_t, std::int64_t> step_initial(std::int64_t x_low, std::int64_t x_high, double u,
                                                     Stream& stream) const;

  ModelKind model_;
  ProcessSpec low_, high_;
  std::int64_t n_;
  CouplingFrame frame_;
  std::optional<StepKernel> raw_low_, raw_high_, folded_low_, folded_high_;
};

CoupledTrace run_coupled_sequential(int j_low, std::int64_t n, std::int64_t s0, Stream& stream,
                                    std::int64_t step_cap, CouplingFrame frame = CouplingFrame::Majority);

CoupledTrace run_coupled_gossip(int j_low, std::int64_t n, std::int64_t s0, Stream& stream,
                                std::int64_t round_cap, CouplingFrame frame = CouplingFrame::Majority);

/// Independent (uncoupled) runs of both processes compared through their
/// empirical survival curves P[T > t] with Agresti-Coull bands at 3 sigma.
struct EmpiricalDominance {
  int j_low = 0;
  int j_high = 0;
  ModelKind model = ModelKind::Sequential;
  std::int64_t n = 0;
  std::int64_t s0 = 0;
  std::int64_t runs = 0;
  std::vector<std::int64_t> times;
  std::vector<ProportionBand> survival_low, survival_high;
  std::vector<double> raw_low, raw_high;
  // Times where the high band's lower edge lies above the low band's upper edge.
  std::vector<std::int64_t> flagged;
  std::int64_t censored_low = 0;
  std::int64_t censored_high = 0;
  // Rank test of T_high against T_low (censored runs ranked last).
  RankTest rank;
};

EmpiricalDominance estimate_dominance_empirical(int j_low, ModelKind model, std::int64_t n, std::int64_t s0,
                                                std::int64_t runs, SeedPolicy seeds, std::int64_t step_cap = 0,
                                                int threads = 0);

}  // namespace majority
