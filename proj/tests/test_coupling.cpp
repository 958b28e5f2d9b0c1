#include <cmath>
#include <vector>

#include "doctest.h"
#include "majority/coupling.hpp"
#include "majority/kernels.hpp"
#include "majority/stats.hpp"

using namespace majority;

namespace {

std::vector<double> binomial_probs(std::int64_t n, double p) { return binom_pmf_vector(n, p); }

}  // namespace

TEST_SUITE("coupling") {
  TEST_CASE("3 and 4 samples give identical quantile moves") {
    const StepKernel k3 = sequential_kernel(ProcessSpec(3), 20);
    const StepKernel k4 = sequential_kernel(ProcessSpec(4), 20);
    for (std::int64_t s = 0; s <= 20; ++s)
      for (int k = 0; k < 1000; ++k) {
        const auto [a, b] = quantile_couple_step(k3, k4, s, s, (k + 0.5) / 1000.0);
        CHECK(a == b);
      }
  }

  TEST_CASE("quantile coupling keeps 4 below 5 from a common state") {
    const StepKernel k4 = sequential_kernel(ProcessSpec(4), 10);
    const StepKernel k5 = sequential_kernel(ProcessSpec(5), 10);
    for (int k = 0; k < 1000; ++k) {
      const auto [a, b] = quantile_couple_step(k4, k5, 6, 6, (k + 0.5) / 1000.0);
      CHECK(a <= b);
    }
    const auto [a0, b0] = quantile_couple_step(k4, k5, 6, 6, 0.0);
    CHECK(a0 == 5);
    CHECK(b0 == 5);
    CHECK_THROWS_AS(quantile_couple_step(k4, k5, 7, 6, 0.5), ValidationError);
    CHECK_THROWS_AS(quantile_couple_step(k4, k5, 6, 6, 1.0), ValidationError);
  }

  TEST_CASE("folded quantile coupling is ordered on the whole state range") {
    for (ModelKind model : {ModelKind::Sequential, ModelKind::Gossip})
      for (int j : {2, 4, 5, 8})
        for (std::int64_t n : {9, 16}) {
          const StepKernel lo = fold(step_kernel(model, ProcessSpec(j), n));
          const StepKernel hi = fold(step_kernel(model, ProcessSpec(j + 1), n));
          bool ordered = true;
          for (std::int64_t a = lo.first_state(); a <= n; ++a)
            for (std::int64_t b = a; b <= n; ++b)
              for (int k = 0; k < 200; ++k) {
                const auto [x, y] = quantile_couple_step(lo, hi, a, b, (k + 0.5) / 200.0);
                ordered = ordered && x <= y;
              }
          CHECK(ordered);
        }
  }

  TEST_CASE("majority-frame marginals are the raw kernel rows") {
    for (ModelKind model : {ModelKind::Sequential, ModelKind::Gossip}) {
      const std::int64_t n = 10, s0 = 4;
      const Coupler c(model, 4, n);
      const StepKernel raw4 = step_kernel(model, ProcessSpec(4), n);
      const StepKernel raw5 = step_kernel(model, ProcessSpec(5), n);
      std::vector<std::int64_t> lo(n + 1, 0), hi(n + 1, 0);
      Stream stream(77);
      for (int i = 0; i < 100000; ++i) {
        const CoupledTrace t = c.run(s0, stream, 1);
        REQUIRE(t.steps.size() == 2);
        ++lo[t.steps[1].x_low];
        ++hi[t.steps[1].x_high];
      }
      std::vector<double> p4(n + 1), p5(n + 1);
      for (std::int64_t r = 0; r <= n; ++r) {
        p4[r] = raw4.prob(s0, r);
        p5[r] = raw5.prob(s0, r);
      }
      CHECK(chi_square_gof(lo, p4).p_value > 1e-3);
      CHECK(chi_square_gof(hi, p5).p_value > 1e-3);
    }
  }

  TEST_CASE("undecided agents resolve with shared uniforms") {
    const std::vector<double> u{0.1, 0.4, 0.55, 0.65, 0.9};
    const auto [low, high] = resolve_undecided(u, 0.7);
    CHECK(low == 2);
    CHECK(high == 4);
    const auto [l2, h2] = resolve_undecided(u, 0.5);
    CHECK(l2 == h2);
  }

  TEST_CASE("structural round partitions the population") {
    Stream stream(12);
    for (int i = 0; i < 2000; ++i) {
      const StructuralRound r = structural_gossip_round(4, 50, 30, stream);
      CHECK(r.z_a + r.z_b + r.m_u == 50);
      CHECK(r.z_u_low <= r.z_u_high);
      CHECK(r.z_u_high <= r.m_u);
    }
    CHECK_THROWS_AS(structural_gossip_round(3, 50, 30, stream), ValidationError);
  }

  TEST_CASE("structural round marginals are Bin(n, q_2h) and Bin(n, q_2h+1)") {
    const std::int64_t n = 30;
    for (int h : {1, 2, 3})
      for (std::int64_t x : {9, 15, 21}) {
        const double beta = double(x) / n;
        const auto plo = binomial_probs(n, adoption_probability(ProcessSpec(2 * h), beta));
        const auto phi = binomial_probs(n, adoption_probability(ProcessSpec(2 * h + 1), beta));
        std::vector<std::int64_t> lo(n + 1, 0), hi(n + 1, 0), lo_pa(n + 1, 0), hi_pa(n + 1, 0);
        Stream stream(1000 + 10 * h + x);
        for (int i = 0; i < 40000; ++i) {
          const StructuralRound r = structural_gossip_round(2 * h, n, x, stream);
          ++lo[r.next_low()];
          ++hi[r.next_high()];
        }
        for (int i = 0; i < 10000; ++i) {
          const StructuralRound r = structural_gossip_round_per_agent(2 * h, n, x, stream);
          ++lo_pa[r.next_low()];
          ++hi_pa[r.next_high()];
        }
        CHECK(chi_square_gof(lo, plo).p_value > 1e-3);
        CHECK(chi_square_gof(hi, phi).p_value > 1e-3);
        CHECK(chi_square_gof(lo_pa, plo).p_value > 1e-3);
        CHECK(chi_square_gof(hi_pa, phi).p_value > 1e-3);
      }
  }

  TEST_CASE("odd lower sample size moves both processes together") {
    Stream stream(21);
    const CoupledTrace g = run_coupled_gossip(3, 200, 120, stream, 10000, CouplingFrame::InitialMajority);
    for (const auto& s : g.steps) CHECK(s.x_low == s.x_high);
    CHECK(g.t_low == g.t_high);
    const CoupledTrace q = run_coupled_sequential(3, 50, 30, stream, 1000000, CouplingFrame::InitialMajority);
    for (const auto& s : q.steps) CHECK(s.x_low == s.x_high);
    const CoupledTrace m = run_coupled_sequential(5, 50, 20, stream, 1000000);
    for (const auto& s : m.steps) CHECK(s.maj_low == s.maj_high);
  }

  TEST_CASE("consensus start stops at once") {
    Stream stream(22);
    for (ModelKind model : {ModelKind::Sequential, ModelKind::Gossip}) {
      const CoupledTrace t = Coupler(model, 4, 30).run(30, stream, 100);
      CHECK(t.length == 0);
      CHECK(t.t_low == 0);
      CHECK(t.t_high == 0);
      CHECK(t.winner_low == Opinion::A);
      CHECK(t.steps.size() == 1);
    }
    CHECK_THROWS_AS(Coupler(ModelKind::Sequential, 1, 30), ValidationError);
  }

  TEST_CASE("majority frame never breaks the order") {
    for (ModelKind model : {ModelKind::Sequential, ModelKind::Gossip}) {
      const Coupler c(model, 4, 40);
      Stream stream(23);
      for (int i = 0; i < 300; ++i) {
        CoupledTrace t;
        REQUIRE_NOTHROW(t = c.run(20, stream, 10000000, false));
        REQUIRE(t.t_low.has_value());
        REQUIRE(t.t_high.has_value());
        CHECK(*t.t_high <= *t.t_low);
        CHECK(t.all_dominated);
        CHECK(t.steps.empty());
      }
    }
  }

  TEST_CASE("initial-majority frame breaks once the pair crosses the middle") {
    const Coupler c(ModelKind::Sequential, 4, 20, CouplingFrame::InitialMajority);
    Stream stream(24);
    int violations = 0;
    for (int i = 0; i < 500 && violations == 0; ++i) {
      try {
        c.run(10, stream, 1000000);
      } catch (const DominanceViolation& v) {
        ++violations;
        CHECK(v.detail().high_after < v.detail().low_after);
        CHECK(v.trace().back().t == v.detail().t);
        CHECK_FALSE(v.trace().back().dominated);
        const DominanceViolation tagged = v.with_run(3, 99);
        CHECK(tagged.dump().find("seed 99") != std::string::npos);
      }
    }
    CHECK(violations > 0);
  }

  TEST_CASE("frame names round-trip") {
    CHECK(parse_frame("majority") == CouplingFrame::Majority);
    CHECK(parse_frame(to_string(CouplingFrame::InitialMajority)) == CouplingFrame::InitialMajority);
    CHECK_THROWS_AS(parse_frame("raw"), ValidationError);
  }

  TEST_CASE("empirical dominance with a single run flags nothing") {
    const EmpiricalDominance e = estimate_dominance_empirical(4, ModelKind::Sequential, 30, 15, 1, SeedPolicy{5});
    CHECK(e.flagged.empty());
    CHECK(e.times.front() == 0);
    CHECK(e.raw_low.front() == 1.0);
  }

  TEST_CASE("empirical dominance sees no gap between 5 and 6 samples") {
    const EmpiricalDominance e = estimate_dominance_empirical(5, ModelKind::Gossip, 200, 100, 2000, SeedPolicy{6});
    CHECK(e.flagged.empty());
    CHECK(e.rank.p_two_sided > 1e-3);
    CHECK(e.censored_low == 0);
    CHECK(e.censored_high == 0);
    const EmpiricalDominance f = estimate_dominance_empirical(4, ModelKind::Gossip, 200, 100, 2000, SeedPolicy{6});
    CHECK(f.flagged.empty());
    CHECK(f.rank.p_less < 1e-3);
  }
}
