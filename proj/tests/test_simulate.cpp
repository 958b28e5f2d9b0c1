#include <cmath>
#include <cstdlib>
#include <vector>

#include "doctest.h"
#include "majority/chain.hpp"
#include "majority/kernels.hpp"
#include "majority/simulate.hpp"
#include "majority/stats.hpp"

using namespace majority;

namespace {

// Empirical one-step distribution from state s compared with the kernel row.
double step_gof(ModelKind model, int j, std::int64_t n, std::int64_t s, int draws, std::uint64_t seed,
                bool per_agent = false) {
  const ProcessSpec spec(j);
  const StepKernel k = step_kernel(model, spec, n);
  Stream stream(seed);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n + 1), 0);
  for (int i = 0; i < draws; ++i) {
    const MajorityState st = validate_state(n, s);
    std::int64_t next = 0;
    if (model == ModelKind::Sequential)
      next = sequential_step(spec, st, stream);
    else
      next = per_agent ? gossip_round_per_agent(spec, st, stream) : gossip_round(spec, st, stream);
    ++counts[static_cast<std::size_t>(next)];
  }
  std::vector<double> p(static_cast<std::size_t>(n + 1));
  for (std::int64_t r = 0; r <= n; ++r) p[static_cast<std::size_t>(r)] = k.prob(s, r);
  return chi_square_gof(counts, p).p_value;
}

}  // namespace

TEST_SUITE("simulate") {
  TEST_CASE("sampled decision follows the adoption curve") {
    for (int j : {1, 2, 3, 4, 7, 12}) {
      Stream stream(100 + j);
      const std::int64_t n = 10, s = 6;
      const int draws = 200000;
      std::int64_t yes = 0;
      for (int i = 0; i < draws; ++i) yes += sampled_decision(ProcessSpec(j), s, n, stream);
      const double q = adoption_probability(ProcessSpec(j), 0.6);
      CHECK(std::abs(double(yes) / draws - q) < 4.0 * binomial_se(q, draws));
    }
  }

  TEST_CASE("sequential steps match the kernel row") {
    for (int j : {1, 2, 3, 6})
      for (std::int64_t s : {1, 5, 9}) CHECK(step_gof(ModelKind::Sequential, j, 10, s, 100000, 7 + s) > 1e-3);
  }

  TEST_CASE("gossip rounds match the kernel row") {
    for (int j : {1, 2, 3, 6})
      for (std::int64_t s : {3, 10, 16}) {
        CHECK(step_gof(ModelKind::Gossip, j, 20, s, 100000, 17 + s) > 1e-3);
        CHECK(step_gof(ModelKind::Gossip, j, 20, s, 50000, 27 + s, true) > 1e-3);
      }
  }

  TEST_CASE("gossip with two agents at a tie") {
    // q(1/2) = 1/2 for every j, so the next count is Bin(2, 1/2).
    Stream stream(5);
    std::vector<std::int64_t> counts(3, 0);
    for (int i = 0; i < 100000; ++i) ++counts[gossip_round(ProcessSpec(3), validate_state(2, 1), stream)];
    CHECK(chi_square_gof(counts, std::vector<double>{0.25, 0.5, 0.25}).p_value > 1e-3);
  }

  TEST_CASE("consensus states are absorbing") {
    Stream stream(1);
    for (int j : {1, 2, 3}) {
      CHECK(sequential_step(ProcessSpec(j), validate_state(10, 0), stream) == 0);
      CHECK(sequential_step(ProcessSpec(j), validate_state(10, 10), stream) == 10);
      CHECK(gossip_round(ProcessSpec(j), validate_state(10, 0), stream) == 0);
      CHECK(gossip_round(ProcessSpec(j), validate_state(10, 10), stream) == 10);
    }
  }

  TEST_CASE("runs from consensus take zero steps") {
    Stream stream(2);
    for (ModelKind model : {ModelKind::Sequential, ModelKind::Gossip}) {
      const RunRecord r = run_to_consensus(ProcessSpec(3), model, 10, 10, stream, 100);
      CHECK(r.steps == 0);
      CHECK(r.winner == Opinion::A);
      CHECK_FALSE(r.censored);
      const RunRecord one = run_to_consensus(ProcessSpec(3), model, 1, 0, stream, 100);
      CHECK(one.steps == 0);
      CHECK(one.winner == Opinion::B);
    }
  }

  TEST_CASE("step cap censors a run") {
    Stream stream(3);
    const RunRecord r = run_to_consensus(ProcessSpec(3), ModelKind::Sequential, 1000, 500, stream, 10);
    CHECK(r.censored);
    CHECK_FALSE(r.winner.has_value());
    CHECK(r.steps == 10);
    CHECK(r.final_s > 0);
    CHECK(r.final_s < 1000);
  }

  TEST_CASE("parallel time is steps over n for sequential, rounds for gossip") {
    Stream stream(4);
    const RunRecord seq = run_to_consensus(ProcessSpec(3), ModelKind::Sequential, 50, 25, stream, 1000000);
    CHECK(seq.parallel_time == doctest::Approx(double(seq.steps) / 50));
    const RunRecord gos = run_to_consensus(ProcessSpec(3), ModelKind::Gossip, 50, 25, stream, 1000000);
    CHECK(gos.parallel_time == doctest::Approx(double(gos.steps)));
  }

  TEST_CASE("probe samples are increasing in time and end at consensus") {
    Stream stream(6);
    TrajectoryProbe probe(10);
    const RunRecord r = run_to_consensus(ProcessSpec(3), ModelKind::Sequential, 100, 60, stream, 1000000, &probe);
    REQUIRE(!probe.samples().empty());
    for (std::size_t i = 1; i < probe.samples().size(); ++i)
      CHECK(probe.samples()[i].first > probe.samples()[i - 1].first);
    CHECK(probe.samples().back().first == r.steps);
    CHECK(probe.samples().back().second == r.final_s);
    REQUIRE(probe.bias_floor().has_value());
    CHECK(*probe.bias_floor() <= 10.0);
  }

  TEST_CASE("default step caps") {
    CHECK(default_step_cap(ModelKind::Sequential, 100) == static_cast<std::int64_t>(std::ceil(100 * 100 * std::log(100.0))));
    CHECK(default_step_cap(ModelKind::Gossip, 100) == static_cast<std::int64_t>(std::ceil(100 * std::log(100.0))));
    // n = 1 uses ln 2 so the cap stays positive.
    CHECK(default_step_cap(ModelKind::Gossip, 1) == 70);
  }

  TEST_CASE("batch output does not depend on the worker count") {
    for (ModelKind model : {ModelKind::Sequential, ModelKind::Gossip}) {
      BatchConfig cfg;
      cfg.model = model;
      cfg.n = 64;
      cfg.s0 = 32;
      cfg.runs = 200;
      cfg.seeds = SeedPolicy{99};
      const auto serial = run_batch_serial(cfg);
      REQUIRE(serial.size() == 200);
      for (int threads : {1, 2, 4}) {
        const auto par = run_batch(cfg, threads);
        REQUIRE(par.size() == serial.size());
        for (std::size_t i = 0; i < serial.size(); ++i) {
          CHECK(par[i].run_index == i);
          CHECK(par[i].steps == serial[i].steps);
          CHECK(par[i].winner == serial[i].winner);
          CHECK(par[i].final_s == serial[i].final_s);
        }
      }
    }
  }

  TEST_CASE("mean absorption time agrees with the exact expectation") {
    for (ModelKind model : {ModelKind::Sequential, ModelKind::Gossip})
      for (int j : {1, 3, 4}) {
        BatchConfig cfg;
        cfg.spec = ProcessSpec(j);
        cfg.model = model;
        cfg.n = 20;
        cfg.s0 = 8;
        cfg.runs = 20000;
        cfg.seeds = SeedPolicy{static_cast<std::uint64_t>(1000 + j)};
        const auto records = run_batch(cfg);
        std::vector<double> steps;
        std::int64_t a_wins = 0;
        for (const auto& r : records) {
          REQUIRE_FALSE(r.censored);
          steps.push_back(static_cast<double>(r.steps));
          a_wins += r.winner == Opinion::A;
        }
        const Summary sm = summarize(steps);
        const AbsorptionProfile exact = expected_absorption(step_kernel(model, ProcessSpec(j), 20));
        CHECK(std::abs(sm.mean - exact.expected(8)) < 4.0 * sm.sd / std::sqrt(double(cfg.runs)));
        const double w = exact.win(8);
        CHECK(std::abs(double(a_wins) / cfg.runs - w) < 4.0 * binomial_se(w, cfg.runs));
      }
  }

  TEST_CASE("invalid starts are rejected") {
    Stream stream(8);
    CHECK_THROWS_AS(run_to_consensus(ProcessSpec(3), ModelKind::Sequential, 10, 11, stream, 10), ValidationError);
    BatchConfig cfg;
    cfg.runs = 0;
    CHECK_THROWS_AS(run_batch(cfg), ValidationError);
  }
}
