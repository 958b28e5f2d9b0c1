#include <set>
#include <vector>

#include "doctest.h"
#include "majority/core.hpp"
#include "majority/kernels.hpp"
#include "majority/rng.hpp"
#include "majority/stats.hpp"

using namespace majority;

TEST_SUITE("core") {
  TEST_CASE("process spec accepts 1..64 only") {
    CHECK_THROWS_AS(ProcessSpec(0), ValidationError);
    CHECK_THROWS_AS(ProcessSpec(65), ValidationError);
    CHECK(ProcessSpec(1).j() == 1);
    CHECK(ProcessSpec(64).j() == 64);
    CHECK(ProcessSpec(3).decisive() == 2);
    CHECK(ProcessSpec(4).decisive() == 3);
    CHECK(ProcessSpec(4).has_ties());
    CHECK_FALSE(ProcessSpec(5).has_ties());
  }

  TEST_CASE("state validation") {
    CHECK_THROWS_AS(validate_state(10, 11), ValidationError);
    CHECK_THROWS_AS(validate_state(10, -1), ValidationError);
    CHECK_THROWS_AS(validate_state(0, 0), ValidationError);
    const auto st = validate_state(10, 6);
    CHECK(st.alpha() == doctest::Approx(0.6));
    CHECK(st.majority_count() == 6);
    CHECK(validate_state(10, 3).majority_count() == 7);
    CHECK(validate_state(10, 10).consensus());
    CHECK(validate_state(10, 0).consensus());
    CHECK(validate_state(1, 1).consensus());
  }

  TEST_CASE("model names round-trip") {
    CHECK(parse_model("gossip") == ModelKind::Gossip);
    CHECK(parse_model("sequential") == ModelKind::Sequential);
    CHECK(to_string(ModelKind::Gossip) == "gossip");
    CHECK_THROWS_AS(parse_model("lazy"), ValidationError);
  }

  TEST_CASE("mix64 is the SplitMix64 output function") {
    // First output of SplitMix64 seeded with 0 (published reference value).
    CHECK(mix64(0x9E3779B97F4A7C15ULL) == 0xE220A8397B1DCDAFULL);
  }

  TEST_CASE("seed derivation is deterministic and collision free over a range") {
    const SeedPolicy p{42};
    CHECK(p.derive(7) == p.derive(7));
    CHECK(p.derive(7) != SeedPolicy{43}.derive(7));
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 100000; ++i) seen.insert(p.derive(i));
    CHECK(seen.size() == 100000);
  }

  TEST_CASE("engine is the standard mt19937_64") {
    Stream s(5489);
    std::uint64_t v = 0;
    for (int i = 0; i < 10000; ++i) v = s();
    CHECK(v == 9981545732273789042ULL);
  }

  TEST_CASE("uniform lies in [0, 1)") {
    Stream s(1);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
      const double u = s.uniform();
      lo = std::min(lo, u);
      hi = std::max(hi, u);
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
  }

  TEST_CASE("below is uniform on a non power of two bound") {
    Stream s(3);
    constexpr int bound = 7;
    std::vector<std::int64_t> counts(bound, 0);
    for (int i = 0; i < 700000; ++i) ++counts[s.below(bound)];
    const std::vector<double> p(bound, 1.0 / bound);
    CHECK(chi_square_gof(counts, p).p_value > 1e-3);
  }

  TEST_CASE("chance handles the endpoints exactly") {
    Stream s(9);
    for (int i = 0; i < 1000; ++i) {
      CHECK_FALSE(s.chance(0, 10));
      CHECK(s.chance(10, 10));
    }
  }

  TEST_CASE("binomial sampler matches the pmf") {
    Stream s(11);
    for (const auto& [m, p] : std::vector<std::pair<std::int64_t, double>>{{20, 0.3}, {1000, 0.5}, {5, 0.97}}) {
      std::vector<std::int64_t> counts(static_cast<std::size_t>(m + 1), 0);
      for (int i = 0; i < 200000; ++i) ++counts[static_cast<std::size_t>(s.binomial(m, p))];
      CHECK(chi_square_gof(counts, binom_pmf_vector(m, p)).p_value > 1e-3);
    }
    CHECK(s.binomial(10, 0.0) == 0);
    CHECK(s.binomial(10, 1.0) == 10);
    CHECK(s.binomial(0, 0.5) == 0);
  }
}
