#include "majority/core.hpp"

#include <boost/random/binomial_distribution.hpp>

#include "majority/rng.hpp"

namespace majority {

ProcessSpec::ProcessSpec(int j) : j_(j) {
  if (j < 1) throw ValidationError("sample size j must be at least 1, got " + std::to_string(j));
  if (j > kMaxSampleSize)
    throw ValidationError("sample size j must be at most " + std::to_string(kMaxSampleSize) +
                          ", got " + std::to_string(j));
}

std::string_view to_string(ModelKind model) {
  return model == ModelKind::Gossip ? "gossip" : "sequential";
}

ModelKind parse_model(std::string_view text) {
  if (text == "gossip") return ModelKind::Gossip;
  if (text == "sequential") return ModelKind::Sequential;
  throw ValidationError("unknown model '" + std::string(text) + "' (expected gossip or sequential)");
}

std::string_view to_string(Opinion opinion) { return opinion == Opinion::A ? "a" : "b"; }

MajorityState validate_state(std::int64_t n, std::int64_t s) {
  if (n < 1) throw ValidationError("population size n must be positive, got " + std::to_string(n));
  if (s < 0) throw ValidationError("s is negative (" + std::to_string(s) + " < 0)");
  if (s > n)
    throw ValidationError("s exceeds n (" + std::to_string(s) + " > " + std::to_string(n) + ")");
  return MajorityState{n, s};
}

std::int64_t Stream::binomial(std::int64_t trials, double p) {
  if (trials <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  boost::random::binomial_distribution<std::int64_t, double> dist(trials, p);
  return dist(*this);
}

}  // namespace majority
