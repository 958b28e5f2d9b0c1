#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace majority {

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a dense object would exceed its size guard.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxSampleSize = 64;

/// Sample size j of the j-Majority rule. Odd j always has a strict majority;
/// even j breaks ties with a fair coin.
class ProcessSpec {
 public:
  explicit ProcessSpec(int j);

  int j() const noexcept { return j_; }
  bool has_ties() const noexcept { return j_ % 2 == 0; }
  // Smallest number of agreeing samples that decides the outcome outright.
  int decisive() const noexcept { return j_ / 2 + 1; }

  friend bool operator==(ProcessSpec, ProcessSpec) = default;

 private:
  int j_;
};

enum class ModelKind { Gossip, Sequential };

std::string_view to_string(ModelKind model);
ModelKind parse_model(std::string_view text);

enum class Opinion { A, B };

std::string_view to_string(Opinion opinion);

/// Count representation of a two-opinion configuration on the complete graph:
/// n agents, s of them holding opinion a.
struct MajorityState {
  std::int64_t n = 1;
  std::int64_t s = 0;

  double alpha() const noexcept { return static_cast<double>(s) / static_cast<double>(n); }
  bool consensus() const noexcept { return s == 0 || s == n; }
  // Count of the current majority opinion (ties count as n/2).
  std::int64_t majority_count() const noexcept { return s >= n - s ? s : n - s; }

  friend bool operator==(const MajorityState&, const MajorityState&) = default;
};

MajorityState validate_state(std::int64_t n, std::int64_t s);

}  // namespace majority
