#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace majority {

struct ExactCheckOptions {
  int j_max = 12;
  std::int64_t n_max = 64;
  int grid_resolution = 1000;
  std::int64_t drift_n_max = 1000;
  int threads = 0;  // 0: worker_count()
};

struct CheckCase {
  std::string label;
  bool pass = true;
  double error = 0.0;  // size of the worst deviation seen in this case
  std::string detail;
};

struct CheckReport {
  std::string name;
  std::string description;
  double tolerance = 0.0;
  bool pass = true;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double worst_error = 0.0;
  std::vector<CheckCase> failed;  // first few failing cases
};

/// Names accepted by run_exact_check, in a stable order.
const std::vector<std::string>& exact_check_names();

/// Runs one exact check with its cases spread over worker threads. Throws
/// ValidationError for an unknown name.
CheckReport run_exact_check(std::string_view name, const ExactCheckOptions& options = {});

/// Same cases evaluated in order on the calling thread.
CheckReport run_exact_check_serial(std::string_view name, const ExactCheckOptions& options = {});

std::string format_report(const CheckReport& report);

}  // namespace majority
