// Serial reference versus OpenMP for the two parallel loops: Monte Carlo
// batches and the exact-check sweep. Prints wall times and checks that both
// paths produce the same results.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "majority/checks.hpp"
#include "majority/simulate.hpp"

using namespace majority;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool same(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].steps != b[i].steps || a[i].final_s != b[i].final_s || a[i].censored != b[i].censored) return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  const std::int64_t n = argc > 1 ? std::atoll(argv[1]) : 10000;
  const std::int64_t runs = argc > 2 ? std::atoll(argv[2]) : 64;
  const int threads = worker_count();
  std::printf("threads %d (omp_get_num_procs %d)\n", threads, omp_get_num_procs());

  int status = 0;
  for (ModelKind model : {ModelKind::Sequential, ModelKind::Gossip}) {
    BatchConfig cfg;
    cfg.model = model;
    cfg.n = n;
    cfg.s0 = n / 2;
    // A gossip run is only O(log n) binomial draws.
    cfg.runs = model == ModelKind::Gossip ? runs * 1000 : runs;
    cfg.seeds = SeedPolicy{7};
    std::vector<RunRecord> serial, parallel;
    const double ts = seconds([&] { serial = run_batch_serial(cfg); });
    const double tp = seconds([&] { parallel = run_batch(cfg, threads); });
    const bool ok = same(serial, parallel);
    status |= ok ? 0 : 1;
    std::printf("batch %-10s n=%lld runs=%lld  serial %.3fs  parallel %.3fs  speedup %.2fx  %s\n",
                std::string(to_string(model)).c_str(), static_cast<long long>(n), static_cast<long long>(cfg.runs), ts,
                tp, ts / tp, ok ? "identical" : "MISMATCH");
  }

  for (const char* name : {"lemma11", "lemma8"}) {
    ExactCheckOptions o;
    o.threads = threads;
    CheckReport serial, parallel;
    const double ts = seconds([&] { serial = run_exact_check_serial(name, o); });
    const double tp = seconds([&] { parallel = run_exact_check(name, o); });
    const bool ok = serial.pass == parallel.pass && serial.cases == parallel.cases &&
                    serial.worst_error == parallel.worst_error;
    status |= ok ? 0 : 1;
    std::printf("check %-9s cases=%zu  serial %.3fs  parallel %.3fs  speedup %.2fx  %s\n", name, serial.cases, ts, tp,
                ts / tp, ok ? "identical" : "MISMATCH");
  }
  return status;
}
