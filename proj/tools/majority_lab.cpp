// Command-line front end: simulate, exact, couple, grid, plots, theorem2.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "majority/chain.hpp"
#include "majority/checks.hpp"
#include "majority/coupling.hpp"
#include "majority/harness.hpp"
#include "majority/io.hpp"
#include "majority/kernels.hpp"
#include "majority/simulate.hpp"

namespace fs = std::filesystem;
using namespace majority;

namespace {

constexpr int kExitFailure = 1;  // a check failed or dominance was violated
constexpr int kExitInvalid = 2;  // bad input

// --- simulate ----------------------------------------------------------------

struct SimulateArgs {
  std::string model = "sequential";
  int j = 3;
  std::int64_t n = 1000;
  std::int64_t runs = 100;
  std::string init = "balanced";
  std::uint64_t seed = 42;
  std::string out;
  double step_cap = 100.0;
};

int cmd_simulate(const SimulateArgs& a) {
  BatchConfig b;
  b.model = parse_model(a.model);
  b.spec = ProcessSpec(a.j);
  b.n = a.n;
  b.s0 = InitialRule::parse(a.init).resolve(a.n);
  b.runs = a.runs;
  b.seeds = SeedPolicy{a.seed};
  if (!(a.step_cap > 0.0)) throw ValidationError("step-cap multiplier must be positive");
  b.step_cap = default_step_cap(b.model, b.n, a.step_cap);
  const auto records = run_batch(b);
  const CellStats cell = cell_stats(records);

  const fs::path dir(a.out);
  ensure_directory(dir);
  {
    auto out = open_output(dir / "runs.csv");
    write_run_records(out, records);
  }
  Json doc;
  doc["model"] = a.model;
  doc["j"] = a.j;
  doc["n"] = a.n;
  doc["s0"] = b.s0;
  doc["runs"] = a.runs;
  doc["init"] = a.init;
  doc["seed"] = a.seed;
  doc["step_cap"] = b.step_cap;
  Json c;
  const auto& h = cell_header();
  const auto f = cell_fields(cell);
  for (std::size_t k = 6; k < h.size(); ++k) c[h[k]] = std::stod(f[k]);
  c["censored"] = cell.censored;
  doc["stats"] = c;
  write_json(dir / "summary.json", doc);

  std::printf("%s j=%d n=%lld s0=%lld runs=%lld censored=%lld mean_steps=%.6g mean_norm=%.4f winner_a=%.3f\n",
              a.model.c_str(), a.j, static_cast<long long>(a.n), static_cast<long long>(b.s0),
              static_cast<long long>(a.runs), static_cast<long long>(cell.censored), cell.steps.mean,
              cell.normalized.mean, cell.winner_a_fraction);
  return 0;
}

// --- exact -------------------------------------------------------------------

struct ExactArgs {
  std::vector<std::string> checks;
  int j_max = 12;
  std::int64_t n_max = 64;
  int grid_resolution = 1000;
  std::int64_t drift_n_max = 1000;
  bool hitting_times = false;
  bool kernel = false;
  bool folded = false;
  std::optional<std::int64_t> survival_s0;
  std::optional<std::int64_t> t_max;
  std::string model = "sequential";
  int j = 3;
  std::int64_t n = 64;
  std::string out;
};

std::ofstream output_file(const std::string& path) {
  if (path.empty()) throw ValidationError("--out is required");
  const fs::path p(path);
  if (p.has_parent_path()) ensure_directory(p.parent_path());
  return open_output(p);
}

int cmd_exact(const ExactArgs& a) {
  int status = 0;
  if (!a.checks.empty()) {
    ExactCheckOptions o;
    o.j_max = a.j_max;
    o.n_max = a.n_max;
    o.grid_resolution = a.grid_resolution;
    o.drift_n_max = a.drift_n_max;
    for (const auto& name : a.checks) {
      const CheckReport r = run_exact_check(name, o);
      std::cout << format_report(r);
      if (!r.pass) status = kExitFailure;
    }
  }

  const int modes = (a.hitting_times ? 1 : 0) + (a.kernel ? 1 : 0) + (a.survival_s0 ? 1 : 0);
  if (modes > 1) throw ValidationError("choose one of --hitting-times, --kernel, --survival");
  if (modes == 0) {
    if (a.checks.empty()) throw ValidationError("nothing to do: pass --check, --hitting-times, --kernel or --survival");
    return status;
  }

  StepKernel k = step_kernel(parse_model(a.model), ProcessSpec(a.j), a.n);
  if (a.folded) k = fold(k);
  auto out = output_file(a.out);
  CsvWriter csv(out);
  if (a.hitting_times) {
    const AbsorptionProfile p = expected_absorption(k);
    csv.row({"s", "expected_time", "win_probability"});
    for (std::int64_t s = k.first_state(); s <= k.n(); ++s)
      csv.row({std::to_string(s), format_double(p.expected(s)), format_double(p.win(s))});
    std::printf("hitting times for %s j=%d n=%lld written to %s (residual %.2e)\n", a.model.c_str(), a.j,
                static_cast<long long>(a.n), a.out.c_str(), p.residual);
  } else if (a.kernel) {
    csv.row({"s", "next", "probability"});
    for (std::int64_t s = k.first_state(); s <= k.n(); ++s) {
      const auto row = k.row(s);
      for (std::size_t r = 0; r < row.size(); ++r)
        if (row[r] > 0.0) csv.row({std::to_string(s), std::to_string(k.first_state() + static_cast<std::int64_t>(r)),
                                   format_double(row[r])});
    }
  } else {
    const std::int64_t horizon = a.t_max.value_or(default_horizon(k.model(), k.n()));
    const SurvivalCurve c = survival(k, *a.survival_s0, horizon);
    csv.row({"t", "survival"});
    for (std::size_t t = 0; t < c.values.size(); ++t) csv.row({std::to_string(t), format_double(c.values[t])});
  }
  return status;
}

// --- couple ------------------------------------------------------------------

struct CoupleArgs {
  std::string model = "sequential";
  int j_low = 4;
  std::int64_t n = 100;
  std::int64_t runs = 100;
  std::uint64_t seed = 42;
  std::string out;
  std::string init = "balanced";
  std::string frame = "majority";
  std::int64_t traces = 10;
  double step_cap = 100.0;
};

int cmd_couple(const CoupleArgs& a) {
  const ModelKind model = parse_model(a.model);
  const CouplingFrame frame = parse_frame(a.frame);
  const std::int64_t s0 = InitialRule::parse(a.init).resolve(a.n);
  if (a.runs < 1) throw ValidationError("runs must be at least 1");
  if (a.traces < 0) throw ValidationError("traces must be non-negative");
  if (!(a.step_cap > 0.0)) throw ValidationError("step-cap multiplier must be positive");
  const std::int64_t cap = default_step_cap(model, a.n, a.step_cap);
  const Coupler coupler(model, a.j_low, a.n, frame);
  const SeedPolicy seeds{a.seed};

  std::vector<CoupledTrace> traces(static_cast<std::size_t>(a.runs));
  std::vector<std::optional<DominanceViolation>> violations(static_cast<std::size_t>(a.runs));
  const int workers = worker_count();
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::int64_t i = 0; i < a.runs; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const std::uint64_t seed = seeds.derive(static_cast<std::uint64_t>(i));
    Stream stream(seed);
    try {
      traces[idx] = coupler.run(s0, stream, cap, i < a.traces);
    } catch (const DominanceViolation& v) {
      violations[idx] = v.with_run(static_cast<std::uint64_t>(i), seed);
    }
  }

  const fs::path dir(a.out);
  ensure_directory(dir);
  std::int64_t violated = 0;
  std::int64_t censored = 0;
  std::int64_t ordered = 0;  // both absorbed and T_high <= T_low
  {
    auto out = open_output(dir / "coupled_runs.csv");
    CsvWriter csv(out);
    csv.row({"run_index", "seed", "T_low", "T_high", "winner_low", "winner_high", "steps", "censored",
             "dominance_flag"});
    const auto opt = [](const auto& v) { return v ? std::to_string(*v) : std::string(); };
    const auto win = [](const std::optional<Opinion>& w) { return w ? std::string(to_string(*w)) : std::string(); };
    for (std::int64_t i = 0; i < a.runs; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const std::string seed = std::to_string(seeds.derive(static_cast<std::uint64_t>(i)));
      if (violations[idx]) {
        ++violated;
        csv.row({std::to_string(i), seed, "", "", "", "", std::to_string(violations[idx]->detail().t), "false",
                 "false"});
        continue;
      }
      const auto& t = traces[idx];
      censored += t.censored ? 1 : 0;
      if (t.t_low && t.t_high && *t.t_high <= *t.t_low) ++ordered;
      csv.row({std::to_string(i), seed, opt(t.t_low), opt(t.t_high), win(t.winner_low), win(t.winner_high),
               std::to_string(t.length), t.censored ? "true" : "false", "true"});
    }
  }
  if (a.traces > 0) ensure_directory(dir / "traces");
  for (std::int64_t i = 0; i < std::min(a.traces, a.runs); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const std::string stem = "trace_" + std::to_string(i);
    if (violations[idx]) {
      auto out = open_output(dir / "traces" / (stem + "_violation.txt"));
      out << violations[idx]->dump();
      continue;
    }
    {
      auto out = open_output(dir / "traces" / (stem + ".csv"));
      write_trace(out, traces[idx]);
    }
    write_json(dir / "traces" / (stem + ".json"), trace_summary(traces[idx]));
  }
  for (std::int64_t i = 0; i < a.runs; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (!violations[idx] || i < a.traces) continue;
    auto out = open_output(dir / ("violation_" + std::to_string(i) + ".txt"));
    out << violations[idx]->dump();
  }

  Json doc;
  doc["model"] = a.model;
  doc["j_low"] = a.j_low;
  doc["j_high"] = a.j_low + 1;
  doc["n"] = a.n;
  doc["s0"] = s0;
  doc["frame"] = a.frame;
  doc["runs"] = a.runs;
  doc["seed"] = a.seed;
  doc["step_cap"] = cap;
  doc["violations"] = violated;
  doc["censored"] = censored;
  doc["ordered_stopping_times"] = ordered;
  write_json(dir / "summary.json", doc);

  std::printf("%s j_low=%d n=%lld s0=%lld frame=%s runs=%lld violations=%lld censored=%lld\n", a.model.c_str(),
              a.j_low, static_cast<long long>(a.n), static_cast<long long>(s0), a.frame.c_str(),
              static_cast<long long>(a.runs), static_cast<long long>(violated), static_cast<long long>(censored));
  for (std::int64_t i = 0; i < a.runs; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (violations[idx]) {
      std::cerr << violations[idx]->dump();
      break;
    }
  }
  return violated > 0 ? kExitFailure : 0;
}

// --- grid / plots --------------------------------------------------------------

struct GridArgs {
  std::string config;
  std::string out;
  std::vector<std::pair<std::string, std::string>> overrides;
};

int cmd_grid(const GridArgs& a) {
  ExperimentConfig config;
  if (!a.config.empty())
    for (const auto& [k, v] : read_key_values(a.config)) apply_setting(config, k, v);
  for (const auto& [k, v] : a.overrides) apply_setting(config, k, v);
  config.validate();
  const GridResult result = run_grid(config);
  write_grid(config, result, a.out);
  for (const auto& c : result.cells)
    std::printf("%s j=%d n=%lld runs=%lld censored=%lld mean_norm=%.4f median_norm=%.4f winner_a=%.3f\n",
                std::string(to_string(c.model)).c_str(), c.j, static_cast<long long>(c.n),
                static_cast<long long>(c.runs), static_cast<long long>(c.censored), c.normalized.mean,
                c.normalized.median, c.winner_a_fraction);
  return 0;
}

int cmd_plots(const std::string& in, const std::string& out) {
  const auto cells = read_cells(fs::path(in) / "cells.csv");
  for (const auto& p : emit_plot_data(cells, out)) std::printf("wrote %s\n", p.string().c_str());
  return 0;
}

// --- theorem2 ------------------------------------------------------------------

struct Theorem2Args {
  std::int64_t n = 10000;
  double zeta = 1.0;
  std::int64_t runs = 1000;
  std::uint64_t seed = 42;
  int j = 3;
  std::string model = "sequential";
  std::int64_t doubling_runs = 0;
  std::optional<std::int64_t> delta0;
  std::optional<std::int64_t> window;
  std::int64_t tail_runs = 0;
  double eps = 0.2;
  double r = 3.0;
  std::string out;
};

int cmd_theorem2(const Theorem2Args& a) {
  const SeedPolicy seeds{a.seed};
  Json doc;
  const PreservationResult p = check_majority_preservation(parse_model(a.model), a.j, a.n, a.zeta, a.runs, seeds);
  std::printf("majority preservation: %s j=%d n=%lld zeta=%g s0=%lld runs=%lld preserved=%lld (%.4f) censored=%lld "
              "mean_norm=%.4f\n",
              a.model.c_str(), a.j, static_cast<long long>(a.n), a.zeta, static_cast<long long>(p.s0),
              static_cast<long long>(p.runs), static_cast<long long>(p.preserved), p.fraction,
              static_cast<long long>(p.censored), p.mean_normalized_time);
  doc["preservation"] = {{"model", a.model},     {"j", a.j},
                         {"n", a.n},             {"zeta", a.zeta},
                         {"s0", p.s0},           {"runs", p.runs},
                         {"preserved", p.preserved}, {"fraction", p.fraction},
                         {"censored", p.censored},   {"mean_normalized_time", p.mean_normalized_time}};

  if (a.doubling_runs > 0) {
    const double nd = static_cast<double>(a.n);
    const std::int64_t d0 = a.delta0.value_or(static_cast<std::int64_t>(std::ceil(std::sqrt(nd * std::log(nd)))));
    const std::int64_t w = a.window.value_or(2 * a.n);
    const BiasDoublingResult b = check_bias_doubling(a.n, d0, w, a.doubling_runs, SeedPolicy{seeds.derive(1ULL << 62)});
    std::printf("bias doubling: n=%lld delta0=%lld target=%lld window=%lld runs=%lld floor_violation=%.4f "
                "doubled=%.4f mean_steps=%.1f\n",
                static_cast<long long>(a.n), static_cast<long long>(d0), static_cast<long long>(b.target),
                static_cast<long long>(w), static_cast<long long>(b.runs), b.floor_violation_rate, b.doubled_rate,
                b.doubling_steps.mean);
    doc["bias_doubling"] = {{"delta0", d0},
                            {"target", b.target},
                            {"window", w},
                            {"runs", b.runs},
                            {"floor_violation_rate", b.floor_violation_rate},
                            {"doubled_rate", b.doubled_rate},
                            {"mean_doubling_steps", b.doubling_steps.mean}};
  }

  if (a.tail_runs > 0) {
    const DriftTailResult t = check_drift_tail(a.n, a.eps, a.r, a.tail_runs, SeedPolicy{seeds.derive(1ULL << 63)});
    std::printf("drift tail: n=%lld eps=%g r=%g s0=%lld bound_steps=%lld runs=%lld exceeded=%lld (%.5f) "
                "e^-r=%.5f se=%.5f\n",
                static_cast<long long>(a.n), a.eps, a.r, static_cast<long long>(t.s0),
                static_cast<long long>(t.time_bound), static_cast<long long>(t.runs),
                static_cast<long long>(t.exceeded), t.fraction, t.bound, t.se);
    doc["drift_tail"] = {{"eps", a.eps},          {"r", a.r},
                         {"s0", t.s0},            {"delta", t.delta},
                         {"time_bound", t.time_bound}, {"runs", t.runs},
                         {"exceeded", t.exceeded},    {"fraction", t.fraction},
                         {"bound", t.bound},          {"se", t.se}};
  }

  if (!a.out.empty()) {
    ensure_directory(a.out);
    write_json(fs::path(a.out) / "theorem2.json", doc);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"j-Majority consensus toolkit: Monte Carlo, exact chains and couplings"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Monte Carlo runs of one (model, j, n) cell");
  s->add_option("--model", sim.model, "gossip|sequential")->capture_default_str();
  s->add_option("--j", sim.j, "sample size")->capture_default_str();
  s->add_option("--n", sim.n, "population size")->capture_default_str();
  s->add_option("--runs", sim.runs)->capture_default_str();
  s->add_option("--init", sim.init, "balanced|bias:Z|count:S")->capture_default_str();
  s->add_option("--seed", sim.seed)->capture_default_str();
  s->add_option("--out", sim.out, "output directory")->required();
  s->add_option("--step-cap", sim.step_cap, "cap multiplier of n ln n steps / ln n rounds")->capture_default_str();

  ExactArgs ex;
  auto* e = app.add_subcommand("exact", "exact kernel checks, hitting times, kernels and survival curves");
  e->add_option("--check", ex.checks, "check name (repeatable)")
      ->check(CLI::IsMember(exact_check_names()));
  e->add_option("--j-max", ex.j_max)->capture_default_str();
  e->add_option("--n-max", ex.n_max)->capture_default_str();
  e->add_option("--grid-resolution", ex.grid_resolution)->capture_default_str();
  e->add_option("--drift-n-max", ex.drift_n_max)->capture_default_str();
  e->add_flag("--hitting-times", ex.hitting_times, "expected absorption time and win probability per state");
  e->add_flag("--kernel", ex.kernel, "dump the transition kernel");
  e->add_option("--survival", ex.survival_s0, "dump P[T > t] from this start state");
  e->add_option("--t-max", ex.t_max, "survival horizon (default 10 n ln n or 10 ln n)");
  e->add_flag("--folded", ex.folded, "use the majority-count kernel");
  e->add_option("--model", ex.model)->capture_default_str();
  e->add_option("--j", ex.j)->capture_default_str();
  e->add_option("--n", ex.n)->capture_default_str();
  e->add_option("--out", ex.out, "output CSV file");

  CoupleArgs cp;
  auto* c = app.add_subcommand("couple", "coupled runs of P_j and P_{j+1}; nonzero exit on a dominance violation");
  c->add_option("--model", cp.model)->capture_default_str();
  c->add_option("--j-low", cp.j_low)->capture_default_str();
  c->add_option("--n", cp.n)->capture_default_str();
  c->add_option("--runs", cp.runs)->capture_default_str();
  c->add_option("--seed", cp.seed)->capture_default_str();
  c->add_option("--out", cp.out, "output directory")->required();
  c->add_option("--init", cp.init, "balanced|bias:Z|count:S")->capture_default_str();
  c->add_option("--frame", cp.frame, "majority|initial-majority")->capture_default_str();
  c->add_option("--traces", cp.traces, "number of runs whose full trace is written")->capture_default_str();
  c->add_option("--step-cap", cp.step_cap)->capture_default_str();

  GridArgs gr;
  auto* g = app.add_subcommand("grid", "Monte Carlo over a (j, n) grid");
  g->add_option("--config", gr.config, "key = value file");
  g->add_option("--out", gr.out, "output directory")->required();
  for (const char* key : {"model", "j", "n", "runs", "init", "seed", "step-cap"}) {
    const std::string k = key;
    g->add_option_function<std::string>("--" + k, [&gr, k](const std::string& v) { gr.overrides.emplace_back(k, v); },
                                        "overrides the config file");
  }

  std::string plots_in, plots_out;
  auto* p = app.add_subcommand("plots", "plot data files from a grid output directory");
  p->add_option("--in", plots_in)->required();
  p->add_option("--out", plots_out)->required();

  Theorem2Args th;
  auto* t = app.add_subcommand("theorem2", "majority preservation, bias doubling and drift tail checks");
  t->add_option("--n", th.n)->capture_default_str();
  t->add_option("--zeta", th.zeta)->capture_default_str();
  t->add_option("--runs", th.runs)->capture_default_str();
  t->add_option("--seed", th.seed)->capture_default_str();
  t->add_option("--j", th.j)->capture_default_str();
  t->add_option("--model", th.model)->capture_default_str();
  t->add_option("--doubling-runs", th.doubling_runs, "runs of the bias-doubling check (0 skips)");
  t->add_option("--delta0", th.delta0, "initial bias (default ceil(sqrt(n ln n)))");
  t->add_option("--window", th.window, "productive steps allowed (default 2n)");
  t->add_option("--tail-runs", th.tail_runs, "runs of the drift-tail check (0 skips)");
  t->add_option("--eps", th.eps)->capture_default_str();
  t->add_option("--r", th.r)->capture_default_str();
  t->add_option("--out", th.out, "directory for theorem2.json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s) return cmd_simulate(sim);
    if (*e) return cmd_exact(ex);
    if (*c) return cmd_couple(cp);
    if (*g) return cmd_grid(gr);
    if (*p) return cmd_plots(plots_in, plots_out);
    if (*t) return cmd_theorem2(th);
  } catch (const ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
