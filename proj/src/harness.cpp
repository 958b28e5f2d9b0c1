#include "majority/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "majority/io.hpp"
#include "majority/kernels.hpp"

namespace majority {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
  const std::string s(trim(text));
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size()) throw ValidationError("invalid " + std::string(what) + " '" + s + "'");
  return v;
}

double parse_real(std::string_view text, std::string_view what) {
  const std::string s(trim(text));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || !std::isfinite(v))
    throw ValidationError("invalid " + std::string(what) + " '" + s + "'");
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

InitialRule InitialRule::parse(std::string_view text) {
  text = trim(text);
  InitialRule rule;
  if (text == "balanced") return rule;
  if (text.rfind("bias:", 0) == 0) {
    rule.kind = Kind::Bias;
    rule.zeta = parse_real(text.substr(5), "bias constant");
    if (rule.zeta < 0.0) throw ValidationError("bias constant must be non-negative");
    return rule;
  }
  if (text.rfind("count:", 0) == 0) {
    rule.kind = Kind::Count;
    rule.count = parse_int(text.substr(6), "initial count");
    if (rule.count < 0) throw ValidationError("initial count must be non-negative");
    return rule;
  }
  throw ValidationError("unknown initial rule '" + std::string(text) + "' (expected balanced|bias:Z|count:S)");
}

std::string InitialRule::to_string() const {
  switch (kind) {
    case Kind::Balanced:
      return "balanced";
    case Kind::Bias:
      return "bias:" + format_double(zeta);
    case Kind::Count:
      return "count:" + std::to_string(count);
  }
  return "balanced";
}

std::int64_t InitialRule::resolve(std::int64_t n) const {
  if (n < 1) throw ValidationError("population size n must be positive");
  std::int64_t s0 = n / 2;
  if (kind == Kind::Bias) {
    const double nd = static_cast<double>(n);
    const double target = nd / 2.0 + zeta * std::sqrt(nd * std::log(nd));
    s0 = static_cast<std::int64_t>(std::ceil(target));
  } else if (kind == Kind::Count) {
    s0 = count;
  }
  if (s0 < 0 || s0 > n)
    throw ValidationError("initial rule " + to_string() + " gives s0 = " + std::to_string(s0) + " outside [0, " +
                          std::to_string(n) + "]");
  return s0;
}

void ExperimentConfig::validate() const {
  if (js.empty()) throw ValidationError("j list is empty");
  if (ns.empty()) throw ValidationError("n list is empty");
  if (runs < 1) throw ValidationError("runs must be at least 1");
  if (!(step_cap_multiplier > 0.0)) throw ValidationError("step-cap multiplier must be positive");
  for (int j : js) ProcessSpec{j};
  for (std::int64_t n : ns) {
    if (n < 1) throw ValidationError("n must be positive, got " + std::to_string(n));
    init.resolve(n);
  }
}

std::vector<std::int64_t> parse_int_list(std::string_view text) {
  std::vector<std::int64_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string_view item = trim(text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos));
    if (item.empty()) throw ValidationError("empty entry in list '" + std::string(text) + "'");
    if (const auto dots = item.find(".."); dots != std::string_view::npos) {
      const std::int64_t a = parse_int(item.substr(0, dots), "range start");
      const std::int64_t b = parse_int(item.substr(dots + 2), "range end");
      if (b < a) throw ValidationError("empty range '" + std::string(item) + "'");
      for (std::int64_t v = a; v <= b; ++v) out.push_back(v);
    } else {
      out.push_back(parse_int(item, "list entry"));
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    auto sep = view.find('=');
    if (sep == std::string_view::npos) sep = view.find_first_of(" \t");
    if (sep == std::string_view::npos)
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
    std::string key(trim(view.substr(0, sep)));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    out[key] = std::string(trim(view.substr(sep + 1)));
  }
  return out;
}

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value) {
  if (key == "model") {
    config.model = parse_model(trim(value));
  } else if (key == "j") {
    config.js.clear();
    for (std::int64_t j : parse_int_list(value)) config.js.push_back(static_cast<int>(j));
  } else if (key == "n") {
    config.ns = parse_int_list(value);
  } else if (key == "runs") {
    config.runs = parse_int(value, "runs");
  } else if (key == "init") {
    config.init = InitialRule::parse(value);
  } else if (key == "seed") {
    const std::int64_t s = parse_int(value, "seed");
    if (s < 0) throw ValidationError("seed must be non-negative");
    config.seed = static_cast<std::uint64_t>(s);
  } else if (key == "step-cap") {
    config.step_cap_multiplier = parse_real(value, "step-cap multiplier");
  } else {
    throw ValidationError("unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  ExperimentConfig config;
  for (const auto& [k, v] : read_key_values(path)) apply_setting(config, k, v);
  config.validate();
  return config;
}

double normalizer(ModelKind model, std::int64_t n, bool log2) {
  const double nd = static_cast<double>(n);
  const double lg = log2 ? std::log2(nd) : std::log(nd);
  return model == ModelKind::Sequential ? nd * lg : lg;
}

// ---------------------------------------------------------------------------

CellStats cell_stats(std::span<const RunRecord> records) {
  CellStats c;
  if (records.empty()) return c;
  c.model = records.front().model;
  c.j = records.front().j;
  c.n = records.front().n;
  c.s0 = records.front().s0;
  c.runs = static_cast<std::int64_t>(records.size());
  std::vector<double> steps, norm;
  std::int64_t wins = 0;
  for (const auto& r : records) {
    if (r.censored) {
      ++c.censored;
      continue;
    }
    steps.push_back(static_cast<double>(r.steps));
    if (r.winner == Opinion::A) ++wins;
  }
  c.steps = summarize(steps);
  // n = 1 has a zero normalizer; every run there takes 0 steps.
  const double z = c.n > 1 ? normalizer(c.model, c.n) : 1.0;
  const double z2 = c.n > 1 ? normalizer(c.model, c.n, true) : 1.0;
  for (double s : steps) norm.push_back(s / z);
  c.normalized = summarize(norm);
  c.mean_normalized_log2 = c.steps.mean / z2;
  c.winner_a_fraction = steps.empty() ? 0.0 : static_cast<double>(wins) / static_cast<double>(steps.size());
  return c;
}

SeedPolicy cell_seed_policy(std::uint64_t master, ModelKind model, int j, std::int64_t n) {
  const std::uint64_t cell = mix64(static_cast<std::uint64_t>(n)) ^ (static_cast<std::uint64_t>(j) << 1) ^
                             (model == ModelKind::Gossip ? 1ULL : 0ULL);
  return SeedPolicy{SeedPolicy{master}.derive(cell)};
}

GridResult run_grid(const ExperimentConfig& config, int threads) {
  config.validate();
  struct Cell {
    BatchConfig batch;
    std::int64_t cap;
  };
  std::vector<Cell> cells;
  for (int j : config.js)
    for (std::int64_t n : config.ns) {
      BatchConfig b;
      b.spec = ProcessSpec(j);
      b.model = config.model;
      b.n = n;
      b.s0 = config.init.resolve(n);
      b.runs = config.runs;
      b.seeds = cell_seed_policy(config.seed, config.model, j, n);
      cells.push_back({b, default_step_cap(config.model, n, config.step_cap_multiplier)});
    }

  GridResult result;
  result.records.resize(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) result.records[c].resize(static_cast<std::size_t>(config.runs));

  // One task per (cell, run); results land in fixed slots.
  const auto total = static_cast<std::int64_t>(cells.size()) * config.runs;
  const int workers = threads > 0 ? threads : worker_count();
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::int64_t task = 0; task < total; ++task) {
    const auto c = static_cast<std::size_t>(task / config.runs);
    const std::int64_t i = task % config.runs;
    const Cell& cell = cells[c];
    Stream stream = derive_stream(cell.batch.seeds, static_cast<std::uint64_t>(i));
    RunRecord r = run_to_consensus(cell.batch.spec, cell.batch.model, cell.batch.n, cell.batch.s0, stream, cell.cap);
    r.run_index = static_cast<std::uint64_t>(i);
    r.master_seed = cell.batch.seeds.master_seed;
    result.records[c][static_cast<std::size_t>(i)] = r;
  }
  for (const auto& recs : result.records) result.cells.push_back(cell_stats(recs));
  return result;
}

const std::vector<std::string>& cell_header() {
  static const std::vector<std::string> header{
      "model",      "j",          "n",         "s0",          "runs",      "censored",   "mean_steps",
      "sd_steps",   "min_steps",  "q1_steps",  "median_steps", "q3_steps", "max_steps",  "mean_norm",
      "sd_norm",    "min_norm",   "q1_norm",   "median_norm", "q3_norm",   "max_norm",   "mean_norm_log2",
      "winner_a_fraction"};
  return header;
}

std::vector<std::string> cell_fields(const CellStats& c) {
  const auto f = format_double;
  return {std::string(to_string(c.model)),
          std::to_string(c.j),
          std::to_string(c.n),
          std::to_string(c.s0),
          std::to_string(c.runs),
          std::to_string(c.censored),
          f(c.steps.mean),
          f(c.steps.sd),
          f(c.steps.min),
          f(c.steps.q1),
          f(c.steps.median),
          f(c.steps.q3),
          f(c.steps.max),
          f(c.normalized.mean),
          f(c.normalized.sd),
          f(c.normalized.min),
          f(c.normalized.q1),
          f(c.normalized.median),
          f(c.normalized.q3),
          f(c.normalized.max),
          f(c.mean_normalized_log2),
          f(c.winner_a_fraction)};
}

std::vector<CellStats> read_cells(const std::filesystem::path& csv_path) {
  auto in = open_input(csv_path);
  const auto rows = parse_csv(in);
  if (rows.empty() || rows.front() != cell_header())
    throw ValidationError(csv_path.string() + " does not have the cells.csv header");
  std::vector<CellStats> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != cell_header().size())
      throw ValidationError(csv_path.string() + ": row " + std::to_string(i + 1) + " has the wrong field count");
    const auto d = [&](std::size_t k) { return parse_real(r[k], cell_header()[k]); };
    const auto z = [&](std::size_t k) { return parse_int(r[k], cell_header()[k]); };
    CellStats c;
    c.model = parse_model(r[0]);
    c.j = static_cast<int>(z(1));
    c.n = z(2);
    c.s0 = z(3);
    c.runs = z(4);
    c.censored = z(5);
    c.steps = {c.runs - c.censored, d(6), d(7), d(8), d(9), d(10), d(11), d(12)};
    c.normalized = {c.runs - c.censored, d(13), d(14), d(15), d(16), d(17), d(18), d(19)};
    c.mean_normalized_log2 = d(20);
    c.winner_a_fraction = d(21);
    out.push_back(c);
  }
  return out;
}

namespace {

Json cell_json(const CellStats& c) {
  Json j;
  const auto& h = cell_header();
  const auto f = cell_fields(c);
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (k == 0) {
      j[h[k]] = f[k];
    } else if (k <= 5) {
      j[h[k]] = std::stoll(f[k]);
    } else {
      j[h[k]] = std::stod(f[k]);
    }
  }
  return j;
}

}  // namespace

void write_grid(const ExperimentConfig& config, const GridResult& result, const std::filesystem::path& dir) {
  ensure_directory(dir);
  {
    auto out = open_output(dir / "runs.csv");
    CsvWriter csv(out);
    csv.row(run_record_header());
    for (const auto& recs : result.records)
      for (const auto& r : recs) csv.row(run_record_fields(r));
  }
  {
    auto out = open_output(dir / "cells.csv");
    CsvWriter csv(out);
    csv.row(cell_header());
    for (const auto& c : result.cells) csv.row(cell_fields(c));
  }
  Json doc;
  Json cfg;
  cfg["model"] = std::string(to_string(config.model));
  cfg["j"] = config.js;
  cfg["n"] = config.ns;
  cfg["runs"] = config.runs;
  cfg["init"] = config.init.to_string();
  cfg["seed"] = config.seed;
  cfg["step_cap"] = config.step_cap_multiplier;
  doc["config"] = cfg;
  doc["normalization"] = config.model == ModelKind::Sequential ? "steps / (n ln n), steps / (n log2 n)"
                                                                : "rounds / ln n, rounds / log2 n";
  Json cells = Json::array();
  for (const auto& c : result.cells) cells.push_back(cell_json(c));
  doc["cells"] = cells;
  write_json(dir / "summary.json", doc);
}

std::vector<std::filesystem::path> emit_plot_data(std::span<const CellStats> cells, const std::filesystem::path& dir) {
  if (cells.empty()) throw ValidationError("no cell statistics to plot");
  ensure_directory(dir);
  std::vector<CellStats> sorted(cells.begin(), cells.end());
  std::sort(sorted.begin(), sorted.end(), [](const CellStats& a, const CellStats& b) {
    return std::tie(a.model, a.n, a.j) < std::tie(b.model, b.n, b.j);
  });

  std::vector<std::filesystem::path> written;
  const auto f = format_double;
  Json files = Json::array();
  for (ModelKind model : {ModelKind::Gossip, ModelKind::Sequential}) {
    std::vector<const CellStats*> mine;
    for (const auto& c : sorted)
      if (c.model == model) mine.push_back(&c);
    if (mine.empty()) continue;
    const std::string unit = model == ModelKind::Sequential ? "interactions/(n*log n)" : "rounds/log n";

    const auto fig4 = dir / ("fig4_" + std::string(to_string(model)) + ".dat");
    {
      auto out = open_output(fig4);
      out << "# normalized mean convergence time, " << to_string(model) << " model, " << unit << "\n";
      out << "# n j mean_norm_ln mean_norm_log2 sd_norm_ln runs censored\n";
      for (const auto* c : mine)
        out << c->n << ' ' << c->j << ' ' << f(c->normalized.mean) << ' ' << f(c->mean_normalized_log2) << ' '
            << f(c->normalized.sd) << ' ' << c->runs << ' ' << c->censored << "\n";
    }
    written.push_back(fig4);
    files.push_back(fig4.filename().string());

    std::vector<std::int64_t> ns;
    for (const auto* c : mine)
      if (ns.empty() || ns.back() != c->n) ns.push_back(c->n);
    for (std::int64_t n : ns) {
      const auto fig5 = dir / ("fig5_" + std::string(to_string(model)) + "_n" + std::to_string(n) + ".dat");
      auto out = open_output(fig5);
      out << "# distribution of normalized convergence time (natural log), " << to_string(model)
          << " model, n = " << n << "\n";
      out << "# j q0 q1 median q3 q4\n";
      for (const auto* c : mine)
        if (c->n == n)
          out << c->j << ' ' << f(c->normalized.min) << ' ' << f(c->normalized.q1) << ' ' << f(c->normalized.median)
              << ' ' << f(c->normalized.q3) << ' ' << f(c->normalized.max) << "\n";
      written.push_back(fig5);
      files.push_back(fig5.filename().string());
    }
  }

  Json doc;
  doc["files"] = files;
  Json cj = Json::array();
  for (const auto& c : sorted) cj.push_back(cell_json(c));
  doc["cells"] = cj;
  const auto json_path = dir / "plots.json";
  write_json(json_path, doc);
  written.push_back(json_path);
  return written;
}

// ---------------------------------------------------------------------------

PreservationResult check_majority_preservation(ModelKind model, int j, std::int64_t n, double zeta,
                                               std::int64_t runs, SeedPolicy seeds, int threads) {
  if (zeta < 0.0) throw ValidationError("zeta must be non-negative");
  PreservationResult out;
  out.n = n;
  out.zeta = zeta;
  out.runs = runs;
  out.s0 = InitialRule{InitialRule::Kind::Bias, zeta, 0}.resolve(n);

  BatchConfig b;
  b.spec = ProcessSpec(j);
  b.model = model;
  b.n = n;
  b.s0 = out.s0;
  b.runs = runs;
  b.seeds = seeds;
  const auto recs = run_batch(b, threads);
  double norm_sum = 0.0;
  for (const auto& r : recs) {
    if (r.censored) {
      ++out.censored;
      continue;
    }
    if (r.winner == Opinion::A) ++out.preserved;
    norm_sum += static_cast<double>(r.steps) / (n > 1 ? normalizer(model, n) : 1.0);
  }
  out.fraction = static_cast<double>(out.preserved) / static_cast<double>(runs);
  const std::int64_t converged = runs - out.censored;
  out.mean_normalized_time = converged > 0 ? norm_sum / static_cast<double>(converged) : 0.0;
  return out;
}

BiasDoublingResult check_bias_doubling(std::int64_t n, std::int64_t delta0, std::int64_t window, std::int64_t runs,
                                       SeedPolicy seeds, int threads) {
  if (n < 2 || n % 2 != 0) throw ValidationError("bias doubling needs an even n >= 2");
  if (delta0 < 1 || 2 * delta0 > n) throw ValidationError("delta0 must lie in [1, n/2]");
  if (window < 1) throw ValidationError("window must be at least 1");
  if (runs < 1) throw ValidationError("runs must be at least 1");

  BiasDoublingResult out;
  out.n = n;
  out.delta0 = delta0;
  out.target = std::min(2 * delta0, n / 2);
  out.window = window;
  out.runs = runs;

  // Probability that a productive step raises the a-count, per state.
  const ProcessSpec spec(3);
  std::vector<double> p_up(static_cast<std::size_t>(n + 1), 0.0);
  for (std::int64_t s = 1; s < n; ++s) {
    const double a = static_cast<double>(s) / static_cast<double>(n);
    const double q = adoption_probability(spec, a);
    const double up = (1.0 - a) * q;
    const double down = a * (1.0 - q);
    p_up[static_cast<std::size_t>(s)] = up / (up + down);
  }

  const std::int64_t half = n / 2;
  std::vector<std::int8_t> violated(static_cast<std::size_t>(runs), 0);
  std::vector<std::int64_t> doubled_at(static_cast<std::size_t>(runs), -1);
  const int workers = threads > 0 ? threads : worker_count();
#pragma omp parallel for schedule(dynamic, 16) num_threads(workers)
  for (std::int64_t i = 0; i < runs; ++i) {
    Stream stream = derive_stream(seeds, static_cast<std::uint64_t>(i));
    std::int64_t bias = delta0;
    std::int64_t t = 0;
    bool low = false;
    while (bias < out.target && t < window) {
      const std::int64_t s = half + bias;
      if (s <= 0) break;
      bias += stream.uniform() < p_up[static_cast<std::size_t>(s)] ? 1 : -1;
      ++t;
      if (2 * bias < delta0) low = true;
    }
    violated[static_cast<std::size_t>(i)] = low ? 1 : 0;
    if (bias >= out.target) doubled_at[static_cast<std::size_t>(i)] = t;
  }

  std::int64_t low_count = 0;
  std::vector<double> steps;
  for (std::int64_t i = 0; i < runs; ++i) {
    low_count += violated[static_cast<std::size_t>(i)];
    if (doubled_at[static_cast<std::size_t>(i)] >= 0)
      steps.push_back(static_cast<double>(doubled_at[static_cast<std::size_t>(i)]));
  }
  out.floor_violation_rate = static_cast<double>(low_count) / static_cast<double>(runs);
  out.doubled_rate = static_cast<double>(steps.size()) / static_cast<double>(runs);
  out.doubling_steps = summarize(steps);
  return out;
}

DriftTailResult check_drift_tail(std::int64_t n, double eps, double r, std::int64_t runs, SeedPolicy seeds,
                                 int threads) {
  if (!(eps > 0.0 && eps < 0.5)) throw ValidationError("eps must lie in (0, 1/2)");
  if (r < 0.0) throw ValidationError("r must be non-negative");
  if (runs < 1) throw ValidationError("runs must be at least 1");
  DriftTailResult out;
  out.n = n;
  out.eps = eps;
  out.r = r;
  out.runs = runs;
  out.s0 = static_cast<std::int64_t>(std::floor((0.5 - eps) * static_cast<double>(n)));
  if (out.s0 < 1) throw ValidationError("minority count (1/2 - eps) n rounds down to zero");
  out.delta = (1.0 + eps / 2.0) * eps / (4.0 * static_cast<double>(n));
  out.time_bound =
      static_cast<std::int64_t>(std::ceil((r + std::log(static_cast<double>(out.s0))) / out.delta));
  out.bound = std::exp(-r);
  out.se = binomial_se(std::min(out.bound, 1.0), runs);

  // The a side holds the majority; T is the time the minority b dies out.
  BatchConfig b;
  b.spec = ProcessSpec(3);
  b.model = ModelKind::Sequential;
  b.n = n;
  b.s0 = n - out.s0;
  b.runs = runs;
  b.seeds = seeds;
  b.step_cap = std::max<std::int64_t>(1, out.time_bound);
  for (const auto& rec : run_batch(b, threads))
    if (rec.censored || rec.winner != Opinion::A) ++out.exceeded;
  out.fraction = static_cast<double>(out.exceeded) / static_cast<double>(runs);
  return out;
}

}  // namespace majority
