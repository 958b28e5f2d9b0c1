#include "majority/io.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace majority {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_escape(fields[i]);
  }
  out_ << "\r\n";
}

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && in.peek() == '\n') in.get(c);
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw std::runtime_error("unterminated quoted CSV field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  return in;
}

void write_json(const std::filesystem::path& path, Json doc) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (it.key() != "schema_version") out[it.key()] = it.value();
  auto file = open_output(path);
  file << out.dump(2) << "\n";
  if (!file) throw std::runtime_error("failed writing " + path.string());
}

const std::vector<std::string>& run_record_header() {
  static const std::vector<std::string> header{"run_index", "master_seed", "n",     "j",             "model",
                                               "s0",        "winner",      "steps", "parallel_time", "censored"};
  return header;
}

std::vector<std::string> run_record_fields(const RunRecord& r) {
  return {std::to_string(r.run_index),
          std::to_string(r.master_seed),
          std::to_string(r.n),
          std::to_string(r.j),
          std::string(to_string(r.model)),
          std::to_string(r.s0),
          r.winner ? std::string(to_string(*r.winner)) : std::string("none"),
          std::to_string(r.steps),
          format_double(r.parallel_time),
          r.censored ? "true" : "false"};
}

void write_run_records(std::ostream& out, const std::vector<RunRecord>& records, bool header) {
  CsvWriter csv(out);
  if (header) csv.row(run_record_header());
  for (const auto& r : records) csv.row(run_record_fields(r));
}

void write_trace(std::ostream& out, const CoupledTrace& trace) {
  CsvWriter csv(out);
  csv.row({"t", "x_low", "x_high", "dominance_flag", "maj_low", "maj_high"});
  for (const auto& s : trace.steps)
    csv.row({std::to_string(s.t), std::to_string(s.x_low), std::to_string(s.x_high), s.dominated ? "true" : "false",
             std::to_string(s.maj_low), std::to_string(s.maj_high)});
}

Json trace_summary(const CoupledTrace& trace) {
  const auto opt_int = [](const std::optional<std::int64_t>& v) { return v ? Json(*v) : Json(nullptr); };
  const auto opt_op = [](const std::optional<Opinion>& v) { return v ? Json(std::string(to_string(*v))) : Json(nullptr); };
  Json j;
  j["j_low"] = trace.j_low;
  j["j_high"] = trace.j_high;
  j["model"] = std::string(to_string(trace.model));
  j["frame"] = std::string(to_string(trace.frame));
  j["n"] = trace.n;
  j["s0"] = trace.s0;
  j["T_low"] = opt_int(trace.t_low);
  j["T_high"] = opt_int(trace.t_high);
  j["winner_low"] = opt_op(trace.winner_low);
  j["winner_high"] = opt_op(trace.winner_high);
  j["steps"] = trace.length;
  j["censored"] = trace.censored;
  j["all_dominated"] = trace.all_dominated;
  return j;
}

}  // namespace majority
