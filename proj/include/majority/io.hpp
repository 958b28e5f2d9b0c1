#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "majority/coupling.hpp"
#include "majority/simulate.hpp"

namespace majority {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// RFC-4180 field quoting: fields containing a comma, quote, CR or LF are
/// wrapped in quotes with embedded quotes doubled.
std::string csv_escape(std::string_view field);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

/// Parses RFC-4180 text (quoted fields may span lines). A trailing newline
/// does not produce an empty record.
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

void ensure_directory(const std::filesystem::path& dir);

/// Opens a file for writing; throws std::runtime_error naming the path.
std::ofstream open_output(const std::filesystem::path& path);
std::ifstream open_input(const std::filesystem::path& path);

/// Writes `doc` with schema_version set, two-space indented.
void write_json(const std::filesystem::path& path, Json doc);

const std::vector<std::string>& run_record_header();
std::vector<std::string> run_record_fields(const RunRecord& record);
void write_run_records(std::ostream& out, const std::vector<RunRecord>& records, bool header = true);

/// t, x_low, x_high, dominance_flag, maj_low, maj_high
void write_trace(std::ostream& out, const CoupledTrace& trace);
Json trace_summary(const CoupledTrace& trace);

}  // namespace majority
