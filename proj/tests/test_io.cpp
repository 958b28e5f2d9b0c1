#include <cmath>
#include <filesystem>
#include <limits>
#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "majority/io.hpp"

using namespace majority;

TEST_SUITE("io") {
  TEST_CASE("double formatting is shortest and round-trips") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.0) == "2");
    CHECK(format_double(-1.5e-300) == "-1.5e-300");
    for (double v : {1.0 / 3.0, 2.718281828459045, 1e22, 5e-324, 123456.789})
      CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }

  TEST_CASE("CSV quoting") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
  }

  TEST_CASE("CSV round trip") {
    std::ostringstream out;
    CsvWriter w(out);
    w.row({"x", "a,b", "q\"q", ""});
    w.row({"multi\nline", "2"});
    CHECK(out.str().find("\r\n") != std::string::npos);
    std::istringstream in(out.str());
    const auto rows = parse_csv(in);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"x", "a,b", "q\"q", ""});
    CHECK(rows[1] == std::vector<std::string>{"multi\nline", "2"});
    std::istringstream bad("\"open");
    CHECK_THROWS(parse_csv(bad));
  }

  TEST_CASE("run records use none for censored winners") {
    RunRecord r;
    r.n = 10;
    r.j = 3;
    r.s0 = 5;
    r.steps = 7;
    r.censored = true;
    const auto f = run_record_fields(r);
    REQUIRE(f.size() == run_record_header().size());
    CHECK(f[6] == "none");
    CHECK(f[9] == "true");
    r.winner = Opinion::A;
    r.censored = false;
    CHECK(run_record_fields(r)[6] == "a");
  }

  TEST_CASE("trace output") {
    CoupledTrace t;
    t.j_low = 4;
    t.j_high = 5;
    t.n = 4;
    t.s0 = 3;
    t.steps = {{0, 3, 3, 3, 3, true}, {1, 4, 4, 4, 4, true}};
    t.t_low = 1;
    t.t_high = 1;
    t.winner_low = t.winner_high = Opinion::A;
    t.length = 1;
    std::ostringstream out;
    write_trace(out, t);
    std::istringstream in(out.str());
    const auto rows = parse_csv(in);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"t", "x_low", "x_high", "dominance_flag", "maj_low", "maj_high"});
    CHECK(rows[2][3] == "true");
    const Json s = trace_summary(t);
    CHECK(s["T_low"] == 1);
  }

  TEST_CASE("json files lead with the schema version") {
    const auto dir = std::filesystem::temp_directory_path() / "majority_lab_io_test";
    ensure_directory(dir);
    write_json(dir / "x.json", Json{{"a", 1}});
    auto in = open_input(dir / "x.json");
    const Json back = Json::parse(in);
    CHECK(back.begin().key() == "schema_version");
    CHECK(back["schema_version"] == kSchemaVersion);
    CHECK(back["a"] == 1);
    CHECK_THROWS(open_input(dir / "missing.json"));
    std::filesystem::remove_all(dir);
  }
}
