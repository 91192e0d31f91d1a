#include "phonox/error.hpp"
#include "phonox/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace phonox;

TEST_CASE("number formatting round-trips") {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 6.02214076e23, 1e-300, 4.9e-324}) {
    CAPTURE(v);
    CHECK(parse_number(format_number(v)) == v);
  }
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(std::isnan(parse_number(format_number(std::nan("")))));
  CHECK_THROWS_AS(parse_number("1.5x"), ValidationError);
  CHECK_THROWS_AS(parse_number(""), ValidationError);
}

TEST_CASE("csv with units and quoting") {
  CsvTable t;
  t.add_column("name");
  t.add_column("f", "Hz");
  t.add_row({"a, b", "1.5"});
  t.add_row({"say \"hi\"", "2"});
  const auto text = to_csv_string(t);
  CHECK(text.rfind("name,f [Hz]\n", 0) == 0);
  const auto back = parse_csv(text);
  CHECK(back.columns == t.columns);
  CHECK(back.units == t.units);
  CHECK(back.rows == t.rows);
  CHECK(back.find("f") == 1);
  CHECK(back.find("g") == -1);
  CHECK_THROWS_AS(t.add_row({"too", "many", "cells"}), ValidationError);
}

TEST_CASE("config hash ignores key order") {
  const nlohmann::json a = {{"x", 1}, {"y", {{"p", 2.5}, {"q", "s"}}}};
  const nlohmann::json b = nlohmann::json::parse(R"({"y": {"q": "s", "p": 2.5}, "x": 1})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a) != config_hash({{"x", 2}}));
  // FNV-1a reference values
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("svg output is deterministic") {
  PlotData d;
  d.title = "t";
  d.x_label = "x";
  d.y_label = "y";
  d.series.push_back({"s", {0.0, 1.0, 2.0, 3.0}, {1.0, std::nan(""), 4.0, 9.0}});
  const auto a = render_svg(d, PlotKind::line);
  CHECK(a == render_svg(d, PlotKind::line));
  CHECK(a.find("<polyline") != std::string::npos);
  CHECK(render_svg(d, PlotKind::scatter).find("<circle") != std::string::npos);
  CHECK_THROWS_AS(render_svg(PlotData{}, PlotKind::line), ValidationError);
}

TEST_CASE("files round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "phonox_io_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  CsvTable t;
  t.add_column("k", "1/m");
  t.add_row({"3"});
  write_csv(t, dir / "t.csv");
  CHECK(read_csv(dir / "t.csv").rows == t.rows);
  write_json({{"a", 1}}, dir / "a.json");
  CHECK(read_json(dir / "a.json")["a"] == 1);
  CHECK_THROWS(read_json(dir / "missing.json"));
  std::filesystem::remove_all(dir);
}
