#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace phonox {

/// Table with one header row; each header cell reads "name [unit]" (or just
/// "name" for dimensionless/text columns).
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::string> units;
  std::vector<std::vector<std::string>> rows;

  void add_column(const std::string& name, const std::string& unit = "");
  void add_row(std::vector<std::string> row);
  /// Column index by name, -1 when absent.
  int find(const std::string& name) const;
};

/// Shortest round-trip decimal form ("inf", "-inf", "nan" for non-finite values).
std::string format_number(double v);
/// Parses format_number output; throws ValidationError on malformed input.
double parse_number(const std::string& s);

std::string to_csv_string(const CsvTable& t);
CsvTable parse_csv(const std::string& text);
void write_csv(const CsvTable& t, const std::filesystem::path& path);
CsvTable read_csv(const std::filesystem::path& path);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);

std::uint64_t fnv1a64(const std::string& bytes);
/// 16 hex digits of FNV-1a over the canonical (key-sorted, compact) dump.
std::string config_hash(const nlohmann::json& j);

enum class PlotKind { line, scatter, bands };

struct PlotSeries {
  std::string name;
  std::vector<double> x, y;
};

struct PlotData {
  std::string title;
  std::string x_label, y_label;
  std::vector<PlotSeries> series;
};

/// Deterministic SVG: axes and ticks as <line>/<text>, one <polyline> per
/// series for line and band plots, <circle> markers for scatter plots.
/// Non-finite points are dropped. Throws ValidationError for an empty dataset.
std::string render_svg(const PlotData& data, PlotKind kind);
void emit_plot(const PlotData& data, PlotKind kind, const std::filesystem::path& path);

}  // namespace phonox
