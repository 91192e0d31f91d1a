#include "phonox/io.hpp"

#include "phonox/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace phonox {

void CsvTable::add_column(const std::string& name, const std::string& unit) {
  if (!rows.empty()) throw ValidationError("CsvTable: columns must be declared before rows");
  columns.push_back(name);
  units.push_back(unit);
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size())
    throw ValidationError("CsvTable: row has " + std::to_string(row.size()) + " cells, expected " +
                          std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

int CsvTable::find(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

double parse_number(const std::string& s) {
  std::string t = s;
  t.erase(0, t.find_first_not_of(" \t"));
  t.erase(t.find_last_not_of(" \t\r") + 1);
  if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* b = t.data();
  if (!t.empty() && t[0] == '+') ++b;
  const auto r = std::from_chars(b, t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw ValidationError("not a number: '" + s + "'");
  return v;
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::vector<std::vector<std::string>> split_records(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> rec;
  std::string cell;
  bool in_quotes = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(cell);
      cell.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !cell.empty()) {
        rec.push_back(cell);
        out.push_back(rec);
      }
      rec.clear();
      cell.clear();
      any = false;
    } else {
      cell += c;
      any = true;
    }
  }
  if (in_quotes) throw ValidationError("csv: unterminated quoted field");
  if (any || !cell.empty()) {
    rec.push_back(cell);
    out.push_back(rec);
  }
  return out;
}

std::string trim(std::string s) {
  s.erase(0, s.find_first_not_of(" \t"));
  s.erase(s.find_last_not_of(" \t") + 1);
  return s;
}

}  // namespace

std::string to_csv_string(const CsvTable& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) os << ',';
    std::string h = t.columns[i];
    if (i < t.units.size() && !t.units[i].empty()) h += " [" + t.units[i] + "]";
    os << quote(h);
  }
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) os << ',';
      os << quote(r[i]);
    }
    os << '\n';
  }
  return os.str();
}

CsvTable parse_csv(const std::string& text) {
  auto recs = split_records(text);
  // comment lines
  recs.erase(std::remove_if(recs.begin(), recs.end(),
                            [](const auto& r) { return !r.empty() && !r[0].empty() && r[0][0] == '#'; }),
             recs.end());
  if (recs.empty()) throw ValidationError("csv: missing header row");
  CsvTable t;
  for (const auto& h0 : recs[0]) {
    const std::string h = trim(h0);
    const auto lb = h.rfind(" [");
    if (lb != std::string::npos && h.back() == ']') {
      t.columns.push_back(trim(h.substr(0, lb)));
      t.units.push_back(h.substr(lb + 2, h.size() - lb - 3));
    } else {
      t.columns.push_back(h);
      t.units.emplace_back();
    }
  }
  for (std::size_t i = 1; i < recs.size(); ++i) {
    auto r = recs[i];
    if (r.size() != t.columns.size())
      throw ValidationError("csv: record " + std::to_string(i) + " has " + std::to_string(r.size()) +
                            " fields, header has " + std::to_string(t.columns.size()));
    for (auto& c : r) c = trim(c);
    t.rows.push_back(std::move(r));
  }
  return t;
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path.string());
  f << text;
}

namespace {
std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot read " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}
}  // namespace

void write_csv(const CsvTable& t, const std::filesystem::path& path) { write_text(to_csv_string(t), path); }
CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

void write_json(const nlohmann::json& j, const std::filesystem::path& path) { write_text(j.dump(1) + "\n", path); }

nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash(const nlohmann::json& j) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

constexpr double kW = 640, kH = 420, kL = 80, kR = 20, kT = 40, kB = 60;

std::string fmt(double v, const char* f = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::string render_svg(const PlotData& data, PlotKind kind) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  std::size_t npts = 0;
  for (const auto& s : data.series) {
    if (s.x.size() != s.y.size()) throw ValidationError("plot series '" + s.name + "': x and y lengths differ");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
      ++npts;
    }
  }
  if (npts == 0) throw ValidationError("emit_plot: empty dataset");
  if (x1 == x0) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 == y0) {
    const double d = y0 == 0.0 ? 0.5 : 0.05 * std::abs(y0);
    y0 -= d;
    y1 += d;
  }
  const double pw = kW - kL - kR, ph = kH - kT - kB;
  const auto px = [&](double x) { return kL + (x - x0) / (x1 - x0) * pw; };
  const auto py = [&](double y) { return kT + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW
     << ' ' << kH << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  if (!data.title.empty())
    os << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(data.title)
       << "</text>\n";
  os << "<line x1=\"" << kL << "\" y1=\"" << kT + ph << "\" x2=\"" << kL + pw << "\" y2=\"" << kT + ph
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kT + ph << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0, yv = y0 + (y1 - y0) * t / 4.0;
    const std::string X = fmt(px(xv)), Y = fmt(py(yv));
    os << "<line x1=\"" << X << "\" y1=\"" << kT + ph << "\" x2=\"" << X << "\" y2=\"" << kT + ph + 5
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << X << "\" y=\"" << kT + ph + 20 << "\" text-anchor=\"middle\" font-size=\"11\">"
       << fmt(xv, "%.4g") << "</text>\n";
    os << "<line x1=\"" << kL - 5 << "\" y1=\"" << Y << "\" x2=\"" << kL << "\" y2=\"" << Y << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kL - 8 << "\" y=\"" << Y << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(yv, "%.4g")
       << "</text>\n";
  }
  os << "<text x=\"" << kL + pw / 2 << "\" y=\"" << kH - 15 << "\" text-anchor=\"middle\" font-size=\"13\">"
     << escape(data.x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << kT + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
     << kT + ph / 2 << ")\">" << escape(data.y_label) << "</text>\n";

  for (std::size_t si = 0; si < data.series.size(); ++si) {
    const auto& s = data.series[si];
    const char* col = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) pts.emplace_back(px(s.x[i]), py(s.y[i]));
    if (pts.empty()) continue;
    if (kind == PlotKind::scatter) {
      for (const auto& [x, y] : pts)
        os << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"2.5\" fill=\"" << col << "\"/>\n";
    } else {
      os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < pts.size(); ++i) os << (i ? " " : "") << fmt(pts[i].first) << ',' << fmt(pts[i].second);
      os << "\"/>\n";
    }
  }
  if (kind != PlotKind::bands) {
    int row = 0;
    for (std::size_t si = 0; si < data.series.size(); ++si) {
      if (data.series[si].name.empty()) continue;
      const char* col = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
      const double y = kT + 12 + 14 * row++;
      os << "<text x=\"" << kL + pw - 4 << "\" y=\"" << y << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << col
         << "\">" << escape(data.series[si].name) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

void emit_plot(const PlotData& data, PlotKind kind, const std::filesystem::path& path) {
  write_text(render_svg(data, kind), path);
}

}  // namespace phonox
