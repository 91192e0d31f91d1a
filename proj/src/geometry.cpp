#include "phonox/geometry.hpp"

#include "phonox/error.hpp"
#include "phonox/materials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

namespace phonox {

using nlohmann::json;

namespace {

constexpr double kNm = 1e-9;
constexpr double kDeg = 3.14159265358979323846 / 180.0;

double lerp_s(double x0, double x1, double s) { return x0 + (x1 - x0) * s; }

void check_stacks(const UnitCell& c0, const UnitCell& c1) {
  bool same = c0.stack.size() == c1.stack.size();
  for (std::size_t i = 0; same && i < c0.stack.size(); ++i)
    same = c0.stack[i].material == c1.stack[i].material && c0.stack[i].thickness == c1.stack[i].thickness;
  if (!same) throw ValidationError("interpolate_cells: incompatible layer stacks (" + c0.role + " -> " + c1.role + ")");
}

UnitCell blend(const UnitCell& c0, const UnitCell& c1, double s) {
  UnitCell c = c0;
  c.a = lerp_s(c0.a, c1.a, s);
  for (std::size_t i = 0; i < c.stack.size(); ++i) {
    c.stack[i].hx = lerp_s(c0.stack[i].hx, c1.stack[i].hx, s);
    c.stack[i].hy = lerp_s(c0.stack[i].hy, c1.stack[i].hy, s);
    c.stack[i].w = lerp_s(c0.stack[i].w, c1.stack[i].w, s);
  }
  c.hole_sidewall_deg = lerp_s(c0.hole_sidewall_deg, c1.hole_sidewall_deg, s);
  c.edge_sidewall_deg = lerp_s(c0.edge_sidewall_deg, c1.edge_sidewall_deg, s);
  c.misalignment_buffer = lerp_s(c0.misalignment_buffer, c1.misalignment_buffer, s);
  if (!c1.electrodes) c.electrodes.reset();
  if (c.electrodes) {
    c.electrodes->width = lerp_s(c0.electrodes->width, c1.electrodes->width, s);
    c.electrodes->thickness = lerp_s(c0.electrodes->thickness, c1.electrodes->thickness, s);
  }
  c.role = c0.role;
  c.role_to = c1.role;
  c.blend = s;
  return c;
}

// Adjacent regions must meet on the same cell; films present on only one side
// (the LN film that ends at the taper-end cell) are ignored in the comparison.
bool shares_boundary(const UnitCell& x, const UnitCell& y) {
  if (std::abs(x.a - y.a) > 1e-15) return false;
  for (const auto& lx : x.stack) {
    const Layer* ly = y.find_layer(lx.material);
    if (ly != nullptr && !(*ly == lx)) return false;
  }
  return true;
}

}  // namespace

void UnitCell::set_ellipse(double new_hx, double new_hy) {
  const double dx = new_hx - hx();
  const double dy = new_hy - hy();
  for (auto& l : stack) {
    l.hx += dx;
    l.hy += dy;
  }
}

const Layer* UnitCell::find_layer(const std::string& material) const {
  for (const auto& l : stack)
    if (l.material == material) return &l;
  return nullptr;
}

UnitCell UnitCell::without_layer(const std::string& material) const {
  UnitCell c = *this;
  c.stack.erase(std::remove_if(c.stack.begin(), c.stack.end(),
                               [&](const Layer& l) { return l.material == material; }),
                c.stack.end());
  if (c.stack.empty()) throw ValidationError("without_layer: cell would have no films left");
  c.electrodes.reset();
  return c;
}

void UnitCell::validate() const {
  if (!(a > 0.0)) throw ValidationError("unit cell '" + role + "': period a must be positive");
  if (stack.empty()) throw ValidationError("unit cell '" + role + "': empty layer stack");
  for (const auto& l : stack) {
    if (!(l.thickness > 0.0)) throw ValidationError("unit cell '" + role + "': film thickness must be positive");
    if (!(l.hx > 0.0) || !(l.hy > 0.0)) throw ValidationError("unit cell '" + role + "': ellipse axes must be positive");
    if (!(l.w > 0.0)) throw ValidationError("unit cell '" + role + "': beam width must be positive");
  }
  if (electrodes && (electrodes->count < 2 || !(electrodes->width > 0.0) || !(electrodes->thickness > 0.0)))
    throw ValidationError("unit cell '" + role + "': invalid electrode spec");
}

std::vector<EffectiveLayer> effective_layers(const UnitCell& c) {
  std::vector<EffectiveLayer> out;
  const std::size_t top = c.stack.size() - 1;
  for (std::size_t i = 0; i < c.stack.size(); ++i) {
    const Layer& l = c.stack[i];
    EffectiveLayer e{l.material, l.thickness, l.hx, l.hy, l.w};
    // only the top (patterned piezo) film of a multi-film stack carries sidewalls
    if (i == top && c.stack.size() > 1) {
      const double dh = l.thickness * std::tan(c.hole_sidewall_deg * kDeg);  // both sides, half thickness each
      const double dw = l.thickness * std::tan(c.edge_sidewall_deg * kDeg);
      e.hx = std::max(l.hx - dh, 0.0);
      e.hy = std::max(l.hy - dh, 0.0);
      e.w = l.w + dw;
    }
    out.push_back(e);
  }
  return out;
}

std::string to_string(Profile p) {
  switch (p) {
    case Profile::uniform: return "uniform";
    case Profile::smoothstep: return "smoothstep";
    case Profile::taper: return "taper";
  }
  return "uniform";
}

Profile profile_from_string(const std::string& s) {
  if (s == "uniform") return Profile::uniform;
  if (s == "smoothstep") return Profile::smoothstep;
  if (s == "taper") return Profile::taper;
  throw ValidationError("unknown transition profile '" + s + "'");
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

std::vector<UnitCell> interpolate_cells(const UnitCell& c0, const UnitCell& c1, int n) {
  if (n < 2) throw ValidationError("interpolate_cells: need n >= 2");
  check_stacks(c0, c1);
  std::vector<UnitCell> out;
  out.reserve(static_cast<std::size_t>(n));
  out.push_back(c0);
  for (int i = 1; i < n - 1; ++i) out.push_back(blend(c0, c1, smoothstep(double(i) / (n - 1))));
  out.push_back(c1);
  return out;
}

std::vector<UnitCell> interpolate_taper(const UnitCell& c0, const UnitCell& c1, int n) {
  auto cells = interpolate_cells(c0, c1, n);
  for (int i = 1; i < n - 1; ++i) {
    Layer& top = cells[static_cast<std::size_t>(i)].stack.back();
    top.hx = taper_hx(top.hy);
  }
  return cells;
}

double taper_hx(double hy, const TaperPolynomial& p, bool* out_of_range) {
  const double h = hy / kNm;
  if (out_of_range != nullptr) *out_of_range = h < p.lo_nm - 1e-9 || h > p.hi_nm + 1e-9;
  return (p.c0 + h * (p.c1 + h * (p.c2 + h * p.c3))) * kNm;
}

std::vector<DeviceLayout::Cell> DeviceLayout::cells() const {
  std::vector<Cell> out;
  for (const auto& r : regions) {
    if (r.profile == Profile::uniform) {
      for (int i = 0; i < r.count; ++i) out.push_back({r.start, r.tag, r.name});
      continue;
    }
    const auto chain = r.profile == Profile::taper ? interpolate_taper(r.start, r.end, r.count + 2)
                                                   : interpolate_cells(r.start, r.end, r.count + 2);
    for (int i = 1; i <= r.count; ++i) out.push_back({chain[static_cast<std::size_t>(i)], r.tag, r.name});
  }
  return out;
}

int DeviceLayout::cell_count() const {
  int n = 0;
  for (const auto& r : regions) n += r.count;
  return n;
}

void DeviceLayout::validate() const {
  if (regions.empty()) throw ValidationError("layout '" + name + "' has no regions");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const Region& r = regions[i];
    if (r.count < 1) throw ValidationError("region '" + r.name + "': count must be >= 1");
    r.start.validate();
    r.end.validate();
    if (r.profile == Profile::uniform) {
      if (!(r.start == r.end)) throw ValidationError("region '" + r.name + "': uniform region needs start == end");
      continue;
    }
    check_stacks(r.start, r.end);
    if (i > 0 && !shares_boundary(regions[i - 1].end, r.start))
      throw ValidationError("region '" + r.name + "' does not start on the previous region's cell");
    if (i + 1 < regions.size() && !shares_boundary(r.end, regions[i + 1].start))
      throw ValidationError("region '" + r.name + "' does not end on the next region's cell");
  }
}

DeviceLayout apply_disorder(const DeviceLayout& layout, const DisorderSpec& spec) {
  if (spec.sigma < 0.0) throw ValidationError("disorder sigma must be >= 0");
  if (spec.sigma == 0.0) return layout;
  DeviceLayout out;
  out.name = layout.name;
  out.substrate = layout.substrate;
  for (const auto& c : apply_disorder(layout.cells(), spec))
    out.regions.push_back(Region{c.region, c.tag, c.cell, c.cell, 1, Profile::uniform});
  return out;
}

std::vector<DeviceLayout::Cell> apply_disorder(const std::vector<DeviceLayout::Cell>& cells,
                                               const DisorderSpec& spec) {
  if (spec.sigma < 0.0) throw ValidationError("disorder sigma must be >= 0");
  if (spec.sigma == 0.0) return cells;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> draw(0.0, spec.sigma);
  auto out = cells;
  for (auto& c : out) {
    const double dx = draw(rng);
    const double dy = draw(rng);
    for (auto& l : c.cell.stack) {
      l.hx = std::max(l.hx + dx, spec.clamp_floor);
      l.hy = std::max(l.hy + dy, spec.clamp_floor);
    }
  }
  return out;
}

json cell_to_json(const UnitCell& c) {
  json j;
  j["role"] = c.role;
  if (!c.role_to.empty()) {
    j["role_to"] = c.role_to;
    j["blend"] = c.blend;
  }
  j["a_nm"] = c.a / kNm;
  json stack = json::array();
  for (const auto& l : c.stack)
    stack.push_back({{"material", l.material},
                     {"thickness_nm", l.thickness / kNm},
                     {"hx_nm", l.hx / kNm},
                     {"hy_nm", l.hy / kNm},
                     {"w_nm", l.w / kNm}});
  j["stack"] = stack;
  j["hole_sidewall_deg"] = c.hole_sidewall_deg;
  j["edge_sidewall_deg"] = c.edge_sidewall_deg;
  j["misalignment_buffer_nm"] = c.misalignment_buffer / kNm;
  if (c.electrodes)
    j["electrodes"] = {{"count", c.electrodes->count},
                       {"width_nm", c.electrodes->width / kNm},
                       {"thickness_nm", c.electrodes->thickness / kNm},
                       {"material", c.electrodes->material}};
  return j;
}

UnitCell cell_from_json(const json& j) {
  UnitCell c;
  c.role = j.value("role", std::string());
  c.role_to = j.value("role_to", std::string());
  c.blend = j.value("blend", 0.0);
  c.a = j.at("a_nm").get<double>() * kNm;
  for (const auto& l : j.at("stack")) {
    Layer layer;
    layer.material = l.at("material").get<std::string>();
    layer.thickness = l.at("thickness_nm").get<double>() * kNm;
    layer.hx = l.at("hx_nm").get<double>() * kNm;
    layer.hy = l.at("hy_nm").get<double>() * kNm;
    layer.w = l.at("w_nm").get<double>() * kNm;
    c.stack.push_back(layer);
  }
  c.hole_sidewall_deg = j.value("hole_sidewall_deg", 0.0);
  c.edge_sidewall_deg = j.value("edge_sidewall_deg", 0.0);
  c.misalignment_buffer = j.value("misalignment_buffer_nm", 0.0) * kNm;
  if (j.contains("electrodes")) {
    const auto& e = j.at("electrodes");
    c.electrodes = ElectrodeSpec{e.at("count").get<int>(), e.at("width_nm").get<double>() * kNm,
                                 e.at("thickness_nm").get<double>() * kNm, e.value("material", std::string("al"))};
  }
  c.validate();
  return c;
}

json layout_to_json(const DeviceLayout& l) {
  json j;
  j["schema"] = "phonox.layout/1";
  j["name"] = l.name;
  j["substrate"] = l.substrate;
  json regions = json::array();
  for (const auto& r : l.regions)
    regions.push_back({{"name", r.name},
                       {"tag", r.tag},
                       {"start", cell_to_json(r.start)},
                       {"end", cell_to_json(r.end)},
                       {"count", r.count},
                       {"profile", to_string(r.profile)}});
  j["regions"] = regions;
  return j;
}

DeviceLayout layout_from_json(const json& j) {
  DeviceLayout l;
  l.name = j.value("name", std::string("layout"));
  l.substrate = j.value("substrate", std::string("sapphire"));
  std::map<std::string, UnitCell> named;
  if (j.contains("cells"))
    for (const auto& [key, value] : j.at("cells").items()) {
      UnitCell c = cell_from_json(value);
      if (c.role.empty()) c.role = key;
      named.emplace(key, c);
    }
  auto resolve = [&](const json& ref) {
    if (ref.is_string()) {
      const auto it = named.find(ref.get<std::string>());
      if (it == named.end()) throw ValidationError("layout references unknown cell '" + ref.get<std::string>() + "'");
      return it->second;
    }
    return cell_from_json(ref);
  };
  for (const auto& r : j.at("regions")) {
    Region region;
    region.name = r.value("name", std::string());
    region.tag = r.value("tag", std::string());
    region.start = resolve(r.at("start"));
    region.end = r.contains("end") ? resolve(r.at("end")) : region.start;
    region.count = r.value("count", 1);
    region.profile = profile_from_string(r.value("profile", std::string("uniform")));
    l.regions.push_back(region);
  }
  l.validate();
  return l;
}

std::vector<std::string> device_preset_names() {
  return {"sOMC-transducer", "lOMC-transducer", "sOMC-only", "EMC-only"};
}

DeviceLayout device_preset(const std::string& name) {
  const auto names = device_preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw ValidationError("unknown device preset '" + name + "'");
  const auto path = data_dir() / "devices" / (name + ".json");
  std::ifstream in(path);
  if (!in) throw ValidationError("device preset file missing: " + path.string());
  return layout_from_json(json::parse(in));
}

}  // namespace phonox
