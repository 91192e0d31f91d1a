#include "phonox/cli.hpp"

#include "phonox/bands.hpp"
#include "phonox/constants.hpp"
#include "phonox/coupling.hpp"
#include "phonox/envelope.hpp"
#include "phonox/error.hpp"
#include "phonox/geometry.hpp"
#include "phonox/io.hpp"
#include "phonox/materials.hpp"
#include "phonox/metrics.hpp"
#include "phonox/optimize.hpp"
#include "phonox/studies.hpp"
#include "phonox/version.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

namespace phonox {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string flag_name(const std::string& key) {
  std::string s = key;
  std::replace(s.begin(), s.end(), '_', '-');
  return "--" + s;
}

json device_defaults() { return {{"device", "sOMC-transducer"}, {"layout", nullptr}}; }

void merge_into(json& dst, const json& src) {
  for (auto it = src.begin(); it != src.end(); ++it) dst[it.key()] = it.value();
}

std::string run_name(const std::string& command, const std::string& kind) {
  return kind.empty() ? command : command + "-" + kind;
}

}  // namespace

const std::vector<std::string>& cli_commands() {
  static const std::vector<std::string> c{"bands",    "modes",    "saw",   "couple", "metrics",
                                          "optimize", "disorder", "sweep", "compare"};
  return c;
}

const std::vector<std::string>& sweep_kinds() {
  static const std::vector<std::string> k{"pml", "mesh", "tuning", "oxide", "emc-period"};
  return k;
}

json default_settings(const std::string& command, const std::string& kind) {
  json d;
  if (command == "bands") {
    d = device_defaults();
    merge_into(d, {{"cell", "omc_defect"}, {"view", "mechanical"}, {"k_points", 11}, {"branches", 6},
                   {"spacing", 15e-9}});
  } else if (command == "modes") {
    d = device_defaults();
    merge_into(d, {{"band_source", "anchor"}, {"mech_modes", 12}});
  } else if (command == "saw") {
    d = {{"material", "sapphire"},     {"alpha_steps", 32},           {"wavelength", 1e-6},
         {"depth_wavelengths", 4.0},   {"nodes_per_wavelength", 60}, {"surface_only", false}};
  } else if (command == "couple") {
    d = device_defaults();
    merge_into(d, {{"cell", "omc_defect"},
                   {"model", "unit-cell"},
                   {"spacing", 15e-9},
                   {"propagation", "counter"},
                   {"mech_target_hz", 5e9},
                   {"C_mu", 70e-15},
                   {"f_mu", 0.0},
                   {"tan_delta", 1.7e-5}});
  } else if (command == "metrics") {
    d = {{"g_om", 0.0},      {"g_em", 0.0},       {"kappa_o_i", 0.0}, {"kappa_o_e", 0.0}, {"kappa_mu", 0.0},
         {"kappa_mu_e", 0.0}, {"gamma_m", 0.0},   {"omega_o", 0.0},   {"n_c", 0.0}};
  } else if (command == "optimize") {
    d = device_defaults();
    merge_into(d, {{"band_source", "anchor"},
                   {"params", json::array()},
                   {"rel_range", 0.1},
                   {"budget", 200},
                   {"omc_only", false},
                   {"robust", true},
                   {"robust_scale", 1.02},
                   {"starts", 1},
                   {"seed", 1},
                   {"min_feature", 40e-9},
                   {"Qo_max", 1e6},
                   {"Qm_max", 1e4},
                   {"mech_modes", 12}});
  } else if (command == "disorder") {
    d = device_defaults();
    merge_into(d, {{"band_source", "anchor"},
                   {"sigmas", {0.0, 1e-9, 2e-9, 4e-9}},
                   {"samples", 30},
                   {"seed", 1000},
                   {"g_em_min_hz", 1e6},
                   {"clamp_floor", 10e-9},
                   {"mech_modes", 12},
                   {"bootstrap", 1000},
                   {"bootstrap_seed", 7}});
  } else if (command == "sweep") {
    if (kind == "pml") {
      d = {{"n_core", 3.48},    {"n_clad", 1.0},    {"thickness", 2.5e-6}, {"order", 11},
           {"spacing", 10e-9},  {"gap", 1e-6},      {"R_0", 1e-6},         {"A_min", 1e-3},
           {"A_max", 30.0},     {"A_points", 20},   {"include_zero", true}, {"pml_depth", {3e-6}}};
    } else if (kind == "mesh") {
      d = {{"problem", "rod"}, {"resolutions", {8, 16, 32, 64}}};
    } else if (kind == "tuning") {
      d = device_defaults();
      merge_into(d, {{"cell", "omc_defect"},
                     {"hx_offsets", {-10e-9, 0.0, 10e-9}},
                     {"hy_offsets", {-10e-9, 0.0, 10e-9}},
                     {"a_offsets", {0.0}},
                     {"spacing", 20e-9},
                     {"mech_target_hz", 5e9}});
    } else if (kind == "oxide") {
      d = {{"thickness", {0.0, 10e-9, 20e-9, 40e-9}},
           {"film", "si"},
           {"film_thickness", 220e-9},
           {"interlayer", "sio2"},
           {"substrate", "sapphire"},
           {"spacing", 5e-9}};
    } else if (kind == "emc-period") {
      d = device_defaults();
      json scales = json::array();
      for (int i = 0; i <= 16; ++i) scales.push_back(0.96 + 0.005 * i);
      merge_into(d, {{"band_source", "anchor"}, {"scales", scales}, {"modes", 8}, {"cut_tag", ""}});
    } else {
      throw ValidationError("sweep: unknown kind '" + kind + "' (pml, mesh, tuning, oxide, emc-period)");
    }
  } else if (command == "compare") {
    d = {{"table", ""}, {"threshold", 0.2}};
  } else {
    throw ValidationError("unknown command '" + command + "'");
  }
  d["output"] = "runs/" + run_name(command, kind);
  d["threads"] = 0;
  return d;
}

RunFile RunFile::from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("run file: top level must be an object");
  if (!j.contains("schema") || j["schema"] != kRunSchema)
    throw ValidationError(std::string("run file: schema must be \"") + kRunSchema + "\"");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "schema" && it.key() != "command" && it.key() != "kind" && it.key() != "settings")
      throw ValidationError("run file: unknown top-level key '" + it.key() + "'");
  RunFile r;
  if (j.contains("command")) r.command = j["command"].get<std::string>();
  if (j.contains("kind")) r.kind = j["kind"].get<std::string>();
  if (j.contains("settings")) {
    if (!j["settings"].is_object()) throw ValidationError("run file: settings must be an object");
    r.settings = j["settings"];
  }
  return r;
}

RunFile RunFile::load(const fs::path& path) {
  if (!fs::exists(path)) throw ValidationError("run file not found: " + path.string());
  try {
    return from_json(read_json(path));
  } catch (const json::exception& e) {
    throw ValidationError("run file " + path.string() + ": " + e.what());
  }
}

json RunFile::to_json() const {
  json j{{"schema", kRunSchema}, {"command", command}, {"settings", settings}};
  if (!kind.empty()) j["kind"] = kind;
  return j;
}

namespace {

void check_type(const std::string& key, const json& def, const json& v) {
  auto fail = [&](const std::string& want) {
    throw ValidationError("setting '" + key + "': expected " + want + ", got " + v.dump());
  };
  if (def.is_null()) {
    if (!v.is_null() && !v.is_object()) fail("an object or null");
  } else if (def.is_boolean()) {
    if (!v.is_boolean()) fail("a boolean");
  } else if (def.is_number_integer()) {
    if (!v.is_number() || std::floor(v.get<double>()) != v.get<double>()) fail("an integer");
  } else if (def.is_number()) {
    if (!v.is_number()) fail("a number");
  } else if (def.is_string()) {
    if (!v.is_string()) fail("a string");
  } else if (def.is_array()) {
    if (!v.is_array()) fail("an array");
    const bool numeric = !def.empty() && def.front().is_number();
    for (const auto& e : v)
      if (numeric ? !e.is_number() : !e.is_string()) fail(numeric ? "an array of numbers" : "an array of strings");
  }
}

DeviceLayout resolve_layout(const json& s) {
  if (s.contains("layout") && s["layout"].is_object()) return layout_from_json(s["layout"]);
  const std::string dev = s.at("device").get<std::string>();
  if (dev.size() > 5 && dev.substr(dev.size() - 5) == ".json") {
    if (!fs::exists(dev)) throw ValidationError("layout file not found: " + dev);
    return layout_from_json(read_json(dev));
  }
  return device_preset(dev);
}

void require_one_of(const json& s, const std::string& key, const std::vector<std::string>& allowed) {
  const std::string v = s.at(key).get<std::string>();
  if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    throw ValidationError("setting '" + key + "': '" + v + "' is not one of " + list);
  }
}

const UnitCell& find_role(const DeviceLayout& l, const std::string& role) {
  for (const auto& r : l.regions) {
    if (r.start.role == role) return r.start;
    if (r.end.role == role) return r.end;
  }
  throw ValidationError("layout '" + l.name + "' has no cell with role '" + role + "'");
}

void validate_semantics(const std::string& command, const std::string& kind, const json& s) {
  if (s.at("threads").get<int>() < 0) throw ValidationError("setting 'threads' must be >= 0");
  if (s.contains("device")) {
    const DeviceLayout l = resolve_layout(s);
    l.validate();
    if (s.contains("cell")) find_role(l, s["cell"].get<std::string>());
  }
  if (s.contains("band_source")) require_one_of(s, "band_source", {"anchor", "solver"});
  if (command == "bands") {
    require_one_of(s, "view", {"mechanical", "optical"});
    if (s["k_points"].get<int>() < 2) throw ValidationError("setting 'k_points' must be >= 2");
  }
  if (command == "saw") {
    builtin_material(s["material"].get<std::string>());
    if (s["alpha_steps"].get<int>() < 1) throw ValidationError("setting 'alpha_steps' must be >= 1");
  }
  if (command == "couple") {
    require_one_of(s, "model", {"unit-cell", "emc"});
    require_one_of(s, "propagation", {"counter", "co"});
  }
  if (command == "metrics") TransducerParams::from_json(s).validate();
  if (command == "sweep" && kind == "mesh") require_one_of(s, "problem", {"rod", "slab"});
  if (command == "sweep" && kind == "oxide")
    for (const char* k : {"film", "interlayer", "substrate"}) film_material(s[k].get<std::string>());
  if (command == "compare" && !s["table"].get<std::string>().empty() && !fs::exists(s["table"].get<std::string>()))
    throw ValidationError("comparison table not found: " + s["table"].get<std::string>());
}

}  // namespace

json resolve_settings(const std::string& command, const std::string& kind, const json& run_settings,
                      const json& overrides) {
  json s = default_settings(command, kind);
  const json defaults = s;
  for (const json* src : {&run_settings, &overrides}) {
    if (src->is_null()) continue;
    if (!src->is_object()) throw ValidationError("settings must be an object");
    for (auto it = src->begin(); it != src->end(); ++it) {
      if (!defaults.contains(it.key()))
        throw ValidationError("unknown setting '" + it.key() + "' for " + run_name(command, kind));
      check_type(it.key(), defaults[it.key()], it.value());
      s[it.key()] = it.value();
    }
  }
  validate_semantics(command, kind, s);
  return s;
}

namespace {

std::unique_ptr<BandSource> make_bands(const json& s) {
  if (s.value("band_source", std::string("anchor")) == "solver") return std::make_unique<SolverBandSource>();
  return std::make_unique<AnchorBandTable>(AnchorBandTable::default_table());
}

json run_metadata(const json& config) {
  return {{"toolkit", "phonox"}, {"version", kVersion}, {"config_hash", config_hash(config)}};
}

struct Outcome {
  json summary;
  std::vector<std::string> files;
};

void write_run(const fs::path& dir, const std::string& command, const std::string& kind, const json& settings,
               const Outcome& o) {
  json config{{"command", command}, {"settings", settings}};
  if (!kind.empty()) config["kind"] = kind;
  json j{{"kind", run_name(command, kind)},
         {"config", config},
         {"summary", o.summary},
         {"metadata", run_metadata(config)},
         {"files", o.files}};
  write_json(j, dir / "run.json");
}

void finish_study(StudyRun& run, const fs::path& dir, const std::string& command, const std::string& kind,
                  const json& settings) {
  json config{{"command", command}, {"settings", settings}, {"study", run.config}};
  if (!kind.empty()) config["kind"] = kind;
  run.config = config;
  run.write(dir);
}

std::vector<double> numbers(const json& a) { return a.get<std::vector<double>>(); }

std::vector<std::string> plan_for(const std::string& command, const std::string& kind, const json& s) {
  std::vector<std::string> p;
  const std::string out = s["output"].get<std::string>();
  if (command == "bands")
    p = {"build the top-view " + s["view"].get<std::string>() + " grid of cell '" + s["cell"].get<std::string>() + "'",
         "solve " + std::to_string(s["branches"].get<int>()) + " branches at " +
             std::to_string(s["k_points"].get<int>()) + " k points in [0, pi/a]",
         "write bands.csv and plots/bands.svg"};
  else if (command == "modes")
    p = {"build mechanical and optical envelope chains from the " + s["band_source"].get<std::string>() + " band source",
         "solve cavity modes and rank by g_om", "write modes.csv and plots/envelopes.svg"};
  else if (command == "saw")
    p = {"sweep the in-plane angle of " + s["material"].get<std::string>() + " in " +
             std::to_string(s["alpha_steps"].get<int>()) + " steps",
         "write saw.csv and plots/velocity.svg"};
  else if (command == "couple")
    p = {"solve the " + s["model"].get<std::string>() + " problem of cell '" + s["cell"].get<std::string>() + "'",
         "evaluate coupling integrals", "write coupling.json"};
  else if (command == "metrics")
    p = {"evaluate cooperativities, efficiencies, bandwidth and energy per qubit", "write metrics.json"};
  else if (command == "optimize")
    p = {"Nelder-Mead over the design vector with budget " + std::to_string(s["budget"].get<int>()),
         "write optimization.json, trace.csv and layout.json"};
  else if (command == "disorder")
    p = {std::to_string(s["sigmas"].size()) + " sigma values x " + std::to_string(s["samples"].get<int>()) +
             " samples through the envelope model",
         "bootstrap statistics and trend check", "write run.json, results.csv and plots"};
  else if (command == "sweep")
    p = {"run the " + kind + " study", "write run.json, results.csv and plots"};
  else if (command == "compare")
    p = {"ingest the comparison table and recompute C_em and E_qubit", "write comparison.json and comparison.txt"};
  p.push_back("output directory: " + out);
  return p;
}

Outcome run_bands(const json& s, const fs::path& dir) {
  const DeviceLayout l = resolve_layout(s);
  const UnitCell& cell = find_role(l, s["cell"].get<std::string>());
  const CellView view = s["view"] == "optical" ? CellView::optical : CellView::mechanical;
  BandOptions bo;
  bo.branches = s["branches"].get<int>();
  bo.spacing = s["spacing"].get<double>();
  bo.substrate = l.substrate;
  const int nk = s["k_points"].get<int>();
  std::vector<double> ks;
  for (int i = 0; i < nk; ++i) ks.push_back(constants::pi / cell.a * i / (nk - 1));
  const BandsTable t = band_structure(cell, ks, view, bo);
  CsvTable csv;
  csv.add_column("k", "1/m");
  for (int b = 0; b < bo.branches; ++b) csv.add_column("f_" + std::to_string(b), "Hz");
  if (!t.sound_line.empty()) csv.add_column("sound_line", "Hz");
  PlotData plot{"Band structure (" + s["view"].get<std::string>() + ")", "k a / pi", "f [GHz]", {}};
  const double fscale = view == CellView::optical ? constants::THz : constants::GHz;
  if (view == CellView::optical) plot.y_label = "f [THz]";
  plot.series.resize(static_cast<std::size_t>(bo.branches));
  for (std::size_t i = 0; i < t.k.size(); ++i) {
    std::vector<std::string> row{format_number(t.k[i])};
    for (int b = 0; b < bo.branches; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      const double f = bi < t.omega[i].size() ? constants::hertz(t.omega[i][bi].real()) : std::nan("");
      row.push_back(format_number(f));
      plot.series[bi].name = "branch " + std::to_string(b);
      plot.series[bi].x.push_back(t.k[i] * cell.a / constants::pi);
      plot.series[bi].y.push_back(f / fscale);
    }
    if (!t.sound_line.empty()) row.push_back(format_number(constants::hertz(t.sound_line[i])));
    csv.add_row(std::move(row));
  }
  if (!t.sound_line.empty()) {
    PlotSeries sl{"sound line", {}, {}};
    for (std::size_t i = 0; i < t.k.size(); ++i) {
      sl.x.push_back(t.k[i] * cell.a / constants::pi);
      sl.y.push_back(constants::hertz(t.sound_line[i]) / fscale);
    }
    plot.series.push_back(sl);
  }
  write_csv(csv, dir / "bands.csv");
  emit_plot(plot, PlotKind::bands, dir / "plots" / "bands.svg");
  json x_point = json::array();
  for (const auto& w : t.omega.back()) x_point.push_back(constants::hertz(w.real()));
  return {{{"cell", s["cell"]}, {"a_m", cell.a}, {"x_point_f_Hz", x_point}, {"sound_velocity", t.sound_velocity}},
          {"bands.csv", "plots/bands.svg"}};
}

Outcome run_modes(const json& s, const fs::path& dir) {
  const DeviceLayout l = resolve_layout(s);
  const auto bands = make_bands(s);
  TransducerModeOptions mo;
  mo.mech_modes = s["mech_modes"].get<int>();
  const TransducerModes tm = transducer_modes(l.cells(), *bands, mo);
  std::set<std::string> tags;
  for (const auto& m : tm.mech_modes)
    for (const auto& [k, v] : m.participations) tags.insert(k);
  CsvTable csv;
  csv.add_column("mode");
  csv.add_column("f", "Hz");
  csv.add_column("Q");
  csv.add_column("g_om", "Hz");
  csv.add_column("g_em", "Hz");
  for (const auto& t : tags) csv.add_column("p_" + t);
  for (std::size_t i = 0; i < tm.mech_modes.size(); ++i) {
    const auto& m = tm.mech_modes[i];
    std::vector<std::string> row{std::to_string(i), format_number(m.frequency_hz()), format_number(m.q()),
                                 format_number(constants::hertz(tm.g_om[i])),
                                 format_number(constants::hertz(tm.g_em[i]))};
    for (const auto& t : tags) {
      const auto it = m.participations.find(t);
      row.push_back(format_number(it == m.participations.end() ? 0.0 : it->second));
    }
    csv.add_row(std::move(row));
  }
  write_csv(csv, dir / "modes.csv");
  PlotData plot{"Envelopes", "cell index", "|amplitude|^2", {}};
  PlotSeries po{"optical", {}, {}};
  for (Eigen::Index n = 0; n < tm.optical.envelope.size(); ++n) {
    po.x.push_back(static_cast<double>(n));
    po.y.push_back(std::norm(tm.optical.envelope(n)));
  }
  plot.series.push_back(po);
  json summary{{"band_source", bands->name()},
               {"heuristic_loss", bands->heuristic_loss()},
               {"optical_f_Hz", tm.optical.frequency_hz()},
               {"optical_Q", tm.optical.q()},
               {"best_g_om_mode", tm.best_g_om}};
  if (tm.best_g_om >= 0) {
    const auto b = static_cast<std::size_t>(tm.best_g_om);
    PlotSeries pm{"mechanical (highest g_om)", {}, {}};
    for (Eigen::Index n = 0; n < tm.mech_modes[b].envelope.size(); ++n) {
      pm.x.push_back(static_cast<double>(n));
      pm.y.push_back(std::norm(tm.mech_modes[b].envelope(n)));
    }
    plot.series.push_back(pm);
    summary["best_f_m_Hz"] = tm.mech_modes[b].frequency_hz();
    summary["best_g_om_Hz"] = constants::hertz(tm.g_om[b]);
    summary["best_g_em_Hz"] = constants::hertz(tm.g_em[b]);
  }
  emit_plot(plot, PlotKind::line, dir / "plots" / "envelopes.svg");
  return {summary, {"modes.csv", "plots/envelopes.svg"}};
}

Outcome run_saw(const json& s, const fs::path& dir) {
  const MaterialRecord& m = builtin_material(s["material"].get<std::string>());
  SawOptions so;
  so.depth_wavelengths = s["depth_wavelengths"].get<double>();
  so.nodes_per_wavelength = s["nodes_per_wavelength"].get<int>();
  so.surface_only = s["surface_only"].get<bool>();
  const double k = constants::two_pi / s["wavelength"].get<double>();
  const SawSweep sw = saw_sweep(m, s["alpha_steps"].get<int>(), k, so);
  CsvTable csv;
  csv.add_column("alpha", "rad");
  csv.add_column("velocity", "m/s");
  PlotData plot{"Sound velocity of " + s["material"].get<std::string>(), "alpha [deg]", "v [m/s]", {}};
  PlotSeries ps{"v", {}, {}};
  for (std::size_t i = 0; i < sw.alpha.size(); ++i) {
    csv.add_row({format_number(sw.alpha[i]), format_number(sw.velocity[i])});
    ps.x.push_back(sw.alpha[i] * 180.0 / constants::pi);
    ps.y.push_back(sw.velocity[i]);
  }
  plot.series.push_back(ps);
  write_csv(csv, dir / "saw.csv");
  emit_plot(plot, PlotKind::line, dir / "plots" / "velocity.svg");
  return {{{"material", s["material"]}, {"v_min", sw.v_min}, {"v_max", sw.v_max}, {"alpha_min_rad", sw.alpha_min}},
          {"saw.csv", "plots/velocity.svg"}};
}

Outcome run_couple(const json& s, const fs::path& dir) {
  const DeviceLayout l = resolve_layout(s);
  const UnitCell& cell = find_role(l, s["cell"].get<std::string>());
  CouplingReport rep;
  if (s["model"] == "emc") {
    EmcCouplingOptions eo;
    eo.C_mu = s["C_mu"].get<double>();
    eo.omega_mu = constants::angular(s["f_mu"].get<double>());
    eo.target_hz = s["mech_target_hz"].get<double>();
    const EmcCoupling ec = emc_cell_coupling(cell, eo);
    rep = ec.report;
    if (rep.C_idt) {
      const double w_mu = eo.omega_mu > 0.0 ? eo.omega_mu : constants::angular(ec.frequency_hz);
      const MicrowaveQuantities mq = microwave_quantities(*rep.C_idt, eo.C_mu, w_mu, s["tan_delta"].get<double>());
      rep.Z_mu = mq.Z_mu;
      rep.kappa_ln = mq.kappa_ln;
    }
  } else {
    UnitCellCouplingOptions uo;
    uo.spacing = s["spacing"].get<double>();
    uo.mech_target_hz = s["mech_target_hz"].get<double>();
    uo.propagation = s["propagation"] == "co" ? Propagation::co : Propagation::counter;
    rep = unit_cell_coupling(cell, uo);
  }
  const json j = rep.to_json();
  write_json(j, dir / "coupling.json");
  return {j, {"coupling.json"}};
}

Outcome run_metrics(const json& s, const fs::path& dir) {
  const TransducerParams p = TransducerParams::from_json(s);
  const TransducerMetrics m = compute_metrics(p);
  json j = m.to_json();
  j["params"] = p.to_json();
  write_json(j, dir / "metrics.json");
  return {j, {"metrics.json"}};
}

Outcome run_optimize(const json& s, const fs::path& dir) {
  const DeviceLayout l = resolve_layout(s);
  const auto bands = make_bands(s);
  ObjectiveSpec spec;
  spec.omc_only = s["omc_only"].get<bool>();
  spec.robust = s["robust"].get<bool>();
  spec.robust_scale = s["robust_scale"].get<double>();
  spec.starts = s["starts"].get<int>();
  spec.seed = s["seed"].get<std::uint64_t>();
  spec.min_feature = s["min_feature"].get<double>();
  spec.Qo_max = s["Qo_max"].get<double>();
  spec.Qm_max = s["Qm_max"].get<double>();
  spec.mech_modes = s["mech_modes"].get<int>();
  spec.validate();
  auto names = s["params"].get<std::vector<std::string>>();
  if (names.empty()) names = default_design_parameters(l, spec.omc_only);
  const DesignVector dv = design_from_layout(l, names, s["rel_range"].get<double>());
  const OptimizationReport rep = optimize_design(l, dv, *bands, spec, s["budget"].get<int>());
  json j = rep.to_json();
  j.erase("trace");
  CsvTable csv;
  csv.add_column("eval");
  csv.add_column("start");
  for (const auto& p : dv.params) csv.add_column(p.name, "m");
  csv.add_column("f");
  csv.add_column("f_obj");
  csv.add_column("best_f");
  csv.add_column("violations");
  PlotData plot{"Optimization trace", "evaluation", "best -f", {}};
  PlotSeries ps{"best so far", {}, {}};
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : rep.trace) {
    best = std::min(best, r.f);
    std::vector<std::string> row{std::to_string(r.eval), std::to_string(r.start)};
    for (double x : r.x) row.push_back(format_number(x));
    std::string v;
    if (r.bounds_violated) v += "bounds;";
    if (r.feature_violated) v += "feature;";
    if (r.window_violated) v += "window;";
    row.push_back(format_number(r.f));
    row.push_back(format_number(r.f_obj));
    row.push_back(format_number(best));
    row.push_back(v);
    csv.add_row(std::move(row));
    ps.x.push_back(r.eval);
    ps.y.push_back(best);
  }
  plot.series.push_back(ps);
  write_json(j, dir / "optimization.json");
  write_json(layout_to_json(rep.layout), dir / "layout.json");
  write_csv(csv, dir / "trace.csv");
  emit_plot(plot, PlotKind::line, dir / "plots" / "trace.svg");
  return {{{"f_obj0", rep.f_obj0}, {"f_obj_best", rep.f_obj_best}, {"evals", rep.evals}, {"x_best", rep.x_best},
           {"parameters", names}, {"band_source", bands->name()}},
          {"optimization.json", "layout.json", "trace.csv", "plots/trace.svg"}};
}

json run_disorder(const json& s, const fs::path& dir) {
  const DeviceLayout l = resolve_layout(s);
  const auto bands = make_bands(s);
  DisorderOptions o;
  o.sigmas = numbers(s["sigmas"]);
  o.samples = s["samples"].get<int>();
  o.seed = s["seed"].get<std::uint64_t>();
  o.g_em_min = constants::angular(s["g_em_min_hz"].get<double>());
  o.clamp_floor = s["clamp_floor"].get<double>();
  o.mech_modes = s["mech_modes"].get<int>();
  o.resamples = s["bootstrap"].get<int>();
  o.bootstrap_seed = s["bootstrap_seed"].get<std::uint64_t>();
  o.threads = s["threads"].get<int>();
  DisorderStudy st = disorder_study(l, *bands, o);
  finish_study(st.run, dir, "disorder", "", s);
  return st.run.summary;
}

json run_sweep(const std::string& kind, const json& s, const fs::path& dir) {
  const int threads = s["threads"].get<int>();
  StudyRun run;
  if (kind == "pml") {
    LeakySlab slab;
    slab.n_core = s["n_core"].get<double>();
    slab.n_clad = s["n_clad"].get<double>();
    slab.thickness = s["thickness"].get<double>();
    slab.order = s["order"].get<int>();
    slab.spacing = s["spacing"].get<double>();
    slab.gap = s["gap"].get<double>();
    slab.R_0 = s["R_0"].get<double>();
    std::vector<double> A = log_space(s["A_min"].get<double>(), s["A_max"].get<double>(), s["A_points"].get<int>());
    if (s["include_zero"].get<bool>()) A.insert(A.begin(), 0.0);
    std::vector<double> R;
    for (double d : numbers(s["pml_depth"])) R.push_back(slab.R_start() + d);
    run = pml_sweep(slab, A, R, threads).run;
  } else if (kind == "mesh") {
    const MeshProblem p = s["problem"] == "slab" ? slab_problem() : rod_problem();
    run = mesh_convergence(p, s["resolutions"].get<std::vector<int>>()).run;
  } else if (kind == "tuning") {
    const DeviceLayout l = resolve_layout(s);
    const UnitCell& cell = find_role(l, s["cell"].get<std::string>());
    std::vector<double> hx, hy, a;
    for (double d : numbers(s["hx_offsets"])) hx.push_back(cell.hx() + d);
    for (double d : numbers(s["hy_offsets"])) hy.push_back(cell.hy() + d);
    for (double d : numbers(s["a_offsets"])) a.push_back(cell.a + d);
    TuningOptions to;
    to.spacing = s["spacing"].get<double>();
    to.mech_target_hz = s["mech_target_hz"].get<double>();
    to.threads = threads;
    run = tuning_map(cell, hx, hy, a, to).run;
  } else if (kind == "oxide") {
    OxideOptions oo;
    oo.film = s["film"].get<std::string>();
    oo.film_thickness = s["film_thickness"].get<double>();
    oo.interlayer = s["interlayer"].get<std::string>();
    oo.substrate = s["substrate"].get<std::string>();
    oo.spacing = s["spacing"].get<double>();
    run = oxide_sweep(numbers(s["thickness"]), oo).run;
  } else {
    const DeviceLayout l = resolve_layout(s);
    const auto bands = make_bands(s);
    EmcSweepOptions eo;
    eo.modes = s["modes"].get<int>();
    eo.cut_tag = s["cut_tag"].get<std::string>();
    run = emc_period_study(l, numbers(s["scales"]), *bands, eo);
  }
  finish_study(run, dir, "sweep", kind, s);
  return run.summary;
}

Outcome run_compare(const json& s, const fs::path& dir) {
  std::string table = s["table"].get<std::string>();
  if (table.empty()) table = (data_dir() / "comparison" / "literature_comparison.csv").string();
  const ComparisonReport rep = ingest_comparison(table, s["threshold"].get<double>());
  const json j = rep.to_json();
  write_json(j, dir / "comparison.json");
  write_text(rep.text_table(), dir / "comparison.txt");
  return {j, {"comparison.json", "comparison.txt"}};
}

// Flag storage for one subcommand: one string per settings key plus bools.
struct FlagSet {
  std::map<std::string, std::string> text;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::Option*> opts;
  json types;  // key -> default value (type template)
};

void add_setting_flags(CLI::App* sub, FlagSet& fs, const json& defaults) {
  for (auto it = defaults.begin(); it != defaults.end(); ++it) {
    const std::string& key = it.key();
    if (fs.opts.count(key) || it.value().is_null()) continue;
    fs.types[key] = it.value();
    const std::string name = flag_name(key);
    CLI::Option* o = nullptr;
    if (it.value().is_boolean()) {
      fs.flags[key] = false;
      o = sub->add_flag(name, fs.flags[key], "boolean setting '" + key + "' (use " + name + "=false to disable)");
    } else {
      std::string help = "setting '" + key + "' (default " + it.value().dump() + ")";
      if (it.value().is_array()) help += ", comma-separated";
      o = sub->add_option(name, fs.text[key], help);
    }
    fs.opts[key] = o;
  }
}

json parse_flag_value(const std::string& key, const json& type, const std::string& text) {
  auto parse_num = [&](const std::string& t) -> json {
    try {
      std::size_t pos = 0;
      if (type.is_number_integer() || (type.is_array() && !type.empty() && type.front().is_number_integer())) {
        const long long v = std::stoll(t, &pos);
        if (pos != t.size()) throw std::invalid_argument(t);
        return v;
      }
      const double v = std::stod(t, &pos);
      if (pos != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("flag " + flag_name(key) + ": '" + t + "' is not a number");
    }
  };
  if (type.is_array()) {
    json arr = json::array();
    const bool numeric = !type.empty() && type.front().is_number();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) arr.push_back(numeric ? parse_num(item) : json(item));
    return arr;
  }
  if (type.is_number()) return parse_num(text);
  return text;
}

int execute(const std::string& command, std::string kind, const std::string& run_path, bool dry_run,
            const FlagSet& fs, std::ostream& out) {
  RunFile rf;
  if (!run_path.empty()) {
    rf = RunFile::load(run_path);
    if (!rf.command.empty() && rf.command != command)
      throw ValidationError("run file is for command '" + rf.command + "', not '" + command + "'");
  }
  if (command == "sweep") {
    if (kind.empty()) kind = rf.kind;
    if (kind.empty()) throw ValidationError("sweep: kind required (pml, mesh, tuning, oxide, emc-period)");
    if (!rf.kind.empty() && rf.kind != kind)
      throw ValidationError("run file is for sweep kind '" + rf.kind + "', not '" + kind + "'");
  }
  const json defaults = default_settings(command, kind);
  json overrides = json::object();
  for (const auto& [key, opt] : fs.opts) {
    if (opt->count() == 0) continue;
    if (!defaults.contains(key))
      throw ValidationError("flag " + flag_name(key) + " does not apply to " + run_name(command, kind));
    const json& type = fs.types.at(key);
    overrides[key] = type.is_boolean() ? json(fs.flags.at(key)) : parse_flag_value(key, type, fs.text.at(key));
  }
  const json s = resolve_settings(command, kind, rf.settings, overrides);
  const fs::path dir = s["output"].get<std::string>();
  if (dry_run) {
    json plan{{"command", command}, {"settings", s}, {"plan", plan_for(command, kind, s)}};
    if (!kind.empty()) plan["kind"] = kind;
    out << plan.dump(2) << "\n";
    return 0;
  }
  fs::create_directories(dir);
  json summary;
  if (command == "disorder") {
    summary = run_disorder(s, dir);
  } else if (command == "sweep") {
    summary = run_sweep(kind, s, dir);
  } else {
    Outcome o;
    if (command == "bands") o = run_bands(s, dir);
    else if (command == "modes") o = run_modes(s, dir);
    else if (command == "saw") o = run_saw(s, dir);
    else if (command == "couple") o = run_couple(s, dir);
    else if (command == "metrics") o = run_metrics(s, dir);
    else if (command == "optimize") o = run_optimize(s, dir);
    else o = run_compare(s, dir);
    write_run(dir, command, kind, s, o);
    summary = o.summary;
    if (command == "compare") {
      std::string table = s["table"].get<std::string>();
      if (table.empty()) table = (data_dir() / "comparison" / "literature_comparison.csv").string();
      out << ingest_comparison(table, s["threshold"].get<double>()).text_table();
    }
  }
  if (command != "compare") out << summary.dump(2) << "\n";
  out << "wrote " << dir.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"phonox: optomechanical and electromechanical transducer design toolkit", "phonox"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(0, 1);

  std::string run_path, kind;
  bool dry_run = false;
  std::map<std::string, FlagSet> flagsets;
  std::map<std::string, CLI::App*> subs;
  const std::map<std::string, std::string> descriptions{
      {"bands", "unit-cell band structure"},
      {"modes", "envelope-model cavity modes of a device"},
      {"saw", "sound velocity versus in-plane angle"},
      {"couple", "unit-cell optomechanical or EMC electromechanical coupling"},
      {"metrics", "transducer figures of merit from rates"},
      {"optimize", "Nelder-Mead design optimization"},
      {"disorder", "disorder Monte Carlo"},
      {"sweep", "parameter sweeps: pml, mesh, tuning, oxide, emc-period"},
      {"compare", "recompute the literature comparison table"}};
  for (const auto& c : cli_commands()) {
    CLI::App* sub = app.add_subcommand(c, descriptions.at(c));
    sub->add_option("--run", run_path, "run file (JSON, schema " + std::string(kRunSchema) + ")");
    sub->add_flag("--dry-run", dry_run, "validate the configuration and print the plan");
    FlagSet& fs = flagsets[c];
    if (c == "sweep") {
      sub->add_option("kind", kind, "pml, mesh, tuning, oxide or emc-period")
          ->check(CLI::IsMember(sweep_kinds()));
      for (const auto& k : sweep_kinds()) add_setting_flags(sub, fs, default_settings(c, k));
    } else {
      add_setting_flags(sub, fs, default_settings(c));
    }
    subs[c] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return 1;
  }
  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;
  if (command.empty()) {
    err << app.help();
    return 1;
  }
  try {
    return execute(command, kind, run_path, dry_run, flagsets.at(command), out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what();
    if (e.best_residual() >= 0.0) err << " (best residual " << e.best_residual() << ")";
    err << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace phonox
