#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace phonox {

/// One patterned film of the device stack. Ellipse axes and width are the
/// tabulated values at the top of this film.
struct Layer {
  std::string material;
  double thickness = 0.0;
  double hx = 0.0;
  double hy = 0.0;
  double w = 0.0;

  bool operator==(const Layer&) const = default;
};

struct ElectrodeSpec {
  int count = 0;
  double width = 0.0;
  double thickness = 0.0;
  std::string material = "al";

  bool operator==(const ElectrodeSpec&) const = default;
};

/// Unit cell of the beam. The cell-level hx/hy/w mirror the top layer (the
/// numbers quoted in the parameter tables); every layer shares the period a.
/// The layer list runs bottom-up from the substrate interface.
struct UnitCell {
  std::string role;  // band-table role, e.g. "omc_defect"
  // Inside a transition: role of the far endpoint and the smooth-step weight
  // towards it (0 for region-defining cells).
  std::string role_to;
  double blend = 0.0;
  double a = 0.0;
  std::vector<Layer> stack;
  double hole_sidewall_deg = 0.0;
  double edge_sidewall_deg = 0.0;
  std::optional<ElectrodeSpec> electrodes;
  double misalignment_buffer = 0.0;

  double hx() const { return stack.back().hx; }
  double hy() const { return stack.back().hy; }
  double w() const { return stack.back().w; }
  /// Sets the ellipse of every layer, keeping per-layer offsets relative to the top layer.
  void set_ellipse(double hx, double hy);
  const Layer* find_layer(const std::string& material) const;
  bool has_layer(const std::string& material) const { return find_layer(material) != nullptr; }
  /// Copy without the named film (the remaining films keep their own geometry).
  UnitCell without_layer(const std::string& material) const;

  void validate() const;
  bool operator==(const UnitCell&) const = default;
};

/// Mid-thickness dimensions of one film after projecting the sidewall angles,
/// used by the 2D cross-section and top-view solvers.
struct EffectiveLayer {
  std::string material;
  double thickness;
  double hx, hy, w;
};
std::vector<EffectiveLayer> effective_layers(const UnitCell& c);

enum class Profile { uniform, smoothstep, taper };

std::string to_string(Profile p);
Profile profile_from_string(const std::string& s);

/// Either a block of `count` identical cells (uniform, start == end) or a
/// transition of `count` interior cells strictly between start and end.
struct Region {
  std::string name;
  std::string tag;  // OMC, partial-mirror, taper, EMC, mirror
  UnitCell start;
  UnitCell end;
  int count = 1;
  Profile profile = Profile::uniform;
};

struct DeviceLayout {
  std::string name;
  std::string substrate = "sapphire";
  std::vector<Region> regions;

  /// Flattened cell chain with one region tag per cell.
  struct Cell {
    UnitCell cell;
    std::string tag;
    std::string region;
  };
  std::vector<Cell> cells() const;
  int cell_count() const;
  void validate() const;
};

struct DisorderSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
  double clamp_floor = 10e-9;
};

/// Cubic smooth-step s(t) = 3t^2 - 2t^3.
double smoothstep(double t);

/// n cells from c0 to c1 (inclusive) with every scalar following the
/// smooth-step. Throws ValidationError for n < 2 or mismatched stacks.
std::vector<UnitCell> interpolate_cells(const UnitCell& c0, const UnitCell& c1, int n);

/// Like interpolate_cells, but the top film's h_x follows taper_hx of its h_y
/// in the interior cells; endpoints are returned exactly.
std::vector<UnitCell> interpolate_taper(const UnitCell& c0, const UnitCell& c1, int n);

struct TaperPolynomial {
  // coefficients in rising order, h in nm
  double c0 = -1271.0, c1 = 9.365, c2 = -0.01875, c3 = 1.238e-5;
  double lo_nm = 321.0, hi_nm = 675.0;
};

/// LN taper law h_x(h_y); lengths in metres. Out-of-range inputs are
/// evaluated but set *out_of_range when provided.
double taper_hx(double hy, const TaperPolynomial& p = {}, bool* out_of_range = nullptr);

/// Named preset from the shipped device files: sOMC-transducer,
/// lOMC-transducer, sOMC-only, EMC-only.
DeviceLayout device_preset(const std::string& name);
std::vector<std::string> device_preset_names();

/// Each ellipse (h_x, h_y of the cell, applied to all films through the hole)
/// perturbed by independent N(0, sigma^2) draws from a generator seeded with spec.seed.
DeviceLayout apply_disorder(const DeviceLayout& layout, const DisorderSpec& spec);
/// Disorder applied to an already flattened chain.
std::vector<DeviceLayout::Cell> apply_disorder(const std::vector<DeviceLayout::Cell>& cells,
                                               const DisorderSpec& spec);

nlohmann::json cell_to_json(const UnitCell& c);
UnitCell cell_from_json(const nlohmann::json& j);
nlohmann::json layout_to_json(const DeviceLayout& l);
DeviceLayout layout_from_json(const nlohmann::json& j);

}  // namespace phonox
