#pragma once

#include "phonox/tensor.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace phonox {

/// Anisotropic material constants of one crystal, expressed in some frame
/// (crystal frame in the data files, device frame after rotate_material).
/// Units: density kg/m^3, stiffness Pa, piezo C/m^2, static permittivity F/m,
/// optical permittivity relative, photoelastic dimensionless.
struct MaterialRecord {
  std::string name;
  double density = 0.0;
  Mat6 stiffness = Mat6::Zero();
  Mat36 piezo = Mat36::Zero();
  Mat3 permittivity_static = Mat3::Identity() * 8.8541878128e-12;
  Mat3 permittivity_optical = Mat3::Identity();
  Mat6 photoelastic = Mat6::Zero();
  double loss_tangent = 0.0;

  bool is_piezoelectric() const { return piezo.cwiseAbs().maxCoeff() > 0.0; }
  /// Isotropic average of the optical refractive index, sqrt(tr(eps_o)/3)
  /// averaged over the principal indices.
  double mean_optical_index() const;
  /// Throws ValidationError naming the first violated invariant.
  void validate() const;
};

/// Bond-free rotation: every tensor is expanded to full index form, rotated,
/// and contracted back. Density and loss tangent are unchanged.
MaterialRecord rotate_material(const MaterialRecord& m, const CrystalOrientation& o);

/// Isotropic solid from density and the two Lame-type velocities.
MaterialRecord isotropic_material(std::string name, double density, double v_longitudinal,
                                  double v_shear, double optical_index = 1.0);

/// A vacuum/air record for optics and electrostatics (no mechanics).
MaterialRecord air();

MaterialRecord material_from_json(const nlohmann::json& j);
nlohmann::json material_to_json(const MaterialRecord& m);

/// Directory holding the shipped data files. PHONOX_DATA_DIR overrides the
/// compiled-in default.
std::filesystem::path data_dir();

/// Loads a material file (crystal-frame tensors plus an orientation block) and
/// returns the record rotated into the device frame.
MaterialRecord load_material_file(const std::filesystem::path& path);

/// Device-frame presets: "si", "sapphire", "ln", "sio2", "al".
/// Loaded once from data_dir()/materials.
const std::map<std::string, MaterialRecord>& builtin_library();
const MaterialRecord& builtin_material(const std::string& name);

/// Crystal-frame (unrotated) variant of a builtin preset.
MaterialRecord builtin_material_crystal_frame(const std::string& name);

}  // namespace phonox
