#include "phonox/materials.hpp"

#include "phonox/constants.hpp"
#include "phonox/error.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>

namespace phonox {

using nlohmann::json;

namespace {

template <int R, int C>
Eigen::Matrix<double, R, C> matrix_from_json(const json& j, const char* what, double scale = 1.0) {
  Eigen::Matrix<double, R, C> m;
  if (!j.is_array() || j.size() != R) throw ValidationError(std::string("bad shape for ") + what);
  for (int r = 0; r < R; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || row.size() != C) throw ValidationError(std::string("bad shape for ") + what);
    for (int c = 0; c < C; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>() * scale;
  }
  return m;
}

template <typename M>
json matrix_to_json(const M& m, double scale = 1.0) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c) / scale);
    rows.push_back(row);
  }
  return rows;
}

bool is_spd(const Mat3& m) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * m.cwiseAbs().maxCoeff()) return false;
  Eigen::LLT<Mat3> llt(m);
  return llt.info() == Eigen::Success;
}

CrystalOrientation orientation_from_json(const json& j) {
  if (j.contains("rows")) return CrystalOrientation(matrix_from_json<3, 3>(j.at("rows"), "orientation rows"));
  CrystalOrientation o;
  if (j.contains("rotations")) {
    for (const auto& step : j.at("rotations")) {
      const std::string axis = step.at("axis").get<std::string>();
      const int a = axis == "x" ? 0 : axis == "y" ? 1 : axis == "z" ? 2 : -1;
      if (a < 0) throw ValidationError("orientation axis must be x, y or z");
      const double rad = step.at("deg").get<double>() * constants::pi / 180.0;
      o = CrystalOrientation::compose(CrystalOrientation::about_axis(a, rad), o);
    }
  }
  return o;
}

}  // namespace

double MaterialRecord::mean_optical_index() const {
  Eigen::SelfAdjointEigenSolver<Mat3> es(permittivity_optical);
  const Vec3 ev = es.eigenvalues();
  return (std::sqrt(ev(0)) + std::sqrt(ev(1)) + std::sqrt(ev(2))) / 3.0;
}

void MaterialRecord::validate() const {
  if (!(density > 0.0)) throw ValidationError("material '" + name + "': density must be positive");
  if ((stiffness - stiffness.transpose()).cwiseAbs().maxCoeff() > 1e-9 * stiffness.cwiseAbs().maxCoeff())
    throw ValidationError("material '" + name + "': stiffness matrix is not symmetric");
  Eigen::LLT<Mat6> llt(stiffness);
  if (llt.info() != Eigen::Success) throw ValidationError("material '" + name + "': stiffness is not positive definite");
  if (!is_spd(permittivity_static))
    throw ValidationError("material '" + name + "': static permittivity is not symmetric positive definite");
  if (!is_spd(permittivity_optical))
    throw ValidationError("material '" + name + "': optical permittivity is not symmetric positive definite");
  if (loss_tangent < 0.0) throw ValidationError("material '" + name + "': negative loss tangent");
}

MaterialRecord rotate_material(const MaterialRecord& m, const CrystalOrientation& o) {
  if (o.is_identity()) return m;
  const Mat3& r = o.matrix();
  MaterialRecord out = m;
  out.stiffness = rotate_rank4_voigt(m.stiffness, r);
  out.photoelastic = rotate_rank4_voigt(m.photoelastic, r);
  out.piezo = rotate_rank3_voigt(m.piezo, r);
  out.permittivity_static = rotate_rank2(m.permittivity_static, r);
  out.permittivity_optical = rotate_rank2(m.permittivity_optical, r);
  // remove round-off asymmetry
  out.stiffness = 0.5 * (out.stiffness + out.stiffness.transpose()).eval();
  out.permittivity_static = 0.5 * (out.permittivity_static + out.permittivity_static.transpose()).eval();
  out.permittivity_optical = 0.5 * (out.permittivity_optical + out.permittivity_optical.transpose()).eval();
  return out;
}

MaterialRecord isotropic_material(std::string name, double density, double v_longitudinal, double v_shear,
                                  double optical_index) {
  MaterialRecord m;
  m.name = std::move(name);
  m.density = density;
  const double mu = density * v_shear * v_shear;
  const double c11 = density * v_longitudinal * v_longitudinal;
  const double lam = c11 - 2.0 * mu;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m.stiffness(i, j) = lam;
    m.stiffness(i, i) = c11;
    m.stiffness(i + 3, i + 3) = mu;
  }
  m.permittivity_optical = Mat3::Identity() * optical_index * optical_index;
  m.validate();
  return m;
}

MaterialRecord air() {
  MaterialRecord m;
  m.name = "air";
  m.density = 1.2;
  m.stiffness = Mat6::Identity();  // placeholder: air never carries elastic DOFs
  m.permittivity_static = Mat3::Identity() * constants::eps0;
  m.permittivity_optical = Mat3::Identity();
  return m;
}

MaterialRecord material_from_json(const json& j) {
  MaterialRecord m;
  m.name = j.at("name").get<std::string>();
  m.density = j.at("density").get<double>();
  if (j.contains("stiffness_GPa"))
    m.stiffness = matrix_from_json<6, 6>(j.at("stiffness_GPa"), "stiffness", 1e9);
  else
    m.stiffness = matrix_from_json<6, 6>(j.at("stiffness_Pa"), "stiffness");
  if (j.contains("piezo_C_per_m2")) m.piezo = matrix_from_json<3, 6>(j.at("piezo_C_per_m2"), "piezo");
  if (j.contains("permittivity_static_relative"))
    m.permittivity_static =
        matrix_from_json<3, 3>(j.at("permittivity_static_relative"), "permittivity_static", constants::eps0);
  if (j.contains("optical_index")) {
    const auto n = j.at("optical_index").get<std::vector<double>>();
    if (n.size() != 3) throw ValidationError("optical_index must list three principal indices");
    m.permittivity_optical = Vec3(n[0] * n[0], n[1] * n[1], n[2] * n[2]).asDiagonal();
  } else if (j.contains("permittivity_optical_relative")) {
    m.permittivity_optical = matrix_from_json<3, 3>(j.at("permittivity_optical_relative"), "permittivity_optical");
  }
  if (j.contains("photoelastic")) m.photoelastic = matrix_from_json<6, 6>(j.at("photoelastic"), "photoelastic");
  m.loss_tangent = j.value("loss_tangent", 0.0);
  m.validate();
  return m;
}

json material_to_json(const MaterialRecord& m) {
  json j;
  j["schema"] = "phonox.material/1";
  j["name"] = m.name;
  j["density"] = m.density;
  j["stiffness_GPa"] = matrix_to_json(m.stiffness, 1e9);
  j["piezo_C_per_m2"] = matrix_to_json(m.piezo);
  j["permittivity_static_relative"] = matrix_to_json(m.permittivity_static, constants::eps0);
  j["permittivity_optical_relative"] = matrix_to_json(m.permittivity_optical);
  j["photoelastic"] = matrix_to_json(m.photoelastic);
  j["loss_tangent"] = m.loss_tangent;
  return j;
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("PHONOX_DATA_DIR"); env != nullptr && *env != '\0') return env;
#ifdef PHONOX_DATA_DIR_DEFAULT
  return PHONOX_DATA_DIR_DEFAULT;
#else
  return "data";
#endif
}

namespace {

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

MaterialRecord load_crystal(const std::filesystem::path& path, CrystalOrientation* orientation) {
  const json j = read_json(path);
  MaterialRecord m = material_from_json(j);
  if (orientation != nullptr)
    *orientation = j.contains("orientation") ? orientation_from_json(j.at("orientation")) : CrystalOrientation();
  return m;
}

}  // namespace

MaterialRecord load_material_file(const std::filesystem::path& path) {
  CrystalOrientation o;
  MaterialRecord m = load_crystal(path, &o);
  return rotate_material(m, o);
}

const std::map<std::string, MaterialRecord>& builtin_library() {
  static std::map<std::string, MaterialRecord> lib;
  static std::once_flag once;
  std::call_once(once, [] {
    for (const char* n : {"si", "sapphire", "ln", "sio2", "al"})
      lib.emplace(n, load_material_file(data_dir() / "materials" / (std::string(n) + ".json")));
  });
  return lib;
}

const MaterialRecord& builtin_material(const std::string& name) {
  const auto& lib = builtin_library();
  const auto it = lib.find(name);
  if (it == lib.end()) throw ValidationError("unknown material preset '" + name + "'");
  return it->second;
}

MaterialRecord builtin_material_crystal_frame(const std::string& name) {
  const auto path = data_dir() / "materials" / (name + ".json");
  if (!std::filesystem::exists(path)) throw ValidationError("unknown material preset '" + name + "'");
  return load_crystal(path, nullptr);
}

}  // namespace phonox
