#include "phonox/bands.hpp"
#include "phonox/cli.hpp"
#include "phonox/constants.hpp"
#include "phonox/coupling.hpp"
#include "phonox/envelope.hpp"
#include "phonox/error.hpp"
#include "phonox/geometry.hpp"
#include "phonox/metrics.hpp"
#include "phonox/optimize.hpp"
#include "phonox/version.hpp"

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace phonox;

namespace {

// JSON crosses the boundary as text; the Python side sees plain dicts.
py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }
nlohmann::json from_py(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

DeviceLayout layout_arg(const py::object& o) {
  if (py::isinstance<py::str>(o)) return device_preset(o.cast<std::string>());
  return layout_from_json(from_py(o));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "phonox core bindings";
  m.attr("__version__") = kVersion;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  m.def("material_names", [] {
    std::vector<std::string> names;
    for (const auto& [k, v] : builtin_library()) names.push_back(k);
    return names;
  });
  m.def("material", [](const std::string& name) { return to_py(material_to_json(builtin_material(name))); },
        py::arg("name"), "Device-frame material record as a dict.");

  m.def(
      "saw_velocity",
      [](const std::string& material, double alpha, double wavelength, double depth_wavelengths,
         int nodes_per_wavelength) {
        SawOptions o;
        o.depth_wavelengths = depth_wavelengths;
        o.nodes_per_wavelength = nodes_per_wavelength;
        return saw_velocity(builtin_material(material), alpha, constants::two_pi / wavelength, o);
      },
      py::arg("material"), py::arg("alpha") = 0.0, py::arg("wavelength") = 1e-6, py::arg("depth_wavelengths") = 4.0,
      py::arg("nodes_per_wavelength") = 60);
  m.def(
      "saw_sweep",
      [](const std::string& material, int steps, double wavelength) {
        const auto s = saw_sweep(builtin_material(material), steps, constants::two_pi / wavelength);
        py::dict d;
        d["alpha"] = s.alpha;
        d["velocity"] = s.velocity;
        d["v_min"] = s.v_min;
        d["v_max"] = s.v_max;
        d["alpha_min"] = s.alpha_min;
        return d;
      },
      py::arg("material"), py::arg("steps") = 32, py::arg("wavelength") = 1e-6);

  m.def("taper_hx", [](double hy) { return taper_hx(hy); }, py::arg("hy"), "LN taper law, metres.");
  m.def("device_preset_names", &device_preset_names);
  m.def("device_preset", [](const std::string& name) { return to_py(layout_to_json(device_preset(name))); });

  m.def(
      "microwave_quantities",
      [](double C_idt, double C_mu, double f_mu, double tan_delta) {
        const auto q = microwave_quantities(C_idt, C_mu, constants::two_pi * f_mu, tan_delta);
        py::dict d;
        d["Z_mu"] = q.Z_mu;
        d["kappa_ln_hz"] = constants::hertz(q.kappa_ln);
        return d;
      },
      py::arg("C_idt"), py::arg("C_mu"), py::arg("f_mu"), py::arg("tan_delta"));

  m.def(
      "compute_metrics",
      [](const py::dict& params) {
        return to_py(compute_metrics(TransducerParams::from_json(from_py(params))).to_json());
      },
      py::arg("params"), "Rates as /2pi values in Hz, keys as in the metrics command.");

  m.def(
      "anti_crossing",
      [](double w1, double w2, double g) {
        const auto a = anti_crossing(w1, w2, g);
        return py::make_tuple(a.omega_plus, a.omega_minus, a.p1_plus, a.p1_minus);
      },
      py::arg("omega1"), py::arg("omega2"), py::arg("g"));

  m.def(
      "chain_spectrum",
      [](int n, double omega_x, double tau, double gamma, bool ring) {
        std::vector<std::complex<double>> w;
        for (const auto& mode : cavity_spectrum(uniform_chain(n, omega_x, tau, gamma, ring))) w.push_back(mode.omega);
        return w;
      },
      py::arg("n"), py::arg("omega_x"), py::arg("tau"), py::arg("gamma") = 0.0, py::arg("ring") = false);

  m.def(
      "transducer_modes",
      [](const py::object& layout, int mech_modes) {
        TransducerModeOptions o;
        o.mech_modes = mech_modes;
        const auto r = transducer_modes(layout_arg(layout).cells(), AnchorBandTable::default_table(), o);
        py::dict d;
        d["f_o"] = r.optical.frequency_hz();
        d["Q_o"] = r.optical.q();
        std::vector<double> f, q, gom, gem;
        for (std::size_t i = 0; i < r.mech_modes.size(); ++i) {
          f.push_back(r.mech_modes[i].frequency_hz());
          q.push_back(r.mech_modes[i].q());
          gom.push_back(constants::hertz(r.g_om[i]));
          gem.push_back(constants::hertz(r.g_em[i]));
        }
        d["f_m"] = f;
        d["Q_m"] = q;
        d["g_om_hz"] = gom;
        d["g_em_hz"] = gem;
        d["best"] = r.best_g_om;
        return d;
      },
      py::arg("layout") = "sOMC-transducer", py::arg("mech_modes") = 12,
      "Envelope-model modes of a preset name or a layout dict.");

  m.def(
      "nelder_mead",
      [](const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x0, int max_evals) {
        NelderMeadOptions o;
        o.max_evals = max_evals;
        const auto r = nelder_mead(f, x0, o);
        py::dict d;
        d["x"] = r.x;
        d["f"] = r.f;
        d["evals"] = r.evals;
        d["stop"] = r.stop;
        std::vector<double> best;
        for (const auto& t : r.trace) best.push_back(t.best);
        d["best_trace"] = best;
        return d;
      },
      py::arg("f"), py::arg("x0"), py::arg("max_evals") = 2000);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> all{"phonox"};
        all.insert(all.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : all) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line; returns (exit code, stdout, stderr).");
}
