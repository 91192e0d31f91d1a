#pragma once

#include "phonox/envelope.hpp"
#include "phonox/geometry.hpp"
#include "phonox/io.hpp"

#include <json.hpp>

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace phonox {

struct StudyPlot {
  std::string file;  // relative to plots/
  PlotData data;
  PlotKind kind = PlotKind::line;
};

/// Persisted study: run.json (config, metadata, summary), results.csv and plots/*.svg.
struct StudyRun {
  std::string kind;
  nlohmann::json config;
  nlohmann::json summary;
  CsvTable results;
  std::vector<StudyPlot> plots;
  /// Columns holding wall-clock times (excluded from payload()).
  std::vector<std::string> timing_columns;
  double wall_time = 0.0;  // s, stored under "timing" in run.json

  std::string config_hash() const;
  nlohmann::json run_json() const;
  /// run.json plus results.csv without timing columns: equal for reruns.
  std::string payload() const;
  void write(const std::filesystem::path& dir) const;
};

/// Worker count: threads > 0 as given, otherwise the available parallelism.
int resolve_threads(int threads);
/// Runs fn(0..n-1) on up to `threads` workers; fn must not throw.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

struct SampleStats {
  int n = 0;
  double median = 0.0, q1 = 0.0, q3 = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // bootstrap 95% interval of the median
};
/// Median, quartiles (linear interpolation) and a percentile-bootstrap
/// interval of the median with a fixed resample seed.
SampleStats sample_stats(std::vector<double> v, int resamples = 1000, std::uint64_t seed = 7);

/// Trend check: a violation is an increase whose bootstrap intervals do not overlap
/// (ci_lo of the later point above ci_hi of the earlier one).
struct TrendCheck {
  bool non_increasing = true;
  std::vector<std::string> violations;
};
TrendCheck check_non_increasing(const std::vector<double>& x, const std::vector<SampleStats>& s);

// ---------------------------------------------------------------------------
// Disorder

struct DisorderOptions {
  std::vector<double> sigmas{0.0, 1e-9, 2e-9, 4e-9};
  int samples = 30;
  std::uint64_t seed = 1000;      // sample k uses seed + k at every sigma
  double g_em_min = 2.0 * 3.141592653589793 * 1e6;  // rad/s, filtered dataset
  double clamp_floor = 10e-9;
  int mech_modes = 12;
  int resamples = 1000;
  std::uint64_t bootstrap_seed = 7;
  int threads = 0;

  nlohmann::json to_json() const;
};

struct DisorderSample {
  double sigma = 0.0;
  int sample = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  // highest-g_om mode (rates rad/s, frequencies Hz)
  double g_om = 0.0, g_em = 0.0, f_m = 0.0, Q_m = 0.0, f_o = 0.0, Q_o = 0.0;
  // highest-g_om mode among those with g_em >= g_em_min
  bool has_filtered = false;
  double gf_om = 0.0, gf_em = 0.0, ff_m = 0.0;
};

struct DisorderStudy {
  StudyRun run;
  std::vector<DisorderSample> samples;
  std::vector<double> sigmas;
  std::vector<SampleStats> g_om, g_om_filtered, g_em;  // per sigma, g in rad/s
  std::vector<int> reported, skipped;
};

DisorderStudy disorder_study(const DeviceLayout& layout, const BandSource& bands, const DisorderOptions& opts = {});

// ---------------------------------------------------------------------------
// PML

/// Symmetric dielectric slab in a uniform cladding at normal incidence: the
/// leaky Fabry-Perot resonance of the given longitudinal order.
struct LeakySlab {
  double n_core = 3.48;
  double n_clad = 1.0;
  double thickness = 2.5e-6;
  int order = 11;
  double spacing = 10e-9;
  double gap = 1e-6;   // cladding between slab face and R_start
  double R_0 = 1e-6;

  void validate() const;
  double R_start() const { return 0.5 * thickness + gap; }
  /// Real resonance m pi c / (n_core d), rad/s.
  double nominal_omega() const;
  nlohmann::json to_json() const;
};

/// Complex resonance of a layer stack between two half-spaces of index n_out
/// with outgoing waves only, from the transfer matrix (secant iteration on
/// the incoming-wave amplitude). Layers are (index, thickness).
std::complex<double> transfer_matrix_resonance(const std::vector<std::pair<double, double>>& layers, double n_out,
                                               std::complex<double> omega_guess);
double transfer_matrix_q(const LeakySlab& s);

/// Tracked resonance (nearest Re omega to the nominal one) of the slab with
/// PML parameters A and R_sim; A = 0 gives Q = +inf.
std::complex<double> leaky_slab_resonance(const LeakySlab& s, double A, double R_sim);

struct Plateau {
  bool found = false;
  int first = -1, last = -1;     // index range into the sweep
  double A_lo = 0.0, A_hi = 0.0;
  double Q = 0.0;                // median Q over the interval
};
/// Widest contiguous run of finite Q (A > 0) whose max/min ratio stays below
/// `factor`; ties go to the run with the smaller A. Needs at least 2 points.
Plateau detect_plateau(const std::vector<double>& A, const std::vector<double>& Q, double factor = 2.0);

struct PmlSweep {
  StudyRun run;
  std::vector<double> A, R_sim;
  std::vector<std::vector<double>> Q;       // [R_sim][A]
  std::vector<std::vector<double>> f_hz;    // [R_sim][A]
  std::vector<Plateau> plateaus;            // per R_sim
  double oracle_q = 0.0;
};
PmlSweep pml_sweep(const LeakySlab& slab, const std::vector<double>& A, const std::vector<double>& R_sim,
                   int threads = 0);
/// Log-spaced A values from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, int n);

// ---------------------------------------------------------------------------
// Mesh convergence

struct MeshPoint {
  int resolution = 0;
  double h = 0.0;      // characteristic spacing, m
  double omega = 0.0;  // rad/s
  std::optional<double> coupling;
  double wall_time = 0.0;
};

struct MeshProblem {
  std::string name;
  std::function<MeshPoint(int)> solve;
  std::optional<double> exact;  // rad/s
  nlohmann::json config;
};

/// Longitudinal fundamental of a fixed-free rod (resolution = elements along
/// the rod); exact omega = pi v_L / (2 L).
MeshProblem rod_problem(double length = 1e-6, double v_longitudinal = 8000.0, double density = 2330.0);
/// Fundamental TE mode of a dielectric slab at fixed k (resolution = elements
/// across the core); coupling = moving-boundary shift rate of both faces.
MeshProblem slab_problem(double thickness = 220e-9, double n_core = 3.48, double n_clad = 1.45,
                         double k = 2.8 * 2.0 * 3.141592653589793 / 1.55e-6);

struct MeshConvergence {
  StudyRun run;
  std::vector<MeshPoint> points;
  double order = 0.0;       // from the three finest points
  double limit = 0.0;       // Richardson extrapolation
  bool cauchy = false;      // |w_{i+1} - w_i| strictly decreasing
  std::optional<double> coupling_variation;  // relative, two finest points
};
MeshConvergence mesh_convergence(const MeshProblem& problem, const std::vector<int>& resolutions);

// ---------------------------------------------------------------------------
// Tuning map

struct TuningOptions {
  double spacing = 20e-9;
  double mech_target_hz = 5e9;
  int threads = 0;
};
struct TuningPoint {
  double a = 0.0, hx = 0.0, hy = 0.0;
  bool ok = false;
  std::string error;
  double f_m = 0.0;    // breathing mode at k = pi/a, Hz
  double f_o = 0.0;    // optical at k = pi/a, Hz
  double g_om = 0.0;   // rad/s, counter-propagating k_m = 2 k_o = pi/a
};
struct TuningMap {
  StudyRun run;
  std::vector<double> a, hx, hy;
  std::vector<TuningPoint> points;  // index (ia * hx.size() + ix) * hy.size() + iy
  const TuningPoint& at(std::size_t ia, std::size_t ix, std::size_t iy) const {
    return points[(ia * hx.size() + ix) * hy.size() + iy];
  }
};
TuningMap tuning_map(const UnitCell& base, const std::vector<double>& hx, const std::vector<double>& hy,
                     const std::vector<double>& a, const TuningOptions& opts = {});

// ---------------------------------------------------------------------------
// Oxide interlayer

struct OxideOptions {
  std::string film = "si";
  double film_thickness = 220e-9;
  std::string interlayer = "sio2";
  std::string substrate = "sapphire";
  double k_optical = 2.85 * 2.0 * 3.141592653589793 / 1.55e-6;  // rad/m
  double k_mechanical = 0.0;   // 0 = 2 k_optical (counter-propagating phase matching)
  double spacing = 5e-9;
  double substrate_depth = 1.5e-6;
  double air_above = 1.0e-6;
};
struct OxidePoint {
  double thickness = 0.0;
  double f_o = 0.0, f_m = 0.0;  // Hz
  double g_mb = 0.0, g_pe = 0.0;  // rad/s, per unit lateral width of the line grid
};
struct OxideSweep {
  StudyRun run;
  std::vector<OxidePoint> points;
};
OxideSweep oxide_sweep(const std::vector<double>& thickness, const OxideOptions& opts = {});

// ---------------------------------------------------------------------------
// EMC period sweep

StudyRun emc_period_study(const DeviceLayout& layout, const std::vector<double>& scales, const BandSource& bands,
                          const EmcSweepOptions& opts = {});

}  // namespace phonox
