#include "phonox/envelope.hpp"

#include "phonox/bands.hpp"
#include "phonox/constants.hpp"
#include "phonox/error.hpp"
#include "phonox/materials.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>

namespace phonox {

using constants::angular;
using constants::pi;

std::string to_string(Chain c) { return c == Chain::mechanical ? "mechanical" : "optical"; }

namespace {

double get(const nlohmann::json& j, const char* key, double scale, double fallback = 0.0) {
  return j.contains(key) ? j.at(key).get<double>() * scale : fallback;
}

LocalBand mech_band_from_json(const nlohmann::json& j) {
  LocalBand b;
  b.omega_x = angular(get(j, "omega_x_GHz", constants::GHz));
  b.tau = angular(get(j, "tau_MHz", constants::MHz));
  b.gamma = angular(get(j, "gamma_MHz", constants::MHz));
  b.g_om_uc = angular(get(j, "g_om_uc_MHz", constants::MHz));
  b.g_em_cell = angular(get(j, "g_em_cell_MHz", constants::MHz));
  return b;
}

LocalBand opt_band_from_json(const nlohmann::json& j) {
  LocalBand b;
  b.omega_x = angular(get(j, "omega_x_THz", constants::THz));
  b.tau = angular(get(j, "tau_THz", constants::THz));
  b.gamma = angular(get(j, "gamma_MHz", constants::MHz));
  return b;
}

AnchorBandTable::Sensitivity sens_from_json(const nlohmann::json& j, double unit) {
  AnchorBandTable::Sensitivity s;
  const double per_nm = 1.0 / constants::nm;
  s.a = angular(get(j, "a_per_nm", unit)) * per_nm;
  s.hx = angular(get(j, "hx_per_nm", unit)) * per_nm;
  s.hy = angular(get(j, "hy_per_nm", unit)) * per_nm;
  s.w = angular(get(j, "w_per_nm", unit)) * per_nm;
  s.tau_a = get(j, "tau_a_rel_per_nm", per_nm);
  s.tau_hy = get(j, "tau_hy_rel_per_nm", per_nm);
  return s;
}

LocalBand mix(const LocalBand& x, const LocalBand& y, double s) {
  auto m = [s](double a, double b) { return (1.0 - s) * a + s * b; };
  return {m(x.omega_x, y.omega_x), m(x.tau, y.tau), m(x.gamma, y.gamma), m(x.g_om_uc, y.g_om_uc),
          m(x.g_em_cell, y.g_em_cell)};
}

}  // namespace

AnchorBandTable AnchorBandTable::from_json(const nlohmann::json& j) {
  AnchorBandTable t;
  t.name_ = j.value("name", std::string("anchor-table"));
  const auto& sens = j.at("sensitivity");
  t.mech_sens_ = sens_from_json(sens.at("mechanical"), constants::MHz);
  t.opt_sens_ = sens_from_json(sens.at("optical"), constants::GHz);
  for (const auto& [role, e] : j.at("roles").items()) {
    Anchor a;
    const auto& r = e.at("reference");
    a.ref = {r.at("a_nm").get<double>() * constants::nm, r.at("hx_nm").get<double>() * constants::nm,
             r.at("hy_nm").get<double>() * constants::nm, r.at("w_nm").get<double>() * constants::nm};
    a.mechanical = mech_band_from_json(e.at("mechanical"));
    a.optical = opt_band_from_json(e.at("optical"));
    if (a.mechanical.gamma < 0 || a.optical.gamma < 0) throw ValidationError("band table: negative loss for role " + role);
    t.anchors_[role] = a;
  }
  return t;
}

AnchorBandTable AnchorBandTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open band table " + path);
  nlohmann::json j;
  try {
    in >> j;
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("band table " + path + ": " + e.what());
  }
}

const AnchorBandTable& AnchorBandTable::default_table() {
  static std::once_flag once;
  static AnchorBandTable table;
  std::call_once(once, [] { table = load((data_dir() / "bands" / "default_band_table.json").string()); });
  return table;
}

const AnchorBandTable::Anchor& AnchorBandTable::anchor(const std::string& role) const {
  auto it = anchors_.find(role);
  if (it == anchors_.end()) throw ValidationError("band table has no role '" + role + "'");
  return it->second;
}

std::optional<LocalBand> AnchorBandTable::predict(const std::string& role, const UnitCell& c, Chain chain) const {
  auto it = anchors_.find(role);
  if (it == anchors_.end()) return std::nullopt;
  const Anchor& an = it->second;
  const Sensitivity& s = sensitivity(chain);
  LocalBand b = chain == Chain::mechanical ? an.mechanical : an.optical;
  const double da = c.a - an.ref.a, dhx = c.hx() - an.ref.hx, dhy = c.hy() - an.ref.hy, dw = c.w() - an.ref.w;
  b.omega_x += s.a * da + s.hx * dhx + s.hy * dhy + s.w * dw;
  b.tau *= std::max(0.2, 1.0 + s.tau_a * da + s.tau_hy * dhy);
  return b;
}

std::optional<LocalBand> AnchorBandTable::band(const UnitCell& cell, Chain chain) const {
  auto b0 = predict(cell.role, cell, chain);
  if (!b0) return std::nullopt;
  if (cell.role_to.empty() || cell.blend == 0.0) return b0;
  auto b1 = predict(cell.role_to, cell, chain);
  if (!b1) return std::nullopt;
  return mix(*b0, *b1, cell.blend);
}

std::optional<LocalBand> SolverBandSource::band(const UnitCell& cell, Chain chain) const {
  const std::string key = to_string(chain) + cell_to_json(cell).dump();
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const CellView view = chain == Chain::mechanical ? CellView::mechanical : CellView::optical;
  const double kx = pi / cell.a, k1 = (1.0 - dk_) * pi / cell.a;
  auto at_x = cell_modes(cell, kx, view, 8);
  auto near = cell_modes(cell, k1, view, 8);
  LocalBand b;
  double w1 = 0.0;
  if (chain == Chain::mechanical) {
    const ModeField& m = select_breathing_mode(at_x);
    b.omega_x = m.omega.real();
    double best = INFINITY;
    for (const auto& n : near) {
      if (mirror_parity_y(n) < 0.5) continue;
      const double d = std::abs(n.omega.real() - b.omega_x);
      if (d < best) best = d, w1 = n.omega.real();
    }
    if (!std::isfinite(best)) return std::nullopt;
  } else {
    b.omega_x = at_x.front().omega.real();
    w1 = near.front().omega.real();
  }
  b.tau = (w1 - b.omega_x) / ((pi * dk_) * (pi * dk_));
  cache_[key] = b;
  return b;
}

void EnvelopeModel::validate() const {
  const int n = size();
  if (n < 3) throw ValidationError("envelope chain needs at least 3 cells");
  const std::size_t bonds = ring ? n : n - 1;
  if (hopping.size() != bonds || loss.size() != static_cast<std::size_t>(n) ||
      band_edge.size() != static_cast<std::size_t>(n) || tags.size() != static_cast<std::size_t>(n))
    throw ValidationError("envelope chain arrays have inconsistent lengths");
  for (double g : loss)
    if (!(g >= 0.0)) throw ValidationError("envelope chain loss must be >= 0");
  for (double t : hopping)
    if (!std::isfinite(t)) throw ValidationError("envelope chain hopping must be finite");
}

Eigen::MatrixXcd EnvelopeModel::hamiltonian() const {
  const int n = size();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) h(i, i) = {onsite[i], -0.5 * loss[i]};
  for (std::size_t b = 0; b < hopping.size(); ++b) {
    const int i = static_cast<int>(b), j = (i + 1) % n;
    h(i, j) += -hopping[b];
    h(j, i) += -hopping[b];
  }
  return h;
}

namespace {

void finish_onsite(EnvelopeModel& m, const std::vector<double>& tau) {
  const int n = static_cast<int>(m.band_edge.size());
  m.onsite.resize(n);
  for (int i = 0; i < n; ++i) {
    double left, right;
    if (m.ring) {
      left = m.hopping[(i + n - 1) % n];
      right = m.hopping[i];
    } else {
      left = i > 0 ? m.hopping[i - 1] : tau[i];
      right = i < n - 1 ? m.hopping[i] : tau[i];
    }
    m.onsite[i] = m.band_edge[i] + left + right;
  }
}

}  // namespace

EnvelopeModel uniform_chain(int n, double omega_x, double tau, double gamma, bool ring, const std::string& tag) {
  if (n < 3) throw ValidationError("envelope chain needs at least 3 cells");
  EnvelopeModel m;
  m.ring = ring;
  m.band_edge.assign(n, omega_x);
  m.hopping.assign(ring ? n : n - 1, tau);
  m.loss.assign(n, gamma);
  m.tags.assign(n, tag);
  m.regions.assign(n, tag);
  m.period.assign(n, 0.0);
  m.g_om_uc.assign(n, 0.0);
  m.g_em_cell.assign(n, 0.0);
  m.defect_weight.assign(n, 0.0);
  finish_onsite(m, std::vector<double>(n, tau));
  m.validate();
  return m;
}

EnvelopeModel build_envelope(const std::vector<DeviceLayout::Cell>& cells, const BandSource& bands, Chain chain) {
  const int n = static_cast<int>(cells.size());
  if (n < 3) throw ValidationError("envelope chain needs at least 3 cells");
  EnvelopeModel m;
  m.chain = chain;
  m.heuristic_loss = bands.heuristic_loss();
  std::vector<double> tau(n);
  for (int i = 0; i < n; ++i) {
    const auto& c = cells[i];
    auto b = bands.band(c.cell, chain);
    if (!b)
      throw ValidationError("no " + to_string(chain) + " band data for cell " + std::to_string(i) + " (region '" +
                            c.region + "', role '" + c.cell.role + "')");
    m.band_edge.push_back(b->omega_x);
    tau[i] = b->tau;
    m.loss.push_back(b->gamma);
    m.tags.push_back(c.tag);
    m.regions.push_back(c.region);
    m.period.push_back(c.cell.a);
    m.g_om_uc.push_back(b->g_om_uc);
    m.g_em_cell.push_back(c.cell.electrodes ? b->g_em_cell : 0.0);
    double wd = 0.0;
    if (c.cell.role == "omc_defect") wd += c.cell.role_to.empty() ? 1.0 : 1.0 - c.cell.blend;
    if (c.cell.role_to == "omc_defect") wd += c.cell.blend;
    m.defect_weight.push_back(wd);
  }
  for (int i = 0; i + 1 < n; ++i) m.hopping.push_back(0.5 * (tau[i] + tau[i + 1]));
  finish_onsite(m, tau);
  m.validate();
  return m;
}

EnvelopeModel build_envelope(const DeviceLayout& layout, const BandSource& bands, Chain chain) {
  return build_envelope(layout.cells(), bands, chain);
}

double CavityMode::frequency_hz() const { return constants::hertz(omega.real()); }
double CavityMode::q() const {
  return omega.imag() == 0.0 ? INFINITY : omega.real() / (2.0 * std::abs(omega.imag()));
}

namespace {

CavityMode make_mode(const EnvelopeModel& model, std::complex<double> w, Eigen::VectorXcd v) {
  v /= v.norm();
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  v *= std::conj(v(imax)) / std::abs(v(imax));
  v(imax) = std::abs(v(imax));
  CavityMode m;
  m.omega = w;
  m.carrier = model.carrier;
  for (int i = 0; i < model.size(); ++i) m.participations[model.tags[i]] += std::norm(v(i));
  m.envelope = std::move(v);
  return m;
}

}  // namespace

std::vector<CavityMode> cavity_spectrum(const EnvelopeModel& model, int n_modes, std::optional<double> target) {
  model.validate();
  const int n = model.size();
  std::vector<CavityMode> all;
  const bool lossless = std::all_of(model.loss.begin(), model.loss.end(), [](double g) { return g == 0.0; });
  if (lossless) {
    Eigen::MatrixXd h = model.hamiltonian().real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("chain diagonalization failed");
    for (int k = 0; k < n; ++k)
      all.push_back(make_mode(model, es.eigenvalues()(k), es.eigenvectors().col(k).cast<std::complex<double>>()));
  } else {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(model.hamiltonian());
    if (es.info() != Eigen::Success) throw NumericalError("chain diagonalization failed");
    for (int k = 0; k < n; ++k) all.push_back(make_mode(model, es.eigenvalues()(k), es.eigenvectors().col(k)));
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const CavityMode& a, const CavityMode& b) { return a.omega.real() < b.omega.real(); });
  if (n_modes <= 0 || n_modes >= n) return all;
  if (!target) {
    all.resize(n_modes);
    return all;
  }
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(all[a].omega.real() - *target) < std::abs(all[b].omega.real() - *target);
  });
  idx.resize(n_modes);
  std::sort(idx.begin(), idx.end());
  std::vector<CavityMode> out;
  for (int i : idx) out.push_back(all[i]);
  return out;
}

AntiCrossing anti_crossing(double w1, double w2, double g) {
  if (!(g >= 0.0)) throw ValidationError("anti_crossing: g must be >= 0");
  const double delta = w1 - w2;
  const double root = std::sqrt(0.25 * delta * delta + g * g);
  AntiCrossing r;
  r.omega_plus = 0.5 * (w1 + w2) + root;
  r.omega_minus = 0.5 * (w1 + w2) - root;
  if (root == 0.0) {
    r.p1_plus = 1.0;
    r.p1_minus = 0.0;
    return r;
  }
  r.p1_plus = 0.5 * (1.0 + 0.5 * delta / root);
  r.p1_minus = 1.0 - r.p1_plus;
  return r;
}

double detuning_for_participation(double g, double p) {
  if (!(p > 0.0 && p <= 0.5)) throw ValidationError("participation must lie in (0, 1/2]");
  // p = (1 - x) / 2 with x = D / sqrt(D^2 + 4 g^2)
  const double x = 1.0 - 2.0 * p;
  return 2.0 * g * x / std::sqrt(1.0 - x * x);
}

double fourier_peak(const Eigen::VectorXcd& c, double a, int pad_factor) {
  const int n = static_cast<int>(c.size());
  if (n < 4) throw ValidationError("fourier_mode needs at least 4 samples");
  const int p = pad_factor * n;
  double best = -1.0;
  int jbest = 0;
  for (int j = 0; j < p; ++j) {
    std::complex<double> s = 0.0;
    const double th = -2.0 * pi * j / p;
    for (int i = 0; i < n; ++i) s += c(i) * std::polar(1.0, th * i);
    const double mag = std::abs(s);
    if (mag > best * (1.0 + 1e-12)) best = mag, jbest = j;
  }
  double k = 2.0 * pi * jbest / (p * a);
  if (k > pi / a) k -= 2.0 * pi / a;
  return std::abs(k);
}

double fourier_mode(const CavityMode& mode, double a) {
  Eigen::VectorXcd c = mode.envelope;
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= std::polar(1.0, mode.carrier * static_cast<double>(i));
  return fourier_peak(c, a);
}

double bound_state_decay(double onsite_minus_omega, double tau) {
  const double x = onsite_minus_omega / (2.0 * tau);
  if (!(x >= 1.0)) throw ValidationError("frequency lies inside the band; no bound state");
  return std::acosh(x);
}

double defect_participation(const EnvelopeModel& model, const CavityMode& mode) {
  double s = 0.0;
  for (int i = 0; i < model.size(); ++i) s += model.defect_weight[i] * std::norm(mode.envelope(i));
  return s;
}

double mode_g_om(const EnvelopeModel& mech, const CavityMode& m, const CavityMode& o) {
  if (m.envelope.size() != o.envelope.size() || m.envelope.size() != mech.size())
    throw ValidationError("mechanical and optical chains differ in length");
  std::complex<double> s = 0.0;
  for (int i = 0; i < mech.size(); ++i) s += mech.g_om_uc[i] * std::conj(m.envelope(i)) * std::norm(o.envelope(i));
  return std::abs(s);
}

double mode_g_em(const EnvelopeModel& mech, const CavityMode& m) {
  std::complex<double> s = 0.0;
  for (int i = 0; i < mech.size(); ++i) s += mech.g_em_cell[i] * m.envelope(i);
  return std::abs(s);
}

CavityMode fundamental_optical_mode(const EnvelopeModel& opt) {
  auto modes = cavity_spectrum(opt);
  const bool has_defect =
      std::any_of(opt.defect_weight.begin(), opt.defect_weight.end(), [](double w) { return w > 0.0; });
  int best = 0;
  double score = -1.0;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    double s = 0.0;
    if (has_defect) {
      s = defect_participation(opt, modes[k]);
    } else {
      for (Eigen::Index i = 0; i < modes[k].envelope.size(); ++i) s += std::pow(std::norm(modes[k].envelope(i)), 2);
    }
    if (s > score * (1.0 + 1e-12)) score = s, best = static_cast<int>(k);
  }
  return modes[best];
}

namespace {

double default_mech_target(const EnvelopeModel& mech) {
  auto it = std::max_element(mech.defect_weight.begin(), mech.defect_weight.end());
  if (it == mech.defect_weight.end() || *it == 0.0) {
    return *std::min_element(mech.band_edge.begin(), mech.band_edge.end());
  }
  return mech.band_edge[it - mech.defect_weight.begin()];
}

TransducerModes solve_pair(EnvelopeModel mech, EnvelopeModel opt, const TransducerModeOptions& o) {
  TransducerModes r;
  const double target = o.mech_target > 0.0 ? o.mech_target : default_mech_target(mech);
  r.mech_modes = cavity_spectrum(mech, o.mech_modes, target);
  r.optical = fundamental_optical_mode(opt);
  double best = -1.0;
  for (std::size_t k = 0; k < r.mech_modes.size(); ++k) {
    r.g_om.push_back(mode_g_om(mech, r.mech_modes[k], r.optical));
    r.g_em.push_back(mode_g_em(mech, r.mech_modes[k]));
    if (r.g_om.back() > best * (1.0 + 1e-12)) best = r.g_om.back(), r.best_g_om = static_cast<int>(k);
  }
  r.mech = std::move(mech);
  r.opt = std::move(opt);
  return r;
}

}  // namespace

TransducerModes transducer_modes(const std::vector<DeviceLayout::Cell>& cells, const BandSource& bands,
                                 const TransducerModeOptions& opts) {
  return solve_pair(build_envelope(cells, bands, Chain::mechanical), build_envelope(cells, bands, Chain::optical),
                    opts);
}

DeviceLayout scale_emc_period(const DeviceLayout& layout, double s) {
  if (!(s > 0.0)) throw ValidationError("period scale must be positive");
  DeviceLayout out = layout;
  for (auto& r : out.regions) {
    if (r.start.role == "emc_defect") r.start.a *= s;
    if (r.end.role == "emc_defect") r.end.a *= s;
  }
  return out;
}

EmcSweep emc_period_sweep(const DeviceLayout& layout, const std::vector<double>& scales, const BandSource& bands,
                          const EmcSweepOptions& opts) {
  if (scales.empty()) throw ValidationError("emc_period_sweep: empty scale list");
  EmcSweep out;
  out.scales = scales;
  out.heuristic_loss = bands.heuristic_loss();
  std::vector<double> hybrid_gem;
  // Fixed target: the nominal defect band edge, so that mode windows line up across scales.
  const auto nominal = build_envelope(layout, bands, Chain::mechanical);
  TransducerModeOptions tm;
  tm.mech_modes = opts.modes;
  tm.mech_target = default_mech_target(nominal);
  for (double s : scales) {
    const auto cells = scale_emc_period(layout, s).cells();
    auto mech = build_envelope(cells, bands, Chain::mechanical);
    auto opt = build_envelope(cells, bands, Chain::optical);
    if (!opts.cut_tag.empty()) {
      for (std::size_t b = 0; b < mech.hopping.size(); ++b)
        if (mech.tags[b] == opts.cut_tag || mech.tags[b + 1] == opts.cut_tag) mech.hopping[b] = 0.0;
    }
    auto r = solve_pair(std::move(mech), std::move(opt), tm);
    int hybrid = -1;
    double best = -1.0;
    for (std::size_t k = 0; k < r.mech_modes.size(); ++k) {
      EmcSweepRow row;
      row.scale = s;
      row.mode = static_cast<int>(k);
      row.omega = r.mech_modes[k].omega;
      row.participations = r.mech_modes[k].participations;
      row.g_om = r.g_om[k];
      row.g_em = r.g_em[k];
      const double prod = row.g_om * row.g_em;
      if (prod > best * (1.0 + 1e-12)) best = prod, hybrid = static_cast<int>(out.rows.size());
      out.rows.push_back(std::move(row));
    }
    out.hybrid_row.push_back(hybrid);
    hybrid_gem.push_back(out.rows[hybrid].g_em);
  }
  const std::size_t ns = scales.size();
  const std::size_t ic = std::max_element(hybrid_gem.begin(), hybrid_gem.end()) - hybrid_gem.begin();
  out.crossing_scale = scales[ic];
  if (ic > 0 && ic + 1 < ns) {
    const double y0 = hybrid_gem[ic - 1], y1 = hybrid_gem[ic], y2 = hybrid_gem[ic + 1];
    const double den = y0 - 2.0 * y1 + y2;
    const double h = 0.5 * (scales[ic + 1] - scales[ic - 1]);
    if (den < 0.0) out.crossing_scale = scales[ic] + 0.5 * h * (y0 - y2) / den;
  }
  const double half = 0.5 * hybrid_gem[ic];
  std::vector<double> widths;
  for (int dir : {-1, 1}) {
    for (std::size_t i = ic; dir < 0 ? i > 0 : i + 1 < ns; i += dir) {
      const std::size_t j = i + dir;
      if (hybrid_gem[j] <= half) {
        const double t = (hybrid_gem[i] - half) / (hybrid_gem[i] - hybrid_gem[j]);
        const double sj = scales[i] + t * (scales[j] - scales[i]);
        widths.push_back(std::abs(sj - out.crossing_scale) / out.crossing_scale);
        break;
      }
    }
  }
  if (!widths.empty()) out.half_width = std::accumulate(widths.begin(), widths.end(), 0.0) / widths.size();
  return out;
}

}  // namespace phonox
