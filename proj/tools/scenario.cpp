#include "scenario.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "darwin/errors.hpp"
#include "darwin/fields.hpp"
#include "darwin/verification/criteria.hpp"

#ifndef DARWIN_SCENARIO_DIR
#define DARWIN_SCENARIO_DIR "scenarios"
#endif

namespace darwin::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::dynamics: return "dynamics";
    case Experiment::fields: return "fields";
    case Experiment::ed: return "ed";
    case Experiment::response: return "response";
    case Experiment::noise: return "noise";
  }
  return "unknown";
}

response::ResponseModel ModelSpec::build(const UnitSystem& u) const {
  if (type == "drude") return response::ResponseModel::drude(density, charge, mass, gamma, u);
  if (type == "london") return response::ResponseModel::london(lambda, u);
  return response::ResponseModel::zero(u);
}

namespace {

// ---------------------------------------------------------------- parsing

UnitSystem parse_units(std::optional<Reader> r) {
  if (!r) return make_units();
  const double c = r->positive("c", UnitSystem::kDefaultC);
  const double hbar = r->number("hbar", 1.0);
  if (hbar < 0.0) r->fail("hbar", "must be non-negative");
  const double kB = r->positive("kB", 1.0);
  r->finish();
  return make_units(c, hbar, kB);
}

dynamics::ParticleSet parse_particles(Reader& p, const std::string& key) {
  dynamics::ParticleSet ps;
  auto list = p.objects(key);
  if (list.empty()) p.fail(key, "needs at least one particle");
  for (auto& r : list) {
    const double e = r.number("charge");
    const double m = r.positive("mass");
    const Eigen::Vector3d x = r.vec3("position");
    const Eigen::Vector3d q = r.has("momentum") ? r.vec3("momentum") : Eigen::Vector3d::Zero();
    r.finish();
    ps.add(e, m, x, q);
  }
  return ps;
}

void check_particles(Reader& p, const std::string& key, const dynamics::ParticleSet& ps, double r_min) {
  try {
    dynamics::validate(ps, dynamics::DarwinOptions{r_min});
  } catch (const Error& e) {
    p.fail(key, e.what());
  }
}

std::vector<double> parse_grid(Reader& p, const std::string& key) {
  std::vector<double> out;
  if (p.is_array(key)) {
    out = p.numbers(key);
  } else {
    Reader g = p.object(key);
    const double lo = g.number("min");
    const double hi = g.number("max");
    const auto n = static_cast<int>(g.integer("points", 2, 100000));
    const std::string spacing = g.choice("spacing", "log", {"log", "linear"});
    g.finish();
    if (!(hi > lo)) g.fail("max", "must exceed min");
    if (spacing == "log" && !(lo > 0.0)) g.fail("min", "a log grid needs min > 0");
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / (n - 1);
      out.push_back(spacing == "log" ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
    }
  }
  for (double v : out)
    if (!(v > 0.0)) p.fail(key, "all values must be positive");
  return out;
}

ModelSpec parse_model(Reader r, const UnitSystem& u) {
  ModelSpec m;
  m.type = r.choice("type", {"zero", "drude", "london"});
  if (m.type == "drude") {
    m.density = r.positive("density");
    m.charge = r.number("charge", 1.0);
    if (m.charge == 0.0) r.fail("charge", "must be non-zero");
    m.mass = r.positive("mass", 1.0);
    m.gamma = r.number("gamma", 0.0);
    if (m.gamma < 0.0) r.fail("gamma", "must be non-negative");
  } else if (m.type == "london") {
    m.lambda = r.positive("lambda");
  }
  r.finish();
  try {
    (void)m.build(u);
  } catch (const Error& e) {
    r.fail("", e.what());
  }
  return m;
}

DynamicsParams parse_dynamics(Reader& p) {
  DynamicsParams d;
  d.particles = parse_particles(p, "particles");
  d.dt = p.positive("dt");
  d.steps = static_cast<std::size_t>(p.integer("steps", 1, 100000000));
  d.method = p.choice("method", "implicit-midpoint", {"implicit-midpoint", "rk4"}) == "rk4"
                 ? dynamics::Method::rk4
                 : dynamics::Method::implicit_midpoint;
  d.r_min = p.positive("r_min", 1e-6);
  d.output_every = static_cast<std::size_t>(p.integer("output_every", 1, 1, 100000000));
  check_particles(p, "particles", d.particles, d.r_min);
  return d;
}

FieldsParams parse_fields(Reader& p) {
  FieldsParams f;
  f.L = p.positive("L", 1.0);
  f.nside = static_cast<int>(p.integer("nside", 4, 256));
  if (f.nside % 2 != 0) p.fail("nside", "must be even");
  f.particles = parse_particles(p, "particles");
  f.binary_dumps = p.boolean("binary_dumps", false);
  check_particles(p, "particles", f.particles, 1e-12);
  for (std::size_t i = 0; i < f.particles.size(); ++i)
    if ((f.particles.position[i].array() < 0.0).any() || (f.particles.position[i].array() >= f.L).any())
      p.fail("particles[" + std::to_string(i) + "].position", "must lie inside the box [0, L)^3");
  return f;
}

EdParams parse_ed(Reader& p, const UnitSystem& u) {
  EdParams e;
  e.basis.L = p.positive("L", 2.0 * std::numbers::pi);
  e.basis.kmax2 = static_cast<int>(p.integer("kmax2", 0, 100));
  e.basis.n_electrons = static_cast<int>(p.integer("n_electrons", 0, 64));
  if (p.has("n_up")) e.basis.n_up = static_cast<int>(p.integer("n_up", 0, 64));
  if (p.has("n_down")) e.basis.n_down = static_cast<int>(p.integer("n_down", 0, 64));
  if (p.has("total_momentum")) e.basis.total_momentum = p.ivec3("total_momentum");
  e.basis.dimension_cap = static_cast<std::size_t>(p.integer("dimension_cap", 20000, 1, 20000));
  e.species.charge = p.number("charge", 1.0);
  if (e.species.charge == 0.0) p.fail("charge", "must be non-zero");
  e.species.mass = p.positive("mass", 1.0);
  if (auto t = p.optional_object("terms")) {
    e.terms.kinetic = t->boolean("kinetic", true);
    e.terms.coulomb = t->boolean("coulomb", true);
    e.terms.current_current = t->boolean("current_current", true);
    t->finish();
  }
  e.levels = static_cast<std::size_t>(p.integer("levels", 10, 1, 1000000));
  if (auto k = p.optional_object("kubo")) {
    KuboRequest q;
    q.k = k->ivec3("k");
    if (q.k.isZero()) k->fail("k", "must be non-zero");
    q.omegas = parse_grid(*k, "omega");
    q.temperature = k->positive("temperature");
    q.s = k->positive("s", 1e-2);
    q.polarization = k->choice("polarization", "longitudinal", {"longitudinal", "transverse"}) == "transverse"
                         ? ed::Polarization::transverse
                         : ed::Polarization::longitudinal;
    q.richardson_levels = static_cast<int>(k->integer("richardson_levels", 1, 1, 12));
    k->finish();
    if (!(u.hbar() > 0.0)) k->fail("", "the Kubo response needs units.hbar > 0");
    if (e.basis.total_momentum) k->fail("", "the Kubo response needs all momentum sectors; drop total_momentum");
    e.kubo = q;
  }
  try {
    ed::PlaneWaveFockBasis basis(e.basis);
  } catch (const Error& ex) {
    p.fail("", ex.what());
  }
  return e;
}

ResponseParams parse_response(Reader& p, const UnitSystem& u) {
  ResponseParams r;
  r.model = parse_model(p.object("model"), u);
  r.k = parse_grid(p, "k");
  r.omega = parse_grid(p, "omega");
  r.k_scale = p.positive("k_scale", *std::max_element(r.k.begin(), r.k.end()));
  return r;
}

NoiseParams parse_noise(Reader& p, const UnitSystem& u) {
  NoiseParams n;
  const std::string kind =
      p.choice("kind", {"voltage", "longitudinal-field", "transverse-field", "photon-number"});
  n.temperature = p.positive("temperature");
  n.omega = parse_grid(p, "omega");
  if (kind == "photon-number") {
    n.kind = noise::SpectrumKind::photon_number;
    if (!(u.hbar() > 0.0)) p.fail("kind", "photon-number noise needs units.hbar > 0");
    n.k = p.positive("k");
    Reader c = p.object("correlator");
    n.amplitude = c.number("amplitude");
    n.decay_time = c.positive("decay_time");
    c.finish();
    if (auto q = p.optional_object("quadrature")) {
      n.tolerances.absolute = q->positive("absolute", n.tolerances.absolute);
      n.tolerances.relative = q->positive("relative", n.tolerances.relative);
      q->finish();
    }
    return n;
  }
  n.model = parse_model(p.object("model"), u);
  if (kind == "voltage") {
    n.kind = noise::SpectrumKind::voltage;
    Reader g = p.object("geometry");
    n.geometry.length = g.positive("length");
    n.geometry.area = g.positive("area");
    g.finish();
  } else if (kind == "longitudinal-field") {
    n.kind = noise::SpectrumKind::longitudinal_field;
    n.k = p.positive("k");
    n.volume = p.positive("volume", 1.0);
  } else {
    n.kind = noise::SpectrumKind::transverse_field;
    n.volume = p.positive("volume", 1.0);
  }
  return n;
}

bool valid_name(const std::string& s) {
  if (s.empty() || s.size() > 128) return false;
  return std::all_of(s.begin(), s.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.';
  });
}

// ---------------------------------------------------------------- output

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) { line(header); }

  void row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

  void row(const std::vector<double>& values) {
    std::string sep;
    for (double v : values) {
      os_ << sep << num(v);
      sep = ",";
    }
    os_ << '\n';
  }

  Artifact done(std::string name) const { return {std::move(name), os_.str()}; }

 private:
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }
  std::ostringstream os_;
};

Artifact json_artifact(std::string name, const ojson& j) { return {std::move(name), j.dump(2) + "\n"}; }

ojson vec_json(const Eigen::Vector3d& v) { return ojson::array({v.x(), v.y(), v.z()}); }

ojson units_json(const UnitSystem& u) { return {{"c", u.c()}, {"hbar", u.hbar()}, {"kB", u.kB()}}; }

ojson summary_head(const Scenario& s) {
  return {{"scenario", s.name}, {"experiment", to_string(s.experiment)}, {"units", units_json(s.units)}};
}

// ---------------------------------------------------------------- runners

std::vector<Artifact> run_dynamics(const Scenario& s, const DynamicsParams& p) {
  const UnitSystem& u = s.units;
  dynamics::IntegratorOptions opts;
  opts.darwin.r_min = p.r_min;

  std::vector<std::string> header{"step", "time"};
  for (std::size_t i = 0; i < p.particles.size(); ++i)
    for (const char* c : {"x", "y", "z", "px", "py", "pz"}) header.push_back(std::string(c) + "_" + std::to_string(i));
  for (const char* c : {"H", "Px", "Py", "Pz", "Lx", "Ly", "Lz"}) header.push_back(c);
  Csv traj(header);
  Csv inv({"step", "time", "energy", "kinetic", "coulomb", "darwin", "Px", "Py", "Pz", "Lx", "Ly", "Lz"});
  std::size_t step = 0;
  auto sample = [&](const dynamics::SimulationState& st) {
    const auto& ps = st.particles;
    const double n = static_cast<double>(step);
    const auto e = dynamics::energy_terms(ps, u, opts.darwin);
    const auto P = dynamics::total_momentum(ps);
    const auto L = dynamics::angular_momentum(ps);
    std::vector<double> row{n, st.time};
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const auto& x = ps.position[i];
      const auto& q = ps.momentum[i];
      row.insert(row.end(), {x.x(), x.y(), x.z(), q.x(), q.y(), q.z()});
    }
    row.insert(row.end(), {e.total(), P.x(), P.y(), P.z(), L.x(), L.y(), L.z()});
    traj.row(row);
    inv.row({n, st.time, e.total(), e.kinetic, e.coulomb, e.darwin, P.x(), P.y(), P.z(), L.x(), L.y(), L.z()});
  };

  auto state = dynamics::make_state(p.particles, u, 0.0, opts.darwin);
  sample(state);
  opts.observer = [&](const dynamics::SimulationState& st) {
    ++step;
    if (step % p.output_every == 0 || step == p.steps) sample(st);
  };
  state = dynamics::integrate(std::move(state), p.dt, p.steps, p.method, u, opts);

  const auto& log = state.invariants_log;
  const auto& first = log.front();
  double dH = 0.0, dP = 0.0, dL = 0.0;
  for (const auto& x : log) {
    dH = std::max(dH, std::abs(x.energy - first.energy) / std::max(std::abs(first.energy), 1e-300));
    dP = std::max(dP, (x.momentum - first.momentum).norm());
    dL = std::max(dL, (x.angular_momentum - first.angular_momentum).norm());
  }
  ojson sum = summary_head(s);
  sum["method"] = dynamics::method_name(p.method);
  sum["dt"] = p.dt;
  sum["steps"] = p.steps;
  sum["particles"] = p.particles.size();
  sum["final_time"] = state.time;
  sum["initial_energy"] = first.energy;
  sum["final_energy"] = log.back().energy;
  sum["max_relative_energy_drift"] = dH;
  sum["max_momentum_drift"] = dP;
  sum["max_angular_momentum_drift"] = dL;
  return {traj.done("trajectory.csv"), inv.done("invariants.csv"), json_artifact("summary.json", sum)};
}

std::vector<Artifact> run_fields(const Scenario& s, const FieldsParams& p) {
  const UnitSystem& u = s.units;
  const auto dep = fields::deposit_particles(p.particles, p.nside, p.L);
  const auto A = fields::internal_vector_potential(dep.current, u);
  const auto B = fields::curl(A);

  std::vector<Artifact> out;
  auto dump = [&](const std::string& stem, const fields::VectorFieldGrid& g) {
    std::ostringstream csv;
    fields::write_grid_csv(csv, g);
    out.push_back({stem + ".csv", csv.str()});
    if (p.binary_dumps) {
      std::ostringstream bin;
      fields::write_grid_binary(bin, g);
      out.push_back({stem + ".bin", bin.str()});
    }
  };
  dump("vector_potential", A);
  dump("magnetic_field", B);

  ojson sum = summary_head(s);
  sum["L"] = p.L;
  sum["nside"] = p.nside;
  sum["particles"] = p.particles.size();
  sum["total_charge"] = dep.rho.integral();
  sum["transverse_current_energy"] = fields::transverse_current_energy(dep.current, u);
  sum["transverse_current_energy_real_space"] = fields::transverse_current_energy_real_space(dep.current, u);
  sum["grid_pair_energy"] = fields::grid_darwin_pair_energy(p.particles, p.nside, p.L, u);
  sum["open_boundary_pair_energy"] = dynamics::energy_terms(p.particles, u, {1e-12}).darwin;
  sum["vector_potential_divergence_residual"] = fields::spectral_divergence_residual(fields::fourier(A));
  sum["max_abs_vector_potential"] = A.max_abs();
  sum["max_abs_magnetic_field"] = B.max_abs();
  out.push_back(json_artifact("summary.json", sum));
  return out;
}

std::vector<Artifact> run_ed(const Scenario& s, const EdParams& p) {
  const UnitSystem& u = s.units;
  const ed::PlaneWaveFockBasis basis(p.basis);
  const auto H = ed::build_hamiltonian(basis, u, p.species, p.terms);
  const std::size_t dim = basis.dimension();
  const std::size_t shown = std::min(p.levels, dim);
  const auto eig = ed::eigensolve(H, p.kubo ? dim : shown);

  ed::HamiltonianTerms kinetic_only{true, false, false};
  const auto H0 = ed::build_hamiltonian(basis, u, p.species, kinetic_only);
  const double e_free = dim ? ed::eigensolve(H0, 1).values[0] : 0.0;

  Csv spectrum({"index", "energy", "energy_minus_noninteracting_ground", "excitation", "Px", "Py", "Pz",
                "spin_imbalance"});
  for (std::size_t i = 0; i < shown; ++i) {
    Eigen::Index idx = 0;
    eig.vectors.col(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff(&idx);
    const auto P = basis.total_momentum(static_cast<std::size_t>(idx));
    const double E = eig.values[static_cast<Eigen::Index>(i)];
    spectrum.row({static_cast<double>(i), E, E - e_free, E - eig.values[0], static_cast<double>(P.x()),
                  static_cast<double>(P.y()), static_cast<double>(P.z()),
                  static_cast<double>(basis.spin_imbalance(static_cast<std::size_t>(idx)))});
  }
  std::vector<Artifact> out{spectrum.done("spectrum.csv")};

  ojson sum = summary_head(s);
  sum["L"] = p.basis.L;
  sum["kmax2"] = p.basis.kmax2;
  sum["n_electrons"] = p.basis.n_electrons;
  sum["orbitals"] = basis.orbitals().size();
  sum["dimension"] = dim;
  sum["hermiticity_defect"] = H.hermiticity_defect();
  sum["ground_energy"] = dim ? eig.values[0] : 0.0;
  sum["noninteracting_ground_energy"] = e_free;

  if (p.kubo) {
    const auto& q = *p.kubo;
    ed::KuboParams kp{u.beta(q.temperature), q.s, q.polarization};
    Csv kappa({"omega", "re_kappa", "im_kappa"});
    for (double w : q.omegas) {
      const auto k = q.richardson_levels > 1
                         ? ed::kubo_kappa_extrapolated(basis, eig, q.k, w, kp, q.richardson_levels, u, p.species)
                         : ed::kubo_kappa(basis, eig, q.k, w, kp, u, p.species);
      kappa.row({w, k.real(), k.imag()});
    }
    out.push_back(kappa.done("kappa.csv"));
    sum["kubo"] = {{"k_index", ojson::array({q.k.x(), q.k.y(), q.k.z()})},
                   {"k", vec_json(basis.dk() * q.k.cast<double>())},
                   {"temperature", q.temperature},
                   {"s", q.s},
                   {"richardson_levels", q.richardson_levels},
                   {"polarization", q.polarization == ed::Polarization::transverse ? "transverse" : "longitudinal"}};
  }
  out.push_back(json_artifact("summary.json", sum));
  return out;
}

std::vector<Artifact> run_response(const Scenario& s, const ResponseParams& p) {
  const auto m = p.model.build(s.units);
  auto ks = p.k;
  std::sort(ks.begin(), ks.end(), std::greater<>());

  Csv ratio({"k", "kappa_static", "compensation_ratio", "internal_vector_potential_ratio"});
  for (double k : ks)
    ratio.row({k, m.kappa_static(k), response::field_compensation_ratio(m, k),
               response::internal_vector_potential_ratio(m, k)});

  Csv table({"k", "omega", "re_kappa_L", "im_kappa_L", "re_kappa_T", "im_kappa_T", "re_sigma_L", "im_sigma_L",
             "re_sigma_T", "im_sigma_T", "re_eps_L", "im_eps_L"});
  for (double k : ks)
    for (double w : p.omega) {
      const auto kL = m.kappa_L(k, w), kT = m.kappa_T(k, w);
      const auto sL = response::sigma_L(m, k, w), sT = response::sigma_T(m, k, w);
      const auto eps = response::dielectric_L(m, k, w);
      table.row({k, w, kL.real(), kL.imag(), kT.real(), kT.imag(), sL.real(), sL.imag(), sT.real(), sT.imag(),
                 eps.real(), eps.imag()});
    }

  const auto report = response::meissner_diagnostic(m, p.k_scale);
  const auto passive = response::passivity_scan(m, ks, p.omega);
  ojson params = ojson::object();
  for (const auto& [name, value] : m.parameters()) params[name] = value;
  ojson sum = summary_head(s);
  sum["model"] = m.name();
  sum["model_parameters"] = params;
  sum["classification"] = response::to_string(report.classification);
  sum["meissner_k"] = report.k;
  sum["meissner_ratio"] = report.ratio;
  sum["long_wavelength_ratio"] = report.ratio.back();
  sum["min_re_kappa_L"] = passive.min_re_kappa_L;
  sum["min_re_kappa_T"] = passive.min_re_kappa_T;
  return {ratio.done("compensation_ratio.csv"), table.done("response.csv"), json_artifact("summary.json", sum)};
}

std::vector<Artifact> run_noise(const Scenario& s, const NoiseParams& p) {
  const UnitSystem& u = s.units;
  const double beta = u.beta(p.temperature);
  noise::NoiseSpectrum spec;
  spec.kind = p.kind;
  spec.omega = p.omega;
  ojson sum = summary_head(s);
  sum["kind"] = noise::to_string(p.kind);
  sum["temperature"] = p.temperature;
  sum["beta"] = beta;
  sum["polarization"] = "per polarization";

  std::vector<Artifact> out;
  if (p.kind == noise::SpectrumKind::voltage) {
    const auto m = p.model.build(u);
    Csv csv({"omega", "voltage_noise", "voltage_noise_rc", "resistance", "capacity"});
    std::vector<double> rc;
    for (double w : p.omega) {
      spec.value.push_back(noise::voltage_noise(m, p.geometry, w, beta));
      rc.push_back(noise::voltage_noise_rc(m, p.geometry, w, beta));
      csv.row({w, spec.value.back(), rc.back(), noise::resistance(m, p.geometry, w),
               noise::capacity(m, p.geometry, w)});
    }
    const auto lo = std::min_element(p.omega.begin(), p.omega.end()) - p.omega.begin();
    const double R = noise::resistance(m, p.geometry, p.omega[lo]);
    const double plateau = 4.0 * R / beta;
    sum["model"] = m.name();
    sum["geometry"] = {{"length", p.geometry.length}, {"area", p.geometry.area}};
    sum["nyquist"] = {{"omega", p.omega[lo]},
                      {"resistance", R},
                      {"plateau_4RkT", plateau},
                      {"field_formula", spec.value[lo]},
                      {"rc_formula", rc[lo]},
                      {"field_relative_deviation", std::abs(spec.value[lo] - plateau) / plateau},
                      {"rc_relative_deviation", std::abs(rc[lo] - plateau) / plateau}};
    out.push_back(csv.done("spectrum.csv"));
  } else if (p.kind == noise::SpectrumKind::longitudinal_field) {
    const auto m = p.model.build(u);
    Csv csv({"omega", "field_noise", "field_noise_kappa_form"});
    for (double w : p.omega) {
      spec.value.push_back(noise::field_noise_L(m, p.k, w, beta, p.volume));
      csv.row({w, spec.value.back(), noise::field_noise_L_kappa_form(m, p.k, w, beta, p.volume)});
    }
    sum["model"] = m.name();
    sum["k"] = p.k;
    sum["volume"] = p.volume;
    out.push_back(csv.done("spectrum.csv"));
  } else if (p.kind == noise::SpectrumKind::transverse_field) {
    const auto m = p.model.build(u);
    Csv csv({"omega", "field_noise"});
    for (double w : p.omega) {
      spec.value.push_back(noise::field_noise_T(m, w, beta, p.volume));
      csv.row({w, spec.value.back()});
    }
    sum["model"] = m.name();
    sum["volume"] = p.volume;
    out.push_back(csv.done("spectrum.csv"));
  } else {
    const double A = p.amplitude, tau = p.decay_time;
    noise::Correlator corr = [A, tau](double t, double) { return noise::cplx(A * std::exp(-t / tau)); };
    Csv csv({"omega", "photon_number_noise"});
    for (double w : p.omega) {
      spec.value.push_back(noise::photon_number_noise(corr, tau, p.k, w, beta, u, p.tolerances));
      csv.row({w, spec.value.back()});
    }
    sum["k"] = p.k;
    sum["correlator"] = {{"form", "amplitude * exp(-t / decay_time)"}, {"amplitude", A}, {"decay_time", tau}};
    sum["quadrature"] = {{"absolute", p.tolerances.absolute}, {"relative", p.tolerances.relative}};
    out.push_back(csv.done("spectrum.csv"));
  }
  if (p.kind != noise::SpectrumKind::photon_number) noise::check_positive(spec);
  out.push_back(json_artifact("summary.json", sum));
  return out;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const ProximityError*>(&e)) return "proximity error";
  if (dynamic_cast<const IntegrationError*>(&e)) return "integration error";
  if (dynamic_cast<const DivergenceError*>(&e)) return "divergence";
  if (dynamic_cast<const ResonanceError*>(&e)) return "resonance";
  if (dynamic_cast<const NonphysicalModelError*>(&e)) return "nonphysical model";
  if (dynamic_cast<const SolverError*>(&e)) return "solver failure";
  if (dynamic_cast<const CapacityError*>(&e)) return "capacity exceeded";
  if (dynamic_cast<const InvalidArgument*>(&e)) return "invalid input";
  return "runtime failure";
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

}  // namespace

Scenario parse_scenario(const ConfigDocument& doc) {
  Reader top(doc, doc.root(), "");
  Scenario s;
  s.name = top.string("name");
  if (!valid_name(s.name)) top.fail("name", "use 1-128 characters from [A-Za-z0-9_.-]");
  s.description = top.string("description", "");
  s.units = parse_units(top.optional_object("units"));
  const std::string kind = top.choice("experiment", {"dynamics", "fields", "ed", "response", "noise"});
  Reader p = top.object("params");
  if (kind == "dynamics") {
    s.experiment = Experiment::dynamics;
    s.params = parse_dynamics(p);
  } else if (kind == "fields") {
    s.experiment = Experiment::fields;
    s.params = parse_fields(p);
  } else if (kind == "ed") {
    s.experiment = Experiment::ed;
    s.params = parse_ed(p, s.units);
  } else if (kind == "response") {
    s.experiment = Experiment::response;
    s.params = parse_response(p, s.units);
  } else {
    s.experiment = Experiment::noise;
    s.params = parse_noise(p, s.units);
  }
  p.finish();
  s.output_dir = top.string("output_dir", s.name);
  const fs::path out(s.output_dir);
  if (s.output_dir.empty() || out.is_absolute() ||
      std::any_of(out.begin(), out.end(), [](const fs::path& c) { return c == ".."; }))
    top.fail("output_dir", "must be a non-empty relative path without '..'");
  top.finish();
  return s;
}

std::vector<Artifact> run_scenario(const Scenario& s) {
  return std::visit(
      [&](const auto& p) -> std::vector<Artifact> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DynamicsParams>) return run_dynamics(s, p);
        if constexpr (std::is_same_v<T, FieldsParams>) return run_fields(s, p);
        if constexpr (std::is_same_v<T, EdParams>) return run_ed(s, p);
        if constexpr (std::is_same_v<T, ResponseParams>) return run_response(s, p);
        if constexpr (std::is_same_v<T, NoiseParams>) return run_noise(s, p);
      },
      s.params);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw ComputationError("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

Artifact make_manifest(const Scenario& s, const std::vector<Artifact>& artifacts) {
  ojson files = ojson::array();
  for (const auto& a : artifacts)
    files.push_back({{"path", a.name}, {"bytes", a.content.size()}, {"sha256", sha256_hex(a.content)}});
  ojson m = {{"scenario", s.name}, {"experiment", to_string(s.experiment)}, {"files", files}};
  return json_artifact("manifest.json", m);
}

void write_artifacts(const std::string& dir, const std::vector<Artifact>& artifacts) {
  fs::create_directories(dir);
  for (const auto& a : artifacts) {
    const fs::path final_path = fs::path(dir) / a.name;
    const fs::path tmp = final_path.string() + ".partial";
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      f.write(a.content.data(), static_cast<std::streamsize>(a.content.size()));
      if (!f) throw ComputationError("cannot write " + tmp.string());
    }
    fs::rename(tmp, final_path);
  }
}

std::string output_root() { return env_or("DARWIN_OUTPUT_ROOT", fs::current_path().string()); }

std::string scenario_dir() { return env_or("DARWIN_SCENARIO_DIR", DARWIN_SCENARIO_DIR); }

int run_command(const std::string& config, std::ostream& out, std::ostream& err) {
  std::string path = config;
  if (!fs::is_regular_file(path)) {
    const fs::path bundled = fs::path(scenario_dir()) / (config + (fs::path(config).extension() == ".json" ? "" : ".json"));
    if (fs::is_regular_file(bundled)) path = bundled.string();
  }
  Scenario s;
  try {
    s = parse_scenario(ConfigDocument::load(path));
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  const std::string context = "scenario '" + s.name + "' (" + to_string(s.experiment) + ")";
  std::vector<Artifact> artifacts;
  try {
    artifacts = run_scenario(s);
  } catch (const std::exception& e) {
    err << context << ": " << error_kind(e) << ": " << e.what() << "\n";
    return dynamic_cast<const InvalidArgument*>(&e) ? 2 : 1;
  }
  artifacts.push_back(make_manifest(s, artifacts));
  const fs::path dir = fs::path(output_root()) / s.output_dir;
  try {
    write_artifacts(dir.string(), artifacts);
  } catch (const std::exception& e) {
    err << context << ": cannot write outputs: " << e.what() << "\n";
    return 1;
  }
  out << context << ": wrote " << artifacts.size() << " files to " << dir.string() << "\n";
  return 0;
}

int verify_command(const std::string& suite, std::ostream& out, std::ostream& err) {
  std::vector<int> ids;
  try {
    ids = verification::suite_criteria(suite);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return 2;
  }
  int failed = 0;
  for (int id : ids) {
    try {
      const auto r = verification::run_criterion(id);
      out << verification::format_result(r) << "\n";
      if (!r.passed) ++failed;
    } catch (const std::exception& e) {
      out << "FAIL  " << id << "  raised: " << e.what() << "\n";
      ++failed;
    }
  }
  out << "suite " << suite << ": " << ids.size() - failed << "/" << ids.size() << " passed\n";
  return failed ? 1 : 0;
}

int list_examples_command(std::ostream& out, std::ostream& err) {
  const fs::path dir = scenario_dir();
  if (!fs::is_directory(dir)) {
    err << "scenario directory " << dir.string() << " does not exist\n";
    return 1;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      const auto s = parse_scenario(ConfigDocument::load(f.string()));
      out << f.stem().string() << "  [" << to_string(s.experiment) << "]  " << s.description << "\n";
    } catch (const std::exception& e) {
      out << f.stem().string() << "  (invalid: " << e.what() << ")\n";
    }
  }
  return 0;
}

}  // namespace darwin::cli
