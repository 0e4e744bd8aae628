#include "darwin/verification/criteria.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

#include "darwin/dynamics.hpp"
#include "darwin/fields.hpp"
#include "darwin/kspace_ed.hpp"
#include "darwin/noise.hpp"
#include "darwin/response.hpp"
#include "darwin/verification/oracles.hpp"

namespace darwin::verification {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(const char* name, double value, const char* cmp, double limit) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s = %.3e (%s %.0e)", name, value, cmp, limit);
  return buf;
}

std::string note(const char* name, double value) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s = %.6g", name, value);
  return buf;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec3 v(g(rng), g(rng), g(rng));
  return v.normalized();
}

dynamics::ParticleSet four_body() {
  dynamics::ParticleSet ps;
  ps.add(1.0, 10.0, {1.0, 0.0, 0.0}, {0.0, 0.6, 0.1});
  ps.add(1.0, 10.0, {-1.0, 0.0, 0.0}, {0.0, -0.6, 0.0});
  ps.add(-1.0, 1.0, {0.0, 1.2, 0.2}, {-0.5, 0.05, 0.0});
  ps.add(-1.0, 1.0, {0.0, -1.2, -0.1}, {0.5, 0.0, 0.05});
  return ps;
}

}  // namespace

CriterionResult kernel_equivalence() {
  Timer t;
  CriterionResult r{1, "Darwin-Jackson kernel equivalence on 20 random separations", false, {}, 0.0};
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> logd(-2.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Vec3 R = std::pow(10.0, logd(rng)) * random_unit(rng);
    const Mat3 K = jackson_kernel_quadrature(R);
    const Mat3 T = dynamics::transverse_pair_kernel(R, {1e-300});
    worst = std::max(worst, (K - T).norm() / T.norm());
  }
  r.seconds = t.seconds();
  r.measurements = {fmt("max relative error", worst, "<", 1e-4), fmt("runtime s", r.seconds, "<", 60)};
  r.passed = worst < 1e-4 && r.seconds < 60.0;
  return r;
}

CriterionResult hamiltonian_conservation() {
  Timer t;
  CriterionResult r{2, "H, P, L conservation over 1e4 implicit-midpoint steps (4 particles)", false, {}, 0.0};
  const auto u = make_units(10.0);
  auto s = dynamics::make_state(four_body(), u);
  s = dynamics::integrate(std::move(s), 1e-4, 10000, dynamics::Method::implicit_midpoint, u);
  const auto& log = s.invariants_log;
  const auto& first = log.front();
  double dh = 0.0, dp = 0.0, dl = 0.0;
  for (const auto& e : log) {
    dh = std::max(dh, std::abs(e.energy - first.energy) / std::abs(first.energy));
    dp = std::max(dp, (e.momentum - first.momentum).norm());
    dl = std::max(dl, (e.angular_momentum - first.angular_momentum).norm());
  }
  r.seconds = t.seconds();
  r.measurements = {fmt("max |dH|/|H0|", dh, "<", 1e-8), fmt("max |dP|", dp, "<", 1e-12),
                    fmt("max |dL|", dl, "<", 1e-10), note("darwin/coulomb energy ratio",
                                                         dynamics::energy_terms(four_body(), u).darwin /
                                                             dynamics::energy_terms(four_body(), u).coulomb)};
  r.passed = dh < 1e-8 && dp < 1e-12 && dl < 1e-10 && r.seconds < 60.0;
  return r;
}

CriterionResult inverse_c2_scaling() {
  Timer t;
  CriterionResult r{3, "1/c^2 order: interaction shifts scale by 4 when c is halved", false, {}, 0.0};
  const double c = UnitSystem::kDefaultC;

  // Classical: Darwin pair energy of a fixed configuration.
  const auto ps = four_body();
  const double classical = dynamics::energy_terms(ps, make_units(c / 2)).darwin /
                           dynamics::energy_terms(ps, make_units(c)).darwin;

  // Quantum: ground-state shift produced by the current-current term, seven
  // spin-polarized electrons, zero total momentum.
  ed::BasisSpec spec;
  spec.kmax2 = 2;
  spec.n_electrons = 7;
  spec.n_up = 7;
  spec.total_momentum = ed::IVec3::Zero();
  const ed::PlaneWaveFockBasis basis(spec);
  auto ground = [&](double cc, bool current) {
    ed::HamiltonianTerms terms;
    terms.current_current = current;
    return ed::eigensolve(ed::build_hamiltonian(basis, make_units(cc), {}, terms), 1).values(0);
  };
  const double e_ref = ground(c, false);
  const double shift_c = ground(c, true) - e_ref;
  const double shift_half = ground(c / 2, true) - e_ref;
  const double quantum = shift_half / shift_c;

  r.seconds = t.seconds();
  r.measurements = {fmt("classical |ratio - 4|", std::abs(classical - 4.0), "<=", 1e-2),
                    fmt("ED ground-state |ratio - 4|", std::abs(quantum - 4.0), "<=", 1e-2),
                    note("ED shift at c", shift_c), note("ED basis dimension", static_cast<double>(basis.dimension()))};
  r.passed = std::abs(classical - 4.0) <= 1e-2 && std::abs(quantum - 4.0) <= 1e-2;
  return r;
}

CriterionResult coulomb_limit() {
  Timer t;
  CriterionResult r{4, "c = 1e9 Darwin trajectory matches pure-Coulomb reference", false, {}, 0.0};
  const auto u = make_units(1e9);
  const auto ps = four_body();
  const double dt = 1e-4;
  const std::size_t steps = 10000;
  const auto ref = coulomb_reference_trajectory(ps, dt, steps);

  double worst = 0.0;
  std::size_t step = 0;
  dynamics::IntegratorOptions opts;
  opts.observer = [&](const dynamics::SimulationState& s) {
    const auto& z = ref[step++];
    const std::size_t n = s.particles.size();
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diff = std::max(diff, (s.particles.position[i] - z[i]).norm());
      diff = std::max(diff, (s.particles.momentum[i] - z[n + i]).norm());
      scale = std::max({scale, z[i].norm(), z[n + i].norm()});
    }
    worst = std::max(worst, diff / scale);
  };
  dynamics::integrate(dynamics::make_state(ps, u), dt, steps, dynamics::Method::implicit_midpoint, u, opts);
  r.seconds = t.seconds();
  r.measurements = {fmt("max relative phase-space deviation", worst, "<", 1e-8)};
  r.passed = worst < 1e-8;
  return r;
}

CriterionResult transverse_projector() {
  Timer t;
  CriterionResult r{5, "transverse projector: idempotence, zero divergence, q-annihilation", false, {}, 0.0};
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  const fields::Lattice lat(1.7, 16);
  fields::VectorFieldGrid f(lat);
  for (auto& comp : f.components)
    for (auto& v : comp) v = g(rng);
  const auto p1 = fields::transverse_project(f);
  const auto p2 = fields::transverse_project(p1);
  double diff = 0.0;
  for (int a = 0; a < 3; ++a)
    for (std::size_t k = 0; k < p1.components[a].size(); ++k)
      diff = std::max(diff, std::abs(p2.components[a][k] - p1.components[a][k]));
  const double idem = diff / p1.max_abs();
  const double div = fields::spectral_divergence_residual(fields::fourier(p1));

  const auto u = make_units();
  double annihilation = 0.0, kernel_null = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec3 q = random_unit(rng) * (0.5 + std::abs(g(rng)));
    const Vec3 p = random_unit(rng) * (0.5 + std::abs(g(rng)));
    const double alpha = g(rng);
    const double scale = u.hbar() * u.hbar() * u.inv_c2() * (2.0 * kPi / q.squaredNorm()) *
                         (alpha * q).norm() * p.norm();
    annihilation = std::max(annihilation, std::abs(ed::current_current_element(alpha * q, p, q, u, 1.0)) / scale);
    kernel_null = std::max(kernel_null, (ed::static_photon_kernel(q) * q).norm() * q.norm());
  }
  r.seconds = t.seconds();
  r.measurements = {fmt("idempotence defect", idem, "<=", 1e-12), fmt("divergence residual", div, "<=", 1e-12),
                    fmt("current-current element for k || q", annihilation, "<=", 1e-12),
                    fmt("photon kernel q-null defect", kernel_null, "<=", 1e-12)};
  r.passed = idem <= 1e-12 && div <= 1e-12 && annihilation <= 1e-12 && kernel_null <= 1e-12;
  return r;
}

CriterionResult meissner_compensation() {
  Timer t;
  CriterionResult r{6, "Meissner compensation: London ratio, k -> 0 limit, Drude normal", false, {}, 0.0};
  const auto u = make_units();
  double worst = 0.0;
  bool ideal = true;
  double limit_dev = 0.0;
  for (double lambda : {1.0, 0.37, 12.5}) {
    const auto m = response::ResponseModel::london(lambda, u);
    for (int i = 0; i <= 60; ++i) {
      const double k = std::pow(10.0, -4.0 + 0.1 * i);
      const double expect = -1.0 / (1.0 + k * k * lambda * lambda);
      worst = std::max(worst, std::abs(response::field_compensation_ratio(m, k) - expect));
    }
    const auto rep = response::meissner_diagnostic(m);
    ideal = ideal && rep.classification == response::MagneticClass::ideal_diamagnet;
    limit_dev = std::max(limit_dev, std::abs(rep.ratio.back() + 1.0));
  }
  const auto drude = response::ResponseModel::drude(1.0, 1.0, 1.0, 0.1, u);
  const auto drep = response::meissner_diagnostic(drude);
  const bool drude_normal = drep.classification == response::MagneticClass::normal;
  r.seconds = t.seconds();
  r.measurements = {fmt("max |ratio + 1/(1 + k^2 lambda^2)|", worst, "<=", 1e-12),
                    fmt("max |ratio(k -> 0) + 1|", limit_dev, "<", 1e-6),
                    std::string("London classified ideal-diamagnet: ") + (ideal ? "yes" : "no"),
                    std::string("Drude (gamma > 0) classified: ") + response::to_string(drep.classification)};
  r.passed = worst <= 1e-12 && limit_dev < 1e-6 && ideal && drude_normal;
  return r;
}

CriterionResult nyquist_limit() {
  Timer t;
  CriterionResult r{7, "Nyquist limit 4 R kB T via field formula and RC formula", false, {}, 0.0};
  const double kB = 1.0, T = 0.3;
  const auto u = make_units(UnitSystem::kDefaultC, 0.0, kB);
  const double n = 1.0, e = 1.0, m = 1.0, gamma = 0.5;
  const auto model = response::ResponseModel::drude(n, e, m, gamma, u);
  const noise::CircuitGeometry geom{2.0, 0.5};
  const double sigma0 = n * e * e / (m * gamma);
  const double R = geom.length / (geom.area * sigma0);
  const double target = 4.0 * R * kB * T;
  const double beta = u.beta(T);
  double worst_field = 0.0, worst_rc = 0.0;
  for (double w : {1e-7, 1e-8, 1e-9}) {
    worst_field = std::max(worst_field, std::abs(noise::voltage_noise(model, geom, w, beta) / target - 1.0));
    worst_rc = std::max(worst_rc, std::abs(noise::voltage_noise_rc(model, geom, w, beta) / target - 1.0));
  }
  r.seconds = t.seconds();
  r.measurements = {fmt("field formula relative error", worst_field, "<", 1e-9),
                    fmt("RC formula relative error", worst_rc, "<", 1e-9), note("4 R kB T", target)};
  r.passed = worst_field < 1e-9 && worst_rc < 1e-9;
  return r;
}

CriterionResult noise_identity() {
  Timer t;
  CriterionResult r{8, "Kubo-form noise equals symmetrized-correlator noise (random 50-dim systems)", false, {}, 0.0};
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd A(50, 50), B(50, 50);
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j) {
        A(i, j) = g(rng);
        B(i, j) = g(rng);
      }
    const Eigen::MatrixXd H = 0.5 * (A + A.transpose());
    const Eigen::MatrixXd X = 0.5 * (B + B.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    ed::Eigensystem eig{es.eigenvalues(), es.eigenvectors(), true};
    const double beta = 0.2 + 0.3 * trial;
    const double hbar = 1.0, s = 0.05;
    double peak = 0.0, diff = 0.0;
    for (int i = -400; i <= 400; ++i) {
      const double w = 0.05 * i;
      const double a = noise::noise_from_eigensystem(eig, X, w, beta, hbar, s);
      const double b = noise::noise_direct(eig, X, w, beta, hbar, s);
      peak = std::max(peak, std::abs(b));
      diff = std::max(diff, std::abs(a - b));
    }
    worst = std::max(worst, diff / peak);
  }
  r.seconds = t.seconds();
  r.measurements = {fmt("max relative difference", worst, "<", 1e-8)};
  r.passed = worst < 1e-8;
  return r;
}

CriterionResult ed_sanity() {
  Timer t;
  CriterionResult r{9, "ED sanity: one-particle spectrum, momentum blocks, first-order shift", false, {}, 0.0};
  const auto u = make_units();

  // One electron: the spectrum is the kinetic one.
  ed::BasisSpec one;
  one.kmax2 = 3;
  one.n_electrons = 1;
  const ed::PlaneWaveFockBasis b1(one);
  const auto h1 = ed::build_hamiltonian(b1, u);
  const auto e1 = ed::eigensolve(h1, b1.dimension());
  std::vector<double> kinetic;
  for (std::size_t o = 0; o < b1.orbitals().size(); ++o)
    kinetic.push_back(u.hbar() * u.hbar() * b1.wave_vector(o).squaredNorm() / 2.0);
  std::sort(kinetic.begin(), kinetic.end());
  double one_err = 0.0;
  for (std::size_t i = 0; i < kinetic.size(); ++i)
    one_err = std::max(one_err, std::abs(e1.values(static_cast<Eigen::Index>(i)) - kinetic[i]));

  // Two electrons in all spin sectors: no element couples different momenta or spins.
  ed::BasisSpec two;
  two.kmax2 = 2;
  two.n_electrons = 2;
  const ed::PlaneWaveFockBasis b2(two);
  const auto h2 = ed::build_hamiltonian(b2, u);
  std::size_t violations = 0;
  for (int k = 0; k < h2.matrix.outerSize(); ++k)
    for (ed::SparseMatrix::InnerIterator it(h2.matrix, k); it; ++it) {
      const auto i = static_cast<std::size_t>(it.row()), j = static_cast<std::size_t>(it.col());
      if (b2.total_momentum(i) != b2.total_momentum(j) || b2.spin_imbalance(i) != b2.spin_imbalance(j)) ++violations;
    }
  const double herm = h2.hermiticity_defect();

  // First order: E0(eps) - E0(0) = eps <Phi0|V|Phi0> + O(eps^2) for a closed shell.
  ed::BasisSpec shell;
  shell.kmax2 = 2;
  shell.n_electrons = 7;
  shell.n_up = 7;
  shell.total_momentum = ed::IVec3::Zero();
  const ed::PlaneWaveFockBasis b3(shell);
  const auto h0 = ed::build_hamiltonian(b3, u, {}, {true, false, false});
  const auto v = ed::build_hamiltonian(b3, u, {}, {false, true, true});
  const auto e0 = ed::eigensolve(h0, b3.dimension());
  // The unperturbed ground state is a single occupation state.
  Eigen::Index g0 = 0;
  e0.vectors.col(0).cwiseAbs().maxCoeff(&g0);
  const double gap = e0.values(1) - e0.values(0);
  const double expect = v.matrix.coeff(g0, g0);
  std::vector<double> eps{-2e-3, -1e-3, 1e-3, 2e-3};
  Eigen::MatrixXd A(4, 2);
  Eigen::VectorXd y(4);
  for (std::size_t i = 0; i < eps.size(); ++i) {
    ed::ManyBodyOperator h{h0.matrix + eps[i] * v.matrix, "scaled"};
    A(static_cast<Eigen::Index>(i), 0) = eps[i];
    A(static_cast<Eigen::Index>(i), 1) = eps[i] * eps[i];
    y(static_cast<Eigen::Index>(i)) = ed::eigensolve(h, 1).values(0) - e0.values(0);
  }
  const Eigen::Vector2d fit = A.colPivHouseholderQr().solve(y);
  const double first_order = std::abs(fit(0) - expect) / std::abs(expect);
  const double max_dim = static_cast<double>(std::max({b1.dimension(), b2.dimension(), b3.dimension()}));

  r.seconds = t.seconds();
  r.measurements = {fmt("one-electron max |E - hbar^2 k^2/2m|", one_err, "<=", 1e-12),
                    note("momentum/spin block violations", static_cast<double>(violations)),
                    fmt("hermiticity defect", herm, "<=", 1e-12),
                    fmt("relative first-order mismatch", first_order, "<", 1e-2),
                    note("unperturbed gap", gap),
                    note("largest basis dimension", max_dim),
                    fmt("runtime s", r.seconds, "<", 300)};
  r.passed = one_err <= 1e-12 && violations == 0 && herm <= 1e-12 && first_order < 1e-2 && gap > 0.0 &&
             max_dim <= 20000 && r.seconds < 300.0;
  return r;
}

CriterionResult grid_convergence() {
  Timer t;
  CriterionResult r{10, "grid current-current energy converges to the point-pair kernel", false, {}, 0.0};
  const auto u = make_units();
  const double L = 1.0, sep = 0.125;
  const Vec3 n = Vec3(1.0, 1.0, 0.3).normalized();
  const Vec3 center(0.4123, 0.4711, 0.5031);
  dynamics::ParticleSet ps;
  ps.add(1.0, 1.0, center + 0.5 * sep * n, {1.0, 0.0, 0.0});
  ps.add(1.0, 1.0, center - 0.5 * sep * n, {0.0, 1.0, 0.0});
  const Vec3 R = ps.position[0] - ps.position[1];
  const double a = u.inv_c2();
  const double bare = -a * ps.momentum[0].dot(dynamics::transverse_pair_kernel(R) * ps.momentum[1]);
  const double periodic =
      -a * ps.momentum[0].dot(periodic_transverse_kernel(R, L, 6.0 / L) * ps.momentum[1]);

  std::vector<double> err_bare, err_periodic;
  for (int nside : {32, 64, 128}) {
    const double e = fields::grid_darwin_pair_energy(ps, nside, L, u);
    err_bare.push_back(std::abs(e - bare) / std::abs(bare));
    err_periodic.push_back(std::abs(e - periodic) / std::abs(periodic));
  }
  auto decreasing = [](const std::vector<double>& v) { return v[1] < v[0] && v[2] < v[1]; };
  char buf[256];
  std::snprintf(buf, sizeof buf, "relative error vs point kernel (nside 32/64/128) = %.3e / %.3e / %.3e",
                err_bare[0], err_bare[1], err_bare[2]);
  r.measurements.push_back(buf);
  std::snprintf(buf, sizeof buf, "relative error vs periodic-image kernel = %.3e / %.3e / %.3e", err_periodic[0],
                err_periodic[1], err_periodic[2]);
  r.measurements.push_back(buf);
  r.measurements.push_back(std::string("strictly decreasing: ") +
                           (decreasing(err_bare) && decreasing(err_periodic) ? "yes" : "no"));
  r.seconds = t.seconds();
  r.passed = decreasing(err_bare) && decreasing(err_periodic);
  return r;
}

CriterionResult run_criterion(int id) {
  switch (id) {
    case 1: return kernel_equivalence();
    case 2: return hamiltonian_conservation();
    case 3: return inverse_c2_scaling();
    case 4: return coulomb_limit();
    case 5: return transverse_projector();
    case 6: return meissner_compensation();
    case 7: return nyquist_limit();
    case 8: return noise_identity();
    case 9: return ed_sanity();
    case 10: return grid_convergence();
    default: throw std::invalid_argument("no criterion " + std::to_string(id));
  }
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"conservation", "kernels", "response-algebra", "noise-identities",
                                              "ed", "all"};
  return names;
}

std::vector<int> suite_criteria(const std::string& suite) {
  if (suite == "conservation") return {2, 4};
  if (suite == "kernels") return {1, 5, 10};
  if (suite == "response-algebra") return {6};
  if (suite == "noise-identities") return {7, 8};
  if (suite == "ed") return {3, 9};
  if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  throw std::invalid_argument("unknown suite '" + suite + "'");
}

std::string format_result(const CriterionResult& r) {
  std::string out = r.passed ? "PASS" : "FAIL";
  char head[64];
  std::snprintf(head, sizeof head, "  criterion %2d  ", r.id);
  out += head;
  out += r.title;
  out += "  [";
  for (std::size_t i = 0; i < r.measurements.size(); ++i) out += (i ? "; " : "") + r.measurements[i];
  char tail[64];
  std::snprintf(tail, sizeof tail, "]  (%.2f s)", r.seconds);
  out += tail;
  return out;
}

}  // namespace darwin::verification
