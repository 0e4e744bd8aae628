#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "darwin/errors.hpp"
#include "darwin/fields.hpp"
#include "darwin/verification/oracles.hpp"
#include "doctest.h"

using namespace darwin;
using namespace darwin::fields;

namespace {

constexpr double pi = std::numbers::pi;

// Sum of a few random Fourier modes with |n_i| <= band.
VectorFieldGrid random_band_limited(const Lattice& lat, std::mt19937_64& rng, int band = 3) {
  std::uniform_int_distribution<int> n(-band, band);
  std::normal_distribution<double> g;
  VectorFieldGrid f(lat);
  for (int mode = 0; mode < 6; ++mode) {
    const Vec3 k = 2.0 * pi / lat.L * Vec3(n(rng), n(rng), n(rng));
    const Vec3 a(g(rng), g(rng), g(rng)), b(g(rng), g(rng), g(rng));
    for (int i = 0; i < lat.nside; ++i)
      for (int j = 0; j < lat.nside; ++j)
        for (int l = 0; l < lat.nside; ++l) {
          const double ph = k.dot(lat.node(i, j, l));
          f.set(i, j, l, f.at(i, j, l) + a * std::cos(ph) + b * std::sin(ph));
        }
  }
  return f;
}

double max_diff(const VectorFieldGrid& a, const VectorFieldGrid& b) {
  double m = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < a.components[c].size(); ++i)
      m = std::max(m, std::abs(a.components[c][i] - b.components[c][i]));
  return m;
}

double max_abs(const ScalarGrid& s) {
  double m = 0.0;
  for (double v : s.values) m = std::max(m, std::abs(v));
  return m;
}

template <class F>
ScalarGrid scalar_from(const Lattice& lat, F f) {
  ScalarGrid s(lat);
  for (int i = 0; i < lat.nside; ++i)
    for (int j = 0; j < lat.nside; ++j)
      for (int l = 0; l < lat.nside; ++l) s(i, j, l) = f(lat.node(i, j, l));
  return s;
}

template <class F>
VectorFieldGrid vector_from(const Lattice& lat, F f) {
  VectorFieldGrid v(lat);
  for (int i = 0; i < lat.nside; ++i)
    for (int j = 0; j < lat.nside; ++j)
      for (int l = 0; l < lat.nside; ++l) v.set(i, j, l, f(lat.node(i, j, l)));
  return v;
}

}  // namespace

TEST_SUITE("fields") {
  TEST_CASE("lattice invariants") {
    CHECK_THROWS_AS(Lattice(1.0, 3), InvalidArgument);
    CHECK_THROWS_AS(Lattice(1.0, 2), InvalidArgument);
    CHECK_THROWS_AS(Lattice(0.0, 8), InvalidArgument);
    const Lattice lat(2.0, 8);
    CHECK(lat.points() == 512);
    CHECK(lat.spacing() == 0.25);
  }

  TEST_CASE("fourier round trip") {
    std::mt19937_64 rng(1);
    const Lattice lat(1.0, 8);
    const auto f = random_band_limited(lat, rng);
    CHECK(max_diff(inverse(fourier(f)), f) < 1e-13);
  }

  TEST_CASE("transverse projection of a constant field is the identity") {
    const Lattice lat(1.0, 8);
    const auto f = vector_from(lat, [](const Vec3&) -> Vec3 { return Vec3(0.3, -1.0, 2.0); });
    CHECK(max_diff(transverse_project(f), f) < 1e-14);
  }

  TEST_CASE("a purely longitudinal mode is annihilated") {
    const Lattice lat(1.0, 16);
    const Vec3 k = 2.0 * pi * Vec3(1.0, 2.0, 0.0);
    const auto f = vector_from(lat, [&](const Vec3& x) -> Vec3 { return k.normalized() * std::sin(k.dot(x)); });
    CHECK(transverse_project(f).max_abs() < 1e-13);
    CHECK(max_diff(longitudinal_project(f), f) < 1e-13);
  }

  TEST_CASE("projector algebra on random fields") {
    std::mt19937_64 rng(2);
    const Lattice lat(1.3, 16);
    const auto f = random_band_limited(lat, rng);
    const auto p = transverse_project(f);
    const auto q = longitudinal_project(f);
    const double scale = f.max_abs();
    CHECK(max_diff(transverse_project(p), p) < 1e-13 * scale);
    CHECK(transverse_project(q).max_abs() < 1e-13 * scale);
    VectorFieldGrid sum(lat);
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < sum.components[c].size(); ++i)
        sum.components[c][i] = p.components[c][i] + q.components[c][i];
    CHECK(max_diff(sum, f) < 1e-13 * scale);
    CHECK(spectral_divergence_residual(fourier(p)) < 1e-12);
    CHECK(max_abs(divergence(p)) < 1e-11 * scale);
    CHECK(curl(q).max_abs() < 1e-11 * scale);
  }

  TEST_CASE("scalar potential spectral identities") {
    const Lattice lat(2.0, 16);
    CHECK(max_abs(scalar_potential(ScalarGrid(lat))) == 0.0);
    const Vec3 k = 2.0 * pi / lat.L * Vec3(1.0, -1.0, 2.0);
    const auto rho = scalar_from(lat, [&](const Vec3& x) { return std::cos(k.dot(x)); });
    const auto v = scalar_potential(rho);
    double err = 0.0;
    for (int i = 0; i < lat.nside; ++i)
      for (int j = 0; j < lat.nside; ++j)
        for (int l = 0; l < lat.nside; ++l)
          err = std::max(err, std::abs(v(i, j, l) - 4.0 * pi / k.squaredNorm() * rho(i, j, l)));
    CHECK(err < 1e-13);
  }

  TEST_CASE("non-neutral cells need the background flag") {
    const Lattice lat(1.0, 8);
    ScalarGrid rho(lat);
    rho(1, 2, 3) = 1.0;
    CHECK_THROWS_AS(scalar_potential(rho), InvalidArgument);
    PoissonOptions opts;
    opts.neutralizing_background = true;
    CHECK_NOTHROW(scalar_potential(rho, opts));
  }

  TEST_CASE("Gaussian dipole potential matches the reciprocal-space sum") {
    const Lattice lat(1.0, 32);
    const double sigma = 2.0 * lat.spacing();
    const std::vector<double> q{1.0, -1.0};
    const std::vector<verification::Vec3> r{{0.4, 0.45, 0.5}, {0.6, 0.55, 0.5}};
    const double norm = std::pow(2.0 * pi * sigma * sigma, -1.5);
    const auto rho = scalar_from(lat, [&](const Vec3& x) {
      double s = 0.0;
      for (std::size_t a = 0; a < q.size(); ++a)
        for (int i = -1; i <= 1; ++i)
          for (int j = -1; j <= 1; ++j)
            for (int l = -1; l <= 1; ++l) {
              const Vec3 d = x - r[a] - lat.L * Vec3(i, j, l);
              s += q[a] * norm * std::exp(-d.squaredNorm() / (2.0 * sigma * sigma));
            }
      return s;
    });
    PoissonOptions opts;
    opts.neutrality_tolerance = 1e-9;
    const auto v = scalar_potential(rho, opts);
    double err = 0.0, scale = 0.0;
    for (int i = 1; i < lat.nside; i += 7)
      for (int j = 2; j < lat.nside; j += 7)
        for (int l = 3; l < lat.nside; l += 7) {
          const double ref = verification::periodic_gaussian_potential(q, r, sigma, lat.L, lat.node(i, j, l));
          err = std::max(err, std::abs(v(i, j, l) - ref));
          scale = std::max(scale, std::abs(ref));
        }
    CHECK(err < 1e-6 * scale);
  }

  TEST_CASE("internal vector potential spectral identities") {
    const auto u = make_units(137.036);
    const Lattice lat(2.0, 16);
    CHECK(internal_vector_potential(VectorFieldGrid(lat), u).max_abs() == 0.0);
    const double k = 2.0 * pi / lat.L, a = 0.7;
    const auto j = vector_from(lat, [&](const Vec3& x) -> Vec3 { return Vec3(0.0, a * std::cos(k * x.x()), 0.0); });
    const auto A = internal_vector_potential(j, u);
    const double amp = 4.0 * pi * a / (u.c() * k * k);
    const auto expected = vector_from(lat, [&](const Vec3& x) -> Vec3 { return Vec3(0.0, amp * std::cos(k * x.x()), 0.0); });
    CHECK(max_diff(A, expected) < 1e-14 * amp);
    std::mt19937_64 rng(4);
    CHECK(spectral_divergence_residual(fourier(internal_vector_potential(random_band_limited(lat, rng), u))) < 1e-12);
  }

  TEST_CASE("curl identities") {
    const Lattice lat(1.0, 16);
    const Vec3 k = 2.0 * pi * Vec3(1.0, 2.0, -1.0);
    const auto s = scalar_from(lat, [&](const Vec3& x) { return std::sin(k.dot(x)); });
    CHECK(curl(gradient(s)).max_abs() < 1e-12);

    // (-sin(k y), sin(k x), 0) / k has curl_z = cos(k x) + cos(k y).
    const double q = 2.0 * pi / lat.L;
    const auto f = vector_from(lat, [&](const Vec3& x) -> Vec3 { return Vec3(-std::sin(q * x.y()), std::sin(q * x.x()), 0.0) / q; });
    const auto expected =
        vector_from(lat, [&](const Vec3& x) -> Vec3 { return Vec3(0.0, 0.0, std::cos(q * x.x()) + std::cos(q * x.y())); });
    CHECK(max_diff(curl(f), expected) < 1e-13);

    std::mt19937_64 rng(5);
    const auto r = random_band_limited(lat, rng);
    CHECK(max_abs(divergence(curl(r))) < 1e-13 * r.max_abs() * 2.0 * pi * 3.0);
  }

  TEST_CASE("cloud-in-cell deposition") {
    dynamics::ParticleSet one;
    one.add(2.5, 1.0, {0.25, 0.5, 0.75}, {1.0, 0.0, 0.0});
    const auto d = deposit_particles(one, 8, 1.0);
    const double cell = Lattice(1.0, 8).cell_volume();
    CHECK(d.rho(2, 4, 6) * cell == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(d.rho.integral() == doctest::Approx(2.5).epsilon(1e-14));

    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> pos(0.0, 1.0), mom(-1.0, 1.0);
    dynamics::ParticleSet ps;
    double total = 0.0;
    Vec3 current = Vec3::Zero();
    for (int i = 0; i < 7; ++i) {
      const double e = i % 2 ? -1.3 : 0.9;
      const Vec3 p(mom(rng), mom(rng), mom(rng));
      ps.add(e, 2.0, {pos(rng), pos(rng), pos(rng)}, p);
      total += e;
      current += e * p / 2.0;
    }
    const auto dep = deposit_particles(ps, 16, 1.0);
    CHECK(std::abs(dep.rho.integral() - total) < 1e-12);
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (double v : dep.current.components[c]) s += v;
      CHECK(std::abs(s * dep.current.lattice.cell_volume() - current[c]) < 1e-12);
    }
    dynamics::ParticleSet outside;
    outside.add(1.0, 1.0, {1.2, 0.5, 0.5}, {0.0, 0.0, 0.0});
    CHECK_THROWS_AS(deposit_particles(outside, 8, 1.0), InvalidArgument);
  }

  TEST_CASE("Parseval: real-space and Fourier current-current energies agree") {
    std::mt19937_64 rng(7);
    const auto u = make_units(3.0);
    const auto j = random_band_limited(Lattice(1.7, 16), rng, 5);
    const double a = transverse_current_energy(j, u);
    const double b = transverse_current_energy_real_space(j, u);
    CHECK(std::abs(a - b) < 1e-10 * std::abs(a));
  }

  TEST_CASE("magnetic field of smeared loops matches Biot-Savart") {
    const auto u = make_units();
    const Lattice lat(1.0, 64);
    const double sigma = 0.03;
    // Opposed coaxial loops of different radii with no net dipole (I r^2 cancels),
    // so the image sum converges and no mirror symmetry hides a sign error.
    const std::vector<verification::SmearedLoop> loops{{{0.5, 0.5, 0.45}, 0.1, 1.0},
                                                       {{0.5, 0.5, 0.55}, 0.08, -1.5625}};
    const auto j = verification::loop_current_density(loops, sigma, lat);
    const auto B = curl(internal_vector_potential(j, u));
    double err = 0.0, scale = 0.0;
    int samples = 0;
    for (int i = 16; i < 48; i += 4)
      for (int jj = 16; jj < 48; jj += 4)
        for (int l = 16; l < 48; l += 4) {
          const Vec3 x = lat.node(i, jj, l);
          bool far = true;
          for (const auto& loop : loops) {
            const Vec3 d = x - loop.center;
            const double rho = std::hypot(d.x(), d.y());
            far = far && std::hypot(rho - loop.radius, d.z()) > 4.0 * sigma;
          }
          if (!far) continue;
          const Vec3 ref = verification::biot_savart_field(loops, sigma, lat.L, x, u.c());
          err = std::max(err, (B.at(i, jj, l) - ref).cwiseAbs().maxCoeff());
          scale = std::max(scale, ref.cwiseAbs().maxCoeff());
          ++samples;
        }
    CHECK(samples > 100);
    CHECK(err < 1e-3 * scale);
  }

  TEST_CASE("grid pair energy converges to the periodic point kernel") {
    const auto u = make_units();
    const double L = 1.0, sep = 0.125;
    const Vec3 n = Vec3(1.0, 1.0, 0.3).normalized();
    const Vec3 center(0.4123, 0.4711, 0.5031);
    dynamics::ParticleSet ps;
    ps.add(1.0, 1.0, center + 0.5 * sep * n, {1.0, 0.0, 0.0});
    ps.add(1.0, 1.0, center - 0.5 * sep * n, {0.0, 1.0, 0.0});
    const Vec3 R = ps.position[0] - ps.position[1];
    const double ref =
        -u.inv_c2() * ps.momentum[0].dot(verification::periodic_transverse_kernel(R, L, 6.0) * ps.momentum[1]);
    const double e32 = std::abs(grid_darwin_pair_energy(ps, 32, L, u) - ref);
    const double e64 = std::abs(grid_darwin_pair_energy(ps, 64, L, u) - ref);
    CHECK(e64 < e32);
    CHECK(std::log2(e32 / e64) >= 1.0);
  }

  TEST_CASE("grid dumps") {
    std::mt19937_64 rng(8);
    const Lattice lat(1.5, 4);
    const auto f = random_band_limited(lat, rng, 1);
    std::ostringstream csv;
    write_grid_csv(csv, f);
    std::istringstream in(csv.str());
    std::string header, columns, first;
    std::getline(in, header);
    std::getline(in, columns);
    std::getline(in, first);
    CHECK(header.rfind("# L=1.5 nside=4", 0) == 0);
    CHECK(columns == "i,j,l,fx,fy,fz");
    CHECK(first.rfind("0,0,0,", 0) == 0);
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows + 1 == lat.points());

    std::stringstream bin;
    write_grid_binary(bin, f);
    CHECK(bin.str().size() == 8 + 4 + 4 + 8 + 3 * 8 * lat.points());
    CHECK(bin.str().substr(0, 8) == "DRWGRID1");
    const auto back = read_grid_binary(bin);
    CHECK(back.lattice == f.lattice);
    CHECK(max_diff(back, f) == 0.0);
  }
}
