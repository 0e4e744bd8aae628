#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <iosfwd>
#include <vector>

#include "darwin/dynamics.hpp"
#include "darwin/units.hpp"

namespace darwin::fields {

using Vec3 = Eigen::Vector3d;
using cplx = std::complex<double>;

/// Periodic cubic lattice: nside^3 points with spacing L/nside, x index slowest.
struct Lattice {
  double L = 1.0;
  int nside = 4;

  Lattice() = default;
  Lattice(double box, int n);

  std::size_t points() const { return static_cast<std::size_t>(nside) * nside * nside; }
  std::size_t spectral_points() const { return static_cast<std::size_t>(nside) * nside * (nside / 2 + 1); }
  double spacing() const { return L / nside; }
  double cell_volume() const { return spacing() * spacing() * spacing(); }
  std::size_t index(int i, int j, int l) const {
    return (static_cast<std::size_t>(i) * nside + j) * nside + l;
  }
  Vec3 node(int i, int j, int l) const { return spacing() * Vec3(i, j, l); }
  bool operator==(const Lattice& o) const { return L == o.L && nside == o.nside; }
};

/// Wave vector of the r2c spectral slot (i, j, l). `physical` uses the signed
/// integer frequency; `derivative` zeroes components sitting on the Nyquist
/// plane, which keeps odd-order spectral operators Hermitian for even nside.
struct ModeVectors {
  Vec3 physical;
  Vec3 derivative;
};
ModeVectors mode_vectors(const Lattice& lat, int i, int j, int l);

struct ScalarGrid {
  Lattice lattice;
  std::vector<double> values;

  explicit ScalarGrid(Lattice lat = {}) : lattice(lat), values(lat.points(), 0.0) {}
  double& operator()(int i, int j, int l) { return values[lattice.index(i, j, l)]; }
  double operator()(int i, int j, int l) const { return values[lattice.index(i, j, l)]; }
  double integral() const;
};

struct VectorFieldGrid {
  Lattice lattice;
  std::array<std::vector<double>, 3> components;

  explicit VectorFieldGrid(Lattice lat = {});
  Vec3 at(int i, int j, int l) const;
  void set(int i, int j, int l, const Vec3& v);
  double max_abs() const;
};

/// Half-spectrum (r2c layout, nside x nside x (nside/2+1)) of a real field.
struct SpectralScalar {
  Lattice lattice;
  std::vector<cplx> modes;
  explicit SpectralScalar(Lattice lat = {}) : lattice(lat), modes(lat.spectral_points()) {}
};

struct SpectralVector {
  Lattice lattice;
  std::array<std::vector<cplx>, 3> modes;
  explicit SpectralVector(Lattice lat = {});
};

// Transform convention, used by every operation in this module: the forward
// transform is unnormalized, f~(k) = sum_x f(x) e^{-i k.x}, and the inverse
// carries the 1/nside^3 factor.
SpectralScalar fourier(const ScalarGrid& f);
SpectralVector fourier(const VectorFieldGrid& f);
ScalarGrid inverse(const SpectralScalar& f);
VectorFieldGrid inverse(const SpectralVector& f);

/// Multiplicity of an r2c slot in a full-spectrum sum (1 on the l = 0 and
/// l = nside/2 planes, 2 elsewhere).
double half_spectrum_weight(const Lattice& lat, int l);

/// Divergence-free part via the projector (I - k k^T / k^2). Modes whose
/// derivative wave vector vanishes (k = 0 and pure Nyquist corners) pass through.
VectorFieldGrid transverse_project(const VectorFieldGrid& f);
VectorFieldGrid longitudinal_project(const VectorFieldGrid& f);
SpectralVector transverse_project(const SpectralVector& f);

/// max over modes of |k.f~(k)| / |k|, relative to the largest |f~(k)|.
double spectral_divergence_residual(const SpectralVector& f);

ScalarGrid divergence(const VectorFieldGrid& f);
VectorFieldGrid gradient(const ScalarGrid& f);
VectorFieldGrid curl(const VectorFieldGrid& f);

struct PoissonOptions {
  /// Subtract the mean charge (uniform neutralizing background) instead of
  /// rejecting a non-neutral cell.
  bool neutralizing_background = false;
  double neutrality_tolerance = 1e-12;
};

/// Solves -lap V = 4 pi rho spectrally with the k = 0 mode set to zero.
ScalarGrid scalar_potential(const ScalarGrid& rho, const PoissonOptions& opts = {});

/// A~(k) = 4 pi / (c k^2) * P(k) j~(k), retardation neglected.
VectorFieldGrid internal_vector_potential(const VectorFieldGrid& j, const UnitSystem& u);

/// Point charges with canonical momenta; the current is i(x) = sum (e/m) p delta(x - r).
using PointCurrentSet = dynamics::ParticleSet;

struct Deposit {
  ScalarGrid rho;
  VectorFieldGrid current;
};

/// Cloud-in-cell deposition of charge and current densities on the periodic box
/// [0, L)^3. Throws InvalidArgument for particles outside the box.
Deposit deposit_particles(const PointCurrentSet& ps, int nside, double L);

/// -(1/2c^2) int int j_perp(x).j_perp(x') / |x - x'|, evaluated in Fourier space
/// (self-interaction included).
double transverse_current_energy(const VectorFieldGrid& j, const UnitSystem& u);

/// Same quantity as -(1/2c) int j . A_int dx summed in real space.
double transverse_current_energy_real_space(const VectorFieldGrid& j, const UnitSystem& u);

/// Pairwise part of the grid current-current energy: the energy of all
/// particles minus the self-energy of each deposited particle.
double grid_darwin_pair_energy(const PointCurrentSet& ps, int nside, double L, const UnitSystem& u);

// Grid dumps.
//
// CSV: comment header "# L=<L> nside=<n> order=x,y,z components=fx,fy,fz",
// then one row "i,j,l,fx,fy,fz" per node with l fastest.
//
// Binary (little-endian): 8-byte magic "DRWGRID1", uint32 nside, uint32
// component count (3), float64 L, then component-major float64 values, each
// component in (i, j, l) order with l fastest.
void write_grid_csv(std::ostream& os, const VectorFieldGrid& f);
void write_grid_binary(std::ostream& os, const VectorFieldGrid& f);
VectorFieldGrid read_grid_binary(std::istream& is);

}  // namespace darwin::fields
