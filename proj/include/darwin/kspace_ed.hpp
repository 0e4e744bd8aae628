#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "darwin/units.hpp"

namespace darwin::ed {

using IVec3 = Eigen::Vector3i;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using SparseMatrix = Eigen::SparseMatrix<double>;
using cplx = std::complex<double>;

/// Plane-wave orbital: wave vector (2 pi / L) * n with spin +1 or -1.
struct Orbital {
  IVec3 n;
  int spin;
};

struct BasisSpec {
  double L = 2.0 * 3.14159265358979323846;
  /// Orbitals with |n|^2 <= kmax2.
  int kmax2 = 1;
  int n_electrons = 1;
  /// Fixed spin populations; when unset every split of n_electrons is included.
  std::optional<int> n_up;
  std::optional<int> n_down;
  /// Keep only occupation states with this total integer momentum.
  std::optional<IVec3> total_momentum;
  std::size_t dimension_cap = 20000;
};

/// Fermionic occupation-number basis over a closed set of plane-wave orbitals
/// (the set contains -k with every k). States are bitsets with exactly
/// n_electrons set bits, sorted ascending; up-spin orbitals come first.
class PlaneWaveFockBasis {
 public:
  explicit PlaneWaveFockBasis(const BasisSpec& spec);

  double box() const { return L_; }
  double volume() const { return L_ * L_ * L_; }
  double dk() const;
  int n_electrons() const { return n_electrons_; }
  const std::vector<Orbital>& orbitals() const { return orbitals_; }
  Vec3 wave_vector(std::size_t orbital) const { return dk() * orbitals_[orbital].n.cast<double>(); }
  std::optional<std::size_t> find_orbital(const IVec3& n, int spin) const;

  std::size_t dimension() const { return states_.size(); }
  std::uint64_t state(std::size_t idx) const { return states_[idx]; }
  std::optional<std::size_t> index_of(std::uint64_t bits) const;

  IVec3 total_momentum(std::size_t idx) const;
  /// n_up - n_down of a basis state.
  int spin_imbalance(std::size_t idx) const;

 private:
  double L_;
  int n_electrons_;
  int radius_;
  std::vector<Orbital> orbitals_;
  std::vector<int> lookup_;  // (2R+1)^3 per spin, -1 where |n|^2 > kmax2
  std::vector<std::uint64_t> states_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

struct ParticleSpecies {
  double charge = 1.0;
  double mass = 1.0;
};

/// Hermitian operator over an occupation basis.
struct ManyBodyOperator {
  SparseMatrix matrix;
  std::string label;

  double hermiticity_defect() const;
  std::size_t dimension() const { return static_cast<std::size_t>(matrix.rows()); }
};

/// Pair-scattering weight 4 pi e^2 / (Omega q^2). Throws ExcludedModeError for q = 0.
double coulomb_element(const Vec3& q, double volume, double charge = 1.0);

/// -(e^2 hbar^2 / (m^2 c^2 Omega)) (2 pi / q^2) k^T (I - q q^T / q^2) p.
double current_current_element(const Vec3& k, const Vec3& p, const Vec3& q, const UnitSystem& u,
                               double volume, const ParticleSpecies& species = {});

/// Retardation-free transverse photon propagator (1/q^2)(I - q q^T / q^2).
Mat3 static_photon_kernel(const Vec3& q);

struct HamiltonianTerms {
  bool kinetic = true;
  bool coulomb = true;
  bool current_current = true;
};

/// Kinetic energy plus the normal-ordered Coulomb and transverse current-current
/// interactions, q = 0 excluded (neutralizing background):
///   sum_{sigma,sigma'} sum_{k,p,q != 0} W(k,p,q) a+_{k s} a+_{p s'} a_{p+q s'} a_{k-q s}
/// with W = 2 pi e^2 / (Omega q^2) + current_current_element(k, p, q).
ManyBodyOperator build_hamiltonian(const PlaneWaveFockBasis& basis, const UnitSystem& u,
                                   const ParticleSpecies& species = {}, const HamiltonianTerms& terms = {});

struct Eigensystem {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // dimension x count, columns match values
  bool complete = false;
};

/// Lowest `count` eigenpairs. The matrix is split into its connected blocks
/// (momentum and spin sectors fall out automatically) and each block is solved
/// densely. Throws SolverError if a residual exceeds 1e-10 ||H||.
Eigensystem eigensolve(const ManyBodyOperator& op, std::size_t count);

/// j~_a(k) = (e hbar / 2m) sum_{p,sigma} (2p - k)_a a+_{p-k,sigma} a_{p,sigma}, with
/// j~(k)^dagger = j~(-k).
SparseMatrix current_operator(const PlaneWaveFockBasis& basis, const IVec3& k, int component,
                              const UnitSystem& u, const ParticleSpecies& species = {});

enum class Polarization { longitudinal, transverse };

struct KuboParams {
  double beta = 1.0;
  /// Adiabatic switching rate; retarded convention (omega + i s).
  double s = 1e-2;
  Polarization polarization = Polarization::longitudinal;
};

/// Response coefficient kappa(k, omega) of the current to the external
/// electric field from a complete eigensystem by Lehmann summation. The
/// transverse value is averaged over the two polarizations perpendicular to k.
cplx kubo_kappa(const PlaneWaveFockBasis& basis, const Eigensystem& eig, const IVec3& k, double omega,
                const KuboParams& params, const UnitSystem& u, const ParticleSpecies& species = {});

/// Richardson extrapolation s -> 0 over s, s/2, ..., s/2^(levels-1).
cplx kubo_kappa_extrapolated(const PlaneWaveFockBasis& basis, const Eigensystem& eig, const IVec3& k,
                             double omega, const KuboParams& params, int levels, const UnitSystem& u,
                             const ParticleSpecies& species = {});

}  // namespace darwin::ed
