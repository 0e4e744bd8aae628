#pragma once

// Independent reference computations used by the tests and by `darwin verify`.
// Nothing here calls into the library routine it is meant to check.

#include <Eigen/Dense>
#include <vector>

#include "darwin/dynamics.hpp"
#include "darwin/fields.hpp"

namespace darwin::verification {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pair kernel of the Coulomb-gauge current-current integral,
///   I/R + (1/4pi) int dx (1/|x - r_i|) d_a d_b (1/|x - r_j|),
/// by direct 3D quadrature. The integrand is integrated by parts to a product
/// of first derivatives and split by a partition of unity into two pieces, each
/// integrated in spherical coordinates around its own singular point.
Mat3 jackson_kernel_quadrature(const Vec3& separation);

/// Pair kernel summed over all periodic images in a cubic box of side L with
/// the k = 0 mode removed (Ewald split with parameter alpha).
Mat3 periodic_transverse_kernel(const Vec3& r, double L, double alpha, int real_shells = 3, int k_shells = 14);

/// Potential at x of periodic Gaussian charges (width sigma, zero total charge),
/// summed over reciprocal vectors up to |n| <= n_max.
double periodic_gaussian_potential(const std::vector<double>& q, const std::vector<Vec3>& r, double sigma,
                                   double L, const Vec3& x, int n_max = 40);

struct SmearedLoop {
  Vec3 center;
  double radius;
  double current;
  int segments = 256;  // loop axis along z
};

/// Current density of Gaussian-smeared loops (width sigma) sampled on the grid,
/// nearest periodic image only.
fields::VectorFieldGrid loop_current_density(const std::vector<SmearedLoop>& loops, double sigma,
                                             const fields::Lattice& lat);

/// Biot-Savart field of the smeared loops at x, summed over images |n_i| <= shells:
///   B = (1/c) sum I dl' x (x - x') g(|x - x'|) / |x - x'|^3,
/// where g is the Gaussian charge fraction enclosed within |x - x'|.
Vec3 biot_savart_field(const std::vector<SmearedLoop>& loops, double sigma, double L, const Vec3& x, double c,
                       int shells = 2);

/// Pure-Coulomb implicit-midpoint integrator; returns the phase-space point
/// (positions then momenta) after every step.
std::vector<std::vector<Vec3>> coulomb_reference_trajectory(const dynamics::ParticleSet& ps, double dt,
                                                            std::size_t steps, double tolerance = 1e-12);

/// Spectrum of two opposite-spin particles with Coulomb scattering only, in the
/// first-quantized momentum-pair basis over the orbitals |n|^2 <= kmax2.
Eigen::VectorXd coulomb_pair_spectrum(double L, int kmax2, double hbar, double mass, double charge);

}  // namespace darwin::verification
