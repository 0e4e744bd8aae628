#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "darwin/units.hpp"

namespace darwin::dynamics {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// N point charges in Gaussian units with canonical momenta.
struct ParticleSet {
  std::vector<double> charge;
  std::vector<double> mass;
  std::vector<Vec3> position;
  std::vector<Vec3> momentum;

  std::size_t size() const { return charge.size(); }
  void add(double e, double m, const Vec3& r, const Vec3& p);
};

struct DarwinOptions {
  /// Minimum allowed pair separation. Closer pairs raise ProximityError; there
  /// is no softening.
  double r_min = 1e-6;
};

/// Checks sizes, positive masses, finite components and the r_min guard.
void validate(const ParticleSet& ps, const DarwinOptions& opts = {});

/// T(r) = (I + n n^T) / (2|r|). The Darwin pair energy is
/// -(e_i e_j / (c^2 m_i m_j)) p_i^T T(r_ij) p_j.
Mat3 transverse_pair_kernel(const Vec3& r, const DarwinOptions& opts = {});

struct EnergyTerms {
  double kinetic = 0.0;
  double coulomb = 0.0;
  double darwin = 0.0;
  double total() const { return kinetic + coulomb + darwin; }
};

EnergyTerms energy_terms(const ParticleSet& ps, const UnitSystem& u, const DarwinOptions& opts = {});

/// Darwin Hamiltonian: kinetic + pairwise Coulomb + pairwise 1/c^2 current term.
double hamiltonian(const ParticleSet& ps, const UnitSystem& u, const DarwinOptions& opts = {});

struct Derivatives {
  std::vector<Vec3> velocity;  // dH/dp_i
  std::vector<Vec3> force;     // -dH/dr_i
};

Derivatives eom(const ParticleSet& ps, const UnitSystem& u, const DarwinOptions& opts = {});

Vec3 total_momentum(const ParticleSet& ps);
Vec3 angular_momentum(const ParticleSet& ps);

struct InvariantSample {
  double time = 0.0;
  double energy = 0.0;
  Vec3 momentum = Vec3::Zero();
  Vec3 angular_momentum = Vec3::Zero();
};

struct SimulationState {
  ParticleSet particles;
  double time = 0.0;
  std::vector<InvariantSample> invariants_log;
};

/// Seeds the invariants log with the t = time sample.
SimulationState make_state(ParticleSet ps, const UnitSystem& u, double time = 0.0,
                           const DarwinOptions& opts = {});

enum class Method { implicit_midpoint, rk4 };

Method parse_method(const std::string& name);
const char* method_name(Method m);

struct IntegratorOptions {
  DarwinOptions darwin;
  double fixed_point_tolerance = 1e-12;
  int max_fixed_point_iterations = 50;
  /// Called after every completed step.
  std::function<void(const SimulationState&)> observer;
};

/// Advances the Hamiltonian flow by `steps` steps of size dt and appends one
/// invariants_log entry per step.
SimulationState integrate(SimulationState state, double dt, std::size_t steps, Method method,
                          const UnitSystem& u, const IntegratorOptions& opts = {});

}  // namespace darwin::dynamics
