#include "darwin/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "darwin/errors.hpp"

namespace darwin::dynamics {

// Pair geometry used below, with R = r_i - r_j, d = |R|, n = R/d and
// a_ij = e_i e_j / (c^2 m_i m_j):
//
//   U_ij = e_i e_j / d
//   D_ij = -(a_ij / 2) [ (p_i.p_j)/d + (p_i.R)(p_j.R)/d^3 ]  = -a_ij p_i^T T(R) p_j
//
// Hamilton's equations:
//   dH/dp_i = p_i/m_i - sum_{j != i} a_ij T(R_ij) p_j
//   dU/dR   = -e_i e_j R/d^3
//   dD/dR   = -(a/2) [ -(p_i.p_j) R/d^3 + (p_i (p_j.R) + p_j (p_i.R))/d^3
//                      - 3 (p_i.R)(p_j.R) R/d^5 ]
// and the pair gradient g = d(U+D)/dR enters force_i -= g, force_j += g.

void ParticleSet::add(double e, double m, const Vec3& r, const Vec3& p) {
  charge.push_back(e);
  mass.push_back(m);
  position.push_back(r);
  momentum.push_back(p);
}

namespace {

bool finite(const Vec3& v) { return v.allFinite(); }

double checked_distance(const ParticleSet& ps, std::size_t i, std::size_t j, double r_min) {
  const double d = (ps.position[i] - ps.position[j]).norm();
  if (!(d >= r_min)) throw ProximityError(i, j, d, r_min);
  return d;
}

}  // namespace

void validate(const ParticleSet& ps, const DarwinOptions& opts) {
  const auto n = ps.charge.size();
  if (ps.mass.size() != n || ps.position.size() != n || ps.momentum.size() != n)
    throw InvalidArgument("particle set arrays have inconsistent lengths");
  if (!(opts.r_min > 0.0)) throw InvalidArgument("r_min must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(ps.mass[i] > 0.0) || !std::isfinite(ps.mass[i]))
      throw InvalidArgument("particle " + std::to_string(i) + " has non-positive mass");
    if (!std::isfinite(ps.charge[i]) || !finite(ps.position[i]) || !finite(ps.momentum[i]))
      throw InvalidArgument("particle " + std::to_string(i) + " has non-finite components");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) checked_distance(ps, i, j, opts.r_min);
}

Mat3 transverse_pair_kernel(const Vec3& r, const DarwinOptions& opts) {
  const double d = r.norm();
  if (!(d >= opts.r_min))
    throw ProximityError("separation " + std::to_string(d) + " is below r_min = " +
                         std::to_string(opts.r_min));
  const Vec3 n = r / d;
  return (Mat3::Identity() + n * n.transpose()) / (2.0 * d);
}

EnergyTerms energy_terms(const ParticleSet& ps, const UnitSystem& u, const DarwinOptions& opts) {
  validate(ps, opts);
  EnergyTerms e;
  const auto n = ps.size();
  for (std::size_t i = 0; i < n; ++i) e.kinetic += ps.momentum[i].squaredNorm() / (2.0 * ps.mass[i]);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec3 R = ps.position[i] - ps.position[j];
      const double d = R.norm();
      const double qq = ps.charge[i] * ps.charge[j];
      e.coulomb += qq / d;
      const double a = qq * u.inv_c2() / (ps.mass[i] * ps.mass[j]);
      const Vec3 nij = R / d;
      const double bracket = ps.momentum[i].dot(ps.momentum[j]) +
                             ps.momentum[i].dot(nij) * ps.momentum[j].dot(nij);
      e.darwin -= a * bracket / (2.0 * d);
    }
  }
  return e;
}

double hamiltonian(const ParticleSet& ps, const UnitSystem& u, const DarwinOptions& opts) {
  return energy_terms(ps, u, opts).total();
}

Derivatives eom(const ParticleSet& ps, const UnitSystem& u, const DarwinOptions& opts) {
  validate(ps, opts);
  const auto n = ps.size();
  Derivatives out;
  out.velocity.resize(n);
  out.force.assign(n, Vec3::Zero());
  for (std::size_t i = 0; i < n; ++i) out.velocity[i] = ps.momentum[i] / ps.mass[i];

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec3 R = ps.position[i] - ps.position[j];
      const double d2 = R.squaredNorm();
      const double d = std::sqrt(d2);
      const double d3 = d2 * d;
      const double d5 = d3 * d2;
      const double qq = ps.charge[i] * ps.charge[j];
      const double a = qq * u.inv_c2() / (ps.mass[i] * ps.mass[j]);
      const Vec3& pi = ps.momentum[i];
      const Vec3& pj = ps.momentum[j];
      const double pipj = pi.dot(pj);
      const double piR = pi.dot(R);
      const double pjR = pj.dot(R);

      // T(R) p = (p/d + (p.R) R/d^3) / 2
      out.velocity[i] -= a * 0.5 * (pj / d + pjR * R / d3);
      out.velocity[j] -= a * 0.5 * (pi / d + piR * R / d3);

      const Vec3 grad_coulomb = -qq * R / d3;
      const Vec3 grad_darwin =
          -0.5 * a * (-pipj * R / d3 + (pi * pjR + pj * piR) / d3 - 3.0 * piR * pjR * R / d5);
      const Vec3 g = grad_coulomb + grad_darwin;
      out.force[i] -= g;
      out.force[j] += g;
    }
  }
  return out;
}

Vec3 total_momentum(const ParticleSet& ps) {
  Vec3 p = Vec3::Zero();
  for (const auto& pi : ps.momentum) p += pi;
  return p;
}

Vec3 angular_momentum(const ParticleSet& ps) {
  Vec3 l = Vec3::Zero();
  for (std::size_t i = 0; i < ps.size(); ++i) l += ps.position[i].cross(ps.momentum[i]);
  return l;
}

namespace {

InvariantSample sample(const ParticleSet& ps, double t, const UnitSystem& u, const DarwinOptions& o) {
  return {t, hamiltonian(ps, u, o), total_momentum(ps), angular_momentum(ps)};
}

// Flattened phase-space point (r_0, ..., r_{n-1}, p_0, ..., p_{n-1}).
using Phase = std::vector<Vec3>;

Phase pack(const ParticleSet& ps) {
  Phase z(ps.position);
  z.insert(z.end(), ps.momentum.begin(), ps.momentum.end());
  return z;
}

void unpack(const Phase& z, ParticleSet& ps) {
  const auto n = ps.size();
  std::copy(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n), ps.position.begin());
  std::copy(z.begin() + static_cast<std::ptrdiff_t>(n), z.end(), ps.momentum.begin());
}

Phase vector_field(ParticleSet& scratch, const Phase& z, const UnitSystem& u, const DarwinOptions& o) {
  unpack(z, scratch);
  auto d = eom(scratch, u, o);
  Phase f(std::move(d.velocity));
  f.insert(f.end(), d.force.begin(), d.force.end());
  return f;
}

// out = a + s * b
Phase axpy(const Phase& a, double s, const Phase& b) {
  Phase out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + s * b[k];
  return out;
}

Phase midpoint(const Phase& a, const Phase& b) {
  Phase out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = 0.5 * (a[k] + b[k]);
  return out;
}

double scaled_residual(const Phase& a, const Phase& b) {
  double diff = 0.0, scale = 1.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff = std::max(diff, (a[k] - b[k]).cwiseAbs().maxCoeff());
    scale = std::max(scale, a[k].cwiseAbs().maxCoeff());
  }
  return diff / scale;
}

Phase step_implicit_midpoint(ParticleSet& scratch, const Phase& z, double dt, const UnitSystem& u,
                             const IntegratorOptions& opts, std::size_t step) {
  Phase next = axpy(z, dt, vector_field(scratch, z, u, opts.darwin));
  for (int it = 0; it < opts.max_fixed_point_iterations; ++it) {
    Phase trial = axpy(z, dt, vector_field(scratch, midpoint(z, next), u, opts.darwin));
    const double res = scaled_residual(trial, next);
    next = std::move(trial);
    if (res <= opts.fixed_point_tolerance) return next;
  }
  throw IntegrationError(step, "implicit-midpoint fixed-point iteration did not converge in " +
                                   std::to_string(opts.max_fixed_point_iterations) + " iterations");
}

Phase step_rk4(ParticleSet& scratch, const Phase& z, double dt, const UnitSystem& u,
               const DarwinOptions& o) {
  const Phase k1 = vector_field(scratch, z, u, o);
  const Phase k2 = vector_field(scratch, axpy(z, 0.5 * dt, k1), u, o);
  const Phase k3 = vector_field(scratch, axpy(z, 0.5 * dt, k2), u, o);
  const Phase k4 = vector_field(scratch, axpy(z, dt, k3), u, o);
  Phase out(z.size());
  for (std::size_t k = 0; k < z.size(); ++k)
    out[k] = z[k] + (dt / 6.0) * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
  return out;
}

}  // namespace

SimulationState make_state(ParticleSet ps, const UnitSystem& u, double time, const DarwinOptions& opts) {
  SimulationState s;
  s.invariants_log.push_back(sample(ps, time, u, opts));
  s.particles = std::move(ps);
  s.time = time;
  return s;
}

Method parse_method(const std::string& name) {
  if (name == "implicit-midpoint") return Method::implicit_midpoint;
  if (name == "rk4") return Method::rk4;
  throw InvalidArgument("unknown integration method '" + name + "' (expected implicit-midpoint or rk4)");
}

const char* method_name(Method m) { return m == Method::rk4 ? "rk4" : "implicit-midpoint"; }

SimulationState integrate(SimulationState state, double dt, std::size_t steps, Method method,
                          const UnitSystem& u, const IntegratorOptions& opts) {
  if (!(dt > 0.0) || !std::isfinite(dt * static_cast<double>(steps)))
    throw InvalidArgument("dt must be positive and dt*steps finite");
  validate(state.particles, opts.darwin);

  ParticleSet scratch = state.particles;
  Phase z = pack(state.particles);
  const double t0 = state.time;
  for (std::size_t s = 0; s < steps; ++s) {
    try {
      z = method == Method::implicit_midpoint ? step_implicit_midpoint(scratch, z, dt, u, opts, s)
                                              : step_rk4(scratch, z, dt, u, opts.darwin);
      unpack(z, state.particles);
      validate(state.particles, opts.darwin);
    } catch (const ProximityError& e) {
      throw ProximityError("step " + std::to_string(s) + ": " + e.what());
    }
    // t0 + (s+1) dt rather than repeated addition keeps the clock exact for long runs.
    state.time = t0 + static_cast<double>(s + 1) * dt;
    state.invariants_log.push_back(sample(state.particles, state.time, u, opts.darwin));
    if (opts.observer) opts.observer(state);
  }
  return state;
}

}  // namespace darwin::dynamics
