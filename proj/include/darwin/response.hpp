#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "darwin/units.hpp"

namespace darwin::response {

using cplx = std::complex<double>;

/// Linear response of an isotropic medium.
///
/// kappa_L(k, w), kappa_T(k, w): current response to the external electric
/// field (retarded, time dependence e^{-i w t}).
/// kappa_static(k): transverse current response to the total static vector
/// potential, j = kappa(k) A; a finite kappa_static(0) signals superconductivity.
class ResponseModel {
 public:
  using Kernel = std::function<cplx(double k, double omega)>;
  using StaticKernel = std::function<double(double k)>;

  /// Vacuum: every coefficient zero.
  static ResponseModel zero(const UnitSystem& u);

  /// Local Drude metal, sigma(w) = n e^2 / (m (gamma - i w)). gamma = 0 is the
  /// collisionless plasma, whose static kernel is the London one with
  /// lambda = c / omega_p.
  static ResponseModel drude(double density, double charge, double mass, double gamma, const UnitSystem& u);

  /// London superconductor, kappa_static = -c / (4 pi lambda^2) for every k; the
  /// dynamic coefficients are those of the collisionless plasma with omega_p = c / lambda.
  static ResponseModel london(double lambda, const UnitSystem& u);

  /// User-supplied coefficients. Without a static kernel it is obtained as the
  /// w -> 0 limit of (i w / c) sigma_T(k, w) by extrapolation.
  static ResponseModel custom(std::string name, Kernel kappa_L, Kernel kappa_T, const UnitSystem& u,
                              StaticKernel kappa_static = {});

  cplx kappa_L(double k, double omega) const { return kappa_L_(k, omega); }
  cplx kappa_T(double k, double omega) const { return kappa_T_(k, omega); }
  double kappa_static(double k) const;

  const std::string& name() const { return name_; }
  const UnitSystem& units() const { return units_; }
  /// Built-in parameters for metadata, as (name, value) pairs.
  const std::vector<std::pair<std::string, double>>& parameters() const { return parameters_; }

 private:
  ResponseModel() = default;

  std::string name_;
  UnitSystem units_;
  Kernel kappa_L_;
  Kernel kappa_T_;
  StaticKernel kappa_static_;
  std::vector<std::pair<std::string, double>> parameters_;
};

/// sigma_L = kappa_L / (1 - i (4 pi / w) kappa_L). Throws StaticLimitError at w = 0.
cplx sigma_L(const ResponseModel& m, double k, double omega);

/// sigma_T = kappa_T / (1 + i (4 pi w / (c^2 k^2)) kappa_T). Throws InvalidArgument
/// for k = 0 and StaticLimitError for w = 0.
cplx sigma_T(const ResponseModel& m, double k, double omega);

/// On the light cone k = |w| / c: kappa_T / (1 + i (4 pi / w) kappa_T).
cplx sigma_T_onshell(const ResponseModel& m, double omega);

/// eps_L = 1 + (4 pi i / w) sigma_L.
cplx dielectric_L(const ResponseModel& m, double k, double omega);

/// [(4 pi / (c k^2)) kappa] / [1 - (4 pi / (c k^2)) kappa] with kappa = kappa_static(k).
/// Throws InvalidArgument for k <= 0 and ResonanceError on a vanishing denominator.
double field_compensation_ratio(const ResponseModel& m, double k);
double internal_vector_potential_ratio(const ResponseModel& m, double k);

/// Wave number in [k_lo, k_hi] where (4 pi / (c k^2)) kappa_static(k) = 1.
/// Throws ResonanceError if the bracket holds no sign change.
double locate_resonance(const ResponseModel& m, double k_lo, double k_hi);

enum class MagneticClass { ideal_diamagnet, normal };
const char* to_string(MagneticClass c);

struct MeissnerReport {
  MagneticClass classification = MagneticClass::normal;
  std::vector<double> k;
  std::vector<double> ratio;
};

/// Ratio on k = k_scale * 10^{-j}, j = 0..8; ideal diamagnet iff the last ratio
/// is within 1e-6 of -1.
MeissnerReport meissner_diagnostic(const ResponseModel& m, double k_scale = 1.0);

/// Value at w = 0 of f sampled on w_max / 2^j, j = 0..levels-1 (Neville).
cplx dc_extrapolate(const std::function<cplx(double)>& f, double omega_max, int levels = 8);

/// Smallest Re kappa_L and Re kappa_T over the sample grid; both must be
/// non-negative for a passive medium.
struct PassivityReport {
  double min_re_kappa_L;
  double min_re_kappa_T;
};
PassivityReport passivity_scan(const ResponseModel& m, const std::vector<double>& ks, const std::vector<double>& omegas);

}  // namespace darwin::response
