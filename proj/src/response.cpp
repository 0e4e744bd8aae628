#include "darwin/response.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "darwin/errors.hpp"

namespace darwin::response {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx I{0.0, 1.0};

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + " must be finite");
}

}  // namespace

ResponseModel ResponseModel::zero(const UnitSystem& u) {
  ResponseModel m;
  m.name_ = "zero";
  m.units_ = u;
  m.kappa_L_ = [](double, double) { return cplx{}; };
  m.kappa_T_ = [](double, double) { return cplx{}; };
  m.kappa_static_ = [](double) { return 0.0; };
  return m;
}

ResponseModel ResponseModel::drude(double density, double charge, double mass, double gamma, const UnitSystem& u) {
  if (!(density > 0.0) || !(mass > 0.0) || !(gamma >= 0.0) || !std::isfinite(density * mass * gamma * charge))
    throw InvalidArgument("drude model needs density > 0, mass > 0, gamma >= 0");
  const double wp2 = 4.0 * kPi * density * charge * charge / mass;
  const double c2 = u.c() * u.c();
  ResponseModel m;
  m.name_ = "drude";
  m.units_ = u;
  // sigma = i wp^2 / (4 pi (w + i gamma)); the closed forms below avoid 0/0 at w = 0.
  m.kappa_L_ = [wp2, gamma](double, double w) {
    return I * wp2 * w / (4.0 * kPi * (w * (w + I * gamma) - wp2));
  };
  m.kappa_T_ = [wp2, gamma, c2](double k, double w) {
    return I * wp2 * c2 * k * k / (4.0 * kPi * (c2 * k * k * (w + I * gamma) + wp2 * w));
  };
  const double ks = gamma == 0.0 ? -wp2 / (4.0 * kPi * u.c()) : 0.0;
  m.kappa_static_ = [ks](double) { return ks; };
  m.parameters_ = {{"density", density}, {"charge", charge}, {"mass", mass}, {"gamma", gamma},
                   {"plasma_frequency", std::sqrt(wp2)}};
  return m;
}

ResponseModel ResponseModel::london(double lambda, const UnitSystem& u) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("london penetration depth must be positive");
  const double wp = u.c() / lambda;
  // Unit density and mass with e^2 chosen to give omega_p = c / lambda.
  ResponseModel m = drude(1.0, std::sqrt(wp * wp / (4.0 * kPi)), 1.0, 0.0, u);
  m.name_ = "london";
  const double ks = -u.c() / (4.0 * kPi * lambda * lambda);
  m.kappa_static_ = [ks](double) { return ks; };
  m.parameters_ = {{"lambda", lambda}, {"plasma_frequency", wp}};
  return m;
}

ResponseModel ResponseModel::custom(std::string name, Kernel kappa_L, Kernel kappa_T, const UnitSystem& u,
                                    StaticKernel kappa_static) {
  if (!kappa_L || !kappa_T) throw InvalidArgument("custom response model needs both kappa_L and kappa_T");
  ResponseModel m;
  m.name_ = std::move(name);
  m.units_ = u;
  m.kappa_L_ = std::move(kappa_L);
  m.kappa_T_ = std::move(kappa_T);
  m.kappa_static_ = std::move(kappa_static);
  return m;
}

double ResponseModel::kappa_static(double k) const {
  if (kappa_static_) return kappa_static_(k);
  const double c = units_.c();
  const double w_max = 1e-3 * std::max(c * k, 1.0);
  const cplx v = dc_extrapolate([&](double w) { return I * w / c * sigma_T(*this, k, w); }, w_max, 8);
  return v.real();
}

cplx sigma_L(const ResponseModel& m, double k, double omega) {
  require_finite(omega, "omega");
  if (omega == 0.0) throw StaticLimitError("sigma_L");
  const cplx kap = m.kappa_L(k, omega);
  return kap / (1.0 - I * (4.0 * kPi / omega) * kap);
}

cplx sigma_T(const ResponseModel& m, double k, double omega) {
  require_finite(omega, "omega");
  if (!(k != 0.0) || !std::isfinite(k)) throw InvalidArgument("sigma_T needs a finite k != 0");
  if (omega == 0.0) throw StaticLimitError("sigma_T");
  const double c = m.units().c();
  const cplx kap = m.kappa_T(k, omega);
  return kap / (1.0 + I * (4.0 * kPi * omega / (c * c * k * k)) * kap);
}

cplx sigma_T_onshell(const ResponseModel& m, double omega) {
  require_finite(omega, "omega");
  if (omega == 0.0) throw StaticLimitError("sigma_T_onshell");
  const cplx kap = m.kappa_T(std::abs(omega) / m.units().c(), omega);
  return kap / (1.0 + I * (4.0 * kPi / omega) * kap);
}

cplx dielectric_L(const ResponseModel& m, double k, double omega) {
  return 1.0 + I * (4.0 * kPi / omega) * sigma_L(m, k, omega);
}

double field_compensation_ratio(const ResponseModel& m, double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidArgument("compensation ratio needs k > 0");
  const double x = 4.0 * kPi / (m.units().c() * k * k) * m.kappa_static(k);
  const double den = 1.0 - x;
  if (std::abs(den) <= 1e-12 * std::max(1.0, std::abs(x)))
    throw ResonanceError("compensation ratio denominator vanishes at k = " + std::to_string(k));
  return x / den;
}

double internal_vector_potential_ratio(const ResponseModel& m, double k) { return field_compensation_ratio(m, k); }

double locate_resonance(const ResponseModel& m, double k_lo, double k_hi) {
  if (!(k_lo > 0.0) || !(k_hi > k_lo)) throw InvalidArgument("resonance bracket needs 0 < k_lo < k_hi");
  const double c = m.units().c();
  auto f = [&](double k) { return 1.0 - 4.0 * kPi / (c * k * k) * m.kappa_static(k); };
  const double flo = f(k_lo), fhi = f(k_hi);
  if (flo == 0.0) return k_lo;
  if (fhi == 0.0) return k_hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw ResonanceError("no compensation-ratio pole inside the bracket");
  std::uintmax_t iters = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-15 * std::max(std::abs(a), std::abs(b)); };
  const auto r = boost::math::tools::toms748_solve(f, k_lo, k_hi, flo, fhi, tol, iters);
  return 0.5 * (r.first + r.second);
}

const char* to_string(MagneticClass c) { return c == MagneticClass::ideal_diamagnet ? "ideal-diamagnet" : "normal"; }

MeissnerReport meissner_diagnostic(const ResponseModel& m, double k_scale) {
  if (!(k_scale > 0.0)) throw InvalidArgument("k_scale must be positive");
  MeissnerReport r;
  for (int j = 0; j <= 8; ++j) {
    const double k = k_scale * std::pow(10.0, -j);
    r.k.push_back(k);
    r.ratio.push_back(field_compensation_ratio(m, k));
  }
  r.classification = std::abs(r.ratio.back() + 1.0) < 1e-6 ? MagneticClass::ideal_diamagnet : MagneticClass::normal;
  return r;
}

cplx dc_extrapolate(const std::function<cplx(double)>& f, double omega_max, int levels) {
  if (!(omega_max > 0.0) || levels < 1) throw InvalidArgument("dc_extrapolate needs omega_max > 0 and levels >= 1");
  const auto n = static_cast<std::size_t>(levels);
  std::vector<double> w(n);
  std::vector<cplx> t(n);
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = omega_max / std::pow(2.0, static_cast<double>(j));
    t[j] = f(w[j]);
  }
  for (std::size_t m = 1; m < n; ++m)
    for (std::size_t j = n - 1; j >= m; --j) t[j] = (w[j - m] * t[j] - w[j] * t[j - 1]) / (w[j - m] - w[j]);
  return t.back();
}

PassivityReport passivity_scan(const ResponseModel& m, const std::vector<double>& ks, const std::vector<double>& omegas) {
  PassivityReport r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (double k : ks)
    for (double w : omegas) {
      r.min_re_kappa_L = std::min(r.min_re_kappa_L, m.kappa_L(k, w).real());
      r.min_re_kappa_T = std::min(r.min_re_kappa_T, m.kappa_T(k, w).real());
    }
  return r;
}

}  // namespace darwin::response
