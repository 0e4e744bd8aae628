#include "darwin/noise.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "darwin/errors.hpp"

namespace darwin::noise {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx I{0.0, 1.0};

void require_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive and finite");
}

void require_geometry(const CircuitGeometry& g) {
  if (!(g.length > 0.0) || !(g.area > 0.0) || !std::isfinite(g.length * g.area))
    throw InvalidArgument("circuit length and cross-section must be positive");
}

void require_volume(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("volume must be positive");
}

}  // namespace

const char* to_string(SpectrumKind k) {
  switch (k) {
    case SpectrumKind::longitudinal_field: return "longitudinal-field";
    case SpectrumKind::transverse_field: return "transverse-field";
    case SpectrumKind::voltage: return "voltage";
    case SpectrumKind::photon_number: return "photon-number";
  }
  return "unknown";
}

double coth_weight(double omega, double beta, double hbar) {
  require_beta(beta);
  if (hbar == 0.0) return 4.0 / beta;
  const double x = beta * hbar * omega;
  if (std::abs(x) < 1e-6) return 4.0 / beta * (1.0 + x * x / 12.0);
  return 2.0 * hbar * omega / std::tanh(0.5 * x);
}

double thermal_factor(double omega, double beta, double hbar) {
  if (omega == 0.0) throw StaticLimitError("thermal factor hbar coth(beta hbar w / 2)");
  return coth_weight(omega, beta, hbar) / (2.0 * omega);
}

double field_noise_L(const response::ResponseModel& m, double k, double omega, double beta, double volume) {
  require_volume(volume);
  const cplx eps = response::dielectric_L(m, k, omega);
  return -8.0 * kPi * volume * thermal_factor(omega, beta, m.units().hbar()) * (1.0 / eps).imag();
}

double field_noise_L_kappa_form(const response::ResponseModel& m, double k, double omega, double beta,
                                double volume) {
  require_volume(volume);
  if (omega == 0.0) throw StaticLimitError("field_noise_L");
  return 8.0 * kPi * volume * thermal_factor(omega, beta, m.units().hbar()) * (4.0 * kPi / omega) *
         m.kappa_L(k, omega).real();
}

double field_noise_T(const response::ResponseModel& m, double omega, double beta, double volume) {
  require_volume(volume);
  if (!(omega > 0.0)) throw InvalidArgument("transverse field noise is defined on the light cone for omega > 0");
  const cplx s = response::sigma_T_onshell(m, omega);
  return 8.0 * kPi * volume * thermal_factor(omega, beta, m.units().hbar()) *
         (1.0 / (1.0 - I * (4.0 * kPi / omega) * s)).imag();
}

double resistance(const response::ResponseModel& m, const CircuitGeometry& g, double omega) {
  require_geometry(g);
  const double re = response::sigma_L(m, 0.0, omega).real();
  if (!(re > 0.0))
    throw NonphysicalModelError("Re sigma_L = " + std::to_string(re) + " <= 0 at omega = " + std::to_string(omega));
  return g.length / (g.area * re);
}

double capacity(const response::ResponseModel& m, const CircuitGeometry& g, double omega) {
  require_geometry(g);
  return g.area / (4.0 * kPi * g.length) * response::dielectric_L(m, 0.0, omega).real();
}

cplx impedance(const response::ResponseModel& m, const CircuitGeometry& g, double omega) {
  return 1.0 / (1.0 / resistance(m, g, omega) + I * omega * capacity(m, g, omega));
}

double voltage_noise(const response::ResponseModel& m, const CircuitGeometry& g, double omega, double beta) {
  require_geometry(g);
  const cplx eps = response::dielectric_L(m, 0.0, omega);
  return -8.0 * kPi * thermal_factor(omega, beta, m.units().hbar()) * (g.length / g.area) * (1.0 / eps).imag();
}

double voltage_noise_rc(const response::ResponseModel& m, const CircuitGeometry& g, double omega, double beta) {
  const double R = resistance(m, g, omega);
  const double C = capacity(m, g, omega);
  const double wrc = omega * R * C;
  return coth_weight(omega, beta, m.units().hbar()) * R / (1.0 + wrc * wrc);
}

double photon_number_noise(const Correlator& corr, double decay_time, double k, double omega, double beta,
                           const UnitSystem& u, const QuadratureTolerances& tol) {
  require_beta(beta);
  if (!corr) throw InvalidArgument("photon_number_noise needs a correlator");
  if (!(k > 0.0) || !(omega > 0.0)) throw InvalidArgument("photon_number_noise needs k > 0 and omega > 0");
  if (!(decay_time > 0.0) || !std::isfinite(decay_time)) throw InvalidArgument("decay_time must be positive");
  if (!(u.hbar() > 0.0)) throw InvalidArgument("photon_number_noise requires hbar > 0");

  const double hb = u.hbar();
  const double ck = u.c() * k;
  const double x = beta * hb * ck;
  const double horizon = 60.0 * decay_time;

  const double c0 = std::max(std::abs(corr(0.0, 0.0)), std::abs(corr(0.0, 0.5 * beta)));
  const double tail = std::max(std::abs(corr(horizon, 0.0)), std::abs(corr(horizon, 0.5 * beta)));
  if (!std::isfinite(c0) || !std::isfinite(tail)) throw DivergenceError("correlator is not finite");
  if (c0 == 0.0 && tail == 0.0) return 0.0;
  if (tail > 1e-12 * c0)
    throw DivergenceError("correlator has not decayed after 60 decay times (|C(T)|/|C(0)| = " +
                          std::to_string(tail / std::max(c0, 1e-300)) + ")");

  // Stable forms of (1 + N) e^{-hbar ck l} and N e^{hbar ck l}.
  const double denom = -std::expm1(-x);
  using GL = boost::math::quadrature::gauss<double, 30>;
  // The weights peak at l = 0 and l = beta with width 1 / (hbar ck); panels are graded toward both ends.
  std::vector<double> panels{0.0};
  {
    std::vector<double> half;
    for (double h = 1.0 / (hb * ck); h < 0.5 * beta; h *= 2.0) half.push_back(h);
    for (double h : half) panels.push_back(h);
    panels.push_back(0.5 * beta);
    for (auto it = half.rbegin(); it != half.rend(); ++it) panels.push_back(beta - *it);
    panels.push_back(beta);
  }
  auto lambda_integral = [&](double t) {
    const cplx e1 = std::exp(-I * (omega - ck) * t);
    const cplx e2 = std::exp(-I * (omega + ck) * t);
    auto integrand = [&](double l) {
      const cplx c = corr(t, l);
      return (c * (e1 * std::exp(-hb * ck * l) + e2 * std::exp(hb * ck * l - x)) / denom);
    };
    cplx sum{};
    for (std::size_t p = 0; p + 1 < panels.size(); ++p) {
      const double a = panels[p], b = panels[p + 1];
      sum += cplx(GL::integrate([&](double l) { return integrand(l).real(); }, a, b),
                  GL::integrate([&](double l) { return integrand(l).imag(); }, a, b));
    }
    return sum;
  };
  auto f = [&](double t) { return (std::exp(-I * omega * t) * lambda_integral(t)).real(); };

  const double fastest = 2.0 * omega + ck;
  const double h = std::min(decay_time, kPi / fastest);
  const double segments = std::ceil(horizon / h);
  if (segments > 1e6) throw InvalidArgument("photon_number_noise: integrand too oscillatory for the decay time");
  const auto n = static_cast<std::size_t>(segments);
  const double step = horizon / static_cast<double>(n);
  double total = 0.0, err_total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, static_cast<double>(s) * step, static_cast<double>(s + 1) * step, 15, tol.relative, &err);
    err_total += std::abs(err);
  }
  if (err_total > std::max(tol.absolute, tol.relative * std::abs(total)) * 10.0)
    throw ComputationError("photon_number_noise: quadrature error estimate " + std::to_string(err_total) +
                           " exceeds tolerance");
  const double coth = 1.0 / std::tanh(0.5 * beta * hb * omega);
  return 2.0 * coth / (ck * omega) * total;
}

namespace {

struct Thermal {
  Eigen::VectorXd p;
  Eigen::MatrixXd X;  // eigenbasis
};

Thermal prepare(const ed::Eigensystem& eig, const Eigen::MatrixXd& X, double beta, double hbar) {
  require_beta(beta);
  if (!(hbar > 0.0)) throw InvalidArgument("spectral noise from an eigensystem requires hbar > 0");
  const auto dim = eig.vectors.rows();
  if (!eig.complete || eig.vectors.cols() != dim || eig.values.size() != dim)
    throw InvalidArgument("noise from an eigensystem needs the complete eigensystem");
  if (X.rows() != dim || X.cols() != dim) throw InvalidArgument("observable dimension does not match the eigensystem");
  if ((X - X.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, X.cwiseAbs().maxCoeff()))
    throw InvalidArgument("observable must be Hermitian");
  Thermal t;
  const double e0 = eig.values.minCoeff();
  t.p = (-beta * (eig.values.array() - e0)).exp().matrix();
  t.p /= t.p.sum();
  t.X = eig.vectors.transpose() * X * eig.vectors;
  return t;
}

}  // namespace

std::vector<SpectralLine> noise_lines_direct(const ed::Eigensystem& eig, const Eigen::MatrixXd& X, double beta,
                                             double hbar) {
  const Thermal th = prepare(eig, X, beta, hbar);
  const auto dim = th.X.rows();
  std::vector<SpectralLine> lines;
  // <X(t)X> + <X X(t)> = sum p_m |X_mn|^2 (e^{-i w_nm t} + e^{i w_nm t}).
  for (Eigen::Index m = 0; m < dim; ++m)
    for (Eigen::Index n = 0; n < dim; ++n) {
      const double w = 2.0 * th.p(m) * th.X(m, n) * th.X(m, n);
      if (w == 0.0) continue;
      const double f = (eig.values(n) - eig.values(m)) / hbar;
      lines.push_back({f, w});
      lines.push_back({-f, w});
    }
  return lines;
}

std::vector<SpectralLine> noise_lines_kubo(const ed::Eigensystem& eig, const Eigen::MatrixXd& X, double beta,
                                           double hbar) {
  const Thermal th = prepare(eig, X, beta, hbar);
  const auto dim = th.X.rows();
  std::vector<SpectralLine> lines;
  // int_0^beta dl e^{-Delta l} = (1 - e^{-beta Delta}) / Delta, and p_m (1 - e^{-beta Delta}) = p_m - p_n.
  for (Eigen::Index m = 0; m < dim; ++m)
    for (Eigen::Index n = 0; n < dim; ++n) {
      const double x2 = th.X(m, n) * th.X(m, n);
      if (x2 == 0.0) continue;
      const double delta = eig.values(n) - eig.values(m);
      const double f = delta / hbar;
      const double lam = delta == 0.0 ? beta * th.p(m) : (th.p(m) - th.p(n)) / delta;
      const double w = coth_weight(f, beta, hbar) * lam * x2;
      if (w != 0.0) lines.push_back({f, w});
    }
  return lines;
}

double evaluate_lines(const std::vector<SpectralLine>& lines, double omega, double s) {
  if (!(s > 0.0)) throw InvalidArgument("broadening s must be positive");
  double v = 0.0;
  for (const auto& l : lines) {
    const double d = omega - l.frequency;
    v += l.weight * s / (d * d + s * s);
  }
  return v;
}

double noise_from_eigensystem(const ed::Eigensystem& eig, const Eigen::MatrixXd& X, double omega, double beta,
                              double hbar, double s) {
  return evaluate_lines(noise_lines_kubo(eig, X, beta, hbar), omega, s);
}

double noise_direct(const ed::Eigensystem& eig, const Eigen::MatrixXd& X, double omega, double beta, double hbar,
                    double s) {
  return evaluate_lines(noise_lines_direct(eig, X, beta, hbar), omega, s);
}

void check_positive(const NoiseSpectrum& s, double tolerance) {
  double scale = 0.0;
  for (double v : s.value) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < s.value.size(); ++i)
    if (!(s.value[i] >= -tolerance * scale))
      throw NonphysicalModelError(std::string(to_string(s.kind)) + " spectrum is negative at omega = " +
                                  std::to_string(s.omega[i]));
}

}  // namespace darwin::noise
