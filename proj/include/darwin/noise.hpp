#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "darwin/kspace_ed.hpp"
#include "darwin/response.hpp"
#include "darwin/units.hpp"

namespace darwin::noise {

using cplx = std::complex<double>;

enum class SpectrumKind { longitudinal_field, transverse_field, voltage, photon_number };
const char* to_string(SpectrumKind k);

struct NoiseSpectrum {
  SpectrumKind kind = SpectrumKind::voltage;
  std::vector<double> omega;
  std::vector<double> value;
  /// Free-form metadata written next to the samples (model, beta, geometry, tolerances).
  std::vector<std::pair<std::string, std::string>> metadata;
};

struct CircuitGeometry {
  double length = 1.0;
  double area = 1.0;
};

/// 2 hbar w coth(beta hbar w / 2). The series 4/beta (1 + x^2/12) is used for
/// |x| = |beta hbar w| < 1e-6, and hbar = 0 returns 4/beta exactly.
double coth_weight(double omega, double beta, double hbar);

/// hbar coth(beta hbar w / 2), i.e. coth_weight / (2 w); 2 / (beta w) at hbar = 0.
double thermal_factor(double omega, double beta, double hbar);

/// Longitudinal field noise -8 pi Omega hbar coth(beta hbar w / 2) Im[1 / eps_L(k, w)].
double field_noise_L(const response::ResponseModel& m, double k, double omega, double beta, double volume);
/// Same quantity written through kappa_L: 8 pi Omega hbar coth (4 pi / w) Re kappa_L.
double field_noise_L_kappa_form(const response::ResponseModel& m, double k, double omega, double beta,
                                double volume);

/// On-shell transverse field noise 8 pi Omega hbar coth Im[1 / (1 - (4 pi i / w) sigma_T(w))], w > 0.
double field_noise_T(const response::ResponseModel& m, double omega, double beta, double volume);

// Homogeneous sample of length L and cross-section S driven along its axis;
// sigma_L is taken at k = 0.
double resistance(const response::ResponseModel& m, const CircuitGeometry& g, double omega);
double capacity(const response::ResponseModel& m, const CircuitGeometry& g, double omega);
/// 1/Z = 1/R + i w C.
cplx impedance(const response::ResponseModel& m, const CircuitGeometry& g, double omega);

/// Voltage noise from the field formula -8 pi hbar coth (L/S) Im[1 / eps_L].
double voltage_noise(const response::ResponseModel& m, const CircuitGeometry& g, double omega, double beta);
/// Voltage noise from the circuit, 2 hbar w coth(beta hbar w / 2) R / (1 + (w R C)^2).
double voltage_noise_rc(const response::ResponseModel& m, const CircuitGeometry& g, double omega, double beta);

/// Electronic transverse current correlator <j~(k, 0) j_T(0, t + i hbar lambda)>.
using Correlator = std::function<cplx(double t, double lambda)>;

/// Adaptive Gauss-Kronrod in t; the lambda integral uses fixed 30-point Gauss-Legendre.
struct QuadratureTolerances {
  double absolute = 1e-10;
  double relative = 1e-8;
};

/// Photon-number noise of the mode k,
///   2 coth(beta hbar w / 2) / (c k w) Re int_0^inf dt e^{-i w t} int_0^beta dl C(t, l)
///     [e^{-i(w - ck)t - hbar ck l} (1 + N_k) + e^{-i(w + ck)t + hbar ck l} N_k],
/// N_k = 1 / (e^{beta hbar c k} - 1). `decay_time` sets the time scale of C;
/// a correlator that has not decayed by 60 decay times raises DivergenceError.
double photon_number_noise(const Correlator& corr, double decay_time, double k, double omega, double beta,
                           const UnitSystem& u, const QuadratureTolerances& tol = {});

/// A spectral line of weight w contributes w s / ((omega - frequency)^2 + s^2).
struct SpectralLine {
  double frequency;
  double weight;
};

/// Lines of the symmetrized-correlator Fourier transform of X.
std::vector<SpectralLine> noise_lines_direct(const ed::Eigensystem& eig, const Eigen::MatrixXd& X, double beta,
                                             double hbar);
/// Lines of the Kubo-correlator form 2 hbar w coth(beta hbar w/2) Re int dt int dl <X X(t + i hbar l)>.
std::vector<SpectralLine> noise_lines_kubo(const ed::Eigensystem& eig, const Eigen::MatrixXd& X, double beta,
                                           double hbar);
double evaluate_lines(const std::vector<SpectralLine>& lines, double omega, double s);

/// Noise of X at frequency w with Lorentzian broadening s, through the Kubo form.
double noise_from_eigensystem(const ed::Eigensystem& eig, const Eigen::MatrixXd& X, double omega, double beta,
                              double hbar, double s);
/// Same spectrum from the direct definition.
double noise_direct(const ed::Eigensystem& eig, const Eigen::MatrixXd& X, double omega, double beta, double hbar,
                    double s);

/// Throws NonphysicalModelError if a sample is negative beyond `tolerance` times the largest sample.
void check_positive(const NoiseSpectrum& s, double tolerance = 1e-12);

}  // namespace darwin::noise
