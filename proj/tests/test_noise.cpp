#include <cmath>
#include <numbers>
#include <random>

#include "darwin/errors.hpp"
#include "darwin/noise.hpp"
#include "doctest.h"

using namespace darwin;
using namespace darwin::noise;
using response::ResponseModel;

namespace {

constexpr double pi = std::numbers::pi;

double lorentz(double x, double s) { return s / (x * x + s * s); }

ed::Eigensystem diagonal(const Eigen::VectorXd& e) {
  ed::Eigensystem eig;
  eig.values = e;
  eig.vectors = Eigen::MatrixXd::Identity(e.size(), e.size());
  eig.complete = true;
  return eig;
}

ed::Eigensystem random_system(std::mt19937_64& rng, int dim) {
  Eigen::MatrixXd A = Eigen::MatrixXd::NullaryExpr(dim, dim, [&] { return std::normal_distribution<double>()(rng); });
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A + A.transpose());
  ed::Eigensystem eig;
  eig.values = es.eigenvalues();
  eig.vectors = es.eigenvectors();
  eig.complete = true;
  return eig;
}

}  // namespace

TEST_SUITE("noise") {
  TEST_CASE("thermal weight") {
    const double beta = 2.5;
    CHECK(coth_weight(3.0, beta, 0.0) == 4.0 / beta);
    CHECK(coth_weight(0.0, beta, 1.0) == doctest::Approx(4.0 / beta).epsilon(1e-15));
    for (double x : {1e-7, 2e-6, 1e-3, 0.5}) {
      const double w = x / beta;
      CHECK(coth_weight(w, beta, 1.0) == doctest::Approx(4.0 / beta * (1.0 + x * x / 12.0)).epsilon(std::max(1e-14, x * x * x * x)));
    }
    // Zero-temperature limit 2 hbar |w|.
    CHECK(coth_weight(4.0, 1e3, 1.3) == doctest::Approx(2.0 * 1.3 * 4.0).epsilon(1e-14));
    CHECK(coth_weight(-4.0, 1e3, 1.3) == doctest::Approx(2.0 * 1.3 * 4.0).epsilon(1e-14));
    CHECK(thermal_factor(2.0, beta, 1.0) == doctest::Approx(1.0 / std::tanh(0.5 * beta * 2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(thermal_factor(0.0, beta, 1.0), StaticLimitError);
    CHECK_THROWS_AS(coth_weight(1.0, 0.0, 1.0), InvalidArgument);
  }

  TEST_CASE("longitudinal field noise") {
    const auto u = make_units(10.0);
    const auto m = ResponseModel::drude(0.3, 1.0, 1.2, 0.4, u);
    const double beta = 1.5, vol = 2.0;
    for (double k : {0.1, 1.0})
      for (double w : {0.05, 0.8, 3.0}) {
        const double v = field_noise_L(m, k, w, beta, vol);
        CHECK(v > 0.0);
        CHECK(v == doctest::Approx(field_noise_L_kappa_form(m, k, w, beta, vol)).epsilon(1e-12));
        CHECK(v == doctest::Approx(field_noise_L(m, k, -w, beta, vol)).epsilon(1e-12));
        const auto eps = response::dielectric_L(m, k, w);
        CHECK(v == doctest::Approx(-8.0 * pi * vol / std::tanh(0.5 * beta * w) * (1.0 / eps).imag()).epsilon(1e-13));
      }
    CHECK(field_noise_L(ResponseModel::zero(u), 1.0, 1.0, beta, vol) == 0.0);
    CHECK_THROWS_AS(field_noise_L(m, 1.0, 1.0, beta, 0.0), InvalidArgument);
  }

  TEST_CASE("transverse field noise") {
    const auto u = make_units(10.0);
    CHECK(field_noise_T(ResponseModel::zero(u), 1.0, 1.0, 1.0) == 0.0);
    const auto london = ResponseModel::london(0.5, u);
    const double beta = 0.7, vol = 1.5, w = 2.0;
    const auto s = response::sigma_T_onshell(london, w);
    const double expected =
        8.0 * pi * vol / std::tanh(0.5 * beta * w) * (1.0 / (1.0 - cplx(0.0, 4.0 * pi / w) * s)).imag();
    CHECK(field_noise_T(london, w, beta, vol) == doctest::Approx(expected).epsilon(1e-14));
    CHECK_THROWS_AS(field_noise_T(london, -1.0, beta, vol), InvalidArgument);

    const auto drude = ResponseModel::drude(0.5, 1.0, 1.0, 0.3, u);
    for (double om : {0.1, 1.0, 5.0}) CHECK(field_noise_T(drude, om, beta, vol) >= 0.0);
  }

  TEST_CASE("voltage noise from fields and from the circuit") {
    const auto u = make_units(137.036, 1.0);
    const auto m = ResponseModel::drude(0.8, 1.0, 1.0, 0.5, u);
    const CircuitGeometry g{2.0, 0.5};
    const double beta = 1.0 / 0.3;
    for (double w = 1e-6; w < 20.0; w *= 3.7) {
      const double a = voltage_noise(m, g, w, beta), b = voltage_noise_rc(m, g, w, beta);
      CHECK(a == doctest::Approx(b).epsilon(1e-10));
    }

    // Nyquist plateau 4 R k T.
    const double R_dc = g.length / (g.area * 0.8 / 0.5);
    CHECK(resistance(m, g, 1e-9) == doctest::Approx(R_dc).epsilon(1e-9));
    CHECK(voltage_noise(m, g, 1e-9, beta) == doctest::Approx(4.0 * R_dc / beta).epsilon(1e-9));

    const double w = 0.9;
    const cplx z = impedance(m, g, w);
    const double R = resistance(m, g, w), C = capacity(m, g, w);
    CHECK(std::abs(z - R / cplx(1.0, w * R * C)) < 1e-13 * std::abs(z));
    CHECK(voltage_noise_rc(m, g, w, beta) == doctest::Approx(coth_weight(w, beta, 1.0) * z.real()).epsilon(1e-12));

    CHECK_THROWS_AS(resistance(ResponseModel::london(1.0, u), g, 1.0), NonphysicalModelError);
    CHECK_THROWS_AS(voltage_noise(m, {0.0, 1.0}, 1.0, beta), InvalidArgument);
  }

  TEST_CASE("photon-number noise") {
    const auto u = make_units(10.0, 1.0);
    const double k = 0.3, A = 1.0, tau = 1.5;
    const double ck = u.c() * k, G = 1.0 / tau;
    auto decaying = [&](double t, double) { return cplx(A * std::exp(-t / tau), 0.0); };
    // Closed form for an exponential correlator independent of the imaginary time.
    auto closed = [&](double w, double beta) {
      const double coth = 1.0 / std::tanh(0.5 * beta * w);
      const double a = 2.0 * w - ck, b = 2.0 * w + ck;
      return 2.0 * coth / (ck * w) * A / ck * (G / (G * G + a * a) + G / (G * G + b * b));
    };
    for (double beta : {0.5, 2.0}) {
      for (double w : {0.4, 1.5, 3.0}) {
        const double v = photon_number_noise(decaying, tau, k, w, beta, u);
        CHECK(v == doctest::Approx(closed(w, beta)).epsilon(1e-6));
      }
    }
    // T -> 0: finite and equal to the coth = 1 limit.
    CHECK(photon_number_noise(decaying, tau, k, 1.5, 200.0, u) == doctest::Approx(closed(1.5, 200.0)).epsilon(1e-6));

    CHECK(photon_number_noise([](double, double) { return cplx{}; }, tau, k, 1.0, 1.0, u) == 0.0);
    CHECK_THROWS_AS(photon_number_noise([](double t, double) { return cplx(std::cos(t), 0.0); }, tau, k, 1.0, 1.0, u),
                    DivergenceError);
    CHECK_THROWS_AS(photon_number_noise(decaying, tau, k, 1.0, 1.0, make_units(10.0, 0.0)), InvalidArgument);
    CHECK_THROWS_AS(photon_number_noise(decaying, tau, 0.0, 1.0, 1.0, u), InvalidArgument);
  }

  TEST_CASE("identity observable has only zero-frequency lines") {
    const auto eig = diagonal(Eigen::Vector3d(0.0, 0.5, 2.0));
    const Eigen::MatrixXd X = Eigen::MatrixXd::Identity(3, 3);
    for (const auto& l : noise_lines_direct(eig, X, 1.0, 1.0)) CHECK(l.frequency == 0.0);
    for (const auto& l : noise_lines_kubo(eig, X, 1.0, 1.0)) CHECK(l.frequency == 0.0);
    // Total weight 4 from either path.
    double wd = 0.0, wk = 0.0;
    for (const auto& l : noise_lines_direct(eig, X, 1.0, 1.0)) wd += l.weight;
    for (const auto& l : noise_lines_kubo(eig, X, 1.0, 1.0)) wk += l.weight;
    CHECK(wd == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(wk == doctest::Approx(4.0).epsilon(1e-14));
  }

  TEST_CASE("two-level system") {
    const double delta = 1.3, s = 0.05, hbar = 1.0;
    const auto eig = diagonal(Eigen::Vector2d(-0.5 * delta, 0.5 * delta));
    Eigen::MatrixXd X(2, 2);
    X << 0.0, 1.0, 1.0, 0.0;
    for (double beta : {0.2, 1.0, 10.0})
      for (double w : {0.0, 0.7, 1.3, 2.0, -1.3}) {
        const double expected = 2.0 * (lorentz(w - delta, s) + lorentz(w + delta, s));
        CHECK(noise_direct(eig, X, w, beta, hbar, s) == doctest::Approx(expected).epsilon(1e-13));
        CHECK(noise_from_eigensystem(eig, X, w, beta, hbar, s) == doctest::Approx(expected).epsilon(1e-12));
      }
  }

  TEST_CASE("direct and Kubo paths agree on random systems") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 5; ++t) {
      const int dim = 6 + t;
      const auto eig = random_system(rng, dim);
      Eigen::MatrixXd B = Eigen::MatrixXd::NullaryExpr(dim, dim, [&] { return std::normal_distribution<double>()(rng); });
      const Eigen::MatrixXd X = B + B.transpose();
      const double beta = 0.3 + 0.5 * t, hbar = 0.8;
      for (double w = -6.0; w <= 6.0; w += 0.37) {
        const double d = noise_direct(eig, X, w, beta, hbar, 0.1);
        const double k = noise_from_eigensystem(eig, X, w, beta, hbar, 0.1);
        CHECK(d > 0.0);
        CHECK(std::abs(d - k) <= 1e-8 * std::abs(d));
      }
    }
  }

  TEST_CASE("eigensystem input validation") {
    const auto eig = diagonal(Eigen::Vector2d(0.0, 1.0));
    Eigen::MatrixXd X(2, 2);
    X << 0.0, 1.0, 2.0, 0.0;
    CHECK_THROWS_AS(noise_direct(eig, X, 1.0, 1.0, 1.0, 0.1), InvalidArgument);
    CHECK_THROWS_AS(noise_direct(eig, Eigen::MatrixXd::Identity(3, 3), 1.0, 1.0, 1.0, 0.1), InvalidArgument);
    CHECK_THROWS_AS(noise_direct(eig, Eigen::MatrixXd::Identity(2, 2), 1.0, 1.0, 0.0, 0.1), InvalidArgument);
    CHECK_THROWS_AS(noise_direct(eig, Eigen::MatrixXd::Identity(2, 2), 1.0, 1.0, 1.0, 0.0), InvalidArgument);
    auto partial = eig;
    partial.complete = false;
    CHECK_THROWS_AS(noise_direct(partial, Eigen::MatrixXd::Identity(2, 2), 1.0, 1.0, 1.0, 0.1), InvalidArgument);
  }

  TEST_CASE("positivity check") {
    NoiseSpectrum s;
    s.kind = SpectrumKind::voltage;
    s.omega = {1.0, 2.0, 3.0};
    s.value = {1.0, 0.5, -1e-14};
    CHECK_NOTHROW(check_positive(s));
    s.value[2] = -1e-6;
    CHECK_THROWS_AS(check_positive(s), NonphysicalModelError);
    CHECK(std::string(to_string(SpectrumKind::photon_number)) == "photon-number");
  }
}
