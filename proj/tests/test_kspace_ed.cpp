#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "darwin/errors.hpp"
#include "darwin/kspace_ed.hpp"
#include "darwin/verification/oracles.hpp"
#include "doctest.h"

using namespace darwin;
using namespace darwin::ed;

namespace {

constexpr double pi = std::numbers::pi;

Vec3 random_vec(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return {g(rng), g(rng), g(rng)};
}

PlaneWaveFockBasis pair_basis(int kmax2 = 1) {
  BasisSpec spec;
  spec.kmax2 = kmax2;
  spec.n_electrons = 2;
  spec.n_up = 1;
  spec.n_down = 1;
  return PlaneWaveFockBasis(spec);
}

Eigensystem full(const ManyBodyOperator& op) { return eigensolve(op, op.dimension()); }

}  // namespace

TEST_SUITE("kspace_ed") {
  TEST_CASE("coulomb element") {
    const Vec3 q(1.0, 0.0, 0.0);
    const double omega = std::pow(2.0 * pi, 3);
    CHECK(coulomb_element(q, omega) == doctest::Approx(4.0 * pi / omega).epsilon(1e-15));
    CHECK(coulomb_element(2.0 * q, omega) == doctest::Approx(coulomb_element(q, omega) / 4.0).epsilon(1e-15));
    CHECK(coulomb_element(q, 2.0 * omega) == doctest::Approx(coulomb_element(q, omega) / 2.0).epsilon(1e-15));
    CHECK(coulomb_element(q, omega, -2.0) == doctest::Approx(4.0 * coulomb_element(q, omega)).epsilon(1e-15));
    CHECK_THROWS_AS(coulomb_element(Vec3::Zero(), omega), ExcludedModeError);
  }

  TEST_CASE("current-current element") {
    const auto u = make_units(3.0, 1.3);
    const double omega = 7.0;
    const ParticleSpecies sp{1.5, 0.8};
    const double pref = -(sp.charge * sp.charge * u.hbar() * u.hbar()) / (sp.mass * sp.mass * u.c() * u.c() * omega);
    std::mt19937_64 rng(1);
    const Vec3 q = random_vec(rng);

    CHECK(current_current_element(2.5 * q, random_vec(rng), q, u, omega, sp) == doctest::Approx(0.0).epsilon(1e-12));

    const Vec3 e1 = q.unitOrthogonal(), e2 = q.cross(e1).normalized();
    const Vec3 k = 0.7 * e1 - 1.1 * e2, p = 0.3 * e1 + 0.4 * e2;
    CHECK(current_current_element(k, p, q, u, omega, sp) ==
          doctest::Approx(pref * 2.0 * pi / q.squaredNorm() * k.dot(p)).epsilon(1e-13));

    for (int t = 0; t < 20; ++t) {
      const Vec3 a = random_vec(rng), b = random_vec(rng), c = random_vec(rng);
      Mat3 P = Mat3::Identity();
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) P(i, j) -= c[i] * c[j] / c.squaredNorm();
      double kpq = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) kpq += a[i] * P(i, j) * b[j];
      const double v = current_current_element(a, b, c, u, omega, sp);
      CHECK(v == doctest::Approx(pref * 2.0 * pi / c.squaredNorm() * kpq).epsilon(1e-12));
      CHECK(v == doctest::Approx(current_current_element(b, a, -c, u, omega, sp)).epsilon(1e-14));
      CHECK(v == doctest::Approx(current_current_element(a, b, -c, u, omega, sp)).epsilon(1e-14));
      CHECK(v == doctest::Approx(current_current_element(a, b, c, u, omega, {-sp.charge, sp.mass})).epsilon(1e-15));
    }
    CHECK_THROWS_AS(current_current_element(q, q, Vec3::Zero(), u, omega), ExcludedModeError);
  }

  TEST_CASE("static photon kernel") {
    const Mat3 k1 = static_photon_kernel({1.0, 0.0, 0.0});
    CHECK((k1 - Vec3(0.0, 1.0, 1.0).asDiagonal().toDenseMatrix()).norm() < 1e-15);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 10; ++t) {
      const Vec3 q = random_vec(rng);
      const Mat3 K = static_photon_kernel(q);
      CHECK((K - K.transpose()).norm() == 0.0);
      CHECK((K * q).norm() < 1e-14 * q.norm() / q.squaredNorm());
      CHECK(K.trace() == doctest::Approx(2.0 / q.squaredNorm()).epsilon(1e-14));
      Eigen::SelfAdjointEigenSolver<Mat3> es(K);
      CHECK(std::abs(es.eigenvalues()[0]) < 1e-14 / q.squaredNorm());
      CHECK(es.eigenvalues()[1] == doctest::Approx(1.0 / q.squaredNorm()).epsilon(1e-13));
      CHECK(es.eigenvalues()[2] == doctest::Approx(1.0 / q.squaredNorm()).epsilon(1e-13));
    }
    CHECK_THROWS_AS(static_photon_kernel(Vec3::Zero()), ExcludedModeError);
  }

  TEST_CASE("basis structure") {
    BasisSpec spec;
    spec.kmax2 = 2;
    spec.n_electrons = 3;
    const PlaneWaveFockBasis b(spec);
    CHECK(b.orbitals().size() == 38);
    CHECK(b.dimension() == 8436);  // C(38, 3)
    for (std::size_t o = 0; o < b.orbitals().size(); ++o)
      CHECK(b.find_orbital(-b.orbitals()[o].n, b.orbitals()[o].spin).has_value());
    for (std::size_t i = 0; i < b.dimension(); ++i) {
      CHECK(std::popcount(b.state(i)) == 3);
      if (i) CHECK(b.state(i) > b.state(i - 1));
      CHECK(b.index_of(b.state(i)) == i);
    }
    CHECK(b.orbitals().front().spin == 1);
    CHECK(b.orbitals().back().spin == -1);

    spec.dimension_cap = 1000;
    CHECK_THROWS_AS(PlaneWaveFockBasis{spec}, CapacityError);
    spec.kmax2 = 4;  // 66 spin orbitals
    spec.dimension_cap = 20000;
    CHECK_THROWS_AS(PlaneWaveFockBasis{spec}, CapacityError);
    BasisSpec bad;
    bad.n_electrons = 2;
    bad.n_up = 2;
    bad.n_down = 1;
    CHECK_THROWS_AS(PlaneWaveFockBasis{bad}, InvalidArgument);
  }

  TEST_CASE("single electron spectrum is purely kinetic") {
    const auto u = make_units(2.0, 1.7);
    const ParticleSpecies sp{1.0, 0.6};
    BasisSpec spec;
    spec.L = 3.0;
    spec.kmax2 = 3;
    spec.n_electrons = 1;
    const PlaneWaveFockBasis b(spec);
    const auto eig = full(build_hamiltonian(b, u, sp));
    std::vector<double> expected;
    for (std::size_t o = 0; o < b.orbitals().size(); ++o)
      expected.push_back(u.hbar() * u.hbar() * b.wave_vector(o).squaredNorm() / (2.0 * sp.mass));
    std::sort(expected.begin(), expected.end());
    REQUIRE(static_cast<std::size_t>(eig.values.size()) == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
      CHECK(std::abs(eig.values[static_cast<Eigen::Index>(i)] - expected[i]) < 1e-12);
  }

  TEST_CASE("hamiltonian is Hermitian and conserves momentum and spin") {
    BasisSpec spec;
    spec.kmax2 = 2;
    spec.n_electrons = 3;
    const PlaneWaveFockBasis b(spec);
    const auto H = build_hamiltonian(b, make_units(5.0));
    CHECK(H.hermiticity_defect() < 1e-12);
    std::size_t offdiag = 0;
    for (int col = 0; col < H.matrix.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(H.matrix, col); it; ++it) {
        if (it.value() == 0.0) continue;
        const auto r = static_cast<std::size_t>(it.row()), c = static_cast<std::size_t>(it.col());
        CHECK(b.total_momentum(r) == b.total_momentum(c));
        CHECK(b.spin_imbalance(r) == b.spin_imbalance(c));
        offdiag += r != c;
      }
    CHECK(offdiag > 0);
  }

  TEST_CASE("two-particle Coulomb spectrum matches the first-quantized pair oracle") {
    const auto u = make_units(137.036, 1.0);
    const auto b = pair_basis(1);
    const auto eig = full(build_hamiltonian(b, u, {}, {true, true, false}));
    const auto ref = verification::coulomb_pair_spectrum(b.box(), 1, u.hbar(), 1.0, 1.0);
    REQUIRE(ref.size() == eig.values.size());
    CHECK((ref - eig.values).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("current-current term scales as 1/c^2") {
    const auto b = pair_basis(1);
    auto cc = [&](double c) { return build_hamiltonian(b, make_units(c), {}, {false, false, true}).matrix; };
    const SparseMatrix a = cc(40.0), h = cc(80.0);
    CHECK(a.norm() > 0.0);
    CHECK((SparseMatrix(a - 4.0 * h)).norm() < 1e-15 * a.norm());

    // Level shifts of the full Hamiltonian relative to Coulomb only.
    auto shift = [&](double c) {
      const auto u = make_units(c);
      const auto e = full(build_hamiltonian(b, u)).values;
      const auto e0 = full(build_hamiltonian(b, u, {}, {true, true, false})).values;
      return Eigen::VectorXd(e - e0);
    };
    const auto s1 = shift(137.036), s2 = shift(2.0 * 137.036);
    CHECK((s2 - s1 / 4.0).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(s1.cwiseAbs().maxCoeff() > 1e-6);
  }

  TEST_CASE("eigensolve basics") {
    ManyBodyOperator id;
    id.matrix = SparseMatrix(5, 5);
    id.matrix.setIdentity();
    const auto e = eigensolve(id, 5);
    CHECK((e.values.array() - 1.0).abs().maxCoeff() < 1e-15);
    CHECK(e.complete);

    ManyBodyOperator two;
    two.matrix = SparseMatrix(2, 2);
    two.matrix.insert(0, 0) = 2.0;
    two.matrix.insert(0, 1) = 1.0;
    two.matrix.insert(1, 0) = 1.0;
    two.matrix.insert(1, 1) = -1.0;
    const auto t = eigensolve(two, 2);
    // Roots of x^2 - x - 3.
    CHECK(t.values[0] == doctest::Approx((1.0 - std::sqrt(13.0)) / 2.0).epsilon(1e-15));
    CHECK(t.values[1] == doctest::Approx((1.0 + std::sqrt(13.0)) / 2.0).epsilon(1e-15));
    CHECK_FALSE(eigensolve(two, 1).complete);
  }

  TEST_CASE("eigensolve matches a brute-force dense solve") {
    BasisSpec spec;
    spec.kmax2 = 1;
    spec.n_electrons = 2;
    spec.n_up = 2;
    spec.n_down = 0;
    const PlaneWaveFockBasis b(spec);
    REQUIRE(b.dimension() <= 200);
    const auto H = build_hamiltonian(b, make_units(3.0));
    const auto eig = full(H);
    const Eigen::MatrixXd dense(H.matrix);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    CHECK((es.eigenvalues() - eig.values).cwiseAbs().maxCoeff() < 1e-10);
    const double res = (dense * eig.vectors - eig.vectors * eig.values.asDiagonal()).cwiseAbs().maxCoeff();
    CHECK(res < 1e-10 * dense.norm());
  }

  TEST_CASE("current operator adjoint") {
    const auto b = pair_basis(1);
    const auto u = make_units();
    for (int c = 0; c < 3; ++c) {
      const SparseMatrix j = current_operator(b, {1, 0, 0}, c, u);
      const SparseMatrix jm = current_operator(b, {-1, 0, 0}, c, u);
      CHECK((SparseMatrix(SparseMatrix(j.transpose()) - jm)).norm() < 1e-15);
    }
    CHECK_THROWS_AS(current_operator(b, {1, 0, 0}, 3, u), InvalidArgument);
  }

  TEST_CASE("kubo kappa") {
    const auto u = make_units();
    const auto b = pair_basis(1);
    const auto eig = full(build_hamiltonian(b, u));
    KuboParams kp;
    kp.beta = 2.0;

    SUBCASE("empty system") {
      BasisSpec spec;
      spec.n_electrons = 0;
      const PlaneWaveFockBasis empty(spec);
      const auto e0 = full(build_hamiltonian(empty, u));
      CHECK(kubo_kappa(empty, e0, {1, 0, 0}, 1.0, kp, u) == cplx(0.0, 0.0));
    }
    SUBCASE("high-frequency tail decays") {
      const double a = std::abs(kubo_kappa(b, eig, {1, 0, 0}, 50.0, kp, u));
      const double c = std::abs(kubo_kappa(b, eig, {1, 0, 0}, 100.0, kp, u));
      CHECK(a > 0.0);
      CHECK(c < a);
    }
    SUBCASE("converges as s is halved") {
      auto at = [&](double s) {
        KuboParams p = kp;
        p.s = s;
        return kubo_kappa(b, eig, {1, 0, 0}, 0.77, p, u);
      };
      const cplx k1 = at(1e-5), k2 = at(5e-6), k3 = at(2.5e-6);
      CHECK(std::abs(k2 - k3) < std::abs(k1 - k2));
      CHECK(std::abs(k2 - k3) < 1e-6);
      const cplx ex = kubo_kappa_extrapolated(b, eig, {1, 0, 0}, 0.77, kp, 6, u);
      CHECK(std::abs(ex - k3) < 1e-6);
    }
    SUBCASE("even in k") {
      for (auto pol : {Polarization::longitudinal, Polarization::transverse}) {
        KuboParams p = kp;
        p.polarization = pol;
        const cplx a = kubo_kappa(b, eig, {1, 0, 0}, 0.9, p, u);
        const cplx c = kubo_kappa(b, eig, {-1, 0, 0}, 0.9, p, u);
        CHECK(std::abs(a - c) <= 1e-13 * std::abs(a) + 1e-16);
      }
    }
    SUBCASE("needs the complete eigensystem") {
      const auto part = eigensolve(build_hamiltonian(b, u), 3);
      CHECK_THROWS_AS(kubo_kappa(b, part, {1, 0, 0}, 1.0, kp, u), InvalidArgument);
      CHECK_THROWS_AS(kubo_kappa(b, eig, {0, 0, 0}, 1.0, kp, u), ExcludedModeError);
    }
  }
}
