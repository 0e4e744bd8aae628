#include "darwin/verification/oracles.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace darwin::verification {

namespace {

constexpr double kPi = std::numbers::pi;
using GL = boost::math::quadrature::gauss<double, 64>;

// Orthonormal frame with e3 along a.
Mat3 frame_along(const Vec3& a) {
  const Vec3 e3 = a.normalized();
  const Vec3 trial = std::abs(e3.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = (trial - trial.dot(e3) * e3).normalized();
  Mat3 f;
  f.col(0) = e1;
  f.col(1) = e3.cross(e1);
  f.col(2) = e3;
  return f;
}

// int_0^inf dr h(r), split at r = s0 where the two centres are a distance s0 apart.
template <class H>
Mat3 radial(H&& h, double s0) {
  Mat3 acc = Mat3::Zero();
  for (std::size_t i = 0; i < GL::abscissa().size(); ++i) {
    const double w = GL::weights()[i];
    for (double sgn : {-1.0, 1.0}) {
      const double u = 0.5 * (1.0 + sgn * GL::abscissa()[i]);  // (0, 1)
      if (GL::abscissa()[i] == 0.0 && sgn > 0) continue;
      acc += 0.5 * w * s0 * h(s0 * u);                    // r in (0, s0)
      acc += 0.5 * w * s0 / (u * u) * h(s0 / u);          // r in (s0, inf)
    }
  }
  return acc;
}

}  // namespace

Mat3 jackson_kernel_quadrature(const Vec3& R) {
  const double s0 = R.norm();
  if (!(s0 > 0.0)) throw std::invalid_argument("separation must be non-zero");
  const Mat3 fr = frame_along(R);
  auto D = [&](const Vec3& y) { return std::pow(y.norm(), 3) + std::pow((y - R).norm(), 3); };

  // F_ab = int y_a (y - R)_b / (|y|^3 |y - R|^3) dy. With the weights
  // |y - R|^3 / D and |y|^3 / D the two pieces are
  //   around 0:  int dr dOmega  yh_a (r yh - R)_b / D(r yh)
  //   around R:  int dr dOmega  (r zh + R)_a zh_b / D(R + r zh).
  constexpr int nphi = 16;
  Mat3 F = Mat3::Zero();
  for (std::size_t it = 0; it < GL::abscissa().size(); ++it) {
    for (double sgn : {-1.0, 1.0}) {
      if (GL::abscissa()[it] == 0.0 && sgn > 0) continue;
      const double ct = sgn * GL::abscissa()[it];
      const double wt = GL::weights()[it];
      const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      for (int ip = 0; ip < nphi; ++ip) {
        const double phi = 2.0 * kPi * (ip + 0.5) / nphi;
        const Vec3 dir = fr * Vec3(st * std::cos(phi), st * std::sin(phi), ct);
        const double wa = wt * 2.0 * kPi / nphi;
        auto h_i = [&](double r) -> Mat3 {
          const Vec3 y = r * dir;
          return dir * (y - R).transpose() / D(y);
        };
        auto h_j = [&](double r) -> Mat3 {
          const Vec3 y = R + r * dir;
          return y * dir.transpose() / D(y);
        };
        F += wa * (radial(h_i, s0) + radial(h_j, s0));
      }
    }
  }
  return Mat3::Identity() / s0 - F / (4.0 * kPi);
}

Mat3 periodic_transverse_kernel(const Vec3& r, double L, double alpha, int real_shells, int k_shells) {
  Mat3 T = Mat3::Zero();
  const double sqpi = std::sqrt(kPi);
  for (int a = -real_shells; a <= real_shells; ++a)
    for (int b = -real_shells; b <= real_shells; ++b)
      for (int c = -real_shells; c <= real_shells; ++c) {
        const Vec3 d = r + L * Vec3(a, b, c);
        const double dn = d.norm();
        const Vec3 n = d / dn;
        const Mat3 nn = n * n.transpose();
        const double ec = std::erfc(alpha * dn);
        T += Mat3::Identity() * ec / dn + alpha / sqpi * std::exp(-alpha * alpha * dn * dn) * nn -
             ec / (2.0 * dn) * (Mat3::Identity() - nn);
      }
  const double V = L * L * L;
  T -= kPi / (alpha * alpha * V) * Mat3::Identity();
  for (int a = -k_shells; a <= k_shells; ++a)
    for (int b = -k_shells; b <= k_shells; ++b)
      for (int c = -k_shells; c <= k_shells; ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        const Vec3 k = 2.0 * kPi / L * Vec3(a, b, c);
        const double k2 = k.squaredNorm();
        const double x = k2 / (4.0 * alpha * alpha);
        const double g = 4.0 * kPi * std::exp(-x);
        T += std::cos(k.dot(r)) / V * (Mat3::Identity() * g / k2 - k * k.transpose() * g * (1.0 + x) / (k2 * k2));
      }
  return T;
}

double periodic_gaussian_potential(const std::vector<double>& q, const std::vector<Vec3>& r, double sigma,
                                   double L, const Vec3& x, int n_max) {
  double phi = 0.0;
  const double V = L * L * L;
  for (int a = -n_max; a <= n_max; ++a)
    for (int b = -n_max; b <= n_max; ++b)
      for (int c = -n_max; c <= n_max; ++c) {
        if ((a == 0 && b == 0 && c == 0) || a * a + b * b + c * c > n_max * n_max) continue;
        const Vec3 k = 2.0 * kPi / L * Vec3(a, b, c);
        const double k2 = k.squaredNorm();
        const double g = 4.0 * kPi / (V * k2) * std::exp(-0.5 * k2 * sigma * sigma);
        for (std::size_t j = 0; j < q.size(); ++j) phi += g * q[j] * std::cos(k.dot(x - r[j]));
      }
  return phi;
}

namespace {

struct Element {
  Vec3 x;
  Vec3 idl;  // current times line element
};

std::vector<Element> discretize(const std::vector<SmearedLoop>& loops) {
  std::vector<Element> out;
  for (const auto& lp : loops) {
    const double dphi = 2.0 * kPi / lp.segments;
    for (int s = 0; s < lp.segments; ++s) {
      const double phi = (s + 0.5) * dphi;
      const Vec3 x = lp.center + lp.radius * Vec3(std::cos(phi), std::sin(phi), 0.0);
      const Vec3 t(-std::sin(phi), std::cos(phi), 0.0);
      out.push_back({x, lp.current * lp.radius * dphi * t});
    }
  }
  return out;
}

}  // namespace

fields::VectorFieldGrid loop_current_density(const std::vector<SmearedLoop>& loops, double sigma,
                                             const fields::Lattice& lat) {
  const auto el = discretize(loops);
  fields::VectorFieldGrid j(lat);
  const double norm = std::pow(2.0 * kPi * sigma * sigma, -1.5);
  const double L = lat.L;
  auto wrap = [L](Vec3 d) {
    for (int c = 0; c < 3; ++c) d(c) -= L * std::round(d(c) / L);
    return d;
  };
  for (int i = 0; i < lat.nside; ++i)
    for (int jj = 0; jj < lat.nside; ++jj)
      for (int l = 0; l < lat.nside; ++l) {
        const Vec3 x = lat.node(i, jj, l);
        bool near = false;
        for (const auto& lp : loops)
          if (wrap(x - lp.center).norm() < lp.radius + 10.0 * sigma) near = true;
        if (!near) continue;
        Vec3 acc = Vec3::Zero();
        for (const auto& e : el) {
          const double r2 = wrap(x - e.x).squaredNorm();
          acc += e.idl * norm * std::exp(-0.5 * r2 / (sigma * sigma));
        }
        j.set(i, jj, l, acc);
      }
  return j;
}

Vec3 biot_savart_field(const std::vector<SmearedLoop>& loops, double sigma, double L, const Vec3& x, double c,
                       int shells) {
  const auto el = discretize(loops);
  Vec3 B = Vec3::Zero();
  for (int a = -shells; a <= shells; ++a)
    for (int b = -shells; b <= shells; ++b)
      for (int cc = -shells; cc <= shells; ++cc)
        for (const auto& e : el) {
          const Vec3 d = x - (e.x + L * Vec3(a, b, cc));
          const double r = d.norm();
          if (r < 1e-12) continue;
          const double g =
              std::erf(r / (std::sqrt(2.0) * sigma)) - std::sqrt(2.0 / kPi) * (r / sigma) * std::exp(-0.5 * r * r / (sigma * sigma));
          B += e.idl.cross(d) * g / (r * r * r);
        }
  return B / c;
}

std::vector<std::vector<Vec3>> coulomb_reference_trajectory(const dynamics::ParticleSet& ps, double dt,
                                                            std::size_t steps, double tolerance) {
  const std::size_t n = ps.size();
  auto rhs = [&](const std::vector<Vec3>& z) {
    std::vector<Vec3> f(2 * n, Vec3::Zero());
    for (std::size_t i = 0; i < n; ++i) f[i] = z[n + i] / ps.mass[i];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const Vec3 d = z[i] - z[j];
        f[n + i] += ps.charge[i] * ps.charge[j] * d / std::pow(d.norm(), 3);
      }
    return f;
  };
  std::vector<Vec3> z(ps.position);
  z.insert(z.end(), ps.momentum.begin(), ps.momentum.end());
  std::vector<std::vector<Vec3>> out;
  out.reserve(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    std::vector<Vec3> next = z;
    auto f0 = rhs(z);
    for (std::size_t k = 0; k < z.size(); ++k) next[k] = z[k] + dt * f0[k];
    bool converged = false;
    for (int it = 0; it < 50 && !converged; ++it) {
      std::vector<Vec3> mid(z.size());
      for (std::size_t k = 0; k < z.size(); ++k) mid[k] = 0.5 * (z[k] + next[k]);
      const auto f = rhs(mid);
      double diff = 0.0, scale = 1.0;
      for (std::size_t k = 0; k < z.size(); ++k) {
        const Vec3 trial = z[k] + dt * f[k];
        diff = std::max(diff, (trial - next[k]).cwiseAbs().maxCoeff());
        scale = std::max(scale, trial.cwiseAbs().maxCoeff());
        next[k] = trial;
      }
      converged = diff <= tolerance * scale;
    }
    if (!converged) throw std::runtime_error("coulomb reference integrator did not converge");
    z = next;
    out.push_back(z);
  }
  return out;
}

Eigen::VectorXd coulomb_pair_spectrum(double L, int kmax2, double hbar, double mass, double charge) {
  std::vector<Eigen::Vector3i> ns;
  const int R = static_cast<int>(std::sqrt(static_cast<double>(kmax2))) + 1;
  for (int a = -R; a <= R; ++a)
    for (int b = -R; b <= R; ++b)
      for (int c = -R; c <= R; ++c)
        if (a * a + b * b + c * c <= kmax2) ns.emplace_back(a, b, c);
  std::map<std::array<int, 3>, int> index;
  for (std::size_t i = 0; i < ns.size(); ++i) index[{ns[i].x(), ns[i].y(), ns[i].z()}] = static_cast<int>(i);
  auto find = [&](const Eigen::Vector3i& n) {
    const auto it = index.find({n.x(), n.y(), n.z()});
    return it == index.end() ? -1 : it->second;
  };

  const int K = static_cast<int>(ns.size());
  const double dk = 2.0 * kPi / L;
  const double V = L * L * L;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(K * K, K * K);
  for (int a = 0; a < K; ++a)
    for (int b = 0; b < K; ++b) {
      const int col = a * K + b;
      H(col, col) += hbar * hbar * dk * dk * (ns[a].squaredNorm() + ns[b].squaredNorm()) / (2.0 * mass);
      for (int c = 0; c < K; ++c) {
        const Eigen::Vector3i q = ns[c] - ns[a];
        if (q.isZero()) continue;
        const int d = find(ns[b] - q);
        if (d < 0) continue;
        H(c * K + d, col) += 4.0 * kPi * charge * charge / (V * dk * dk * q.squaredNorm());
      }
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace darwin::verification
