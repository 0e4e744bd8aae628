#include "darwin/kspace_ed.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

#include "darwin/errors.hpp"

namespace darwin::ed {

namespace {

constexpr double kPi = std::numbers::pi;

int sign_below(std::uint64_t bits, int pos) {
  const std::uint64_t mask = (std::uint64_t{1} << pos) - 1;
  return (std::popcount(bits & mask) & 1) ? -1 : 1;
}

// All K-bit words with exactly r bits set, ascending.
std::vector<std::uint64_t> combinations(int K, int r) {
  std::vector<std::uint64_t> out;
  if (r < 0 || r > K) return out;
  if (r == 0) return {0};
  std::uint64_t v = (std::uint64_t{1} << r) - 1;
  const std::uint64_t limit = std::uint64_t{1} << K;
  while (v < limit) {
    out.push_back(v);
    const std::uint64_t t = v | (v - 1);
    v = (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
  }
  return out;
}

void require_nonzero(const Vec3& q, const char* what) {
  if (q.squaredNorm() == 0.0) throw ExcludedModeError(std::string(what) + ": the q = 0 mode is excluded");
}

}  // namespace

PlaneWaveFockBasis::PlaneWaveFockBasis(const BasisSpec& spec) : L_(spec.L), n_electrons_(spec.n_electrons) {
  if (!(spec.L > 0.0) || !std::isfinite(spec.L)) throw InvalidArgument("box length L must be positive");
  if (spec.kmax2 < 0) throw InvalidArgument("kmax2 must be non-negative");
  if (spec.n_electrons < 0) throw InvalidArgument("n_electrons must be non-negative");

  radius_ = static_cast<int>(std::floor(std::sqrt(static_cast<double>(spec.kmax2))));
  std::vector<IVec3> ns;
  for (int x = -radius_; x <= radius_; ++x)
    for (int y = -radius_; y <= radius_; ++y)
      for (int z = -radius_; z <= radius_; ++z)
        if (x * x + y * y + z * z <= spec.kmax2) ns.emplace_back(x, y, z);
  std::stable_sort(ns.begin(), ns.end(), [](const IVec3& a, const IVec3& b) {
    const int na = a.squaredNorm(), nb = b.squaredNorm();
    if (na != nb) return na < nb;
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
  });
  const int K = static_cast<int>(ns.size());
  if (2 * K > 64)
    throw CapacityError("kmax2 = " + std::to_string(spec.kmax2) + " gives " + std::to_string(2 * K) +
                        " spin orbitals; at most 64 are supported");

  const int side = 2 * radius_ + 1;
  lookup_.assign(2 * static_cast<std::size_t>(side) * side * side, -1);
  for (int s = 0; s < 2; ++s) {
    for (int i = 0; i < K; ++i) {
      const int idx = s * K + i;
      orbitals_.push_back({ns[i], s == 0 ? 1 : -1});
      const IVec3 o = ns[i] + IVec3::Constant(radius_);
      lookup_[((static_cast<std::size_t>(s) * side + o.x()) * side + o.y()) * side + o.z()] = idx;
    }
  }

  int lo = 0, hi = spec.n_electrons;
  if (spec.n_up && spec.n_down) {
    if (*spec.n_up + *spec.n_down != spec.n_electrons)
      throw InvalidArgument("n_up + n_down must equal n_electrons");
    lo = hi = *spec.n_up;
  } else if (spec.n_up) {
    lo = hi = *spec.n_up;
  } else if (spec.n_down) {
    lo = hi = spec.n_electrons - *spec.n_down;
  }
  if (lo < 0 || hi > spec.n_electrons) throw InvalidArgument("spin populations are inconsistent with n_electrons");

  auto momentum_of = [&](std::uint64_t bits) {
    IVec3 m = IVec3::Zero();
    for (int i = 0; i < K; ++i)
      if (bits >> i & 1) m += ns[i];
    return m;
  };

  for (int nu = lo; nu <= hi; ++nu) {
    const int nd = spec.n_electrons - nu;
    const auto ups = combinations(K, nu);
    const auto downs = combinations(K, nd);
    std::vector<IVec3> up_mom, down_mom;
    for (auto b : ups) up_mom.push_back(momentum_of(b));
    for (auto b : downs) down_mom.push_back(momentum_of(b));
    for (std::size_t a = 0; a < ups.size(); ++a) {
      for (std::size_t b = 0; b < downs.size(); ++b) {
        if (spec.total_momentum && up_mom[a] + down_mom[b] != *spec.total_momentum) continue;
        states_.push_back(ups[a] | (downs[b] << K));
        if (states_.size() > spec.dimension_cap)
          throw CapacityError("basis dimension exceeds the cap of " + std::to_string(spec.dimension_cap));
      }
    }
  }
  std::sort(states_.begin(), states_.end());
  index_.reserve(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], i);
}

double PlaneWaveFockBasis::dk() const { return 2.0 * kPi / L_; }

std::optional<std::size_t> PlaneWaveFockBasis::find_orbital(const IVec3& n, int spin) const {
  const IVec3 o = n + IVec3::Constant(radius_);
  const int side = 2 * radius_ + 1;
  if ((o.array() < 0).any() || (o.array() >= side).any()) return std::nullopt;
  const std::size_t s = spin > 0 ? 0 : 1;
  const int idx = lookup_[((s * side + o.x()) * side + o.y()) * side + o.z()];
  if (idx < 0) return std::nullopt;
  return static_cast<std::size_t>(idx);
}

std::optional<std::size_t> PlaneWaveFockBasis::index_of(std::uint64_t bits) const {
  const auto it = index_.find(bits);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

IVec3 PlaneWaveFockBasis::total_momentum(std::size_t idx) const {
  IVec3 m = IVec3::Zero();
  const auto bits = states_[idx];
  for (std::size_t i = 0; i < orbitals_.size(); ++i)
    if (bits >> i & 1) m += orbitals_[i].n;
  return m;
}

int PlaneWaveFockBasis::spin_imbalance(std::size_t idx) const {
  int s = 0;
  const auto bits = states_[idx];
  for (std::size_t i = 0; i < orbitals_.size(); ++i)
    if (bits >> i & 1) s += orbitals_[i].spin;
  return s;
}

double ManyBodyOperator::hermiticity_defect() const {
  const SparseMatrix diff = SparseMatrix(matrix.transpose()) - matrix;
  double m = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

double coulomb_element(const Vec3& q, double volume, double charge) {
  require_nonzero(q, "coulomb_element");
  if (!(volume > 0.0)) throw InvalidArgument("volume must be positive");
  return 4.0 * kPi * charge * charge / (volume * q.squaredNorm());
}

double current_current_element(const Vec3& k, const Vec3& p, const Vec3& q, const UnitSystem& u, double volume,
                               const ParticleSpecies& sp) {
  require_nonzero(q, "current_current_element");
  if (!(volume > 0.0)) throw InvalidArgument("volume must be positive");
  const double q2 = q.squaredNorm();
  const double proj = k.dot(p) - q.dot(k) * q.dot(p) / q2;
  const double pref = sp.charge * sp.charge * u.hbar() * u.hbar() * u.inv_c2() / (sp.mass * sp.mass * volume);
  return -pref * (2.0 * kPi / q2) * proj;
}

Mat3 static_photon_kernel(const Vec3& q) {
  require_nonzero(q, "static_photon_kernel");
  const double q2 = q.squaredNorm();
  return (Mat3::Identity() - q * q.transpose() / q2) / q2;
}

ManyBodyOperator build_hamiltonian(const PlaneWaveFockBasis& basis, const UnitSystem& u,
                                   const ParticleSpecies& sp, const HamiltonianTerms& terms) {
  if (!(sp.mass > 0.0)) throw InvalidArgument("particle mass must be positive");
  const auto dim = basis.dimension();
  const auto& orb = basis.orbitals();
  const int norb = static_cast<int>(orb.size());
  const double dk = basis.dk();
  const double omega = basis.volume();
  const double hb = u.hbar();

  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t col = 0; col < dim; ++col) {
    const std::uint64_t s = basis.state(col);
    if (terms.kinetic) {
      double t = 0.0;
      for (int a = 0; a < norb; ++a)
        if (s >> a & 1) t += hb * hb * dk * dk * orb[a].n.squaredNorm() / (2.0 * sp.mass);
      trip.emplace_back(static_cast<int>(col), static_cast<int>(col), t);
    }
    if (!terms.coulomb && !terms.current_current) continue;

    // a+_gamma a+_delta a_beta a_alpha with alpha = (k - q, sigma), beta = (p + q, sigma'),
    // gamma = (k, sigma), delta = (p, sigma').
    for (int a = 0; a < norb; ++a) {
      if (!(s >> a & 1)) continue;
      const int sg1 = sign_below(s, a);
      const std::uint64_t s1 = s & ~(std::uint64_t{1} << a);
      for (int b = 0; b < norb; ++b) {
        if (b == a || !(s1 >> b & 1)) continue;
        const int sg2 = sign_below(s1, b);
        const std::uint64_t s2 = s1 & ~(std::uint64_t{1} << b);
        for (int g = 0; g < norb; ++g) {
          if (orb[g].spin != orb[a].spin) continue;
          const IVec3 qn = orb[g].n - orb[a].n;
          if (qn.isZero()) continue;
          const auto d = basis.find_orbital(orb[b].n - qn, orb[b].spin);
          if (!d) continue;
          const int di = static_cast<int>(*d);
          if (s2 >> di & 1) continue;
          const int sg3 = sign_below(s2, di);
          const std::uint64_t s3 = s2 | (std::uint64_t{1} << di);
          if (s3 >> g & 1) continue;
          const int sg4 = sign_below(s3, g);
          const std::uint64_t s4 = s3 | (std::uint64_t{1} << g);
          const auto row = basis.index_of(s4);
          if (!row) continue;

          const Vec3 q = dk * qn.cast<double>();
          double w = 0.0;
          if (terms.coulomb) w += 0.5 * coulomb_element(q, omega, sp.charge);
          if (terms.current_current)
            w += current_current_element(dk * orb[g].n.cast<double>(), dk * orb[di].n.cast<double>(), q, u,
                                         omega, sp);
          trip.emplace_back(static_cast<int>(*row), static_cast<int>(col), sg1 * sg2 * sg3 * sg4 * w);
        }
      }
    }
  }
  ManyBodyOperator op;
  op.matrix.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.matrix.prune(0.0);
  std::string label;
  if (terms.kinetic) label += "kinetic";
  if (terms.coulomb) label += label.empty() ? "coulomb" : "+coulomb";
  if (terms.current_current) label += label.empty() ? "current-current" : "+current-current";
  op.label = label;
  return op;
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

Eigensystem eigensolve(const ManyBodyOperator& op, std::size_t count) {
  const auto& H = op.matrix;
  const auto dim = static_cast<std::size_t>(H.rows());
  if (H.rows() != H.cols()) throw InvalidArgument("operator is not square");
  count = std::min(count, dim);

  UnionFind uf(dim);
  for (int k = 0; k < H.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(H, k); it; ++it)
      if (it.value() != 0.0) uf.unite(static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()));
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<std::ptrdiff_t> block_of(dim, -1);
  for (std::size_t i = 0; i < dim; ++i) {
    const auto r = uf.find(i);
    if (block_of[r] < 0) {
      block_of[r] = static_cast<std::ptrdiff_t>(blocks.size());
      blocks.emplace_back();
    }
    blocks[static_cast<std::size_t>(block_of[r])].push_back(i);
  }

  struct Pair {
    double value;
    std::size_t block, column;
  };
  std::vector<Pair> pairs;
  std::vector<Eigen::MatrixXd> block_vectors;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& idx = blocks[b];
    const auto n = static_cast<Eigen::Index>(idx.size());
    std::vector<Eigen::Index> local(dim, -1);
    for (Eigen::Index i = 0; i < n; ++i) local[idx[static_cast<std::size_t>(i)]] = i;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto col = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]);
      for (SparseMatrix::InnerIterator it(H, col); it; ++it) M(local[static_cast<std::size_t>(it.row())], i) = it.value();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed on a block of size " + std::to_string(n));
    for (Eigen::Index i = 0; i < n; ++i) pairs.push_back({es.eigenvalues()(i), b, static_cast<std::size_t>(i)});
    block_vectors.push_back(es.eigenvectors());
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.value < b.value; });

  Eigensystem out;
  out.values.resize(static_cast<Eigen::Index>(count));
  out.vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(count));
  for (std::size_t c = 0; c < count; ++c) {
    const auto& p = pairs[c];
    out.values(static_cast<Eigen::Index>(c)) = p.value;
    const auto& V = block_vectors[p.block];
    const auto& idx = blocks[p.block];
    for (std::size_t i = 0; i < idx.size(); ++i)
      out.vectors(static_cast<Eigen::Index>(idx[i]), static_cast<Eigen::Index>(c)) =
          V(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p.column));
    // Sign convention: the largest-magnitude component (first on ties) is positive.
    Eigen::Index arg = 0;
    out.vectors.col(static_cast<Eigen::Index>(c)).cwiseAbs().maxCoeff(&arg);
    if (out.vectors(arg, static_cast<Eigen::Index>(c)) < 0.0) out.vectors.col(static_cast<Eigen::Index>(c)) *= -1.0;
  }
  out.complete = count == dim;

  double norm = 0.0;
  for (int k = 0; k < H.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(H, k); it; ++it) norm = std::max(norm, std::abs(it.value()));
  norm = std::max(norm * static_cast<double>(std::max<std::size_t>(dim, 1)), 1e-300);
  for (std::size_t c = 0; c < count; ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    const double res = (H * out.vectors.col(ci) - out.values(ci) * out.vectors.col(ci)).norm();
    if (res > 1e-10 * norm)
      throw SolverError("eigenpair " + std::to_string(c) + " residual " + std::to_string(res) + " exceeds tolerance");
  }
  return out;
}

SparseMatrix current_operator(const PlaneWaveFockBasis& basis, const IVec3& k, int component, const UnitSystem& u,
                              const ParticleSpecies& sp) {
  if (component < 0 || component > 2) throw InvalidArgument("current component must be 0, 1 or 2");
  const auto dim = basis.dimension();
  const auto& orb = basis.orbitals();
  const int norb = static_cast<int>(orb.size());
  const double pref = sp.charge * u.hbar() / (2.0 * sp.mass) * basis.dk();
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t col = 0; col < dim; ++col) {
    const std::uint64_t s = basis.state(col);
    for (int a = 0; a < norb; ++a) {
      if (!(s >> a & 1)) continue;
      const auto g = basis.find_orbital(orb[a].n - k, orb[a].spin);
      if (!g) continue;
      const int gi = static_cast<int>(*g);
      const int sg1 = sign_below(s, a);
      const std::uint64_t s1 = s & ~(std::uint64_t{1} << a);
      if (s1 >> gi & 1) continue;
      const int sg2 = sign_below(s1, gi);
      const auto row = basis.index_of(s1 | (std::uint64_t{1} << gi));
      if (!row) continue;
      const double coeff = pref * (2 * orb[a].n(component) - k(component));
      if (coeff != 0.0) trip.emplace_back(static_cast<int>(*row), static_cast<int>(col), sg1 * sg2 * coeff);
    }
  }
  SparseMatrix J(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

cplx kubo_kappa(const PlaneWaveFockBasis& basis, const Eigensystem& eig, const IVec3& k, double omega,
                const KuboParams& params, const UnitSystem& u, const ParticleSpecies& sp) {
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  if (!eig.complete || eig.vectors.rows() != dim || eig.vectors.cols() != dim)
    throw InvalidArgument("kubo_kappa needs the complete eigensystem of the basis");
  if (!(params.beta > 0.0) || !std::isfinite(params.beta)) throw InvalidArgument("beta must be positive and finite");
  if (!(params.s > 0.0)) throw InvalidArgument("adiabatic parameter s must be positive");
  if (!(u.hbar() > 0.0)) throw InvalidArgument("kubo_kappa requires hbar > 0");
  if (k.isZero()) throw ExcludedModeError("kubo_kappa: the k = 0 mode is excluded");
  if (basis.n_electrons() == 0) return {0.0, 0.0};

  const Vec3 khat = k.cast<double>().normalized();
  std::vector<Vec3> directions;
  if (params.polarization == Polarization::longitudinal) {
    directions.push_back(khat);
  } else {
    const Vec3 trial = std::abs(khat.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 e1 = (trial - trial.dot(khat) * khat).normalized();
    directions.push_back(e1);
    directions.push_back(khat.cross(e1));
  }

  // Boltzmann weights relative to the ground state.
  const Eigen::VectorXd& E = eig.values;
  const double e0 = E.minCoeff();
  Eigen::VectorXd w(dim);
  for (Eigen::Index m = 0; m < dim; ++m) w(m) = std::exp(-params.beta * (E(m) - e0));
  const double Z = w.sum();

  std::array<SparseMatrix, 3> J;
  for (int c = 0; c < 3; ++c) J[static_cast<std::size_t>(c)] = current_operator(basis, -k, c, u, sp);

  cplx total{0.0, 0.0};
  for (const Vec3& e : directions) {
    const SparseMatrix A = e.x() * J[0] + e.y() * J[1] + e.z() * J[2];
    const Eigen::MatrixXd Aeig = eig.vectors.transpose() * (A * eig.vectors);
    cplx acc{0.0, 0.0};
    for (Eigen::Index m = 0; m < dim; ++m) {
      if (w(m) == 0.0) continue;
      for (Eigen::Index n = 0; n < dim; ++n) {
        const double a2 = Aeig(n, m) * Aeig(n, m);
        if (a2 == 0.0) continue;
        const double delta = E(n) - E(m);
        const double thermal = delta == 0.0 ? params.beta : -std::expm1(-params.beta * delta) / delta;
        acc += w(m) * a2 * thermal * cplx(0.0, 1.0) / cplx(omega + delta / u.hbar(), params.s);
      }
    }
    total += acc;
  }
  return total / (static_cast<double>(directions.size()) * Z * basis.volume());
}

cplx kubo_kappa_extrapolated(const PlaneWaveFockBasis& basis, const Eigensystem& eig, const IVec3& k, double omega,
                             const KuboParams& params, int levels, const UnitSystem& u, const ParticleSpecies& sp) {
  if (levels < 1) throw InvalidArgument("levels must be at least 1");
  std::vector<double> s(static_cast<std::size_t>(levels));
  std::vector<cplx> t(static_cast<std::size_t>(levels));
  for (int j = 0; j < levels; ++j) {
    KuboParams p = params;
    p.s = params.s / std::pow(2.0, j);
    s[static_cast<std::size_t>(j)] = p.s;
    t[static_cast<std::size_t>(j)] = kubo_kappa(basis, eig, k, omega, p, u, sp);
  }
  // Neville's scheme evaluated at s = 0.
  for (int m = 1; m < levels; ++m)
    for (int j = levels - 1; j >= m; --j) {
      const auto J = static_cast<std::size_t>(j);
      const auto Jm = static_cast<std::size_t>(j - m);
      t[J] = (s[Jm] * t[J] - s[J] * t[J - 1]) / (s[Jm] - s[J]);
    }
  return t.back();
}

}  // namespace darwin::ed
