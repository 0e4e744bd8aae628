#include "darwin/fields.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <mutex>
#include <new>
#include <numbers>
#include <ostream>

#include "darwin/errors.hpp"

namespace darwin::fields {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Transforms run on fftw_malloc buffers so that the SIMD alignment, and with
// it the chosen codelets and the rounding, does not depend on the caller's allocation.
template <class T>
struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : ptr(static_cast<T*>(fftw_malloc(n * sizeof(T)))), size(n) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  T* ptr;
  std::size_t size;
};

void forward_r2c(const Lattice& lat, const std::vector<double>& in, std::vector<cplx>& out) {
  const int n = lat.nside;
  FftwBuffer<double> src(lat.points());
  FftwBuffer<fftw_complex> dst(lat.spectral_points());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_r2c_3d(n, n, n, src.ptr, dst.ptr, FFTW_ESTIMATE);
  }
  std::copy(in.begin(), in.end(), src.ptr);
  fftw_execute(plan);
  out.resize(dst.size);
  for (std::size_t k = 0; k < dst.size; ++k) out[k] = cplx(dst.ptr[k][0], dst.ptr[k][1]);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

void inverse_c2r(const Lattice& lat, const std::vector<cplx>& in, std::vector<double>& out) {
  const int n = lat.nside;
  FftwBuffer<fftw_complex> src(lat.spectral_points());
  FftwBuffer<double> dst(lat.points());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_c2r_3d(n, n, n, src.ptr, dst.ptr, FFTW_ESTIMATE);
  }
  for (std::size_t k = 0; k < src.size; ++k) {
    src.ptr[k][0] = in[k].real();
    src.ptr[k][1] = in[k].imag();
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  const double norm = 1.0 / static_cast<double>(lat.points());
  out.resize(dst.size);
  for (std::size_t k = 0; k < dst.size; ++k) out[k] = dst.ptr[k] * norm;
}

int signed_frequency(int idx, int n) { return idx <= n / 2 ? idx : idx - n; }

template <class F>
void for_each_mode(const Lattice& lat, F&& f) {
  const int n = lat.nside;
  const int nh = n / 2 + 1;
  std::size_t s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < nh; ++l, ++s) f(s, i, j, l);
}

using CVec3 = Eigen::Matrix<cplx, 3, 1>;

CVec3 load(const SpectralVector& f, std::size_t s) {
  return CVec3(f.modes[0][s], f.modes[1][s], f.modes[2][s]);
}

void store(SpectralVector& f, std::size_t s, const CVec3& v) {
  for (int a = 0; a < 3; ++a) f.modes[a][s] = v[a];
}

}  // namespace

Lattice::Lattice(double box, int n) : L(box), nside(n) {
  if (!(box > 0.0) || !std::isfinite(box)) throw InvalidArgument("box length must be positive");
  if (n < 4 || n % 2 != 0) throw InvalidArgument("nside must be even and >= 4");
}

ModeVectors mode_vectors(const Lattice& lat, int i, int j, int l) {
  const int n = lat.nside;
  const double dk = 2.0 * kPi / lat.L;
  const int m[3] = {signed_frequency(i, n), signed_frequency(j, n), l};
  ModeVectors out;
  for (int a = 0; a < 3; ++a) {
    out.physical[a] = dk * m[a];
    out.derivative[a] = std::abs(m[a]) == n / 2 ? 0.0 : dk * m[a];
  }
  return out;
}

double half_spectrum_weight(const Lattice& lat, int l) {
  return (l == 0 || l == lat.nside / 2) ? 1.0 : 2.0;
}

double ScalarGrid::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * lattice.cell_volume();
}

VectorFieldGrid::VectorFieldGrid(Lattice lat) : lattice(lat) {
  for (auto& c : components) c.assign(lat.points(), 0.0);
}

Vec3 VectorFieldGrid::at(int i, int j, int l) const {
  const auto k = lattice.index(i, j, l);
  return {components[0][k], components[1][k], components[2][k]};
}

void VectorFieldGrid::set(int i, int j, int l, const Vec3& v) {
  const auto k = lattice.index(i, j, l);
  for (int a = 0; a < 3; ++a) components[a][k] = v[a];
}

double VectorFieldGrid::max_abs() const {
  double m = 0.0;
  for (const auto& c : components)
    for (double v : c) m = std::max(m, std::abs(v));
  return m;
}

SpectralVector::SpectralVector(Lattice lat) : lattice(lat) {
  for (auto& c : modes) c.assign(lat.spectral_points(), cplx{});
}

SpectralScalar fourier(const ScalarGrid& f) {
  SpectralScalar out(f.lattice);
  forward_r2c(f.lattice, f.values, out.modes);
  return out;
}

SpectralVector fourier(const VectorFieldGrid& f) {
  SpectralVector out(f.lattice);
  for (int a = 0; a < 3; ++a) forward_r2c(f.lattice, f.components[a], out.modes[a]);
  return out;
}

ScalarGrid inverse(const SpectralScalar& f) {
  ScalarGrid out(f.lattice);
  inverse_c2r(f.lattice, f.modes, out.values);
  return out;
}

VectorFieldGrid inverse(const SpectralVector& f) {
  VectorFieldGrid out(f.lattice);
  for (int a = 0; a < 3; ++a) inverse_c2r(f.lattice, f.modes[a], out.components[a]);
  return out;
}

SpectralVector transverse_project(const SpectralVector& f) {
  SpectralVector out(f.lattice);
  for_each_mode(f.lattice, [&](std::size_t s, int i, int j, int l) {
    const Vec3 k = mode_vectors(f.lattice, i, j, l).derivative;
    const double k2 = k.squaredNorm();
    CVec3 v = load(f, s);
    if (k2 > 0.0) {
      const cplx kv = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
      for (int a = 0; a < 3; ++a) v[a] -= k[a] * kv / k2;
    }
    store(out, s, v);
  });
  return out;
}

VectorFieldGrid transverse_project(const VectorFieldGrid& f) {
  return inverse(transverse_project(fourier(f)));
}

VectorFieldGrid longitudinal_project(const VectorFieldGrid& f) {
  const SpectralVector ft = fourier(f);
  const SpectralVector tr = transverse_project(ft);
  SpectralVector out(f.lattice);
  for (int a = 0; a < 3; ++a)
    for (std::size_t s = 0; s < ft.modes[a].size(); ++s) out.modes[a][s] = ft.modes[a][s] - tr.modes[a][s];
  return inverse(out);
}

double spectral_divergence_residual(const SpectralVector& f) {
  double worst = 0.0, scale = 0.0;
  for_each_mode(f.lattice, [&](std::size_t s, int i, int j, int l) {
    const CVec3 v = load(f, s);
    scale = std::max(scale, v.norm());
    const Vec3 k = mode_vectors(f.lattice, i, j, l).derivative;
    const double kn = k.norm();
    if (kn == 0.0) return;
    const cplx kv = (k[0] * v[0] + k[1] * v[1] + k[2] * v[2]) / kn;
    worst = std::max(worst, std::abs(kv));
  });
  return scale > 0.0 ? worst / scale : 0.0;
}

ScalarGrid divergence(const VectorFieldGrid& f) {
  const SpectralVector ft = fourier(f);
  SpectralScalar out(f.lattice);
  const cplx I(0.0, 1.0);
  for_each_mode(f.lattice, [&](std::size_t s, int i, int j, int l) {
    const Vec3 k = mode_vectors(f.lattice, i, j, l).derivative;
    const CVec3 v = load(ft, s);
    out.modes[s] = I * (k[0] * v[0] + k[1] * v[1] + k[2] * v[2]);
  });
  return inverse(out);
}

VectorFieldGrid gradient(const ScalarGrid& f) {
  const SpectralScalar ft = fourier(f);
  SpectralVector out(f.lattice);
  const cplx I(0.0, 1.0);
  for_each_mode(f.lattice, [&](std::size_t s, int i, int j, int l) {
    const Vec3 k = mode_vectors(f.lattice, i, j, l).derivative;
    for (int a = 0; a < 3; ++a) out.modes[a][s] = I * k[a] * ft.modes[s];
  });
  return inverse(out);
}

VectorFieldGrid curl(const VectorFieldGrid& f) {
  const SpectralVector ft = fourier(f);
  SpectralVector out(f.lattice);
  const cplx I(0.0, 1.0);
  for_each_mode(f.lattice, [&](std::size_t s, int i, int j, int l) {
    const Vec3 k = mode_vectors(f.lattice, i, j, l).derivative;
    const CVec3 v = load(ft, s);
    // Written out: Eigen's cross() conjugates for complex scalars.
    const CVec3 kxv(k[1] * v[2] - k[2] * v[1], k[2] * v[0] - k[0] * v[2], k[0] * v[1] - k[1] * v[0]);
    store(out, s, I * kxv);
  });
  return inverse(out);
}

ScalarGrid scalar_potential(const ScalarGrid& rho, const PoissonOptions& opts) {
  const double total = rho.integral();
  double scale = 0.0;
  for (double v : rho.values) scale += std::abs(v);
  scale *= rho.lattice.cell_volume();
  if (!opts.neutralizing_background && std::abs(total) > opts.neutrality_tolerance * std::max(scale, 1e-300))
    throw InvalidArgument("cell carries net charge " + std::to_string(total) +
                          "; enable the neutralizing background to solve anyway");
  SpectralScalar ft = fourier(rho);
  for_each_mode(rho.lattice, [&](std::size_t s, int i, int j, int l) {
    const double k2 = mode_vectors(rho.lattice, i, j, l).physical.squaredNorm();
    ft.modes[s] = k2 > 0.0 ? 4.0 * kPi * ft.modes[s] / k2 : cplx{};
  });
  return inverse(ft);
}

namespace {

SpectralVector internal_vector_potential_spectral(const SpectralVector& jt, const UnitSystem& u) {
  SpectralVector a = transverse_project(jt);
  for_each_mode(jt.lattice, [&](std::size_t s, int i, int j, int l) {
    const double k2 = mode_vectors(jt.lattice, i, j, l).physical.squaredNorm();
    const double g = k2 > 0.0 ? 4.0 * kPi / (u.c() * k2) : 0.0;
    for (int c = 0; c < 3; ++c) a.modes[c][s] *= g;
  });
  return a;
}

}  // namespace

VectorFieldGrid internal_vector_potential(const VectorFieldGrid& j, const UnitSystem& u) {
  return inverse(internal_vector_potential_spectral(fourier(j), u));
}

Deposit deposit_particles(const PointCurrentSet& ps, int nside, double L) {
  const Lattice lat(L, nside);
  dynamics::DarwinOptions relaxed;
  relaxed.r_min = 1e-300;
  dynamics::validate(ps, relaxed);
  Deposit d{ScalarGrid(lat), VectorFieldGrid(lat)};
  const double h = lat.spacing();
  const double inv_vol = 1.0 / lat.cell_volume();
  for (std::size_t p = 0; p < ps.size(); ++p) {
    const Vec3& r = ps.position[p];
    for (int a = 0; a < 3; ++a)
      if (!(r[a] >= 0.0 && r[a] < L))
        throw InvalidArgument("particle " + std::to_string(p) + " lies outside the box [0, L)^3");
    int base[3];
    double frac[3];
    for (int a = 0; a < 3; ++a) {
      const double s = r[a] / h;
      base[a] = std::min(static_cast<int>(std::floor(s)), nside - 1);
      frac[a] = s - base[a];
    }
    const Vec3 jp = ps.charge[p] / ps.mass[p] * ps.momentum[p];
    for (int dx = 0; dx < 2; ++dx)
      for (int dy = 0; dy < 2; ++dy)
        for (int dz = 0; dz < 2; ++dz) {
          const double w = (dx ? frac[0] : 1.0 - frac[0]) * (dy ? frac[1] : 1.0 - frac[1]) *
                           (dz ? frac[2] : 1.0 - frac[2]);
          if (w == 0.0) continue;
          const auto k = lat.index((base[0] + dx) % nside, (base[1] + dy) % nside, (base[2] + dz) % nside);
          d.rho.values[k] += ps.charge[p] * w * inv_vol;
          for (int a = 0; a < 3; ++a) d.current.components[a][k] += jp[a] * w * inv_vol;
        }
  }
  return d;
}

double transverse_current_energy(const VectorFieldGrid& j, const UnitSystem& u) {
  const Lattice& lat = j.lattice;
  const SpectralVector pj = transverse_project(fourier(j));
  double sum = 0.0;
  for_each_mode(lat, [&](std::size_t s, int i, int jj, int l) {
    const double k2 = mode_vectors(lat, i, jj, l).physical.squaredNorm();
    if (k2 == 0.0) return;
    const double mag2 = std::norm(pj.modes[0][s]) + std::norm(pj.modes[1][s]) + std::norm(pj.modes[2][s]);
    sum += half_spectrum_weight(lat, l) * 4.0 * kPi / k2 * mag2;
  });
  const double h3 = lat.cell_volume();
  return -0.5 * u.inv_c2() * sum * h3 * h3 / (lat.L * lat.L * lat.L);
}

double transverse_current_energy_real_space(const VectorFieldGrid& j, const UnitSystem& u) {
  const VectorFieldGrid a = internal_vector_potential(j, u);
  double sum = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < j.components[c].size(); ++k) sum += j.components[c][k] * a.components[c][k];
  return -0.5 / u.c() * sum * j.lattice.cell_volume();
}

double grid_darwin_pair_energy(const PointCurrentSet& ps, int nside, double L, const UnitSystem& u) {
  double e = transverse_current_energy(deposit_particles(ps, nside, L).current, u);
  for (std::size_t p = 0; p < ps.size(); ++p) {
    PointCurrentSet single;
    single.add(ps.charge[p], ps.mass[p], ps.position[p], ps.momentum[p]);
    e -= transverse_current_energy(deposit_particles(single, nside, L).current, u);
  }
  return e;
}

namespace {

template <class T>
void put_le(std::ostream& os, T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    v = std::bit_cast<T>(bytes);
  }
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InvalidArgument("truncated grid dump");
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    v = std::bit_cast<T>(bytes);
  }
  return v;
}

constexpr char kMagic[8] = {'D', 'R', 'W', 'G', 'R', 'I', 'D', '1'};

}  // namespace

void write_grid_csv(std::ostream& os, const VectorFieldGrid& f) {
  const int n = f.lattice.nside;
  char buf[256];
  std::snprintf(buf, sizeof buf, "# L=%.17g nside=%d order=x,y,z components=fx,fy,fz\n", f.lattice.L, n);
  os << buf << "i,j,l,fx,fy,fz\n";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const Vec3 v = f.at(i, j, l);
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g,%.17g,%.17g\n", i, j, l, v[0], v[1], v[2]);
        os << buf;
      }
}

void write_grid_binary(std::ostream& os, const VectorFieldGrid& f) {
  os.write(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(f.lattice.nside));
  put_le<std::uint32_t>(os, 3u);
  put_le<double>(os, f.lattice.L);
  for (const auto& c : f.components)
    for (double v : c) put_le<double>(os, v);
}

VectorFieldGrid read_grid_binary(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw InvalidArgument("not a grid dump");
  const auto n = get_le<std::uint32_t>(is);
  const auto ncomp = get_le<std::uint32_t>(is);
  if (ncomp != 3) throw InvalidArgument("grid dump must hold 3 components");
  const double L = get_le<double>(is);
  VectorFieldGrid f(Lattice(L, static_cast<int>(n)));
  for (auto& c : f.components)
    for (double& v : c) v = get_le<double>(is);
  return f;
}

}  // namespace darwin::fields
