#include "eraser/model.hpp"

#include <algorithm>
#include <cmath>

namespace eraser {

namespace {
constexpr double kAmplitudeTol = 1e-12;
constexpr double kZeroBranch = 1e-12;
}  // namespace

void EraserParams::validate() const {
  const double slit_norm = std::norm(a) + std::norm(b);
  if (std::abs(slit_norm - 1.0) > kAmplitudeTol)
    throw std::invalid_argument("EraserParams: |a|^2+|b|^2 = " +
                                std::to_string(slit_norm) + ", expected 1");
  const double marker_norm = std::norm(h) + std::norm(v);
  if (std::abs(marker_norm - 1.0) > kAmplitudeTol)
    throw std::invalid_argument("EraserParams: |h|^2+|v|^2 = " +
                                std::to_string(marker_norm) + ", expected 1");
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("EraserParams: gamma = " +
                                std::to_string(gamma) + " outside [0,1]");
}

void ScreenGeometry::validate() const {
  if (!(slit_separation > slit_width && slit_width > 0.0))
    throw std::invalid_argument("ScreenGeometry: need d > w > 0");
  if (wavelength <= 0.0 || camera_length <= 0.0)
    throw std::invalid_argument("ScreenGeometry: wavelength and camera "
                                "length must be positive");
  for (std::size_t i = 1; i < x_grid.size(); ++i)
    if (x_grid[i] <= x_grid[i - 1])
      throw std::invalid_argument("ScreenGeometry: x_grid not strictly "
                                  "increasing at index " + std::to_string(i));
}

double wavelength_from_kv(double kilovolts) {
  if (kilovolts <= 0.0)
    throw std::invalid_argument("wavelength_from_kv: voltage must be > 0");
  constexpr double h_planck = 6.62607015e-34;   // J s
  constexpr double m_e = 9.1093837015e-31;      // kg
  constexpr double c = 299792458.0;             // m/s
  constexpr double e_charge = 1.602176634e-19;  // C
  const double eV = kilovolts * 1e3 * e_charge;
  return h_planck / std::sqrt(2.0 * m_e * eV * (1.0 + eV / (2.0 * m_e * c * c)));
}

std::vector<double> linear_grid(double x_min, double x_max, int n) {
  if (n < 2 || x_max <= x_min)
    throw std::invalid_argument("linear_grid: need n >= 2 and x_max > x_min");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i)
    g[i] = x_min + (x_max - x_min) * static_cast<double>(i) / (n - 1);
  return g;
}

Vector4 pure_state_vector(const EraserParams& p) {
  Vector4 psi;
  psi << p.a, Complex(0, 0), p.b * p.h, p.b * p.v;
  return psi;
}

DensityMatrix4 build_joint_state(const EraserParams& p) {
  p.validate();
  const Vector4 psi = pure_state_vector(p);
  Matrix4 rho = p.gamma * (psi * psi.adjoint());

  // dephased branch: |a|^2 |L,H><L,H| + |b|^2 |R>(h,v)(h,v)^dag<R|
  Matrix4 mix = Matrix4::Zero();
  mix(0, 0) = std::norm(p.a);
  Vector2 marker;
  marker << p.h, p.v;
  mix.block<2, 2>(2, 2) = std::norm(p.b) * (marker * marker.adjoint());
  rho += (1.0 - p.gamma) * mix;

  return DensityMatrix4::validate(rho);
}

double envelope(const ScreenGeometry& g, double x) {
  const double u = std::numbers::pi * g.slit_width * x /
                   (g.wavelength * g.camera_length);
  if (std::abs(u) < 1e-12) return 1.0;
  const double s = std::sin(u) / u;
  return s * s;
}

double phase_difference(const ScreenGeometry& g, double x) {
  return 2.0 * std::numbers::pi * g.slit_separation * x /
         (g.wavelength * g.camera_length);
}

Matrix2 waveplate_unitary(double theta) {
  const double c = std::cos(2.0 * theta);
  const double s = std::sin(2.0 * theta);
  Matrix2 u;
  u << c, s, s, -c;
  return u;
}

Matrix2 photon_projector(PauliAxis axis, int outcome) {
  if (outcome != 1 && outcome != -1)
    throw std::invalid_argument("photon_projector: outcome must be +1 or -1");
  Matrix2 sigma;
  switch (axis) {
    case PauliAxis::x: sigma = pauli_x(); break;
    case PauliAxis::y: sigma = pauli_y(); break;
    case PauliAxis::z: sigma = pauli_z(); break;
  }
  return 0.5 * (identity2() + static_cast<double>(outcome) * sigma);
}

ConditionedState condition_on_photon(const DensityMatrix4& rho,
                                     const Matrix2& projector) {
  const double proj_dev =
      (projector * projector - projector).lpNorm<Eigen::Infinity>();
  if (proj_dev > 1e-10)
    throw std::invalid_argument("condition_on_photon: P^2 != P, deviation " +
                                std::to_string(proj_dev));
  const Matrix4 big_p = tensor_product(identity2(), projector);
  const double probability = std::real((rho.mat() * big_p).trace());
  if (probability < kZeroBranch)
    throw std::domain_error("condition_on_photon: zero-probability branch");
  const Matrix4 projected = big_p * rho.mat() * big_p / probability;
  const Matrix2 rho_e = partial_trace_raw(projected, Subsystem::photon);
  return {DensityMatrix2::validate(rho_e, rho.tolerance()), probability};
}

IntensityPattern intensity_pattern(const DensityMatrix2& rho_e,
                                   const ScreenGeometry& g) {
  g.validate();
  IntensityPattern out;
  out.x = g.x_grid;
  out.intensity.resize(g.x_grid.size());
  const double pop = std::real(rho_e(0, 0) + rho_e(1, 1));
  const Complex lr = rho_e(0, 1);
  for (std::size_t i = 0; i < g.x_grid.size(); ++i) {
    const double x = g.x_grid[i];
    const double phi = phase_difference(g, x);
    double val = envelope(g, x) *
                 (pop + 2.0 * std::real(lr * Complex(std::cos(phi),
                                                     std::sin(phi))));
    out.intensity[i] = val;
  }
  out.normalization = pop;
  return out;
}

double fringe_visibility(const DensityMatrix2& rho_e) {
  const double pop = std::real(rho_e(0, 0) + rho_e(1, 1));
  if (pop < 1e-12)
    throw std::invalid_argument("fringe_visibility: vanishing population");
  return std::min(1.0, 2.0 * std::abs(rho_e(0, 1)) / pop);
}

double fringe_visibility_numeric(const DensityMatrix2& rho_e,
                                 const ScreenGeometry& g) {
  // extremize I(x)/I0(x) over exactly one fringe period around x = 0:
  // coarse scan to bracket, then ternary-search refinement
  const double period = g.fringe_period();
  const double pop = std::real(rho_e(0, 0) + rho_e(1, 1));
  const Complex lr = rho_e(0, 1);
  const auto ratio = [&](double x) {
    const double phi = phase_difference(g, x);
    return pop + 2.0 * std::real(lr * Complex(std::cos(phi), std::sin(phi)));
  };
  const int n = 1024;
  const double x0 = -0.5 * period;
  const double step = period / n;
  int kmax = 0, kmin = 0;
  double vmax = ratio(x0), vmin = vmax;
  for (int i = 1; i <= n; ++i) {
    const double v = ratio(x0 + i * step);
    if (v > vmax) { vmax = v; kmax = i; }
    if (v < vmin) { vmin = v; kmin = i; }
  }
  const auto refine = [&](int k, double sign) {
    double lo = x0 + (k - 1) * step;
    double hi = x0 + (k + 1) * step;
    while (hi - lo > 1e-16 * period + 1e-300) {
      const double m1 = lo + (hi - lo) / 3.0;
      const double m2 = hi - (hi - lo) / 3.0;
      if (sign * ratio(m1) < sign * ratio(m2)) lo = m1; else hi = m2;
      if (hi - lo < 1e-13 * period) break;
    }
    return ratio(0.5 * (lo + hi));
  };
  const double imax = refine(kmax, 1.0);
  const double imin = refine(kmin, -1.0);
  if (imax + imin < 1e-12)
    throw std::invalid_argument("fringe_visibility_numeric: empty pattern");
  return (imax - imin) / (imax + imin);
}

DensityMatrix2 no_loss_electron_state(const EraserParams& p) {
  Matrix2 rho;
  rho(0, 0) = std::norm(p.a);
  rho(1, 1) = std::norm(p.b);
  rho(0, 1) = p.gamma * p.a * std::conj(p.b);
  rho(1, 0) = std::conj(rho(0, 1));
  return DensityMatrix2::validate(rho);
}

}  // namespace eraser
