#pragma once

// Joint-state construction and screen physics for the double-slit
// quantum-eraser model: far-field intensity patterns, photon projective
// measurements, conditioning and fringe visibility.

#include "eraser/qmat.hpp"

#include <numbers>
#include <vector>

namespace eraser {

/// Full physical configuration of the eraser: slit amplitudes (a, b),
/// marker-photon overlap amplitudes (h, v), transverse coherence gamma
/// and half-wave-plate orientation theta.
struct EraserParams {
  Complex a{1.0 / std::numbers::sqrt2, 0.0};
  Complex b{1.0 / std::numbers::sqrt2, 0.0};
  Complex h{0.0, 0.0};
  Complex v{1.0, 0.0};
  double gamma = 1.0;
  double theta = 0.0;  // radians, wave-plate fast-axis orientation

  /// Throws std::invalid_argument if |a|^2+|b|^2 or |h|^2+|v|^2 deviate
  /// from 1 by more than 1e-12, or gamma leaves [0,1].
  void validate() const;
};

/// Double-slit far-field geometry. x_grid holds the screen positions on
/// which patterns are evaluated, strictly increasing.
struct ScreenGeometry {
  double slit_separation = 600e-9;   // m
  double slit_width = 100e-9;        // m
  double wavelength = 2.51e-12;      // m, electron de Broglie
  double camera_length = 1.0;        // m
  std::vector<double> x_grid;

  void validate() const;

  double fringe_period() const {
    return wavelength * camera_length / slit_separation;
  }
  double envelope_first_null() const {
    return wavelength * camera_length / slit_width;
  }
};

/// Relativistic de Broglie wavelength (m) for an electron accelerated
/// through `kilovolts` kV.
double wavelength_from_kv(double kilovolts);

/// Uniform grid of `n` points spanning [x_min, x_max].
std::vector<double> linear_grid(double x_min, double x_max, int n);

struct IntensityPattern {
  std::vector<double> x;          // m
  std::vector<double> intensity;  // arbitrary units, >= -1e-12
  double normalization = 1.0;     // total probability represented
};

/// rho = gamma |psi_D><psi_D| + (1-gamma) (dephased mixture), with
/// |psi_D> = a|L,H> + b|R>(h|H> + v|V>), in basis (LH, LV, RH, RV).
DensityMatrix4 build_joint_state(const EraserParams& p);

/// Statevector of the pure branch |psi_D>.
Vector4 pure_state_vector(const EraserParams& p);

/// Single-slit envelope I0(x) = sinc^2(pi w x / (lambda L)), I0(0) = 1.
double envelope(const ScreenGeometry& g, double x);

/// Two-path phase phi(x) = 2 pi d x / (lambda L).
double phase_difference(const ScreenGeometry& g, double x);

/// Half-wave-plate Jones unitary with fast axis at theta:
/// |H> -> cos2t|H> + sin2t|V>,  |V> -> sin2t|H> - cos2t|V>.
Matrix2 waveplate_unitary(double theta);

enum class PauliAxis { x, y, z };

/// Rank-1 projector onto the +/-1 eigenvector of the chosen Pauli.
Matrix2 photon_projector(PauliAxis axis, int outcome);

struct ConditionedState {
  DensityMatrix2 rho_e;
  double probability;
};

/// Projects the photon onto P and returns the normalized electron state
/// together with the branch probability Tr(rho (id x P)). Throws
/// std::domain_error on a zero-probability branch (p < 1e-12).
ConditionedState condition_on_photon(const DensityMatrix4& rho,
                                     const Matrix2& projector);

/// I(x) = I0(x) [rho_LL + rho_RR + 2 Re(rho_LR e^{i phi(x)})] on x_grid.
IntensityPattern intensity_pattern(const DensityMatrix2& rho_e,
                                   const ScreenGeometry& g);

/// Analytic fringe visibility 2|rho_LR| / (rho_LL + rho_RR).
double fringe_visibility(const DensityMatrix2& rho_e);

/// Grid-based cross-check: extracts (Imax-Imin)/(Imax+Imin) from the
/// envelope-normalized pattern over one full fringe period.
double fringe_visibility_numeric(const DensityMatrix2& rho_e,
                                 const ScreenGeometry& g);

/// Electron state when no marker photon was generated: coherence gamma
/// survives between the slit amplitudes.
DensityMatrix2 no_loss_electron_state(const EraserParams& p);

}  // namespace eraser
