#pragma once

// Flat key-value experiment configuration. Every key has a default; an
// unknown key is rejected naming the offender. Complex amplitudes are
// written "re" or "re,im".
//
// Keys (defaults in parentheses):
//   a (0.7071067811865476)   left-slit amplitude
//   b (0.7071067811865476)   right-slit amplitude
//   h (0)                    marker overlap with |H>
//   v (1)                    marker overlap with |V>
//   gamma (1)                transverse coherence in [0,1]
//   theta (0)                half-wave-plate orientation, radians
//   d_m (600e-9)             slit separation, m
//   w_m (100e-9)             slit width, m
//   lambda_m (2.51e-12)      electron de Broglie wavelength, m
//   voltage_kv (unset)       alternative to lambda_m: accelerating voltage
//   camera_m (1.0)           camera length, m
//   x_min_m (-2.51e-5)       screen window lower edge, m
//   x_max_m (2.51e-5)        screen window upper edge, m
//   x_points (2001)          grid points
//   n_electrons (1000000)
//   p_gen (0.001)            marker-photon generation probability
//   jitter_ps (50)           detector timing jitter sigma
//   dark_rate_hz (0)         dark counts per detector
//   window_ps (2000)         coincidence window
//   seed (1)                 RNG seed
//   settings (xx,xy,xz,yx,yy,yz,zx,zy,zz)   schedule of setting labels

#include "eraser/coincidence.hpp"

#include <map>
#include <string>

namespace eraser {

struct ExperimentConfig {
  RunConfig run;

  static ExperimentConfig defaults();

  /// Parses "key = value" lines ('#' starts a comment). Throws
  /// std::invalid_argument naming any unknown key.
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);

  /// Applies overrides on top of this config (same key set).
  void apply(const std::map<std::string, std::string>& overrides);

  /// Round-trippable echo of the effective configuration.
  std::string echo() const;
};

Complex parse_complex(const std::string& text);

}  // namespace eraser
