#pragma once

// Monte Carlo generation of time-tagged electron and photon detection
// events from a configured eraser state, and reconstruction of
// conditioned patterns and Pauli correlators from the event stream via
// coincidence matching.

#include "eraser/entanglement.hpp"
#include "eraser/model.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace eraser {

/// A measurement setting: which Pauli the electron side reads out
/// (z = real-space which-slit imaging, x/y = diffraction-plane
/// quadratures) and which Pauli basis the photon polarization analyzer
/// selects. Label form "ez,ph" collapsed to two letters, e.g. "zx".
struct MeasurementSetting {
  PauliAxis electron;
  PauliAxis photon;

  std::string label() const;
  static MeasurementSetting from_label(const std::string& label);
  bool operator==(const MeasurementSetting&) const = default;
};

/// All nine tomography settings, row-major over (electron, photon).
std::vector<MeasurementSetting> all_settings();

enum class EventKind { electron, photon };

struct DetectionEvent {
  EventKind kind;
  std::int64_t t_ps;             // picoseconds
  // electron fields
  double x_m = 0.0;              // screen or slit-image position
  bool energy_loss = false;
  // photon fields
  int detector_id = 0;           // 0 = SPD0 (+1 outcome), 1 = SPD1 (-1)
  std::string setting_id;        // setting label, photon events only
};

struct RunConfig {
  EraserParams params;
  ScreenGeometry geometry;
  std::int64_t n_electrons = 1'000'000;
  double photon_generation_probability = 1e-3;
  double timing_jitter_sigma_ps = 50.0;
  double dark_count_rate_hz = 0.0;     // per detector
  std::int64_t coincidence_window_ps = 2'000;
  std::uint64_t rng_seed = 1;
  std::vector<MeasurementSetting> schedule = all_settings();

  void validate() const;
};

/// Electron beam period; one electron arrives per slot.
inline constexpr std::int64_t kBeamPeriodPs = 10'000;

/// Simulates the full run: electrons in contiguous blocks, one block per
/// schedule entry, each block driven by its own seed derived from
/// (rng_seed, block index) so chunked and serial generation agree.
/// Returns the stream sorted by timestamp.
std::vector<DetectionEvent> simulate_events(const RunConfig& cfg);

struct CoincidencePair {
  DetectionEvent electron;
  DetectionEvent photon;
  std::int64_t delta_t_ps;  // photon time minus electron time
};

struct MatchResult {
  std::vector<CoincidencePair> pairs;
  std::int64_t orphan_photons = 0;       // photons left unmatched
  std::int64_t unmatched_electrons = 0;  // loss electrons left unmatched
};

/// Single linear pass over a time-sorted stream. Photons are processed in
/// timestamp order; each is paired with the nearest-in-time unmatched
/// loss-flagged electron within the window, ties broken toward the
/// earlier electron. Throws on unsorted input.
MatchResult match_coincidences(const std::vector<DetectionEvent>& stream,
                               std::int64_t window_ps);

/// Reference matcher with the same pairing rule, quadratic scan; used to
/// cross-check the linear pass on small streams.
MatchResult match_coincidences_bruteforce(
    const std::vector<DetectionEvent>& stream, std::int64_t window_ps);

struct ConditionedHistogram {
  std::vector<double> bin_centers;
  std::vector<double> counts;
  std::int64_t total = 0;
};

/// Counts matched electrons whose photon carries the given setting label
/// and detector id, binned on [x_lo, x_hi).
ConditionedHistogram histogram_conditioned(
    const std::vector<CoincidencePair>& pairs, const std::string& setting,
    int detector_id, double x_lo, double x_hi, int n_bins);

/// Weighted least-squares fit of I0(x) (p + q cos phi + r sin phi) to a
/// conditioned histogram. Exposes the fitted electron expectations
/// <sigma_x> = q/p and <sigma_y> = r/p with propagated errors.
struct FringeFit {
  double p, q, r;
  double sigma_x, sigma_x_err;
  double sigma_y, sigma_y_err;
};

FringeFit fit_fringes(const ConditionedHistogram& hist,
                      const ScreenGeometry& g);

/// Full correlator estimation from matched pairs grouped by setting:
/// photon singles from outcome frequencies, electron readout either from
/// which-slit tags (z settings) or fringe-quadrature fits (x/y settings),
/// with binomial / propagated standard errors. Requires at least one pair
/// in every setting of the 3x3 grid.
PauliCorrelators estimate_correlators(
    const std::vector<CoincidencePair>& pairs, const ScreenGeometry& g,
    int n_bins = 128);

/// Seed for block `index` derived from the master seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace eraser
