#include "eraser/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>

namespace eraser {

namespace {

char axis_letter(PauliAxis a) {
  switch (a) {
    case PauliAxis::x: return 'x';
    case PauliAxis::y: return 'y';
    case PauliAxis::z: return 'z';
  }
  return '?';
}

PauliAxis axis_from_letter(char c) {
  switch (c) {
    case 'x': return PauliAxis::x;
    case 'y': return PauliAxis::y;
    case 'z': return PauliAxis::z;
    default:
      throw std::invalid_argument(std::string("unknown Pauli axis '") + c +
                                  "'");
  }
}

/// Inverse-CDF sampler over a tabulated nonnegative pattern on x_grid,
/// linear interpolation inside each cell.
class PatternSampler {
 public:
  PatternSampler(const std::vector<double>& x, const std::vector<double>& f)
      : x_(x), cdf_(x.size(), 0.0) {
    if (x.size() < 2) throw std::invalid_argument("PatternSampler: empty grid");
    for (std::size_t i = 1; i < x.size(); ++i) {
      const double cell =
          0.5 * (std::max(f[i - 1], 0.0) + std::max(f[i], 0.0)) *
          (x[i] - x[i - 1]);
      cdf_[i] = cdf_[i - 1] + cell;
    }
    total_ = cdf_.back();
    if (total_ <= 0.0)
      throw std::invalid_argument("PatternSampler: pattern has zero mass");
  }

  double sample(double u) const {  // u uniform in [0,1)
    const double target = u * total_;
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    std::size_t hi = std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1);
    if (hi == 0) hi = 1;
    const std::size_t lo = hi - 1;
    const double span = cdf_[hi] - cdf_[lo];
    const double frac = span > 0.0 ? (target - cdf_[lo]) / span : 0.5;
    return x_[lo] + frac * (x_[hi] - x_[lo]);
  }

 private:
  std::vector<double> x_;
  std::vector<double> cdf_;
  double total_;
};

struct OutcomeChannel {
  double probability;
  DensityMatrix2 rho_e;
};

std::int64_t jittered(std::int64_t t, double sigma_ps, std::mt19937_64& rng) {
  if (sigma_ps <= 0.0) return t;
  std::normal_distribution<double> gauss(0.0, sigma_ps);
  return t + static_cast<std::int64_t>(std::llround(gauss(rng)));
}

}  // namespace

std::string MeasurementSetting::label() const {
  return std::string{axis_letter(electron), axis_letter(photon)};
}

MeasurementSetting MeasurementSetting::from_label(const std::string& label) {
  if (label.size() != 2)
    throw std::invalid_argument("setting label must be two letters, got '" +
                                label + "'");
  return {axis_from_letter(label[0]), axis_from_letter(label[1])};
}

std::vector<MeasurementSetting> all_settings() {
  std::vector<MeasurementSetting> out;
  for (PauliAxis e : {PauliAxis::x, PauliAxis::y, PauliAxis::z})
    for (PauliAxis p : {PauliAxis::x, PauliAxis::y, PauliAxis::z})
      out.push_back({e, p});
  return out;
}

void RunConfig::validate() const {
  params.validate();
  geometry.validate();
  if (geometry.x_grid.size() < 2)
    throw std::invalid_argument("RunConfig: x_grid is empty");
  if (n_electrons <= 0)
    throw std::invalid_argument("RunConfig: n_electrons must be > 0");
  if (coincidence_window_ps <= 0)
    throw std::invalid_argument("RunConfig: coincidence window must be > 0");
  if (photon_generation_probability < 0.0 ||
      photon_generation_probability > 1.0)
    throw std::invalid_argument("RunConfig: photon generation probability "
                                "outside [0,1]");
  if (schedule.empty())
    throw std::invalid_argument("RunConfig: empty setting schedule");
  // sampling fidelity needs >50 grid points per fringe period
  double max_step = 0.0;
  for (std::size_t i = 1; i < geometry.x_grid.size(); ++i)
    max_step = std::max(max_step, geometry.x_grid[i] - geometry.x_grid[i - 1]);
  if (max_step > geometry.fringe_period() / 50.0)
    throw std::invalid_argument(
        "RunConfig: x_grid coarser than 50 points per fringe period");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 over master + golden-ratio-stepped index
  std::uint64_t z = master + (index + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<DetectionEvent> simulate_events(const RunConfig& cfg) {
  cfg.validate();
  const DensityMatrix4 rho = build_joint_state(cfg.params);
  const DensityMatrix2 no_loss = no_loss_electron_state(cfg.params);
  const PatternSampler no_loss_sampler(
      cfg.geometry.x_grid, intensity_pattern(no_loss, cfg.geometry).intensity);

  const std::size_t n_blocks = cfg.schedule.size();
  const std::int64_t per_block =
      cfg.n_electrons / static_cast<std::int64_t>(n_blocks);
  const std::int64_t remainder =
      cfg.n_electrons % static_cast<std::int64_t>(n_blocks);

  std::vector<DetectionEvent> events;
  events.reserve(static_cast<std::size_t>(cfg.n_electrons) * 11 / 10);

  std::int64_t electron_index = 0;
  for (std::size_t blk = 0; blk < n_blocks; ++blk) {
    const MeasurementSetting setting = cfg.schedule[blk];
    const std::int64_t n_blk =
        per_block + (static_cast<std::int64_t>(blk) < remainder ? 1 : 0);
    const std::int64_t t_start = electron_index * kBeamPeriodPs;
    std::mt19937_64 rng(derive_seed(cfg.rng_seed, blk));
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    // conditioned channels for this photon basis
    std::vector<OutcomeChannel> channel;
    std::vector<PatternSampler> channel_sampler;
    for (int outcome : {+1, -1}) {
      const Matrix2 proj = photon_projector(setting.photon, outcome);
      const ConditionedState cs = condition_on_photon(rho, proj);
      channel.push_back({cs.probability, cs.rho_e});
      channel_sampler.emplace_back(
          cfg.geometry.x_grid,
          intensity_pattern(cs.rho_e, cfg.geometry).intensity);
    }

    const double half_width = 0.5 * cfg.geometry.slit_width;
    const double slit_offset = 0.5 * cfg.geometry.slit_separation;

    for (std::int64_t i = 0; i < n_blk; ++i, ++electron_index) {
      const std::int64_t t_nominal = electron_index * kBeamPeriodPs;
      DetectionEvent e;
      e.kind = EventKind::electron;

      if (uni(rng) < cfg.photon_generation_probability) {
        // marker photon generated: sample the joint measurement
        const int outcome = uni(rng) < channel[0].probability ? +1 : -1;
        const std::size_t ch = outcome == +1 ? 0 : 1;
        e.energy_loss = true;
        if (setting.electron == PauliAxis::z) {
          // real-space slit image: L maps to -d/2, R to +d/2
          const double p_left = std::real(channel[ch].rho_e(0, 0));
          const double slit = uni(rng) < p_left ? -slit_offset : slit_offset;
          e.x_m = slit + (uni(rng) - 0.5) * 2.0 * half_width;
        } else {
          e.x_m = channel_sampler[ch].sample(uni(rng));
        }
        e.t_ps = jittered(t_nominal, cfg.timing_jitter_sigma_ps, rng);
        events.push_back(e);

        DetectionEvent ph;
        ph.kind = EventKind::photon;
        ph.detector_id = outcome == +1 ? 0 : 1;
        ph.setting_id = setting.label();
        ph.t_ps = jittered(t_nominal, cfg.timing_jitter_sigma_ps, rng);
        events.push_back(ph);
      } else {
        e.energy_loss = false;
        if (setting.electron == PauliAxis::z) {
          const double p_left = std::real(no_loss(0, 0));
          const double slit = uni(rng) < p_left ? -slit_offset : slit_offset;
          e.x_m = slit + (uni(rng) - 0.5) * 2.0 * half_width;
        } else {
          e.x_m = no_loss_sampler.sample(uni(rng));
        }
        e.t_ps = jittered(t_nominal, cfg.timing_jitter_sigma_ps, rng);
        events.push_back(e);
      }
    }

    // dark counts: Poisson per detector over the block duration
    if (cfg.dark_count_rate_hz > 0.0 && n_blk > 0) {
      const double duration_s =
          static_cast<double>(n_blk) * kBeamPeriodPs * 1e-12;
      std::poisson_distribution<std::int64_t> poisson(cfg.dark_count_rate_hz *
                                                      duration_s);
      for (int det = 0; det < 2; ++det) {
        const std::int64_t n_dark = poisson(rng);
        for (std::int64_t kdark = 0; kdark < n_dark; ++kdark) {
          DetectionEvent ph;
          ph.kind = EventKind::photon;
          ph.detector_id = det;
          ph.setting_id = setting.label();
          ph.t_ps = t_start + static_cast<std::int64_t>(
                                  uni(rng) * static_cast<double>(n_blk) *
                                  kBeamPeriodPs);
          events.push_back(ph);
        }
      }
    }
  }

  std::stable_sort(events.begin(), events.end(),
                   [](const DetectionEvent& a, const DetectionEvent& b) {
                     return a.t_ps < b.t_ps;
                   });
  return events;
}

namespace {

void check_sorted(const std::vector<DetectionEvent>& stream) {
  for (std::size_t i = 1; i < stream.size(); ++i)
    if (stream[i].t_ps < stream[i - 1].t_ps)
      throw std::invalid_argument("match_coincidences: stream not sorted by "
                                  "timestamp");
}

MatchResult assemble(const std::vector<DetectionEvent>& electrons,
                     const std::vector<DetectionEvent>& photons,
                     const std::vector<std::int64_t>& chosen) {
  MatchResult out;
  std::int64_t used = 0;
  for (std::size_t p = 0; p < photons.size(); ++p) {
    if (chosen[p] < 0) {
      ++out.orphan_photons;
      continue;
    }
    const auto& e = electrons[static_cast<std::size_t>(chosen[p])];
    out.pairs.push_back({e, photons[p], photons[p].t_ps - e.t_ps});
    ++used;
  }
  out.unmatched_electrons =
      static_cast<std::int64_t>(electrons.size()) - used;
  return out;
}

}  // namespace

MatchResult match_coincidences(const std::vector<DetectionEvent>& stream,
                               std::int64_t window_ps) {
  check_sorted(stream);
  std::vector<DetectionEvent> electrons, photons;
  for (const auto& ev : stream) {
    if (ev.kind == EventKind::electron) {
      if (ev.energy_loss) electrons.push_back(ev);
    } else {
      photons.push_back(ev);
    }
  }

  std::vector<bool> taken(electrons.size(), false);
  std::vector<std::int64_t> chosen(photons.size(), -1);
  std::size_t lo = 0;  // first electron that can still matter
  for (std::size_t p = 0; p < photons.size(); ++p) {
    const std::int64_t t = photons[p].t_ps;
    while (lo < electrons.size() &&
           (electrons[lo].t_ps < t - window_ps || taken[lo]))
      ++lo;
    std::int64_t best = -1;
    std::int64_t best_dt = window_ps + 1;
    for (std::size_t e = lo;
         e < electrons.size() && electrons[e].t_ps <= t + window_ps; ++e) {
      if (taken[e]) continue;
      const std::int64_t dt = std::llabs(electrons[e].t_ps - t);
      if (dt < best_dt) {  // strict: earlier electron wins ties
        best_dt = dt;
        best = static_cast<std::int64_t>(e);
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = true;
      chosen[p] = best;
    }
  }
  return assemble(electrons, photons, chosen);
}

MatchResult match_coincidences_bruteforce(
    const std::vector<DetectionEvent>& stream, std::int64_t window_ps) {
  check_sorted(stream);
  std::vector<DetectionEvent> electrons, photons;
  for (const auto& ev : stream) {
    if (ev.kind == EventKind::electron) {
      if (ev.energy_loss) electrons.push_back(ev);
    } else {
      photons.push_back(ev);
    }
  }
  std::vector<bool> taken(electrons.size(), false);
  std::vector<std::int64_t> chosen(photons.size(), -1);
  for (std::size_t p = 0; p < photons.size(); ++p) {
    std::int64_t best = -1;
    std::int64_t best_dt = window_ps + 1;
    for (std::size_t e = 0; e < electrons.size(); ++e) {
      if (taken[e]) continue;
      const std::int64_t dt = std::llabs(electrons[e].t_ps - photons[p].t_ps);
      if (dt < best_dt) {
        best_dt = dt;
        best = static_cast<std::int64_t>(e);
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = true;
      chosen[p] = best;
    }
  }
  return assemble(electrons, photons, chosen);
}

ConditionedHistogram histogram_conditioned(
    const std::vector<CoincidencePair>& pairs, const std::string& setting,
    int detector_id, double x_lo, double x_hi, int n_bins) {
  if (n_bins <= 0 || x_hi <= x_lo)
    throw std::invalid_argument("histogram_conditioned: bad binning");
  ConditionedHistogram h;
  h.bin_centers.resize(n_bins);
  h.counts.assign(n_bins, 0.0);
  const double width = (x_hi - x_lo) / n_bins;
  for (int i = 0; i < n_bins; ++i)
    h.bin_centers[i] = x_lo + (i + 0.5) * width;
  for (const auto& pr : pairs) {
    if (pr.photon.setting_id != setting ||
        pr.photon.detector_id != detector_id)
      continue;
    const int bin =
        static_cast<int>(std::floor((pr.electron.x_m - x_lo) / width));
    if (bin >= 0 && bin < n_bins) {
      h.counts[bin] += 1.0;
      ++h.total;
    }
  }
  return h;
}

FringeFit fit_fringes(const ConditionedHistogram& hist,
                      const ScreenGeometry& g) {
  const int n = static_cast<int>(hist.bin_centers.size());
  if (n < 4)
    throw std::invalid_argument("fit_fringes: too few bins");
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd y(n), w(n);
  const double bin_width = n > 1 ? hist.bin_centers[1] - hist.bin_centers[0]
                                 : g.fringe_period();
  constexpr int kSub = 32;  // bin-averaged basis kills binning attenuation
  for (int i = 0; i < n; ++i) {
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    for (int s = 0; s < kSub; ++s) {
      const double x =
          hist.bin_centers[i] + bin_width * ((s + 0.5) / kSub - 0.5);
      const double env = envelope(g, x);
      const double phi = phase_difference(g, x);
      b0 += env;
      b1 += env * std::cos(phi);
      b2 += env * std::sin(phi);
    }
    a(i, 0) = b0 / kSub;
    a(i, 1) = b1 / kSub;
    a(i, 2) = b2 / kSub;
    y(i) = hist.counts[i];
    w(i) = 1.0 / std::max(hist.counts[i], 1.0);  // Poisson variance
  }
  const Eigen::MatrixXd awa = a.transpose() * w.asDiagonal() * a;
  // degenerate when the envelope support is too narrow to resolve fringes
  Eigen::FullPivLU<Eigen::MatrixXd> lu(awa);
  if (!lu.isInvertible())
    throw std::runtime_error("fit_fringes: degenerate design matrix "
                             "(envelope support too narrow)");
  const Eigen::MatrixXd cov = lu.inverse();
  const Eigen::Vector3d coef = cov * (a.transpose() * w.asDiagonal() * y);

  FringeFit fit;
  fit.p = coef(0);
  fit.q = coef(1);
  fit.r = coef(2);
  if (fit.p <= 0.0)
    throw std::runtime_error("fit_fringes: nonpositive fitted population");
  const auto ratio_err = [&](int k) {
    // var(q/p) by first-order propagation
    const double qk = coef(k);
    const double var = cov(k, k) / (fit.p * fit.p) +
                       qk * qk * cov(0, 0) / std::pow(fit.p, 4) -
                       2.0 * qk * cov(0, k) / std::pow(fit.p, 3);
    return std::sqrt(std::max(var, 0.0));
  };
  fit.sigma_x = fit.q / fit.p;
  fit.sigma_x_err = ratio_err(1);
  fit.sigma_y = fit.r / fit.p;
  fit.sigma_y_err = ratio_err(2);
  return fit;
}

PauliCorrelators estimate_correlators(
    const std::vector<CoincidencePair>& pairs, const ScreenGeometry& g,
    int n_bins) {
  // group by setting label, then by detector
  std::map<std::string, std::vector<const CoincidencePair*>> by_setting;
  for (const auto& pr : pairs) by_setting[pr.photon.setting_id].push_back(&pr);

  std::string missing;
  for (const auto& s : all_settings())
    if (!by_setting.count(s.label())) missing += s.label() + " ";
  if (!missing.empty())
    throw std::invalid_argument("estimate_correlators: no pairs for "
                                "settings: " + missing);

  const auto axis_index = [](PauliAxis a) {
    return a == PauliAxis::x ? 0 : (a == PauliAxis::y ? 1 : 2);
  };
  const double x_lo = g.x_grid.front();
  const double x_hi = g.x_grid.back();

  PauliCorrelators k;
  Eigen::Matrix3d d_err = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b_acc = Eigen::Vector3d::Zero();
  Eigen::Vector3d b_var = Eigen::Vector3d::Zero();
  Eigen::Vector3d b_n = Eigen::Vector3d::Zero();
  // photon singles pooled over electron settings
  Eigen::Vector3d c_plus = Eigen::Vector3d::Zero();
  Eigen::Vector3d c_tot = Eigen::Vector3d::Zero();

  for (const auto& s : all_settings()) {
    const auto& group = by_setting.at(s.label());
    const double n_tot = static_cast<double>(group.size());
    const int ei = axis_index(s.electron);
    const int pj = axis_index(s.photon);

    double d_val = 0.0, d_var = 0.0;
    double b_val = 0.0, b_var_s = 0.0;
    for (int outcome : {+1, -1}) {
      const int det = outcome == +1 ? 0 : 1;
      double n_out = 0.0;
      for (const auto* pr : group)
        if (pr->photon.detector_id == det) n_out += 1.0;
      if (outcome == +1) {
        c_plus(pj) += n_out;
        c_tot(pj) += n_tot;
      }
      if (n_out == 0.0) continue;
      const double p_hat = n_out / n_tot;
      const double p_var = p_hat * (1.0 - p_hat) / n_tot;

      double m = 0.0, m_var = 0.0;
      if (s.electron == PauliAxis::z) {
        // which-slit tag: x < 0 is the left slit, sigma_z = +1
        double n_left = 0.0;
        for (const auto* pr : group)
          if (pr->photon.detector_id == det && pr->electron.x_m < 0.0)
            n_left += 1.0;
        m = (2.0 * n_left - n_out) / n_out;
        m_var = std::max(0.0, (1.0 - m * m) / n_out);
      } else {
        ConditionedHistogram h;
        h.bin_centers.resize(n_bins);
        h.counts.assign(n_bins, 0.0);
        const double width = (x_hi - x_lo) / n_bins;
        for (int i = 0; i < n_bins; ++i)
          h.bin_centers[i] = x_lo + (i + 0.5) * width;
        for (const auto* pr : group) {
          if (pr->photon.detector_id != det) continue;
          const int bin = static_cast<int>(
              std::floor((pr->electron.x_m - x_lo) / width));
          if (bin >= 0 && bin < n_bins) {
            h.counts[bin] += 1.0;
            ++h.total;
          }
        }
        const FringeFit fit = fit_fringes(h, g);
        m = s.electron == PauliAxis::x ? fit.sigma_x : fit.sigma_y;
        const double err =
            s.electron == PauliAxis::x ? fit.sigma_x_err : fit.sigma_y_err;
        m_var = err * err;
      }
      d_val += outcome * p_hat * m;
      d_var += p_hat * p_hat * m_var + m * m * p_var;
      b_val += p_hat * m;
      b_var_s += p_hat * p_hat * m_var + m * m * p_var;
    }
    k.d(ei, pj) = d_val;
    d_err(ei, pj) = std::sqrt(d_var);
    b_acc(ei) += b_val;
    b_var(ei) += b_var_s;
    b_n(ei) += 1.0;
  }

  Eigen::Vector3d b_err, c_err;
  for (int i = 0; i < 3; ++i) {
    k.b(i) = b_acc(i) / b_n(i);
    b_err(i) = std::sqrt(b_var(i)) / b_n(i);
    const double p_plus = c_plus(i) / c_tot(i);
    k.c(i) = 2.0 * p_plus - 1.0;
    c_err(i) = 2.0 * std::sqrt(p_plus * (1.0 - p_plus) / c_tot(i));
  }
  k.b_stderr = b_err;
  k.c_stderr = c_err;
  k.d_stderr = d_err;
  k.validate(0.2);  // statistical estimates may overshoot slightly
  return k;
}

}  // namespace eraser
