#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eraser/coincidence.hpp"

#include <random>
#include <sstream>

using namespace eraser;

namespace {

constexpr double kInvSqrt2 = 0.7071067811865476;

RunConfig bell_config() {
  RunConfig cfg;
  cfg.params.a = cfg.params.b = kInvSqrt2;
  cfg.params.h = 0.0;
  cfg.params.v = 1.0;
  cfg.params.gamma = 1.0;
  cfg.geometry.x_grid = linear_grid(-2.51e-5, 2.51e-5, 2001);
  return cfg;
}

DetectionEvent electron_at(std::int64_t t, bool loss = true, double x = 0.0) {
  DetectionEvent e;
  e.kind = EventKind::electron;
  e.t_ps = t;
  e.x_m = x;
  e.energy_loss = loss;
  return e;
}

DetectionEvent photon_at(std::int64_t t, int det = 0,
                         const std::string& setting = "xx") {
  DetectionEvent p;
  p.kind = EventKind::photon;
  p.t_ps = t;
  p.detector_id = det;
  p.setting_id = setting;
  return p;
}

std::vector<DetectionEvent> random_stream(std::mt19937& rng) {
  std::uniform_int_distribution<int> count(1, 100);
  std::uniform_int_distribution<std::int64_t> time(0, 5000);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<DetectionEvent> stream;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    if (u(rng) < 0.5)
      stream.push_back(electron_at(time(rng), u(rng) < 0.7));
    else
      stream.push_back(photon_at(time(rng), u(rng) < 0.5 ? 0 : 1));
  }
  std::stable_sort(stream.begin(), stream.end(),
                   [](const auto& a, const auto& b) { return a.t_ps < b.t_ps; });
  return stream;
}

}  // namespace

TEST_CASE("setting labels round trip") {
  for (const auto& s : all_settings()) {
    CHECK(MeasurementSetting::from_label(s.label()) == s);
  }
  CHECK_THROWS_AS(MeasurementSetting::from_label("qq"), std::invalid_argument);
  CHECK_THROWS_AS(MeasurementSetting::from_label("x"), std::invalid_argument);
}

TEST_CASE("loss-electron count follows binomial statistics") {
  RunConfig cfg = bell_config();
  cfg.n_electrons = 1'000'000;
  cfg.photon_generation_probability = 1e-3;
  cfg.schedule = {MeasurementSetting{PauliAxis::x, PauliAxis::x}};
  const auto events = simulate_events(cfg);
  std::int64_t loss = 0, photons = 0;
  for (const auto& ev : events) {
    if (ev.kind == EventKind::electron && ev.energy_loss) ++loss;
    if (ev.kind == EventKind::photon) ++photons;
  }
  // ~3 sigma Poisson band around 1000
  CHECK(loss >= 900);
  CHECK(loss <= 1100);
  CHECK(photons == loss);  // no dark counts configured
}

TEST_CASE("no photons when generation and dark counts are off") {
  RunConfig cfg = bell_config();
  cfg.n_electrons = 10'000;
  cfg.photon_generation_probability = 0.0;
  cfg.dark_count_rate_hz = 0.0;
  const auto events = simulate_events(cfg);
  for (const auto& ev : events) {
    CHECK(ev.kind == EventKind::electron);
    CHECK_FALSE(ev.energy_loss);
  }
}

TEST_CASE("same seed reproduces the stream, different seed does not") {
  RunConfig cfg = bell_config();
  cfg.n_electrons = 20'000;
  cfg.photon_generation_probability = 0.01;
  cfg.dark_count_rate_hz = 100.0;
  const auto run1 = simulate_events(cfg);
  const auto run2 = simulate_events(cfg);
  REQUIRE(run1.size() == run2.size());
  for (std::size_t i = 0; i < run1.size(); ++i) {
    CHECK(run1[i].t_ps == run2[i].t_ps);
    CHECK(run1[i].x_m == run2[i].x_m);
    CHECK(run1[i].kind == run2[i].kind);
  }
  cfg.rng_seed = 999;
  const auto run3 = simulate_events(cfg);
  bool differs = run3.size() != run1.size();
  for (std::size_t i = 0; !differs && i < run1.size(); ++i)
    differs = run1[i].t_ps != run3[i].t_ps || run1[i].x_m != run3[i].x_m;
  CHECK(differs);
}

TEST_CASE("stream is sorted and grid-resolution guard fires") {
  RunConfig cfg = bell_config();
  cfg.n_electrons = 5'000;
  cfg.photon_generation_probability = 0.01;
  const auto events = simulate_events(cfg);
  for (std::size_t i = 1; i < events.size(); ++i)
    CHECK(events[i].t_ps >= events[i - 1].t_ps);

  cfg.geometry.x_grid = linear_grid(-2.51e-5, 2.51e-5, 20);  // way too coarse
  CHECK_THROWS_AS(simulate_events(cfg), std::invalid_argument);
}

TEST_CASE("matching: simple pair, orphan, nearest-of-two") {
  {
    std::vector<DetectionEvent> s{electron_at(1000), photon_at(1040)};
    const auto m = match_coincidences(s, 100);
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0].delta_t_ps == 40);
    CHECK(m.orphan_photons == 0);
  }
  {
    std::vector<DetectionEvent> s{electron_at(1000), photon_at(5000)};
    const auto m = match_coincidences(s, 100);
    CHECK(m.pairs.empty());
    CHECK(m.orphan_photons == 1);
    CHECK(m.unmatched_electrons == 1);
  }
  {
    // two photons near one electron: nearest wins, other is orphaned
    std::vector<DetectionEvent> s{photon_at(980), electron_at(1000),
                                  photon_at(1010)};
    const auto m = match_coincidences(s, 100);
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0].delta_t_ps == -20);
    CHECK(m.orphan_photons == 1);
  }
  {
    // tie is broken toward the earlier electron
    std::vector<DetectionEvent> s{electron_at(990), photon_at(1000),
                                  electron_at(1010)};
    const auto m = match_coincidences(s, 100);
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0].electron.t_ps == 990);
  }
}

TEST_CASE("matching rejects unsorted input") {
  std::vector<DetectionEvent> s{photon_at(2000), electron_at(1000)};
  CHECK_THROWS_AS(match_coincidences(s, 100), std::invalid_argument);
}

TEST_CASE("linear matcher equals brute force on random streams") {
  std::mt19937 rng(424242);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto stream = random_stream(rng);
    const std::int64_t window = 1 + (trial % 400);
    const auto fast = match_coincidences(stream, window);
    const auto slow = match_coincidences_bruteforce(stream, window);
    REQUIRE(fast.pairs.size() == slow.pairs.size());
    for (std::size_t i = 0; i < fast.pairs.size(); ++i) {
      CHECK(fast.pairs[i].electron.t_ps == slow.pairs[i].electron.t_ps);
      CHECK(fast.pairs[i].photon.t_ps == slow.pairs[i].photon.t_ps);
    }
    CHECK(fast.orphan_photons == slow.orphan_photons);
    CHECK(fast.unmatched_electrons == slow.unmatched_electrons);

    // event conservation
    std::int64_t photons = 0, loss_electrons = 0;
    for (const auto& ev : stream) {
      if (ev.kind == EventKind::photon) ++photons;
      else if (ev.energy_loss) ++loss_electrons;
    }
    CHECK(static_cast<std::int64_t>(fast.pairs.size()) + fast.orphan_photons ==
          photons);
    CHECK(static_cast<std::int64_t>(fast.pairs.size()) +
              fast.unmatched_electrons == loss_electrons);
  }
}

TEST_CASE("conditioned histogram recovers the analytic fringes") {
  RunConfig cfg = bell_config();
  cfg.n_electrons = 100'000;
  cfg.photon_generation_probability = 1.0;
  cfg.schedule = {MeasurementSetting{PauliAxis::x, PauliAxis::x}};
  const auto events = simulate_events(cfg);
  const auto matched = match_coincidences(events, cfg.coincidence_window_ps);

  const double x_lo = cfg.geometry.x_grid.front();
  const double x_hi = cfg.geometry.x_grid.back();
  const auto hist =
      histogram_conditioned(matched.pairs, "xx", 0, x_lo, x_hi, 128);
  CHECK(hist.total > 40'000);
  const auto fit = fit_fringes(hist, cfg.geometry);
  // ideal Bell conditioned on sigma_x(+1): visibility 1
  CHECK(std::abs(fit.sigma_x - 1.0) < 3.0 * std::max(fit.sigma_x_err, 1e-3));

  // the unfiltered loss histogram shows no fringes
  ConditionedHistogram all;
  all.bin_centers = hist.bin_centers;
  all.counts.assign(hist.bin_centers.size(), 0.0);
  const double width = (x_hi - x_lo) / 128;
  for (const auto& pr : matched.pairs) {
    const int bin = static_cast<int>((pr.electron.x_m - x_lo) / width);
    if (bin >= 0 && bin < 128) all.counts[bin] += 1.0;
  }
  const auto flat_fit = fit_fringes(all, cfg.geometry);
  CHECK(std::abs(flat_fit.sigma_x) < 3.0 * std::max(flat_fit.sigma_x_err, 1e-3));

  // a filter matching nothing yields an empty histogram
  const auto empty =
      histogram_conditioned(matched.pairs, "zz", 0, x_lo, x_hi, 128);
  CHECK(empty.total == 0);
}

TEST_CASE("correlator estimation: Bell and mixed configurations") {
  RunConfig cfg = bell_config();
  cfg.n_electrons = 180'000;
  cfg.photon_generation_probability = 1.0;
  const auto matched = match_coincidences(simulate_events(cfg),
                                          cfg.coincidence_window_ps);
  const auto k = estimate_correlators(matched.pairs, cfg.geometry);
  REQUIRE(k.d_stderr.has_value());
  CHECK(std::abs(k.d(0, 0) - 1.0) <= 3.0 * std::max((*k.d_stderr)(0, 0), 1e-3));
  CHECK(std::abs(k.d(2, 2) - 1.0) <= 3.0 * std::max((*k.d_stderr)(2, 2), 1e-3));
  CHECK(std::abs(k.d(1, 1) + 1.0) <= 3.0 * std::max((*k.d_stderr)(1, 1), 1e-3));

  // gamma=0.5, h=0: d_xx = 0.5
  RunConfig half = bell_config();
  half.params.gamma = 0.5;
  half.n_electrons = 180'000;
  half.photon_generation_probability = 1.0;
  half.rng_seed = 7;
  const auto matched_h = match_coincidences(simulate_events(half),
                                            half.coincidence_window_ps);
  const auto kh = estimate_correlators(matched_h.pairs, half.geometry);
  CHECK(std::abs(kh.d(0, 0) - 0.5) <=
        3.0 * std::max((*kh.d_stderr)(0, 0), 1e-3));

  // maximally mixed photon marker: all correlators ~ 0 except d_zz family
  // use the identity-marker product state: everything separable
  RunConfig prod = bell_config();
  prod.params.gamma = 0.0;
  prod.params.h = kInvSqrt2;
  prod.params.v = kInvSqrt2;
  prod.n_electrons = 90'000;
  prod.photon_generation_probability = 1.0;
  prod.rng_seed = 13;
  const auto matched_p = match_coincidences(simulate_events(prod),
                                            prod.coincidence_window_ps);
  const auto kp = estimate_correlators(matched_p.pairs, prod.geometry);
  CHECK(std::abs(kp.d(1, 1)) <= 4.0 * std::max((*kp.d_stderr)(1, 1), 1e-3));
}

TEST_CASE("correlator estimation requires every setting") {
  RunConfig cfg = bell_config();
  cfg.n_electrons = 10'000;
  cfg.photon_generation_probability = 1.0;
  cfg.schedule = {MeasurementSetting{PauliAxis::x, PauliAxis::x}};
  const auto matched = match_coincidences(simulate_events(cfg),
                                          cfg.coincidence_window_ps);
  CHECK_THROWS_AS(estimate_correlators(matched.pairs, cfg.geometry),
                  std::invalid_argument);
}

TEST_CASE("derived chunk seeds differ") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(5, 3) == derive_seed(5, 3));
}
