// Command-line front end: pattern computation, visibility sweeps,
// entanglement reports, event simulation, and event-stream analysis.
// Every invocation writes into a run directory containing the config
// echo, all artifacts, and a manifest with content hashes.

#include "eraser/config.hpp"
#include "eraser/entanglement.hpp"
#include "eraser/events_io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace eraser;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitStatistical = 4;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class RunDirectory {
 public:
  explicit RunDirectory(const fs::path& dir) : dir_(dir) {
    fs::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream os(dir_ / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir_ / name).string());
    os << content;
    hashes_[name] = fnv1a64(content);
  }

  void finalize() {
    json manifest;
    for (const auto& [name, h] : hashes_) {
      char buf[17];
      std::snprintf(buf, sizeof buf, "%016llx",
                    static_cast<unsigned long long>(h));
      manifest[name] = std::string("fnv1a64:") + buf;
    }
    std::ofstream os(dir_ / "manifest.json", std::ios::binary);
    os << manifest.dump(2) << '\n';
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

 private:
  fs::path dir_;
  std::map<std::string, std::uint64_t> hashes_;
};

std::string pattern_csv(const IntensityPattern& pat, const ScreenGeometry& g) {
  std::ostringstream os;
  os.precision(17);
  os << "x_m,intensity,envelope,phase_rad\n";
  for (std::size_t i = 0; i < pat.x.size(); ++i)
    os << pat.x[i] << ',' << pat.intensity[i] << ',' << envelope(g, pat.x[i])
       << ',' << phase_difference(g, pat.x[i]) << '\n';
  return os.str();
}

json report_to_json(const EntanglementReport& r) {
  return json{{"concurrence", r.concurrence},
              {"negativity", r.negativity},
              {"bell_fidelity", r.bell_fidelity},
              {"witness_expectation", r.witness_expectation},
              {"eraser_lhs", r.eraser_lhs},
              {"flags", r.flags}};
}

json correlators_to_json(const PauliCorrelators& k) {
  const char* axes = "xyz";
  json j;
  for (int i = 0; i < 3; ++i) {
    j["b"][std::string(1, axes[i])] = k.b(i);
    j["c"][std::string(1, axes[i])] = k.c(i);
    for (int jj = 0; jj < 3; ++jj)
      j["d"][std::string{axes[i], axes[jj]}] = k.d(i, jj);
  }
  if (k.b_stderr && k.c_stderr && k.d_stderr) {
    for (int i = 0; i < 3; ++i) {
      j["b_stderr"][std::string(1, axes[i])] = (*k.b_stderr)(i);
      j["c_stderr"][std::string(1, axes[i])] = (*k.c_stderr)(i);
      for (int jj = 0; jj < 3; ++jj)
        j["d_stderr"][std::string{axes[i], axes[jj]}] = (*k.d_stderr)(i, jj);
    }
  }
  return j;
}

json state_to_json(const Matrix4& m) {
  json re = json::array(), im = json::array();
  for (int r = 0; r < 4; ++r) {
    json rr = json::array(), ri = json::array();
    for (int c = 0; c < 4; ++c) {
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return json{{"basis", "LH,LV,RH,RV"}, {"re", re}, {"im", im}};
}

struct Conditioning {
  std::optional<PauliAxis> axis;
  int outcome = +1;
  bool baseline = false;  // no-photon electrons
};

Conditioning parse_condition(const std::string& spec) {
  Conditioning c;
  if (spec == "none") return c;
  if (spec == "baseline") {
    c.baseline = true;
    return c;
  }
  if (spec.size() != 2 || (spec[1] != '+' && spec[1] != '-'))
    throw std::invalid_argument(
        "condition must be none, baseline, or one of x+ x- y+ y- z+ z-");
  switch (spec[0]) {
    case 'x': c.axis = PauliAxis::x; break;
    case 'y': c.axis = PauliAxis::y; break;
    case 'z': c.axis = PauliAxis::z; break;
    default:
      throw std::invalid_argument("unknown condition axis '" + spec + "'");
  }
  c.outcome = spec[1] == '+' ? +1 : -1;
  return c;
}

struct GridRange {
  double lo = 0.0, hi = 1.0;
  int n = 21;
};

// "gamma=0:1:21,h2=0:1:21"
std::pair<GridRange, GridRange> parse_grid(const std::string& spec) {
  GridRange gamma, h2;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("grid spec part '" + part +
                                  "' missing '='");
    const std::string name = part.substr(0, eq);
    GridRange r;
    if (std::sscanf(part.c_str() + eq + 1, "%lf:%lf:%d", &r.lo, &r.hi,
                    &r.n) != 3)
      throw std::invalid_argument("grid range '" + part +
                                  "' is not lo:hi:count");
    if (r.n < 2 || r.lo < 0.0 || r.hi > 1.0 || r.hi <= r.lo)
      throw std::invalid_argument("grid range for '" + name +
                                  "' must satisfy 0 <= lo < hi <= 1, n >= 2");
    if (name == "gamma") gamma = r;
    else if (name == "h2") h2 = r;
    else throw std::invalid_argument("unknown grid axis '" + name + "'");
  }
  return {gamma, h2};
}

EraserParams sweep_point(const EraserParams& base, double gamma, double h2) {
  EraserParams p = base;
  p.gamma = gamma;
  p.h = std::sqrt(h2);
  p.v = std::sqrt(1.0 - h2);
  return p;
}

int cmd_pattern(const ExperimentConfig& cfg, RunDirectory& out,
                const std::string& condition) {
  const Conditioning cond = parse_condition(condition);
  const ScreenGeometry& g = cfg.run.geometry;
  DensityMatrix2 rho_e = [&] {
    if (cond.baseline) return no_loss_electron_state(cfg.run.params);
    const DensityMatrix4 rho = build_joint_state(cfg.run.params);
    if (!cond.axis) return partial_trace(rho, Subsystem::photon);
    return condition_on_photon(rho, photon_projector(*cond.axis, cond.outcome))
        .rho_e;
  }();
  double probability = 1.0;
  if (cond.axis) {
    const DensityMatrix4 rho = build_joint_state(cfg.run.params);
    probability =
        condition_on_photon(rho, photon_projector(*cond.axis, cond.outcome))
            .probability;
  }
  const IntensityPattern pat = intensity_pattern(rho_e, g);
  out.write("pattern.csv", pattern_csv(pat, g));
  json sidecar{{"condition", condition},
               {"visibility", fringe_visibility(rho_e)},
               {"branch_probability", probability}};
  out.write("pattern.json", sidecar.dump(2) + "\n");
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, RunDirectory& out,
              const std::string& grid_spec) {
  const auto [gamma_r, h2_r] = parse_grid(grid_spec);
  std::ostringstream csv;
  csv.precision(17);
  csv << "gamma,h2,direct_visibility,conditioned_visibility,concurrence\n";
  const Matrix2 erase_proj = photon_projector(PauliAxis::x, +1);
  for (int i = 0; i < gamma_r.n; ++i) {
    const double gamma =
        gamma_r.lo + (gamma_r.hi - gamma_r.lo) * i / (gamma_r.n - 1);
    for (int j = 0; j < h2_r.n; ++j) {
      const double h2 = h2_r.lo + (h2_r.hi - h2_r.lo) * j / (h2_r.n - 1);
      const EraserParams p = sweep_point(cfg.run.params, gamma, h2);
      const DensityMatrix4 rho = build_joint_state(p);
      const double direct =
          fringe_visibility(partial_trace(rho, Subsystem::photon));
      const double conditioned =
          fringe_visibility(condition_on_photon(rho, erase_proj).rho_e);
      csv << gamma << ',' << h2 << ',' << direct << ',' << conditioned << ','
          << concurrence(rho) << '\n';
    }
  }
  out.write("sweep.csv", csv.str());
  return 0;
}

int cmd_report(const ExperimentConfig& cfg, RunDirectory& out) {
  const DensityMatrix4 rho = build_joint_state(cfg.run.params);
  const EntanglementReport r = analyze_state(rho);
  out.write("report.json", report_to_json(r).dump(2) + "\n");
  return 0;
}

int cmd_simulate(const ExperimentConfig& cfg, RunDirectory& out) {
  const auto events = simulate_events(cfg.run);
  std::ostringstream os;
  write_event_file(os, cfg.run, events);
  out.write("events.ndjson", os.str());
  return 0;
}

int cmd_analyze(const std::string& events_path, RunDirectory& out,
                std::optional<std::int64_t> window_override) {
  const EventFile file = read_event_file(events_path);
  const std::int64_t window =
      window_override.value_or(file.config.coincidence_window_ps);
  const MatchResult matched = match_coincidences(file.events, window);

  json stats{{"events", file.events.size()},
             {"pairs", matched.pairs.size()},
             {"orphan_photons", matched.orphan_photons},
             {"unmatched_loss_electrons", matched.unmatched_electrons},
             {"window_ps", window},
             {"seed", file.config.rng_seed}};
  out.write("match_stats.json", stats.dump(2) + "\n");
  out.write("config_echo.txt", [&] {
    ExperimentConfig echo;
    echo.run = file.config;
    return echo.echo();
  }());

  const ScreenGeometry& g = file.config.geometry;
  std::ostringstream hist_csv;
  hist_csv.precision(17);
  hist_csv << "setting,detector,x_m,count\n";
  for (const auto& s : file.config.schedule) {
    for (int det = 0; det < 2; ++det) {
      const auto h = histogram_conditioned(matched.pairs, s.label(), det,
                                           g.x_grid.front(), g.x_grid.back(),
                                           128);
      for (std::size_t i = 0; i < h.bin_centers.size(); ++i)
        hist_csv << s.label() << ",SPD" << det << ',' << h.bin_centers[i]
                 << ',' << h.counts[i] << '\n';
    }
  }
  out.write("histograms.csv", hist_csv.str());

  PauliCorrelators k;
  try {
    k = estimate_correlators(matched.pairs, g);
  } catch (const std::exception& ex) {
    std::cerr << "analyze: " << ex.what() << '\n';
    out.finalize();
    return kExitStatistical;
  }
  out.write("correlators.json", correlators_to_json(k).dump(2) + "\n");

  const ReconstructionResult rec = reconstruct_state(k);
  json state_json = state_to_json(rec.rho.mat());
  state_json["physicality_adjustment"] = rec.adjustment;
  out.write("reconstructed_state.json", state_json.dump(2) + "\n");

  out.write("report.json",
            report_to_json(analyze_state(rec.rho)).dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free-electron quantum eraser simulator and analysis toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "run", condition = "none";
  std::string grid_spec = "gamma=0:1:21,h2=0:1:21";
  std::string events_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> window_ps;
  std::string setting_list;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file");
    sub->add_option("--out", out_dir, "output run directory");
    sub->add_option("--seed", seed, "RNG seed override");
    sub->add_option("--setting", setting_list,
                    "comma-separated setting labels, e.g. zz,xx");
  };

  CLI::App* pattern = app.add_subcommand("pattern", "screen intensity pattern");
  add_common(pattern);
  pattern->add_option("--condition", condition,
                      "none | baseline | x+ x- y+ y- z+ z-");

  CLI::App* sweep = app.add_subcommand("sweep", "gamma x |h|^2 surfaces");
  add_common(sweep);
  sweep->add_option("--grid", grid_spec, "gamma=lo:hi:n,h2=lo:hi:n");

  CLI::App* report = app.add_subcommand("report", "entanglement report");
  add_common(report);

  CLI::App* simulate = app.add_subcommand("simulate", "time-tagged event run");
  add_common(simulate);

  CLI::App* analyze = app.add_subcommand("analyze", "event-stream analysis");
  add_common(analyze);
  analyze->add_option("--in", events_path, "eraser-ev/1 event file")
      ->required();
  analyze->add_option("--window-ps", window_ps, "coincidence window override");

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = config_path.empty()
                               ? ExperimentConfig::defaults()
                               : ExperimentConfig::load(config_path);
    if (seed) cfg.run.rng_seed = *seed;
    if (!setting_list.empty())
      cfg.apply({{"settings", setting_list}});

    RunDirectory out{out_dir};
    out.write("config.txt", cfg.echo());

    int rc = 0;
    if (pattern->parsed()) rc = cmd_pattern(cfg, out, condition);
    else if (sweep->parsed()) rc = cmd_sweep(cfg, out, grid_spec);
    else if (report->parsed()) rc = cmd_report(cfg, out);
    else if (simulate->parsed()) rc = cmd_simulate(cfg, out);
    else if (analyze->parsed()) rc = cmd_analyze(events_path, out, window_ps);
    if (rc == 0) out.finalize();
    return rc;
  } catch (const std::invalid_argument& ex) {
    std::cerr << "configuration error: " << ex.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& ex) {
    std::cerr << "configuration error: " << ex.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitData;
  }
}
