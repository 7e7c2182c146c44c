#include "eraser/events_io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace eraser {

using nlohmann::json;

namespace {

json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
  return Complex(j.at(0).get<double>(), j.at(1).get<double>());
}

}  // namespace

json run_config_to_json(const RunConfig& cfg) {
  json j;
  j["a"] = complex_to_json(cfg.params.a);
  j["b"] = complex_to_json(cfg.params.b);
  j["h"] = complex_to_json(cfg.params.h);
  j["v"] = complex_to_json(cfg.params.v);
  j["gamma"] = cfg.params.gamma;
  j["theta"] = cfg.params.theta;
  j["slit_separation_m"] = cfg.geometry.slit_separation;
  j["slit_width_m"] = cfg.geometry.slit_width;
  j["wavelength_m"] = cfg.geometry.wavelength;
  j["camera_length_m"] = cfg.geometry.camera_length;
  j["x_min_m"] = cfg.geometry.x_grid.front();
  j["x_max_m"] = cfg.geometry.x_grid.back();
  j["x_points"] = cfg.geometry.x_grid.size();
  j["n_electrons"] = cfg.n_electrons;
  j["p_gen"] = cfg.photon_generation_probability;
  j["jitter_ps"] = cfg.timing_jitter_sigma_ps;
  j["dark_rate_hz"] = cfg.dark_count_rate_hz;
  j["window_ps"] = cfg.coincidence_window_ps;
  j["seed"] = cfg.rng_seed;
  std::vector<std::string> labels;
  for (const auto& s : cfg.schedule) labels.push_back(s.label());
  j["settings"] = labels;
  return j;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  cfg.params.a = complex_from_json(j.at("a"));
  cfg.params.b = complex_from_json(j.at("b"));
  cfg.params.h = complex_from_json(j.at("h"));
  cfg.params.v = complex_from_json(j.at("v"));
  cfg.params.gamma = j.at("gamma").get<double>();
  cfg.params.theta = j.at("theta").get<double>();
  cfg.geometry.slit_separation = j.at("slit_separation_m").get<double>();
  cfg.geometry.slit_width = j.at("slit_width_m").get<double>();
  cfg.geometry.wavelength = j.at("wavelength_m").get<double>();
  cfg.geometry.camera_length = j.at("camera_length_m").get<double>();
  cfg.geometry.x_grid =
      linear_grid(j.at("x_min_m").get<double>(), j.at("x_max_m").get<double>(),
                  j.at("x_points").get<int>());
  cfg.n_electrons = j.at("n_electrons").get<std::int64_t>();
  cfg.photon_generation_probability = j.at("p_gen").get<double>();
  cfg.timing_jitter_sigma_ps = j.at("jitter_ps").get<double>();
  cfg.dark_count_rate_hz = j.at("dark_rate_hz").get<double>();
  cfg.coincidence_window_ps = j.at("window_ps").get<std::int64_t>();
  cfg.rng_seed = j.at("seed").get<std::uint64_t>();
  cfg.schedule.clear();
  for (const auto& label : j.at("settings"))
    cfg.schedule.push_back(
        MeasurementSetting::from_label(label.get<std::string>()));
  return cfg;
}

void write_event_file(std::ostream& os, const RunConfig& cfg,
                      const std::vector<DetectionEvent>& events) {
  json header;
  header["format"] = kEventFormatVersion;
  header["config"] = run_config_to_json(cfg);
  os << header.dump() << '\n';
  for (const auto& ev : events) {
    json j;
    j["t_ps"] = ev.t_ps;
    if (ev.kind == EventKind::electron) {
      j["kind"] = "e";
      j["x_m"] = ev.x_m;
      j["loss"] = ev.energy_loss;
    } else {
      j["kind"] = "ph";
      j["det"] = ev.detector_id == 0 ? "SPD0" : "SPD1";
      j["setting"] = ev.setting_id;
    }
    os << j.dump() << '\n';
  }
}

EventFile read_event_file(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.empty())
    throw std::runtime_error("event file: no events (empty file)");
  json header = json::parse(line);
  const std::string version = header.value("format", "");
  if (version != kEventFormatVersion)
    throw std::runtime_error("event file: format version '" + version +
                             "', expected '" + kEventFormatVersion + "'");
  EventFile out;
  out.config = run_config_from_json(header.at("config"));
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw std::runtime_error("event file: malformed JSON on line " +
                               std::to_string(line_no));
    DetectionEvent ev;
    ev.t_ps = j.at("t_ps").get<std::int64_t>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "e") {
      ev.kind = EventKind::electron;
      ev.x_m = j.at("x_m").get<double>();
      ev.energy_loss = j.at("loss").get<bool>();
    } else if (kind == "ph") {
      ev.kind = EventKind::photon;
      const std::string det = j.at("det").get<std::string>();
      if (det != "SPD0" && det != "SPD1")
        throw std::runtime_error("event file: unknown detector '" + det +
                                 "' on line " + std::to_string(line_no));
      ev.detector_id = det == "SPD0" ? 0 : 1;
      ev.setting_id = j.at("setting").get<std::string>();
    } else {
      throw std::runtime_error("event file: unknown kind '" + kind +
                               "' on line " + std::to_string(line_no));
    }
    out.events.push_back(ev);
  }
  if (out.events.empty())
    throw std::runtime_error("event file: no events");
  return out;
}

void write_event_file(const std::string& path, const RunConfig& cfg,
                      const std::vector<DetectionEvent>& events) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_event_file(os, cfg, events);
}

EventFile read_event_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_event_file(is);
}

}  // namespace eraser
