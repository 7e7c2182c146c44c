#include "eraser/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace eraser {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_complex(const Complex& z) {
  std::ostringstream os;
  os.precision(17);
  if (z.imag() == 0.0)
    os << z.real();
  else
    os << z.real() << "," << z.imag();
  return os.str();
}

struct GridSpec {
  double x_min, x_max;
  int points;
};

}  // namespace

Complex parse_complex(const std::string& text) {
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) return Complex(std::stod(text), 0.0);
    return Complex(std::stod(text.substr(0, comma)),
                   std::stod(text.substr(comma + 1)));
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse complex value '" + text + "'");
  }
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig cfg;
  cfg.run.geometry.x_grid = linear_grid(-2.51e-5, 2.51e-5, 2001);
  return cfg;
}

void ExperimentConfig::apply(const std::map<std::string, std::string>& kv) {
  GridSpec grid{run.geometry.x_grid.front(), run.geometry.x_grid.back(),
                static_cast<int>(run.geometry.x_grid.size())};
  for (const auto& [key, value] : kv) {
    try {
      if (key == "a") run.params.a = parse_complex(value);
      else if (key == "b") run.params.b = parse_complex(value);
      else if (key == "h") run.params.h = parse_complex(value);
      else if (key == "v") run.params.v = parse_complex(value);
      else if (key == "gamma") run.params.gamma = std::stod(value);
      else if (key == "theta") run.params.theta = std::stod(value);
      else if (key == "d_m") run.geometry.slit_separation = std::stod(value);
      else if (key == "w_m") run.geometry.slit_width = std::stod(value);
      else if (key == "lambda_m") run.geometry.wavelength = std::stod(value);
      else if (key == "voltage_kv")
        run.geometry.wavelength = wavelength_from_kv(std::stod(value));
      else if (key == "camera_m") run.geometry.camera_length = std::stod(value);
      else if (key == "x_min_m") grid.x_min = std::stod(value);
      else if (key == "x_max_m") grid.x_max = std::stod(value);
      else if (key == "x_points") grid.points = std::stoi(value);
      else if (key == "n_electrons") run.n_electrons = std::stoll(value);
      else if (key == "p_gen")
        run.photon_generation_probability = std::stod(value);
      else if (key == "jitter_ps") run.timing_jitter_sigma_ps = std::stod(value);
      else if (key == "dark_rate_hz") run.dark_count_rate_hz = std::stod(value);
      else if (key == "window_ps") run.coincidence_window_ps = std::stoll(value);
      else if (key == "seed") run.rng_seed = std::stoull(value);
      else if (key == "settings") {
        run.schedule.clear();
        std::stringstream ss(value);
        std::string label;
        while (std::getline(ss, label, ','))
          run.schedule.push_back(MeasurementSetting::from_label(trim(label)));
      } else {
        throw std::invalid_argument("unknown configuration key '" + key + "'");
      }
    } catch (const std::invalid_argument& ex) {
      if (std::string(ex.what()).find("unknown configuration") == 0 ||
          std::string(ex.what()).find("cannot parse") == 0 ||
          std::string(ex.what()).find("setting label") == 0)
        throw;
      throw std::invalid_argument("bad value '" + value + "' for key '" +
                                  key + "'");
    }
  }
  run.geometry.x_grid = linear_grid(grid.x_min, grid.x_max, grid.points);
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  ExperimentConfig cfg = defaults();
  cfg.apply(kv);
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << is.rdbuf();
  return parse(buf.str());
}

std::string ExperimentConfig::echo() const {
  std::ostringstream os;
  os.precision(17);
  os << "a = " << format_complex(run.params.a) << "\n"
     << "b = " << format_complex(run.params.b) << "\n"
     << "h = " << format_complex(run.params.h) << "\n"
     << "v = " << format_complex(run.params.v) << "\n"
     << "gamma = " << run.params.gamma << "\n"
     << "theta = " << run.params.theta << "\n"
     << "d_m = " << run.geometry.slit_separation << "\n"
     << "w_m = " << run.geometry.slit_width << "\n"
     << "lambda_m = " << run.geometry.wavelength << "\n"
     << "camera_m = " << run.geometry.camera_length << "\n"
     << "x_min_m = " << run.geometry.x_grid.front() << "\n"
     << "x_max_m = " << run.geometry.x_grid.back() << "\n"
     << "x_points = " << run.geometry.x_grid.size() << "\n"
     << "n_electrons = " << run.n_electrons << "\n"
     << "p_gen = " << run.photon_generation_probability << "\n"
     << "jitter_ps = " << run.timing_jitter_sigma_ps << "\n"
     << "dark_rate_hz = " << run.dark_count_rate_hz << "\n"
     << "window_ps = " << run.coincidence_window_ps << "\n"
     << "seed = " << run.rng_seed << "\n";
  os << "settings = ";
  for (std::size_t i = 0; i < run.schedule.size(); ++i)
    os << (i ? "," : "") << run.schedule[i].label();
  os << "\n";
  return os.str();
}

}  // namespace eraser
