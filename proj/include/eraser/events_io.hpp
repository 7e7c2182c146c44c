#pragma once

// NDJSON event-file format "eraser-ev/1": a header line carrying the
// format version and a RunConfig echo, then one event object per line
// with fields exactly {kind, t_ps, x_m?, loss?, det?, setting?}.

#include "eraser/coincidence.hpp"

#include <nlohmann/json_fwd.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace eraser {

inline constexpr const char* kEventFormatVersion = "eraser-ev/1";

nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

void write_event_file(std::ostream& os, const RunConfig& cfg,
                      const std::vector<DetectionEvent>& events);

struct EventFile {
  RunConfig config;
  std::vector<DetectionEvent> events;
};

/// Throws std::runtime_error on version mismatch or malformed lines,
/// including "no events" for a stream with a header but nothing else and
/// an empty-file diagnostic.
EventFile read_event_file(std::istream& is);

void write_event_file(const std::string& path, const RunConfig& cfg,
                      const std::vector<DetectionEvent>& events);
EventFile read_event_file(const std::string& path);

}  // namespace eraser
