#include "f3b/trace.hpp"

#include <cstdio>
#include <sstream>

namespace f3b {

namespace {

void append_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

}  // namespace

std::string TraceEvent::to_json(bool with_wall) const {
  std::string out = "{\"tx\":";
  append_escaped(out, tx);
  out += ",\"event\":";
  append_escaped(out, event);
  out += ",\"sim_time_ms\":" + std::to_string(sim_time_ms);
  out += ",\"block_height\":" + std::to_string(block_height);
  if (!detail.empty()) {
    out += ",\"detail\":";
    append_escaped(out, detail);
  }
  if (with_wall && wall_ms) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *wall_ms);
    out += ",\"wall_ms\":";
    out += buf;
  }
  out += '}';
  return out;
}

void Trace::write_ndjson(std::ostream& out, bool with_wall) const {
  for (const auto& e : events_) out << e.to_json(with_wall) << '\n';
}

std::string Trace::deterministic_text() const {
  std::ostringstream out;
  write_ndjson(out, false);
  return out.str();
}

}  // namespace f3b
