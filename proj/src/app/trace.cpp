#include "skygrid/app/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>

#include "skygrid/error.hpp"

namespace skygrid::app {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view text, const std::string& where, const char* column) {
  text = trim(text);
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ConfigError(where, std::string("column ") + column + ": not a number: '" + std::string(text) + "'");
  }
  return value;
}

void check_sample(const TraceSample& s, const TraceSample* prev, const std::string& where) {
  if (!prev && s.t_ms != 0) throw ConfigError(where, "first sample must be at t_ms = 0");
  if (prev && s.t_ms <= prev->t_ms) throw ConfigError(where, "t_ms must be strictly increasing");
  if (!std::isfinite(s.yaw_deg) || !std::isfinite(s.pitch_deg)) throw ConfigError(where, "angles must be finite");
  if (!(std::abs(s.x_m) <= server::kTrackingHalfExtent) || !(std::abs(s.y_m) <= server::kTrackingHalfExtent)) {
    throw ConfigError(where, "position outside the 4.6 m tracking square");
  }
}

}  // namespace

HeadTrace::HeadTrace(std::vector<TraceSample> samples) : samples_(std::move(samples)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    check_sample(samples_[i], i == 0 ? nullptr : &samples_[i - 1], "trace sample " + std::to_string(i));
  }
}

HeadTrace HeadTrace::parse(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kTraceHeader) {
    throw ConfigError(source + ":1", std::string("expected header '") + kTraceHeader + "'");
  }
  std::vector<TraceSample> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);

    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (std::size_t pos; (pos = row.find(',', start)) != std::string_view::npos; start = pos + 1) {
      cells.push_back(row.substr(start, pos - start));
    }
    cells.push_back(row.substr(start));
    if (cells.size() != 5) throw ConfigError(where, "expected 5 columns, got " + std::to_string(cells.size()));

    TraceSample s;
    s.t_ms = parse_number<std::int64_t>(cells[0], where, "t_ms");
    s.yaw_deg = parse_number<double>(cells[1], where, "yaw_deg");
    s.pitch_deg = parse_number<double>(cells[2], where, "pitch_deg");
    s.x_m = parse_number<double>(cells[3], where, "x_m");
    s.y_m = parse_number<double>(cells[4], where, "y_m");
    check_sample(s, samples.empty() ? nullptr : &samples.back(), where);
    samples.push_back(s);
  }
  return HeadTrace(std::move(samples));
}

HeadTrace HeadTrace::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open trace file " + path.string());
  return parse(in, path.string());
}

server::HeadSample HeadTrace::sample_at(SimTime t) const {
  server::HeadSample out;
  out.t = t;
  if (samples_.empty()) return out;

  const double t_ms = sim::to_millis(t.time_since_epoch());
  auto next = std::upper_bound(samples_.begin(), samples_.end(), t_ms, [](double v, const TraceSample& s) {
    return v < static_cast<double>(s.t_ms);
  });
  if (next == samples_.end()) {
    const TraceSample& last = samples_.back();
    out.yaw = normalize_degrees(last.yaw_deg);
    out.pitch = last.pitch_deg;
    out.pos = {last.x_m, last.y_m};
    return out;
  }
  // First sample is at t = 0, so next != begin for t >= 0.
  const TraceSample& a = *std::prev(next);
  const TraceSample& b = *next;
  const double f = (t_ms - static_cast<double>(a.t_ms)) / static_cast<double>(b.t_ms - a.t_ms);
  out.yaw = normalize_degrees(a.yaw_deg + shortest_angle(b.yaw_deg, a.yaw_deg) * f);
  out.pitch = a.pitch_deg + (b.pitch_deg - a.pitch_deg) * f;
  out.pos = {a.x_m + (b.x_m - a.x_m) * f, a.y_m + (b.y_m - a.y_m) * f};
  return out;
}

}  // namespace skygrid::app
