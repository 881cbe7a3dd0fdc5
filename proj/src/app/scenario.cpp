#include "skygrid/app/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

#include "skygrid/error.hpp"

namespace skygrid::app {
namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// A YAML mapping read key by key; whatever was not read is an unknown key.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      throw ConfigError(path_, "expected a mapping");
    }
  }

  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

  std::optional<YAML::Node> take(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    return node_[key];
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    const std::optional<YAML::Node> v = take(key);
    if (!v) return;
    try {
      out = v->as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(join(path_, key), "has the wrong type");
    }
  }

  void read_ms(const std::string& key, Duration& out) {
    double ms = sim::to_millis(out);
    read(key, ms);
    if (!std::isfinite(ms)) throw ConfigError(join(path_, key), "must be finite");
    out = Duration{std::llround(ms * 1000.0)};
  }

  Section child(const std::string& key) { return Section(take(key).value_or(YAML::Node()), join(path_, key)); }

  const std::string& path() const { return path_; }

  void reject_unknown() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!used_.count(key)) throw ConfigError(join(path_, key), "unknown key");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

template <typename T>
std::vector<T> read_list(const std::optional<YAML::Node>& node, const std::string& path,
                         const std::function<T(Section&)>& read_item) {
  std::vector<T> out;
  if (!node) return out;
  if (!node->IsSequence()) throw ConfigError(path, "expected a list");
  for (std::size_t i = 0; i < node->size(); ++i) {
    Section item((*node)[i], path + "[" + std::to_string(i) + "]");
    out.push_back(read_item(item));
    item.reject_unknown();
  }
  return out;
}

}  // namespace

void Scenario::validate() const {
  if (schema_version != kScenarioSchemaVersion) {
    throw ConfigError("schema_version", "unsupported version " + std::to_string(schema_version));
  }
  if (duration.count() <= 0) throw ConfigError("duration_s", "must be > 0");
  if (grid.rows == 0) throw ConfigError("grid.rows", "must be at least 1");
  if (grid.cols == 0) throw ConfigError("grid.cols", "must be at least 1");
  if (!(grid.spacing > 0.0)) throw ConfigError("grid.spacing", "must be > 0");
  radio.validate();
  for (std::size_t i = 0; i < capacity_steps.size(); ++i) {
    const auto field = "radio.capacity_steps[" + std::to_string(i) + "]";
    if (capacity_steps[i].t_ms < 0) throw ConfigError(field + ".t_ms", "must be >= 0");
    if (!(capacity_steps[i].capacity_bps > 0.0)) throw ConfigError(field + ".capacity", "must be > 0");
  }
  uplink.validate();
  if (fec.k == 0) throw ConfigError("fec.k", "must be at least 1");
  if (fec.k + fec.r > 256) {
    throw ConfigError("fec", "k + r = " + std::to_string(fec.k + fec.r) +
                                 " exceeds 256, the GF(256) field size");
  }
  if (video.mtu == 0 || video.mtu > 65'000) throw ConfigError("video.mtu", "must be in [1, 65000]");
  if (!(video.fps > 0.0)) throw ConfigError("video.fps", "must be > 0");
  rate.validate();
  if (playout.budget.count() <= 0) throw ConfigError("playout.budget_ms", "must be > 0");
  if (playout.uplink_margin.count() < 0) throw ConfigError("playout.uplink_margin_ms", "must be >= 0");
  if (playout.overdue_budget().count() <= 0) {
    throw ConfigError("playout.uplink_margin_ms", "must be smaller than budget_ms");
  }
  if (!(playout.render_hz > 0.0)) throw ConfigError("playout.render_hz", "must be > 0");
  flight.validate();
  for (std::size_t i = 1; i < tour.size(); ++i) {
    if (tour[i].t_ms <= tour[i - 1].t_ms) {
      throw ConfigError("flight.tour[" + std::to_string(i) + "].t_ms", "must be strictly increasing");
    }
  }
  view.validate();
  if (!(control.position_gain >= 0.0)) throw ConfigError("control.position_gain", "must be >= 0");
  if (!(control.repeat_hz > 0.0)) throw ConfigError("control.repeat_hz", "must be > 0");
  if (!(control.flight_step_hz > 0.0)) throw ConfigError("control.flight_step_hz", "must be > 0");
  if (!(snapshot_hz > 0.0)) throw ConfigError("snapshot_hz", "must be > 0");
}

std::vector<grid::ReceiverSite> Scenario::receiver_sites() const {
  std::vector<grid::ReceiverSite> sites;
  for (std::uint32_t row = 0; row < grid.rows; ++row) {
    for (std::uint32_t col = 0; col < grid.cols; ++col) {
      sites.push_back({row * grid.cols + col, {col * grid.spacing, row * grid.spacing}});
    }
  }
  return sites;
}

Vec3 Scenario::origin_at(SimTime t) const {
  if (tour.empty()) return home;
  const double t_ms = sim::to_millis(t.time_since_epoch());
  if (t_ms <= static_cast<double>(tour.front().t_ms)) return {tour.front().x, tour.front().y, home.z};
  if (t_ms >= static_cast<double>(tour.back().t_ms)) return {tour.back().x, tour.back().y, home.z};
  auto next = std::upper_bound(tour.begin(), tour.end(), t_ms, [](double t, const TourPoint& p) {
    return t < static_cast<double>(p.t_ms);
  });
  const TourPoint& b = *next;
  const TourPoint& a = *std::prev(next);
  const double f = (t_ms - static_cast<double>(a.t_ms)) / static_cast<double>(b.t_ms - a.t_ms);
  return {a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f, home.z};
}

Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("", std::string("parse error: ") + e.what());
  }

  Scenario sc;
  Section top(root, "");
  top.read("schema_version", sc.schema_version);
  top.read("seed", sc.seed);
  double duration_s = sim::to_seconds(sc.duration);
  top.read("duration_s", duration_s);
  if (!std::isfinite(duration_s)) throw ConfigError("duration_s", "must be finite");
  sc.duration = Duration{std::llround(duration_s * 1e6)};

  {
    Section s = top.child("grid");
    s.read("rows", sc.grid.rows);
    s.read("cols", sc.grid.cols);
    s.read("spacing", sc.grid.spacing);
    s.reject_unknown();
  }
  {
    Section s = top.child("radio");
    s.read("p_base", sc.radio.p_base);
    s.read("r_reliable", sc.radio.r_reliable);
    s.read("d_max", sc.radio.d_max);
    s.read("channel_capacity", sc.radio.channel_capacity_bps);
    s.read("channels", sc.radio.channels);
    sc.capacity_steps = read_list<CapacityStep>(
        s.take("capacity_steps"), "radio.capacity_steps", [](Section& item) {
          CapacityStep step;
          item.read("t_ms", step.t_ms);
          item.read("capacity", step.capacity_bps);
          return step;
        });
    s.reject_unknown();
  }
  {
    Section s = top.child("uplink");
    s.read_ms("latency_ms", sc.uplink.latency);
    s.read("loss", sc.uplink.loss);
    s.reject_unknown();
  }
  {
    Section s = top.child("fec");
    s.read("k", sc.fec.k);
    s.read("r", sc.fec.r);
    s.reject_unknown();
  }
  {
    Section s = top.child("video");
    s.read("mtu", sc.video.mtu);
    s.read("fps", sc.video.fps);
    s.read("bitrate_min", sc.rate.bitrate_min);
    s.read("bitrate_max", sc.rate.bitrate_max);
    s.read("bitrate_initial", sc.rate.bitrate_initial);
    s.reject_unknown();
  }
  {
    Section s = top.child("rate");
    s.read("beta", sc.rate.beta);
    s.read("alpha", sc.rate.alpha);
    s.read_ms("ack_timeout_ms", sc.rate.ack_timeout);
    s.reject_unknown();
  }
  {
    Section s = top.child("playout");
    s.read_ms("budget_ms", sc.playout.budget);
    s.read_ms("uplink_margin_ms", sc.playout.uplink_margin);
    s.read("render_hz", sc.playout.render_hz);
    s.reject_unknown();
  }
  {
    Section s = top.child("flight");
    s.read("max_speed", sc.flight.max_speed);
    s.read("max_yaw_rate", sc.flight.max_yaw_rate);
    s.read("max_gimbal_rate", sc.flight.max_gimbal_rate);
    s.read("gimbal_min", sc.flight.gimbal_min);
    s.read("gimbal_max", sc.flight.gimbal_max);
    {
      Section home = s.child("home");
      home.read("x", sc.home.x);
      home.read("y", sc.home.y);
      home.read("z", sc.home.z);
      home.reject_unknown();
    }
    sc.tour = read_list<TourPoint>(s.take("tour"), "flight.tour", [](Section& item) {
      TourPoint p;
      item.read("t_ms", p.t_ms);
      item.read("x", p.x);
      item.read("y", p.y);
      return p;
    });
    s.reject_unknown();
  }
  {
    Section s = top.child("view");
    s.read("captured_fov_h", sc.view.captured_fov_h);
    s.read("captured_fov_v", sc.view.captured_fov_v);
    s.read("display_fov_h", sc.view.display_fov_h);
    s.read("display_fov_v", sc.view.display_fov_v);
    s.reject_unknown();
  }
  {
    Section s = top.child("control");
    s.read("position_gain", sc.control.position_gain);
    s.read("repeat_hz", sc.control.repeat_hz);
    s.read("flight_step_hz", sc.control.flight_step_hz);
    s.reject_unknown();
  }
  top.read("snapshot_hz", sc.snapshot_hz);
  top.reject_unknown();

  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open scenario file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

}  // namespace skygrid::app
