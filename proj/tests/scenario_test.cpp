#include <gtest/gtest.h>

#include <sstream>

#include "skygrid/app/scenario.hpp"
#include "skygrid/app/trace.hpp"
#include "skygrid/error.hpp"

namespace skygrid::app {
namespace {

using sim::from_us;

std::string field_of(const std::string& yaml) {
  try {
    parse_scenario(yaml);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

HeadTrace trace_of(const std::string& csv) {
  std::istringstream in(csv);
  return HeadTrace::parse(in, "test.csv");
}

TEST(Scenario, MinimalFileTakesEveryDefault) {
  const Scenario sc = parse_scenario("seed: 1\n");
  EXPECT_EQ(sc.seed, 1u);
  EXPECT_EQ(sc.grid.rows, 3u);
  EXPECT_EQ(sc.grid.cols, 4u);
  EXPECT_DOUBLE_EQ(sc.grid.spacing, 500.0);
  EXPECT_DOUBLE_EQ(sc.radio.p_base, 0.05);
  EXPECT_DOUBLE_EQ(sc.radio.r_reliable, 300.0);
  EXPECT_DOUBLE_EQ(sc.radio.d_max, 700.0);
  EXPECT_EQ(sc.fec.k, 8u);
  EXPECT_EQ(sc.fec.r, 2u);
  EXPECT_EQ(sc.video.mtu, 1400u);
  EXPECT_DOUBLE_EQ(sc.video.fps, 30.0);
  EXPECT_DOUBLE_EQ(sc.rate.beta, 0.85);
  EXPECT_DOUBLE_EQ(sc.rate.alpha, 0.3);
  EXPECT_EQ(sc.playout.budget, Duration{200'000});
  EXPECT_EQ(sc.playout.overdue_budget(), Duration{180'000});
  EXPECT_DOUBLE_EQ(sc.flight.max_speed, 10.0);
  EXPECT_DOUBLE_EQ(sc.view.margin_h(), 10.0);
  EXPECT_DOUBLE_EQ(sc.control.position_gain, 10.0);
  EXPECT_DOUBLE_EQ(sc.snapshot_hz, 20.0);
}

TEST(Scenario, EmptyDocumentIsValid) { EXPECT_NO_THROW(parse_scenario("")); }

TEST(Scenario, ZeroSpacingNamesTheField) { EXPECT_EQ(field_of("grid:\n  spacing: 0\n"), "grid.spacing"); }

TEST(Scenario, FecGeometryLimitedByFieldSize) {
  EXPECT_EQ(field_of("fec: {k: 8, r: 2}\n"), "<accepted>");
  EXPECT_EQ(field_of("fec: {k: 250, r: 10}\n"), "fec");
  EXPECT_EQ(field_of("fec: {k: 0, r: 2}\n"), "fec.k");
}

TEST(Scenario, EmptyChannelListRejected) { EXPECT_EQ(field_of("radio:\n  channels: []\n"), "radio.channels"); }

TEST(Scenario, UnknownKeysAreErrors) {
  EXPECT_EQ(field_of("sede: 1\n"), "sede");
  EXPECT_EQ(field_of("grid:\n  spacnig: 10\n"), "grid.spacnig");
  EXPECT_EQ(field_of("flight:\n  tour:\n    - {t_ms: 0, x: 1, y: 2, z: 3}\n"), "flight.tour[0].z");
}

TEST(Scenario, WrongTypesNameTheField) {
  EXPECT_EQ(field_of("grid:\n  rows: many\n"), "grid.rows");
  EXPECT_EQ(field_of("grid: 5\n"), "grid");
}

TEST(Scenario, UnsupportedSchemaVersion) { EXPECT_EQ(field_of("schema_version: 2\n"), "schema_version"); }

TEST(Scenario, MalformedYamlIsAConfigError) { EXPECT_THROW(parse_scenario("grid: [1, 2\n"), ConfigError); }

TEST(Scenario, MissingFileIsAConfigError) {
  EXPECT_THROW(load_scenario("/nonexistent/scenario.yaml"), ConfigError);
}

TEST(Scenario, FullFileParses) {
  const Scenario sc = parse_scenario(R"(
schema_version: 1
seed: 9
duration_s: 12.5
grid: {rows: 2, cols: 3, spacing: 400}
radio:
  p_base: 0.1
  r_reliable: 200
  d_max: 600
  channel_capacity: 8000000
  channels: [1, 6, 11]
  capacity_steps:
    - {t_ms: 10000, capacity: 4000000}
uplink: {latency_ms: 2.5, loss: 0.01}
fec: {k: 4, r: 1}
video: {mtu: 1200, fps: 25, bitrate_min: 500000, bitrate_max: 6000000, bitrate_initial: 2000000}
rate: {beta: 0.9, alpha: 0.5, ack_timeout_ms: 300}
playout: {budget_ms: 300, uplink_margin_ms: 30, render_hz: 60}
flight:
  max_speed: 12
  home: {x: 100, y: 50, z: 40}
  tour:
    - {t_ms: 0, x: 100, y: 50}
    - {t_ms: 10000, x: 900, y: 50}
view: {captured_fov_h: 120, display_fov_h: 90}
control: {position_gain: 5, repeat_hz: 25, flight_step_hz: 100}
snapshot_hz: 10
)");
  EXPECT_EQ(sc.duration, Duration{12'500'000});
  EXPECT_EQ(sc.receiver_sites().size(), 6u);
  EXPECT_EQ(sc.radio.channels.size(), 3u);
  ASSERT_EQ(sc.capacity_steps.size(), 1u);
  EXPECT_DOUBLE_EQ(sc.capacity_steps[0].capacity_bps, 4e6);
  EXPECT_EQ(sc.uplink.latency, Duration{2500});
  EXPECT_EQ(sc.playout.overdue_budget(), Duration{270'000});
  EXPECT_DOUBLE_EQ(sc.view.margin_h(), 15.0);
  EXPECT_EQ(sc.origin_at(from_us(5'000'000)), (Vec3{500, 50, 40}));
  EXPECT_EQ(sc.origin_at(from_us(20'000'000)), (Vec3{900, 50, 40}));
}

TEST(Scenario, ReceiverSitesAreRowMajor) {
  const Scenario sc = parse_scenario("grid: {rows: 3, cols: 4, spacing: 500}\n");
  const auto sites = sc.receiver_sites();
  ASSERT_EQ(sites.size(), 12u);
  EXPECT_EQ(sites[5].id, 5u);
  EXPECT_EQ(sites[5].position, (Vec2{500, 500}));
  EXPECT_EQ(sites[11].position, (Vec2{1500, 1000}));
}

TEST(Trace, ParsesAndInterpolates) {
  const HeadTrace t = trace_of("t_ms,yaw_deg,pitch_deg,x_m,y_m\n0,0,0,0,0\n1000,10,-20,1,-1\n");
  const auto mid = t.sample_at(from_us(500'000));
  EXPECT_DOUBLE_EQ(mid.yaw, 5);
  EXPECT_DOUBLE_EQ(mid.pitch, -10);
  EXPECT_DOUBLE_EQ(mid.pos.x, 0.5);
  EXPECT_DOUBLE_EQ(mid.pos.y, -0.5);
  const auto after = t.sample_at(from_us(9'000'000));
  EXPECT_DOUBLE_EQ(after.yaw, 10);
}

TEST(Trace, YawInterpolatesAcrossSouth) {
  const HeadTrace t = trace_of("t_ms,yaw_deg,pitch_deg,x_m,y_m\n0,170,0,0,0\n1000,-170,0,0,0\n");
  EXPECT_NEAR(std::abs(t.sample_at(from_us(500'000)).yaw), 180, 1e-9);
  EXPECT_NEAR(t.sample_at(from_us(250'000)).yaw, 175, 1e-9);
}

TEST(Trace, EmptyTraceIsStationary) {
  const HeadTrace t = trace_of("t_ms,yaw_deg,pitch_deg,x_m,y_m\n");
  const auto s = t.sample_at(from_us(3'000'000));
  EXPECT_DOUBLE_EQ(s.yaw, 0);
  EXPECT_DOUBLE_EQ(s.pos.x, 0);
}

TEST(Trace, RejectsBadInput) {
  EXPECT_THROW(trace_of("t,yaw\n0,0\n"), ConfigError);
  EXPECT_THROW(trace_of("t_ms,yaw_deg,pitch_deg,x_m,y_m\n5,0,0,0,0\n"), ConfigError);
  EXPECT_THROW(trace_of("t_ms,yaw_deg,pitch_deg,x_m,y_m\n0,0,0,0,0\n0,1,0,0,0\n"), ConfigError);
  EXPECT_THROW(trace_of("t_ms,yaw_deg,pitch_deg,x_m,y_m\n0,0,0,2.4,0\n"), ConfigError);
  EXPECT_THROW(trace_of("t_ms,yaw_deg,pitch_deg,x_m,y_m\n0,0,zero,0,0\n"), ConfigError);
  EXPECT_THROW(trace_of("t_ms,yaw_deg,pitch_deg,x_m,y_m\n0,0,0,0\n"), ConfigError);
  try {
    trace_of("t_ms,yaw_deg,pitch_deg,x_m,y_m\n0,0,0,0,0\n10,0,0,0,9\n");
    ADD_FAILURE() << "out-of-range position accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("test.csv:3"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace skygrid::app
