#include <gtest/gtest.h>

#include <cmath>

#include "skygrid/drone/frame.hpp"
#include "skygrid/server/reassembly.hpp"
#include "skygrid/server/server.hpp"
#include "skygrid/server/view.hpp"
#include "skygrid/sim/rng.hpp"

namespace skygrid::server {
namespace {

using sim::from_us;

constexpr Duration kBudget{200'000};

std::vector<Packet> data_packets(std::uint32_t seq, std::size_t bytes, SimTime capture, double yaw = 0.0) {
  drone::Frame f;
  f.frame_seq = seq;
  f.capture_ts = capture;
  f.camera_yaw = yaw;
  f.payload = drone::synthesize_payload(4, seq, bytes);
  f.checksum = drone::checksum32(f.payload);
  return drone::packetize(f, 1400);
}

void ingest_all(ReassemblyBuffer& buf, const std::vector<Packet>& pkts, SimTime now) {
  for (const Packet& p : pkts) buf.ingest(p, now);
}

TEST(Reassembly, FirstCopyWinsAndDuplicatesAreCounted) {
  ReassemblyBuffer buf(kBudget);
  const auto pkts = data_packets(0, 3000, SimTime{});
  EXPECT_EQ(buf.ingest(pkts[0], from_us(10)), IngestResult::stored);
  EXPECT_EQ(buf.ingest(pkts[0], from_us(11)), IngestResult::duplicate);
  EXPECT_EQ(buf.ingest(pkts[0], from_us(12)), IngestResult::duplicate);
  EXPECT_EQ(buf.stats().duplicates, 2u);
}

TEST(Reassembly, AllFragmentsCompleteTheFrame) {
  ReassemblyBuffer buf(kBudget);
  const auto pkts = data_packets(0, 12'000, SimTime{});
  ASSERT_EQ(pkts.size(), 9u);
  for (std::size_t i = 0; i + 1 < pkts.size(); ++i) EXPECT_EQ(buf.ingest(pkts[i], from_us(10)), IngestResult::stored);
  EXPECT_EQ(buf.ingest(pkts.back(), from_us(10)), IngestResult::completed);
  const auto out = buf.playout(from_us(200'000));
  ASSERT_TRUE(out.delivered);
  EXPECT_EQ(drone::checksum32(out.delivered->payload), pkts[0].frame_checksum);
  EXPECT_EQ(out.delivered->payload.size(), 12'000u);
}

TEST(Reassembly, ChecksumMismatchDiscardsTheFrame) {
  ReassemblyBuffer buf(kBudget);
  auto pkts = data_packets(0, 3000, SimTime{});
  pkts[1].payload[7] ^= 0x40;
  ingest_all(buf, {pkts[0], pkts[1]}, from_us(10));
  EXPECT_EQ(buf.ingest(pkts[2], from_us(10)), IngestResult::corrupt);
  EXPECT_EQ(buf.stats().corrupt_frames, 1u);
  EXPECT_FALSE(buf.playout(from_us(300'000)).delivered);
}

TEST(Reassembly, FragmentsAfterTheDeadlineAreLate) {
  ReassemblyBuffer buf(kBudget);
  const auto pkts = data_packets(7, 3000, from_us(1'000'000));
  buf.ingest(pkts[0], from_us(1'050'000));
  buf.playout(from_us(1'200'000));
  EXPECT_EQ(buf.ingest(pkts[1], from_us(1'210'000)), IngestResult::late);
  const auto other = data_packets(8, 3000, from_us(1'000'000));
  EXPECT_EQ(buf.ingest(other[0], from_us(1'200'001)), IngestResult::late);
  EXPECT_EQ(buf.stats().late_fragments, 2u);
}

TEST(Playout, DeliversAtTheDeadline) {
  ReassemblyBuffer buf(kBudget);
  ingest_all(buf, data_packets(0, 2000, from_us(1'000'000)), from_us(1'010'000));
  EXPECT_FALSE(buf.playout(from_us(1'199'999)).delivered);
  const auto out = buf.playout(from_us(1'200'000));
  ASSERT_TRUE(out.delivered);
  EXPECT_EQ(out.delivered->meta.frame_seq, 0u);
}

TEST(Playout, NothingCompleteFreezesThePreviousFrame) {
  ReassemblyBuffer buf(kBudget);
  ingest_all(buf, data_packets(0, 2000, from_us(0)), from_us(10));
  ASSERT_TRUE(buf.playout(from_us(200'000)).delivered);
  const auto out = buf.playout(from_us(233'333));
  EXPECT_FALSE(out.delivered);
  EXPECT_TRUE(out.freeze);
  EXPECT_EQ(buf.stats().freezes, 1u);
  EXPECT_EQ(buf.showing()->frame_seq, 0u);
}

TEST(Playout, NewestCompleteWinsAndOlderIncompleteIsSkipped) {
  ReassemblyBuffer buf(kBudget);
  const auto five = data_packets(5, 3000, from_us(100'000));
  buf.ingest(five[0], from_us(110'000));
  ingest_all(buf, data_packets(6, 3000, from_us(133'333)), from_us(140'000));
  const auto out = buf.playout(from_us(400'000));
  ASSERT_TRUE(out.delivered);
  EXPECT_EQ(out.delivered->meta.frame_seq, 6u);
  EXPECT_NE(std::find(out.skipped.begin(), out.skipped.end(), 5u), out.skipped.end());
}

// Property: under random arrival orders and losses, delivered seqs only grow.
TEST(Playout, DeliveryIsStrictlyInOrder) {
  sim::RngStream rng(12);
  for (int run = 0; run < 20; ++run) {
    ReassemblyBuffer buf(kBudget);
    std::vector<std::pair<std::int64_t, Packet>> arrivals;
    for (std::uint32_t f = 0; f < 120; ++f) {
      for (Packet& p : data_packets(f, 500 + rng() % 9000, from_us(f * 33'333))) {
        if (rng.bernoulli(0.1)) continue;
        arrivals.push_back({f * 33'333 + static_cast<std::int64_t>(rng() % 260'000), std::move(p)});
      }
    }
    std::sort(arrivals.begin(), arrivals.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t next = 0;
    std::optional<std::uint32_t> last;
    for (std::int64_t t = 0; t < 5'000'000; t += 33'333) {
      while (next < arrivals.size() && arrivals[next].first <= t) {
        buf.ingest(arrivals[next].second, from_us(arrivals[next].first));
        ++next;
      }
      const auto out = buf.playout(from_us(t));
      if (out.delivered) {
        if (last) {
          ASSERT_GT(out.delivered->meta.frame_seq, *last);
        }
        last = out.delivered->meta.frame_seq;
      }
    }
  }
}

TEST(DisplayWindow, OffsetFollowsHeadInsideMargin) {
  const ViewGeometry g;
  EXPECT_DOUBLE_EQ(g.margin_h(), 10.0);
  EXPECT_DOUBLE_EQ(g.margin_v(), 10.0);
  HeadSample head;
  head.yaw = 30;
  const DisplayWindow w = compute_display_window(head, 24, 0, g);
  EXPECT_NEAR(w.offset_yaw, 6.0, 1e-12);
  EXPECT_FALSE(w.saturated_h);
}

TEST(DisplayWindow, AlignedHeadGivesZeroOffset) {
  HeadSample head;
  head.yaw = 24;
  head.pitch = -5;
  const DisplayWindow w = compute_display_window(head, 24, -5, ViewGeometry{});
  EXPECT_DOUBLE_EQ(w.offset_yaw, 0);
  EXPECT_DOUBLE_EQ(w.offset_pitch, 0);
}

TEST(DisplayWindow, ClampsAtTheMarginAndFlagsSaturation) {
  HeadSample head;
  head.yaw = 40;
  head.pitch = -30;
  const DisplayWindow w = compute_display_window(head, 24, 0, ViewGeometry{});
  EXPECT_DOUBLE_EQ(w.offset_yaw, 10);
  EXPECT_TRUE(w.saturated_h);
  EXPECT_DOUBLE_EQ(w.offset_pitch, -10);
  EXPECT_TRUE(w.saturated_v);
}

TEST(DisplayWindow, WrapsAcrossSouth) {
  HeadSample head;
  head.yaw = -175;
  const DisplayWindow w = compute_display_window(head, 178, 0, ViewGeometry{});
  EXPECT_NEAR(w.offset_yaw, 7, 1e-9);
}

// Property: offsets never leave the margins, for any geometry and head.
TEST(DisplayWindow, ClampingHoldsForRandomInputs) {
  sim::RngStream rng(3);
  for (int i = 0; i < 50'000; ++i) {
    ViewGeometry g;
    g.display_fov_h = 30 + rng.uniform01() * 80;
    g.display_fov_v = 30 + rng.uniform01() * 60;
    HeadSample h;
    h.yaw = rng.uniform01() * 720 - 360;
    h.pitch = rng.uniform01() * 180 - 90;
    const DisplayWindow w = compute_display_window(h, rng.uniform01() * 360 - 180, rng.uniform01() * 120 - 90, g);
    ASSERT_LE(std::abs(w.offset_yaw), g.margin_h());
    ASSERT_LE(std::abs(w.offset_pitch), g.margin_v());
  }
}

TEST(Setpoint, CentredHeadMapsToOrigin) {
  HeadSample h;
  const Setpoint sp = derive_setpoint(h, {600, 400, 50}, 10, drone::FlightLimits{}, from_us(5));
  EXPECT_EQ(sp.target_position, (Vec3{600, 400, 50}));
  EXPECT_DOUBLE_EQ(sp.target_yaw, 0);
  EXPECT_EQ(sp.issued_at, from_us(5));
}

TEST(Setpoint, PositionIsScaledInTheViewFrame) {
  HeadSample h;
  h.pos = {1.0, 0.0};
  Setpoint sp = derive_setpoint(h, {0, 0, 50}, 10, drone::FlightLimits{}, SimTime{});
  EXPECT_NEAR(sp.target_position.x, 10, 1e-9);
  EXPECT_NEAR(sp.target_position.y, 0, 1e-9);
  EXPECT_DOUBLE_EQ(sp.target_position.z, 50);

  h.yaw = 90;
  sp = derive_setpoint(h, {0, 0, 50}, 10, drone::FlightLimits{}, SimTime{});
  EXPECT_NEAR(sp.target_position.x, 0, 1e-9);
  EXPECT_NEAR(sp.target_position.y, 10, 1e-9);
  EXPECT_NEAR(distance(sp.target_position, Vec3{0, 0, 50}), 10, 1e-9);
}

TEST(Setpoint, GimbalTargetIsClamped) {
  HeadSample h;
  h.pitch = -120;
  EXPECT_DOUBLE_EQ(derive_setpoint(h, {}, 10, drone::FlightLimits{}, SimTime{}).target_gimbal_pitch, -90);
}

ServerConfig grid_config() {
  ServerConfig c;
  c.sites = {{0, {0, 0}}, {1, {500, 0}}, {2, {1000, 0}}, {3, {0, 500}}, {4, {500, 500}}, {5, {1000, 500}}};
  c.home = {480, 20, 50};
  return c;
}

TEST(ControlRouting, FallsBackToHomeBeforeAnyPacket) {
  StreamingServer s(grid_config());
  EXPECT_EQ(s.route_target(), 1u);
  EXPECT_FALSE(s.known_drone_position());
}

TEST(ControlRouting, FollowsTheNewestPositionStamp) {
  StreamingServer s(grid_config());
  auto pkts = data_packets(0, 3000, SimTime{});
  pkts[0].tx_seq = 10;
  pkts[0].drone_pos = {990, 480, 50};
  auto out = s.ingest(pkts[0], 5, from_us(10));
  EXPECT_TRUE(out.route_changed);
  EXPECT_EQ(s.route_target(), 5u);

  pkts[1].tx_seq = 3;  // stale stamp from a slower path
  pkts[1].drone_pos = {0, 0, 50};
  out = s.ingest(pkts[1], 0, from_us(20));
  EXPECT_FALSE(out.route_changed);
  EXPECT_EQ(s.route_target(), 5u);
}

TEST(ControlRouting, UnchangedHeadIssuesNoNewSetpoint) {
  StreamingServer s(grid_config());
  HeadSample h;
  h.yaw = 12;
  EXPECT_TRUE(s.update_control(h, {480, 20, 50}, from_us(1)));
  EXPECT_FALSE(s.update_control(h, {480, 20, 50}, from_us(2)));
  h.yaw = 13;
  EXPECT_TRUE(s.update_control(h, {480, 20, 50}, from_us(3)));
}

TEST(Render, ViewDirectionIsCameraPlusOffset) {
  StreamingServer s(grid_config());
  for (const Packet& p : data_packets(0, 2000, SimTime{}, 24.0)) s.ingest(p, 1, from_us(10));
  HeadSample h;
  h.yaw = 30;
  const RenderOutcome r = s.render(from_us(200'000), h);
  ASSERT_TRUE(r.shown);
  EXPECT_NEAR(r.view_yaw, 30, 1e-12);
  h.yaw = 40;
  const RenderOutcome sat = s.render(from_us(233'333), h);
  EXPECT_NEAR(sat.view_yaw, 34, 1e-12);
  EXPECT_TRUE(sat.window.saturated_h);
}

}  // namespace
}  // namespace skygrid::server
