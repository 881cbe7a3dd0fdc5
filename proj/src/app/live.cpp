#include "skygrid/app/live.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>

#include "skygrid/app/snapshot_json.hpp"
#include "skygrid/app/world.hpp"
#include "skygrid/geometry.hpp"

namespace skygrid::app {
namespace {

using WallClock = std::chrono::steady_clock;

struct Connected {};
struct Disconnected {};
using Inbound = std::variant<Connected, Disconnected, server::HeadSample>;

class Fd {
 public:
  explicit Fd(int fd = -1) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    reset(std::exchange(o.fd_, -1));
    return *this;
  }
  ~Fd() { reset(); }
  int get() const noexcept { return fd_; }
  explicit operator bool() const noexcept { return fd_ >= 0; }
  void reset(int fd = -1) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = fd;
  }

 private:
  int fd_;
};

[[noreturn]] void sys_fail(const char* what) { throw std::runtime_error(std::string(what) + ": " + std::strerror(errno)); }

bool send_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

// Parses one console line. Returns the head sample, or an error text.
std::variant<server::HeadSample, std::string> parse_input(const std::string& line) {
  Json j = Json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::string("malformed JSON");
  if (j.value("type", "") != "input") return std::string("unsupported message type");
  server::HeadSample h;
  for (const char* key : {"yaw_deg", "pitch_deg", "x_m", "y_m"}) {
    if (!j.contains(key) || !j[key].is_number()) return std::string("input field missing or not a number: ") + key;
    if (!std::isfinite(j[key].get<double>())) return std::string("input field not finite: ") + key;
  }
  h.yaw = normalize_degrees(j["yaw_deg"].get<double>());
  h.pitch = j["pitch_deg"].get<double>();
  h.pos.x = std::clamp(j["x_m"].get<double>(), -server::kTrackingHalfExtent, server::kTrackingHalfExtent);
  h.pos.y = std::clamp(j["y_m"].get<double>(), -server::kTrackingHalfExtent, server::kTrackingHalfExtent);
  return h;
}

class Bridge {
 public:
  void push_in(Inbound msg) {
    {
      std::lock_guard lock(in_mu_);
      inbox_.push_back(std::move(msg));
    }
    in_cv_.notify_all();
  }

  std::deque<Inbound> take_in() {
    std::lock_guard lock(in_mu_);
    return std::exchange(inbox_, {});
  }

  // Blocks until something arrives, the timeout passes or stop is requested.
  void wait_in(std::stop_token stop, std::chrono::milliseconds timeout) {
    std::unique_lock lock(in_mu_);
    in_cv_.wait_for(lock, stop, timeout, [this] { return !inbox_.empty(); });
  }

  void push_out(std::string line) {
    {
      std::lock_guard lock(out_mu_);
      outbox_.push_back(std::move(line));
    }
    wake();
  }

  std::deque<std::string> take_out() {
    std::lock_guard lock(out_mu_);
    return std::exchange(outbox_, {});
  }

  void open_wake_pipe() {
    int fds[2];
    if (::pipe2(fds, O_NONBLOCK | O_CLOEXEC) != 0) sys_fail("pipe2");
    wake_read_.reset(fds[0]);
    wake_write_.reset(fds[1]);
  }
  int wake_fd() const noexcept { return wake_read_.get(); }
  void wake() {
    const char b = 1;
    [[maybe_unused]] ssize_t n = ::write(wake_write_.get(), &b, 1);
  }
  void drain_wake() {
    char buf[64];
    while (::read(wake_read_.get(), buf, sizeof buf) > 0) {
    }
  }

 private:
  std::mutex in_mu_;
  std::condition_variable_any in_cv_;
  std::deque<Inbound> inbox_;
  std::mutex out_mu_;
  std::deque<std::string> outbox_;
  Fd wake_read_;
  Fd wake_write_;
};

Fd listen_on(std::uint16_t port) {
  Fd fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!fd) sys_fail("socket");
  const int one = 1;
  ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) sys_fail("bind");
  if (::listen(fd.get(), 4) != 0) sys_fail("listen");
  return fd;
}

std::uint16_t bound_port(const Fd& fd) {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(fd.get(), reinterpret_cast<sockaddr*>(&addr), &len) != 0) sys_fail("getsockname");
  return ntohs(addr.sin_port);
}

// Connection I/O: accepts one console, turns its lines into Inbound messages
// and writes whatever the simulation queued for it.
void io_loop(std::stop_token stop, Fd listener, Bridge& bridge) {
  Fd client;
  std::string pending;

  const auto drop_client = [&] {
    client.reset();
    pending.clear();
    bridge.take_out();
    bridge.push_in(Disconnected{});
  };

  while (!stop.stop_requested()) {
    pollfd fds[3] = {{listener.get(), POLLIN, 0}, {bridge.wake_fd(), POLLIN, 0}, {client.get(), POLLIN, 0}};
    const nfds_t count = client ? 3 : 2;
    if (::poll(fds, count, 100) < 0) {
      if (errno == EINTR) continue;
      sys_fail("poll");
    }

    if (fds[1].revents & POLLIN) bridge.drain_wake();
    if (client) {
      for (const std::string& line : bridge.take_out()) {
        if (!send_all(client.get(), line)) {
          drop_client();
          break;
        }
      }
    }

    if (fds[0].revents & POLLIN) {
      Fd incoming(::accept4(listener.get(), nullptr, nullptr, SOCK_CLOEXEC));
      if (incoming && client) {
        send_all(incoming.get(), error_message("another console is already connected").dump() + "\n");
      } else if (incoming) {
        client = std::move(incoming);
        if (send_all(client.get(), hello_message().dump() + "\n")) {
          bridge.push_in(Connected{});
        } else {
          client.reset();
        }
      }
    }

    if (client && count == 3 && (fds[2].revents & (POLLIN | POLLHUP | POLLERR))) {
      char buf[4096];
      const ssize_t n = ::recv(client.get(), buf, sizeof buf, 0);
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        drop_client();
        continue;
      }
      pending.append(buf, static_cast<std::size_t>(n));
      std::size_t nl;
      while ((nl = pending.find('\n')) != std::string::npos) {
        std::string line = pending.substr(0, nl);
        pending.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto parsed = parse_input(line);
        if (auto* h = std::get_if<server::HeadSample>(&parsed)) {
          bridge.push_in(*h);
        } else if (!send_all(client.get(), error_message(std::get<std::string>(parsed)).dump() + "\n")) {
          drop_client();
          break;
        }
      }
    }
  }
}

}  // namespace

void run_live(const Scenario& scenario, const LiveOptions& options, std::stop_token stop) {
  if (!(options.time_scale > 0.0)) throw std::invalid_argument("time_scale must be positive");

  Bridge bridge;
  bridge.open_wake_pipe();
  Fd listener = listen_on(options.port);
  const std::uint16_t port = bound_port(listener);

  bool connected = false;
  auto head = std::make_shared<LiveHeadSource>();
  WorldHooks hooks;
  hooks.on_snapshot = [&](const server::StateSnapshot& s) {
    if (connected) bridge.push_out(snapshot_to_json(s).dump() + "\n");
  };
  World world(scenario, head, nullptr, std::move(hooks));

  std::jthread io([&bridge, l = std::move(listener)](std::stop_token st) mutable { io_loop(st, std::move(l), bridge); });
  std::stop_callback forward(stop, [&io] { io.request_stop(); });
  if (options.on_listening) options.on_listening(port);

  WallClock::time_point wall_base{};
  SimTime sim_base{};
  constexpr auto kStep = std::chrono::milliseconds(5);

  while (!stop.stop_requested()) {
    for (Inbound& msg : bridge.take_in()) {
      if (std::holds_alternative<Connected>(msg)) {
        connected = true;
        wall_base = WallClock::now();
        sim_base = world.now();
      } else if (std::holds_alternative<Disconnected>(msg)) {
        connected = false;
      } else {
        const server::HeadSample& h = std::get<server::HeadSample>(msg);
        const server::HeadSample before = head->latest();
        head->set(h);
        if (h.yaw != before.yaw || h.pitch != before.pitch) {
          server::HeadSample stamped = h;
          stamped.t = world.now();
          world.note_head_step(stamped);
        }
      }
    }

    if (!connected) {
      bridge.wait_in(stop, std::chrono::milliseconds(100));
      continue;
    }

    const auto elapsed = std::chrono::duration<double>(WallClock::now() - wall_base).count() * options.time_scale;
    const SimTime target = sim_base + Duration{static_cast<std::int64_t>(elapsed * 1e6)};
    if (target > world.now()) world.run_until(target);
    bridge.wait_in(stop, kStep);
  }
  io.request_stop();
}

}  // namespace skygrid::app
