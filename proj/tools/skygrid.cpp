#include <CLI11.hpp>

#include <pthread.h>
#include <unistd.h>

#include <csignal>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "skygrid/app/batch.hpp"
#include "skygrid/app/live.hpp"
#include "skygrid/app/report.hpp"
#include "skygrid/app/scenario.hpp"
#include "skygrid/app/trace.hpp"
#include "skygrid/error.hpp"

namespace {

constexpr int kExitInput = 1;
constexpr int kExitInvariant = 2;

int cmd_run(const std::string& scenario_path, const std::string& trace_path, std::optional<std::uint64_t> seed,
            const std::string& out_dir) {
  skygrid::app::Scenario scenario = skygrid::app::load_scenario(scenario_path);
  if (seed) scenario.seed = *seed;
  const skygrid::app::HeadTrace trace = skygrid::app::HeadTrace::load(trace_path);
  const skygrid::app::MetricsReport r = skygrid::app::run_batch(scenario, trace, out_dir);
  std::cout << "wrote " << out_dir << " (frame delivery ratio " << r.frame_delivery_ratio << ")\n";
  return 0;
}

int cmd_serve(const std::string& scenario_path, std::uint16_t port) {
  const skygrid::app::Scenario scenario = skygrid::app::load_scenario(scenario_path);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  skygrid::app::LiveOptions options;
  options.port = port;
  options.on_listening = [](std::uint16_t p) { std::cout << "listening on 127.0.0.1:" << p << std::endl; };

  std::exception_ptr failure;
  std::jthread sim([&](std::stop_token stop) {
    try {
      skygrid::app::run_live(scenario, options, stop);
    } catch (...) {
      failure = std::current_exception();
      kill(getpid(), SIGTERM);
    }
  });
  int sig = 0;
  sigwait(&signals, &sig);
  sim.request_stop();
  sim.join();
  if (failure) std::rethrow_exception(failure);
  return 0;
}

int cmd_report(const std::string& out_dir) {
  skygrid::app::report(out_dir, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skygrid: drone to Wi-Fi grid streaming simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string trace_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::uint16_t port = 7070;

  CLI::App* run = app.add_subcommand("run", "Run a batch simulation and write its artifacts");
  run->add_option("--scenario", scenario_path, "Scenario YAML file")->required()->check(CLI::ExistingFile);
  run->add_option("--trace", trace_path, "Head-motion CSV trace")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* serve = app.add_subcommand("serve", "Run the live console backend");
  serve->add_option("--scenario", scenario_path, "Scenario YAML file")->required()->check(CLI::ExistingFile);
  serve->add_option("--port", port, "TCP port on 127.0.0.1 (0 picks one)");

  CLI::App* rep = app.add_subcommand("report", "Summarize a completed run");
  rep->add_option("--out", out_dir, "Run output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(scenario_path, trace_path, seed, out_dir);
    if (*serve) return cmd_serve(scenario_path, port);
    return cmd_report(out_dir);
  } catch (const skygrid::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const skygrid::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
}
