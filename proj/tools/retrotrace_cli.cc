// Copyright 2026 The retrotrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line entry point: run topologies, microbenchmarks and reports.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "retrotrace/harness/microbench.h"
#include "retrotrace/harness/report.h"
#include "retrotrace/harness/simulation.h"
#include "retrotrace/harness/topology.h"

namespace rh = retrotrace::harness;

namespace {

int do_run(const std::string& topology, const std::string& tracing,
           std::optional<uint64_t> seed, const std::string& out,
           std::optional<double> duration, std::optional<double> rate,
           std::optional<double> delay_ms, std::optional<double> bandwidth,
           bool tcp) {
  rh::TopologySpec spec = rh::load_topology(topology);
  spec.tracing.enabled = tracing == "retroactive";
  if (seed) spec.tracing.seed = *seed;
  if (duration) spec.workload.duration_sec = *duration;
  if (rate) spec.workload.rate_per_sec = *rate;
  if (delay_ms) spec.tracing.trigger_delay_ms = *delay_ms;
  if (bandwidth) spec.tracing.report_bandwidth = *bandwidth;
  if (tcp) spec.tracing.tcp = true;
  spec.validate();

  rh::RunResult run = rh::run_scenario(spec);
  if (!out.empty()) rh::write_run(out, run);
  std::cout << rh::summary_text(run.metrics);

  int rc = 0;
  if (spec.tracing.enabled) {
    if (run.metrics.contaminated_payloads > 0) {
      std::cerr << "FAIL: " << run.metrics.contaminated_payloads
                << " payloads carry another trace's id\n";
      rc = 1;
    }
    if (spec.expect.min_capture_percent >= 0 &&
        run.metrics.capture_percent < spec.expect.min_capture_percent) {
      std::cerr << "FAIL: capture " << run.metrics.capture_percent
                << " % below expected " << spec.expect.min_capture_percent
                << " %\n";
      rc = 1;
    }
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"retrotrace: retroactive sampling for distributed tracing"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Simulate a topology with tracing");
  std::string topology, tracing = "retroactive", out;
  std::optional<uint64_t> seed;
  std::optional<double> duration, rate, delay_ms, bandwidth;
  bool tcp = false;
  run->add_option("--topology", topology, "Topology JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--tracing", tracing, "retroactive or off")
      ->check(CLI::IsMember({"retroactive", "off"}));
  run->add_option("--seed", seed, "Workload seed");
  run->add_option("--out", out, "Run directory to write");
  run->add_option("--duration", duration, "Override workload seconds");
  run->add_option("--rate", rate, "Override requests per second");
  run->add_option("--trigger-delay-ms", delay_ms, "Hold local triggers");
  run->add_option("--report-bandwidth", bandwidth,
                  "Per-agent collector bytes/s (0 = unlimited)");
  run->add_flag("--tcp", tcp, "Carry RPCs over loopback TCP");

  auto* bench = app.add_subcommand("bench", "Microbenchmarks");
  bench->require_subcommand(1);
  auto* tp = bench->add_subcommand("tracepoint", "Per-call API latency");
  std::size_t threads = 1, payload = 32, traces = 500;
  tp->add_option("--threads", threads)->check(CLI::Range(1, 256));
  tp->add_option("--payload", payload)->check(CLI::Range(1, 1 << 20));
  tp->add_option("--traces", traces, "Traces per thread");

  auto* bufs = app.add_subcommand("report", "Render a run directory");
  std::string run_dir;
  bufs->add_option("--run", run_dir)->required()->check(CLI::ExistingDirectory);

  auto* bb = bench->add_subcommand("buffers", "Buffer-size trade-off sweep");
  std::vector<std::size_t> sizes{128, 512, 1024, 4096, 16384, 32768, 131072};
  double seconds = 0.5;
  std::size_t bench_pool = rh::BufferBenchConfig{}.pool_size;
  bb->add_option("--sizes", sizes)->delimiter(',');
  bb->add_option("--seconds", seconds, "Measurement time per size");
  bb->add_option("--pool-size", bench_pool, "Pool bytes per size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) {
      return do_run(topology, tracing, seed, out, duration, rate, delay_ms,
                    bandwidth, tcp);
    }
    if (*tp) {
      rh::TracepointBenchConfig cfg;
      cfg.threads = threads;
      cfg.payload_bytes = payload;
      cfg.traces_per_thread = traces;
      std::cout << rh::tracepoint_bench_csv(rh::microbench_tracepoint(cfg));
      return 0;
    }
    if (*bb) {
      rh::BufferBenchConfig cfg;
      cfg.sizes = sizes;
      cfg.seconds_per_size = seconds;
      cfg.pool_size = bench_pool;
      std::cout << rh::buffer_bench_csv(rh::microbench_buffer_size(cfg));
      return 0;
    }
    if (*bufs) {
      std::cout << rh::render_report(run_dir);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
