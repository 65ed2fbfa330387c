// Copyright 2026 The MNF Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "mnf/mnf.hpp"
#include "testing.hpp"

namespace {

using namespace mnf;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail.clear();
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double ms_since(Clock::time_point t) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

Outcome golden_replay() {
  Outcome o;
  const ConvEvent e{1, 0, 4, 0, 1, 1};
  const ExpansionParams p{1, 3, 4, 9, 16};
  const auto t0 = Clock::now();
  const auto pairs = expand_conv_event(e, p);
  const double ms = ms_since(t0);
  const std::vector<WeightNeuronPair> want{{4, 0}, {3, 1}, {1, 4}, {0, 5}};
  if (pairs != want) o.fail("pairs differ");
  if (ms >= 1.0) o.fail("took " + fmt("%.3f", ms) + " ms");
  if (o.pass) o.detail = "[(4,0),(3,1),(1,4),(0,5)] in " + fmt("%.4f", ms) + " ms";
  return o;
}

Outcome mapping_counts() {
  Outcome o;
  const PeCapacity small{800, 9000};
  const int conv = conv_pe_count(ConvLayerGeometry::make(1, 2, 28, 28, 3, 1, 1), small);
  const int fc = fc_pe_count({1568, 128}, small);
  HardwareConfig hw;
  hw.acc_sram_bytes = 800 * 4;
  hw.weight_sram_bytes = 9000;
  const auto m = map_network(preset_network("tiny"), hw);
  if (conv != 2) o.fail("conv example needs " + std::to_string(conv));
  if (fc != 23) o.fail("fc 1568->128 needs " + std::to_string(fc));
  if (m.total_pes() != 3) o.fail("tiny network needs " + std::to_string(m.total_pes()));
  if (o.pass) {
    o.detail = "conv 2, fc 23, tiny " + std::to_string(m.total_pes()) + " (" +
               std::to_string(m.compute_pes) + " compute + storage)";
  }
  return o;
}

// Criteria 3 and 5 share the randomized suite.
struct SuiteOutcome {
  Outcome equivalence;
  Outcome laws;
};

void check_laws(const NetworkSpec& net, const Tensor& input, const FunctionalResult& func,
                const SimReport& rep, const std::string& name, Outcome& o) {
  const auto stages = lower_network(net);
  Tensor cur = input;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const LayerSpec& l = net.layers[stages[s].layer];
    const auto law = testing::layer_law(l, as_layer_input(cur, l));
    const auto& c = func.counters[s];
    const auto& r = rep.layers[s];
    const auto events = static_cast<std::size_t>(law.nonzero - law.uninfluential);
    const bool ok = c.nonzero == static_cast<std::size_t>(law.nonzero) && c.events == events &&
                    c.uninfluential == static_cast<std::size_t>(law.uninfluential) &&
                    c.macs == law.macs && r.events == events &&
                    r.macs == static_cast<std::uint64_t>(law.macs) &&
                    r.nonzero == static_cast<std::uint64_t>(law.nonzero);
    if (!ok) {
      o.fail(name + " stage " + std::to_string(s) + ": events " + std::to_string(c.events) + "/" +
             std::to_string(events) + ", macs " + std::to_string(c.macs) + "/" +
             std::to_string(law.macs));
    }
    cur = func.stage_outputs[s];
  }
}

SuiteOutcome oracle_suite(int n) {
  SuiteOutcome out;
  const auto t0 = Clock::now();
  std::size_t layers = 0;
  std::uint64_t events = 0;
  std::uint64_t uninfluential = 0;
  for (int i = 1; i <= n; ++i) {
    const auto c = testing::random_case(static_cast<std::uint64_t>(i));
    const auto& name = c.net.name;
    try {
      const auto dense = oracle::run_network_dense(c.net, c.weights, c.input);
      const auto func = run_network_functional(c.net, c.weights, c.input);
      const auto sim = simulate_network(c.net, c.weights, c.input, c.hw);
      try {
        verify_stage_outputs(c.net, func.stage_outputs, dense, name + " functional");
        verify_stage_outputs(c.net, sim.stage_outputs, dense, name + " cycle");
        if (sim.output != dense.output || func.output != dense.output) {
          throw OracleMismatch(name + ": final output differs");
        }
      } catch (const OracleMismatch& e) {
        out.equivalence.fail(e.what());
      }
      check_laws(c.net, c.input, func, sim.report, name, out.laws);
      layers += sim.stages.size();
      events += sim.report.total.events;
      uninfluential += sim.report.total.uninfluential;
    } catch (const std::exception& e) {
      out.equivalence.fail(name + ": " + e.what());
    }
  }
  const double s = ms_since(t0) / 1000.0;
  if (s >= 300) out.equivalence.fail("suite took " + fmt("%.1f", s) + " s");
  if (out.equivalence.pass) {
    out.equivalence.detail = std::to_string(n) + " networks, " + std::to_string(layers) +
                             " stages, exact match in " + fmt("%.1f", s) + " s";
  }
  if (out.laws.pass) {
    out.laws.detail = std::to_string(events) + " events = nonzero - " +
                      std::to_string(uninfluential) +
                      " uninfluential; MACs equal the window count on every stage";
  }
  return out;
}

struct UtilSweep {
  double min = 1;
  double max = 0;
};

UtilSweep utilization_sweep(int out_c, bool forwarding) {
  const auto net = detail::NetBuilder("util", {16, 32, 32}).conv(out_c, 3, 1, 1).build();
  HardwareConfig hw;
  hw.acc_forwarding = forwarding;
  UtilSweep u;
  for (int k = 1; k <= 9; ++k) {
    const auto c = generate_case(net, k / 10.0, 100 + k);
    const auto r = simulate_network(c.network, c.weights, c.input, hw);
    u.min = std::min(u.min, r.report.total.utilization_active);
    u.max = std::max(u.max, r.report.total.utilization_active);
  }
  return u;
}

Outcome utilization(bool forwarding) {
  Outcome o;
  std::string per;
  for (int out_c : {3, 6, 9, 18, 27}) {
    const auto u = utilization_sweep(out_c, forwarding);
    per += (per.empty() ? "" : ", ") + std::to_string(out_c) + "ch " + fmt("%.3f", u.min) + "-" +
           fmt("%.3f", u.max);
    if (u.min < 0.95) o.fail(std::to_string(out_c) + " channels: min " + fmt("%.3f", u.min));
    if (u.max - u.min > 0.05) {
      o.fail(std::to_string(out_c) + " channels: spread " + fmt("%.3f", u.max - u.min));
    }
  }
  o.detail = o.pass ? per : o.detail + " [" + per + "]";
  return o;
}

// Zeroes a random subset of the nonzeros of `t` until `keep` remain.
Tensor thin(const Tensor& t, std::size_t keep, Rng& r) {
  std::vector<std::size_t> nz;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.data[i] != 0) nz.push_back(i);
  }
  r.shuffle(nz);
  Tensor out = t;
  for (std::size_t i = keep; i < nz.size(); ++i) out.data[nz[i]] = 0;
  return out;
}

struct MonotoneOutcome {
  Outcome end_to_end;
  Outcome first_stage;  // same layer, same weights, thinner input
};

MonotoneOutcome monotonicity(int pairs) {
  MonotoneOutcome o;
  for (int i = 0; i < pairs; ++i) {
    Rng r(Rng::derive(777, static_cast<std::uint64_t>(i)));
    NetworkSpec net;
    WeightStore w;
    Tensor dense_in;
    HardwareConfig hw;
    const double hi = 0.2 + 0.1 * static_cast<double>(r.below(8));  // 0.2 .. 0.9
    const double lo =
        hi - 0.1 * static_cast<double>(1 + r.below(static_cast<std::uint64_t>(hi * 10 - 1)));
    if (i % 2 == 0) {
      const auto c = generate_case(i % 4 == 0 ? "lenet" : "tiny", hi, 500 + i);
      net = c.network, w = c.weights, dense_in = c.input;
    } else {
      auto c = testing::random_case(5000 + i);
      Rng ir(Rng::derive(5000 + i, 9));
      c.input = random_tensor(c.net.input, hi, ir);
      net = c.net, w = c.weights, dense_in = c.input, hw = c.hw;
    }
    const auto keep = static_cast<std::size_t>(std::llround(lo * static_cast<double>(dense_in.size())));
    const Tensor sparse_in = thin(dense_in, keep, r);
    const auto a = simulate_network(net, w, dense_in, hw).report;
    const auto b = simulate_network(net, w, sparse_in, hw).report;
    const std::string tag = net.name + " " + fmt("%.1f", hi) + "->" + fmt("%.1f", lo);

    // Which later stage saw more input activations after thinning, if any.
    std::string cause;
    for (std::size_t s = 1; s < a.layers.size(); ++s) {
      if (b.layers[s].nonzero > a.layers[s].nonzero) {
        cause = " (stage " + std::to_string(s) + " input nonzeros " +
                std::to_string(a.layers[s].nonzero) + " -> " + std::to_string(b.layers[s].nonzero) + ")";
        break;
      }
    }
    if (b.total.cycles > a.total.cycles) {
      o.end_to_end.fail(tag + ": cycles " + std::to_string(a.total.cycles) + " -> " +
                        std::to_string(b.total.cycles) + cause);
    }
    if (b.total.energy_pj > a.total.energy_pj) {
      o.end_to_end.fail(tag + ": energy " + fmt("%.1f", a.total.energy_pj) + " -> " +
                        fmt("%.1f", b.total.energy_pj) + cause);
    }
    if (b.layers[0].cycles > a.layers[0].cycles || b.layers[0].energy_pj > a.layers[0].energy_pj) {
      o.first_stage.fail(tag + ": first stage grew");
    }
  }
  const std::string n = std::to_string(pairs) + " nested pairs";
  if (o.end_to_end.pass) o.end_to_end.detail = n + ", network cycles and energy non-increasing";
  if (o.first_stage.pass) o.first_stage.detail = n + ", first-stage cycles and energy non-increasing";
  return o;
}

Outcome energy_arithmetic() {
  Outcome o;
  EnergyCounters one;
  one.weight_reads = one.acc_reads = one.acc_writes = one.lane_ops = 1;
  const double e1 = energy(one, {}).total_pj;
  if (std::abs(e1 - 20.144) > 1e-9) o.fail("worked example gives " + fmt("%.12f", e1));
  EnergyModel m;
  m.include_dram = true;
  m.active_cycle_pj = 0.3;
  m.idle_cycle_pj = 0.05;
  m.noc_hop_pj = 1.1;
  Rng r(99);
  auto draw = [&] {
    EnergyCounters c;
    c.weight_reads = r.below(1000);
    c.acc_reads = r.below(1000);
    c.acc_writes = r.below(1000);
    c.lane_ops = r.below(100000);
    c.dram_words = r.below(1000);
    c.active_cycles = r.below(1000);
    c.idle_cycles = r.below(1000);
    c.flit_hops = r.below(1000);
    return c;
  };
  for (int i = 0; i < 1000; ++i) {
    const auto a = draw();
    const auto b = draw();
    EnergyCounters s{a.weight_reads + b.weight_reads, a.acc_reads + b.acc_reads,
                     a.acc_writes + b.acc_writes,     a.lane_ops + b.lane_ops,
                     a.dram_words + b.dram_words,     a.active_cycles + b.active_cycles,
                     a.idle_cycles + b.idle_cycles,   a.flit_hops + b.flit_hops};
    const double lhs = energy(s, m).total_pj;
    const double rhs = energy(a, m).total_pj + energy(b, m).total_pj;
    if (std::abs(lhs - rhs) > 1e-9 * std::max(1.0, lhs)) {
      o.fail("additivity off by " + fmt("%g", lhs - rhs));
      break;
    }
  }
  if (o.pass) o.detail = "one of each access = " + fmt("%.9f", e1) + " pJ; additive over 1000 draws";
  return o;
}

Outcome throughput_bound() {
  Outcome o;
  std::string per;
  for (double d : {0.2, 0.5, 0.8}) {
    const auto c = generate_case("vgg", d, 42);
    const auto sim = simulate_network(c.network, c.weights, c.input);
    std::uint64_t bound = 0;
    for (const auto& st : sim.stages) bound += st.throughput_bound();
    const auto cycles = sim.report.total.cycles;
    const double ratio = static_cast<double>(cycles) / static_cast<double>(bound);
    per += (per.empty() ? "" : ", ") + fmt("d=%.1f", d) + " " + std::to_string(cycles) + "/" +
           std::to_string(bound) + " = " + fmt("%.3f", ratio);
    if (cycles < bound) o.fail(fmt("d=%.1f", d) + " beats its own lower bound");
    if (ratio > 1.25) o.fail(fmt("d=%.1f", d) + " ratio " + fmt("%.3f", ratio));
    const double fps = sim.report.frequency_mhz * 1e6 / static_cast<double>(cycles);
    if (sim.report.frames_per_second != fps) o.fail("frames/s identity");
  }
  o.detail = o.pass ? "vgg cycles/bound " + per + "; frames/s = f/cycles exactly" : o.detail;
  return o;
}

Outcome determinism() {
  Outcome o;
  const ReportFormat formats[] = {ReportFormat::text, ReportFormat::kv, ReportFormat::json,
                                  ReportFormat::csv};
  auto emit_all = [&](const SimReport& r) {
    std::string s;
    for (auto f : formats) s += emit_report(r, f);
    return s;
  };
  int runs = 0;
  for (const auto& p : preset_names()) {
    std::string ref;
    for (int threads : {1, 4, 1, 8}) {
      const auto c2 = generate_case(p, 0.4, 2024);  // regenerate from the seed each time
      const auto r = simulate_network(c2.network, c2.weights, c2.input, {}, {}, {threads, 2024});
      const auto s = emit_all(r.report);
      ++runs;
      if (ref.empty()) ref = s;
      else if (s != ref) o.fail(p + " differs with " + std::to_string(threads) + " threads");
    }
  }
  if (o.pass) o.detail = std::to_string(runs) + " runs, 4 formats, byte-identical across 1/4/8 threads";
  return o;
}

int failures = 0;

void print(int n, const char* title, const Outcome& o) {
  std::printf("%s criterion %d: %s: %s\n", o.pass ? "PASS" : "FAIL", n, title, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

}  // namespace

int main() {
  print(1, "conv event replay", golden_replay());
  print(2, "mapping counts", mapping_counts());
  const auto suite = oracle_suite(500);
  print(3, "oracle equivalence", suite.equivalence);
  print(4, "multiplier utilization", utilization(true));
  const auto interlock = utilization(false);
  std::printf("     (with --hw.acc_forwarding=false: %s, %s)\n", interlock.pass ? "met" : "not met",
              interlock.detail.c_str());
  print(5, "zero-skip and MAC laws", suite.laws);
  const auto mono = monotonicity(50);
  print(6, "monotonicity", mono.end_to_end);
  std::printf("     (layer-local: %s, %s)\n", mono.first_stage.pass ? "met" : "not met",
              mono.first_stage.detail.c_str());
  print(7, "energy arithmetic", energy_arithmetic());
  std::printf("SKIP criterion 8a: published frames/s, mW, frames/J and competitor cycle ratios: "
              "not reproducible without trained models, synthesis results and competitor "
              "simulators\n");
  print(8, "throughput bound", throughput_bound());
  print(9, "determinism", determinism());
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
