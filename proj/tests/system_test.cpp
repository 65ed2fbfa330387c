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

#include <gtest/gtest.h>

#include "mnf/mnf.hpp"
#include "testing.hpp"

namespace mnf {
namespace {

void expect_matches_oracle(const NetworkSpec& net, const WeightStore& w, const Tensor& in,
                           const HardwareConfig& hw, const std::string& what) {
  const auto dense = oracle::run_network_dense(net, w, in);
  const auto func = run_network_functional(net, w, in);
  const auto sim = simulate_network(net, w, in, hw);
  EXPECT_EQ(func.output, dense.output) << what;
  EXPECT_EQ(sim.output, dense.output) << what;
  EXPECT_NO_THROW(verify_stage_outputs(net, sim.stage_outputs, dense, what));
  ASSERT_EQ(sim.stages.size(), func.counters.size());
  for (std::size_t s = 0; s < sim.stages.size(); ++s) {
    const auto& rl = sim.report.layers[s];
    EXPECT_EQ(rl.events, func.counters[s].events) << what;
    EXPECT_EQ(rl.macs, static_cast<std::uint64_t>(func.counters[s].macs)) << what;
    EXPECT_EQ(rl.fired, func.counters[s].fired) << what;
  }
}

TEST(SimulateNetwork, PresetsMatchOracle) {
  for (const auto& p : preset_names()) {
    const auto c = generate_case(p, 0.5, 42);
    expect_matches_oracle(c.network, c.weights, c.input, {}, p);
  }
}

TEST(SimulateNetwork, RandomSmallNetworksMatchOracle) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto c = testing::random_case(seed);
    expect_matches_oracle(c.net, c.weights, c.input, c.hw, c.net.name);
  }
}

TEST(SimulateNetwork, SplitAcrossManyPes) {
  auto c = generate_case("lenet", 0.6, 7);
  HardwareConfig hw;
  hw.num_pes = 64;
  hw.acc_sram_bytes = 4 * 28 * 28;
  hw.weight_sram_bytes = 2000;
  const auto sim = simulate_network(c.network, c.weights, c.input, hw);
  EXPECT_GT(sim.mapping.layers[0].assignments.size(), 1u);
  expect_matches_oracle(c.network, c.weights, c.input, hw, "split lenet");
}

TEST(SimulateNetwork, ThreadCountDoesNotChangeResults) {
  const auto c = generate_case("vgg", 0.3, 5);
  SimOptions one;
  SimOptions four;
  four.threads = 4;
  const auto a = simulate_network(c.network, c.weights, c.input, {}, {}, one);
  const auto b = simulate_network(c.network, c.weights, c.input, {}, {}, four);
  EXPECT_EQ(a.report, b.report);
  EXPECT_EQ(emit_json(a.report), emit_json(b.report));
  EXPECT_EQ(a.output, b.output);
}

TEST(SimulateNetwork, StagesAreBackToBack) {
  const auto c = generate_case("lenet", 0.5, 3);
  const auto sim = simulate_network(c.network, c.weights, c.input);
  std::int64_t t = 0;
  std::uint64_t total = 0;
  for (std::size_t s = 0; s < sim.stages.size(); ++s) {
    const auto& st = sim.stages[s];
    EXPECT_EQ(st.start, t);
    EXPECT_GT(st.end, st.start);
    t = st.end;
    const auto& rl = sim.report.layers[s];
    EXPECT_EQ(rl.cycles, static_cast<std::uint64_t>(st.cycles()));
    // every event is injected once at the storage PE
    EXPECT_GE(rl.cycles, rl.events);
    EXPECT_GE(rl.cycles, st.throughput_bound());
    EXPECT_EQ(rl.pe_cycles, rl.pes * rl.cycles);
    EXPECT_LE(rl.busy_multiplier_cycles, rl.pe_cycles * sim.report.multipliers_per_pe);
    total += rl.cycles;
  }
  EXPECT_EQ(sim.report.total.cycles, total);
  EXPECT_DOUBLE_EQ(sim.report.frames_per_second, 200e6 / static_cast<double>(total));
}

TEST(SimulateNetwork, EnergyFollowsCounters) {
  const auto c = generate_case("tiny", 0.5, 2);
  const auto sim = simulate_network(c.network, c.weights, c.input);
  for (const auto& l : sim.report.layers) {
    const double want = 12.35 * static_cast<double>(l.weight_reads) +
                        3.87 * static_cast<double>(l.acc_reads + l.acc_writes) +
                        0.054 * static_cast<double>(l.macs);
    EXPECT_NEAR(l.energy_pj, want, 1e-6 * want);
  }
}

TEST(SimulateNetwork, ZeroInputStillTerminates) {
  auto c = generate_case("lenet", 0.0, 1);
  const auto sim = simulate_network(c.network, c.weights, c.input);
  EXPECT_EQ(sim.output, oracle::run_network_dense(c.network, c.weights, c.input).output);
  EXPECT_EQ(sim.report.total.events, 0u);
  EXPECT_GT(sim.report.total.cycles, 0u);
}

TEST(SimulateNetwork, RejectsBadInputs) {
  const auto c = generate_case("tiny", 0.5, 1);
  EXPECT_THROW(simulate_network(c.network, c.weights, Tensor({1, 27, 28})), ShapeError);
  auto w = c.weights;
  w.layers[1].pop_back();
  EXPECT_THROW(simulate_network(c.network, w, c.input), ShapeError);
  HardwareConfig hw;
  hw.num_pes = 1;
  hw.acc_sram_bytes = 400;
  EXPECT_THROW(simulate_network(c.network, c.weights, c.input, hw), MappingError);
  hw = {};
  hw.fifo_depth = 0;
  EXPECT_THROW(simulate_network(c.network, c.weights, c.input, hw), ValidationError);
}

TEST(Verify, MismatchNamesLayerAndNeuron) {
  const auto c = generate_case("tiny", 0.5, 1);
  const auto dense = oracle::run_network_dense(c.network, c.weights, c.input);
  auto sim = simulate_network(c.network, c.weights, c.input);
  sim.stage_outputs[0].data[2 * 14 * 14 - 1] ^= 1;
  try {
    verify_stage_outputs(c.network, sim.stage_outputs, dense, "cycle");
    FAIL();
  } catch (const OracleMismatch& e) {
    EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("neuron 391 (c=1, y=13, x=13)"), std::string::npos)
        << e.what();
  }
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
  try {
    detail::parallel_for(10, 4, [](std::size_t i) {
      if (i == 3 || i == 7) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "3");
  }
}

}  // namespace
}  // namespace mnf
