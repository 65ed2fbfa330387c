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

#include "mnf/metrics.hpp"

namespace mnf {
namespace {

TEST(Energy, ZeroCountersAreZero) { EXPECT_EQ(energy({}, {}).total_pj, 0.0); }

TEST(Energy, WorkedExample) {
  EnergyCounters c;
  c.weight_reads = c.acc_reads = c.acc_writes = c.lane_ops = 1;
  const auto e = energy(c, {});
  EXPECT_NEAR(e.total_pj, 20.144, 1e-9);
  EXPECT_NEAR(e.weight_pj, 12.35, 1e-12);
  EXPECT_NEAR(e.acc_pj, 7.74, 1e-12);
  EXPECT_NEAR(e.register_pj, 0.054, 1e-12);
}

TEST(Energy, LinearInCounters) {
  EnergyModel m;
  m.include_dram = true;
  m.active_cycle_pj = 0.5;
  m.idle_cycle_pj = 0.1;
  m.noc_hop_pj = 0.7;
  const EnergyCounters c{11, 7, 5, 300, 13, 17, 19, 23};
  EnergyCounters d = c;
  d.weight_reads *= 2, d.acc_reads *= 2, d.acc_writes *= 2, d.lane_ops *= 2;
  d.dram_words *= 2, d.active_cycles *= 2, d.idle_cycles *= 2, d.flit_hops *= 2;
  EXPECT_NEAR(energy(d, m).total_pj, 2 * energy(c, m).total_pj, 1e-9);
  const auto e = energy(c, m);
  EXPECT_NEAR(e.weight_pj + e.acc_pj + e.register_pj + e.dram_pj + e.static_pj + e.noc_pj,
              e.total_pj, 1e-9);
}

TEST(Energy, DramOnlyWhenEnabled) {
  EnergyCounters c;
  c.dram_words = 10;
  EXPECT_EQ(energy(c, {}).total_pj, 0.0);
  EnergyModel m;
  m.include_dram = true;
  EXPECT_DOUBLE_EQ(energy(c, m).total_pj, 2560.0);
}

TEST(Energy, NegativeConstantsRejected) {
  EnergyModel m;
  m.noc_hop_pj = -1;
  EXPECT_FALSE(validate_energy(m).empty());
  EXPECT_TRUE(validate_energy({}).empty());
}

SimReport sample_report() {
  SimReport r;
  r.config_hash = "00ff00ff00ff00ff";
  r.seed = 42;
  r.network = "demo net, \"quoted\"\nnewline";
  for (int i = 0; i < 3; ++i) {
    LayerReport l;
    l.name = "layer " + std::to_string(i) + ",x=y";
    l.kind = i == 2 ? "fc" : "conv";
    l.layer = i;
    l.pes = i + 1;
    l.min_pes = i + 1;
    l.cycles = 1000 + 17 * i;
    l.events = 10 * i;
    l.macs = 27 * l.events + i;
    l.weight_reads = l.events * 3;
    l.acc_reads = l.macs;
    l.acc_writes = l.macs;
    l.busy_multiplier_cycles = l.macs;
    l.active_cycles = l.weight_reads + 1;
    l.pe_cycles = l.pes * l.cycles;
    l.stall_raw_hazard = i;
    EnergyCounters c{l.weight_reads, l.acc_reads, l.acc_writes, l.macs, 0, 0, 0, 0};
    l.set_energy(energy(c, {}));
    set_utilization(l, 27);
    r.layers.push_back(l);
  }
  finalize(r);
  return r;
}

TEST(Report, TotalsAreLayerSums) {
  const auto r = sample_report();
  EXPECT_EQ(r.total.cycles, 1000u + 1017u + 1034u);
  EXPECT_EQ(r.total.macs, r.layers[0].macs + r.layers[1].macs + r.layers[2].macs);
  EXPECT_DOUBLE_EQ(r.frames_per_second, 200e6 / static_cast<double>(r.total.cycles));
  EXPECT_NEAR(r.frames_per_joule * r.total.energy_pj * 1e-12, 1.0, 1e-12);
}

class RoundTrip : public ::testing::TestWithParam<ReportFormat> {};

TEST_P(RoundTrip, ParsedReportEqualsOriginal) {
  const auto r = sample_report();
  const auto text = emit_report(r, GetParam());
  EXPECT_EQ(parse_report(text), r) << text;
}

TEST_P(RoundTrip, EmptySimulationIsValid) {
  SimReport r;
  finalize(r);
  const auto back = parse_report(emit_report(r, GetParam()));
  EXPECT_EQ(back, r);
  EXPECT_EQ(back.total.cycles, 0u);
  EXPECT_EQ(back.frames_per_second, 0.0);
}

INSTANTIATE_TEST_SUITE_P(Formats, RoundTrip,
                         ::testing::Values(ReportFormat::kv, ReportFormat::json,
                                           ReportFormat::csv),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Report, TextFormatListsLayers) {
  const auto text = emit_text(sample_report());
  EXPECT_NE(text.find("layer 2,x=y"), std::string::npos) << text;
  SimReport empty;
  finalize(empty);
  EXPECT_FALSE(emit_text(empty).empty());
}

TEST(Report, CsvHasOneRowPerLayerPlusTotal) {
  const auto csv = emit_csv(sample_report());
  const auto lines = detail::lines_of(csv);
  // header comment + column header + rows
  ASSERT_EQ(lines.size(), 2u + 3u + 1u);
  EXPECT_EQ(lines[0].rfind("# mnf-report v1", 0), 0u);
  EXPECT_EQ(lines.back().rfind("total,", 0), 0u);
}

TEST(Report, HeaderCarriesVersionHashAndSeed) {
  const auto r = sample_report();
  for (auto f : {ReportFormat::text, ReportFormat::kv, ReportFormat::json, ReportFormat::csv}) {
    const auto text = emit_report(r, f);
    EXPECT_NE(text.find(kToolVersion), std::string::npos) << to_string(f);
    EXPECT_NE(text.find("00ff00ff00ff00ff"), std::string::npos) << to_string(f);
    EXPECT_NE(text.find("42"), std::string::npos) << to_string(f);
  }
}

TEST(Report, MalformedInputsAreFormatErrors) {
  EXPECT_THROW(parse_report("format=mnf-report\nversion=9\n"), FormatError);
  EXPECT_THROW(parse_report("{\"format\": 3"), FormatError);
  EXPECT_THROW(parse_report("hello"), FormatError);
  auto csv = emit_csv(sample_report());
  csv.pop_back();
  csv += ",extra\n";
  EXPECT_THROW(parse_report(csv), FormatError);
}

TEST(Report, FieldNamesAreStable) {
  std::vector<std::string> names;
  LayerReport l;
  for_each_field(l, [&](const char* n, auto&) { names.emplace_back(n); });
  EXPECT_EQ(names.size(), 34u);
  EXPECT_EQ(names.front(), "name");
  EXPECT_EQ(names.back(), "utilization_total");
}

TEST(Hash, Fnv1a) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
}

}  // namespace
}  // namespace mnf
