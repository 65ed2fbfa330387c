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

// Whole-network simulation: layer by layer, the storage PE multicasts the
// layer's events, every mapped PE runs its slice, and fired outputs travel
// back to the storage PE, which builds the next layer's input.

#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "mnf/dataflow.hpp"
#include "mnf/events.hpp"
#include "mnf/io.hpp"
#include "mnf/mapping.hpp"
#include "mnf/metrics.hpp"
#include "mnf/model.hpp"
#include "mnf/noc.hpp"
#include "mnf/oracle.hpp"
#include "mnf/pe_sim.hpp"

namespace mnf {

struct SimOptions {
  int threads = 1;  // PE simulations per layer run concurrently; results do not depend on it
  std::uint64_t seed = 0;
};

struct StageTrace {
  std::size_t layer = 0;
  LayerMapping mapping;
  std::vector<PeTelemetry> pes;
  NocTelemetry noc;
  std::int64_t start = 0;
  std::int64_t end = 0;  // first cycle after the last flit reached the storage PE
  std::uint64_t events = 0;
  std::uint64_t nonzero = 0;
  std::uint64_t uninfluential = 0;

  std::int64_t cycles() const { return end - start; }

  // max over PEs of max(ceil(MACs / multipliers), weight-vector reads).
  std::uint64_t throughput_bound() const {
    std::uint64_t b = 0;
    for (const auto& t : pes) {
      const std::uint64_t m = static_cast<std::uint64_t>(t.multipliers);
      b = std::max({b, (t.macs + m - 1) / m, t.weight_reads});
    }
    return b;
  }
};

struct SimResult {
  Tensor output;
  std::vector<Tensor> stage_outputs;
  MappedNetwork mapping;
  std::vector<StageTrace> stages;
  NocTelemetry noc;
  SimReport report;
};

namespace detail {

// Runs `fn(i)` for i in [0, n) on up to `threads` workers. Rethrows the
// exception of the lowest failing index.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) run(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline LayerReport layer_report(const NetworkSpec& net, const StageTrace& st,
                                const HardwareConfig& hw, const EnergyModel& em) {
  const LayerSpec& l = net.layers[st.layer];
  LayerReport r;
  r.name = l.name.empty() ? std::string(to_string(l.kind)) + std::to_string(st.layer) : l.name;
  r.kind = to_string(l.kind);
  r.layer = st.layer;
  r.pes = st.pes.size();
  r.min_pes = static_cast<std::uint64_t>(st.mapping.min_pes);
  r.cycles = static_cast<std::uint64_t>(st.cycles());
  r.events = st.events;
  r.nonzero = st.nonzero;
  r.uninfluential = st.uninfluential;
  StallCounters stalls;
  for (const auto& t : st.pes) {
    r.macs += t.macs;
    r.fired += t.fired;
    r.weight_reads += t.weight_reads;
    r.acc_reads += t.acc_reads;
    r.acc_writes += t.acc_writes;
    r.busy_multiplier_cycles += t.busy_multiplier_cycles;
    r.active_cycles += t.active_cycles;
    stalls += t.stalls;
  }
  r.pe_cycles = r.pes * r.cycles;
  r.stall_fifo_full = stalls.fifo_full;
  r.stall_bank_conflict = stalls.bank_conflict;
  r.stall_raw_hazard = stalls.raw_hazard;
  r.stall_load_full = stalls.load_full;
  r.stall_backpressure = stalls.backpressure;
  r.stall_input_starved = stalls.input_starved;
  r.noc_flits = st.noc.flits;
  r.noc_flit_hops = st.noc.flit_hops;

  EnergyCounters c;
  c.weight_reads = r.weight_reads;
  c.acc_reads = r.acc_reads;
  c.acc_writes = r.acc_writes;
  c.lane_ops = r.macs;
  c.dram_words = (layer_weight_count(l) + 3) / 4;
  c.active_cycles = r.active_cycles;
  c.idle_cycles = r.pe_cycles - std::min(r.pe_cycles, r.active_cycles);
  c.flit_hops = r.noc_flit_hops;
  r.set_energy(energy(c, em));
  set_utilization(r, static_cast<std::uint64_t>(hw.multipliers_per_pe()));
  return r;
}

}  // namespace detail

inline SimResult simulate_network(const NetworkSpec& net, const WeightStore& weights,
                                  const Tensor& input, const HardwareConfig& hw = {},
                                  const EnergyModel& em = {}, const SimOptions& opts = {}) {
  if (auto v = validate_hardware(hw); !v.empty()) throw ValidationError("hardware: " + v.front());
  if (auto v = validate_energy(em); !v.empty()) throw ValidationError("energy: " + v.front());
  require_valid(net);
  SimResult res;
  res.mapping = map_network(net, hw);
  if (input.dims != net.input) {
    throw ShapeError("input tensor " + shape_string(input.dims) + " does not match network input " +
                     shape_string(net.input));
  }
  if (weights.layers.size() != net.layers.size()) {
    throw ShapeError("weight store has " + std::to_string(weights.layers.size()) +
                     " layers, network has " + std::to_string(net.layers.size()));
  }
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (weights[i].size() != layer_weight_count(net.layers[i])) {
      throw ShapeError("layer " + std::to_string(i) + " has " + std::to_string(weights[i].size()) +
                       " weights, expected " + std::to_string(layer_weight_count(net.layers[i])));
    }
  }

  const MeshConfig mesh{res.mapping.grid_rows, res.mapping.grid_cols, hw.hop_latency};
  MeshNetwork noc(mesh);
  const int storage = res.mapping.storage_pe;
  const auto stages = lower_network(net);
  std::int64_t now = 0;
  Tensor cur = input;

  for (std::size_t s = 0; s < stages.size(); ++s) {
    const LayerSpec& l = net.layers[stages[s].layer];
    const LayerMapping& lm = res.mapping.layers[s];
    const NocTelemetry before = noc.telemetry();
    StageTrace st;
    st.layer = stages[s].layer;
    st.mapping = lm;
    st.start = now;

    const EventStream stream = event_stream(as_layer_input(cur, l), l, static_cast<int>(s));
    st.events = stream.event_count();
    st.nonzero = stream.nonzero;
    st.uninfluential = stream.diag.uninfluential_pixels;

    std::vector<int> dests;
    for (const auto& a : lm.assignments) dests.push_back(a.pe_id);
    const auto arrivals = deliver_layer_events(stream.events.size(), dests, storage, now, noc);

    std::vector<PeLayerResult> results(dests.size());
    detail::parallel_for(dests.size(), opts.threads, [&](std::size_t p) {
      std::vector<Arrival> in;
      in.reserve(stream.events.size());
      for (std::size_t e = 0; e < stream.events.size(); ++e) {
        in.push_back({arrivals[p][e], stream.events[e]});
      }
      const PeLayerTask task{&l, stages[s].pool, lm.assignments[p], &weights[stages[s].layer]};
      results[p] = pe_run_layer(hw, task, std::move(in), now);
    });

    // Collection at the storage PE, arbitrated by (ready cycle, PE, sequence).
    struct Outbound {
      std::int64_t ready;
      int pe;
      std::size_t seq;
    };
    std::vector<Outbound> out;
    for (std::size_t p = 0; p < results.size(); ++p) {
      const auto& fired = results[p].fired;
      for (std::size_t k = 0; k < fired.size(); ++k) {
        out.push_back({fired[k].ready, static_cast<int>(p), k});
      }
      out.push_back({results[p].eod_ready, static_cast<int>(p), fired.size()});
    }
    std::sort(out.begin(), out.end(), [](const Outbound& a, const Outbound& b) {
      return std::tie(a.ready, a.pe, a.seq) < std::tie(b.ready, b.pe, b.seq);
    });
    std::int64_t last = now;
    for (const auto& f : out) {
      last = std::max(last, noc.send(dests[f.pe], {storage}, f.ready).front());
    }

    Tensor next(stage_output_shape(l, stages[s].pool));
    for (const auto& r : results) {
      for (const auto& f : r.fired) next.data[f.index] = f.value;
      st.pes.push_back(r.telemetry);
    }
    st.end = last + 1;
    st.noc = noc.telemetry();
    st.noc.flits -= before.flits;
    st.noc.deliveries -= before.deliveries;
    st.noc.flit_hops -= before.flit_hops;
    for (const auto& [k, v] : before.queue_delay) {
      if ((st.noc.queue_delay[k] -= v) == 0) st.noc.queue_delay.erase(k);
    }
    now = st.end;
    res.stage_outputs.push_back(next);
    res.stages.push_back(std::move(st));
    cur = std::move(next);
  }
  res.output = std::move(cur);
  res.noc = noc.telemetry();

  SimReport& rep = res.report;
  rep.config_hash = config_hash(net, hw, em);
  rep.seed = opts.seed;
  rep.network = net.name;
  rep.frequency_mhz = hw.frequency_mhz;
  rep.multipliers_per_pe = static_cast<std::uint64_t>(hw.multipliers_per_pe());
  for (const auto& st : res.stages) rep.layers.push_back(detail::layer_report(net, st, hw, em));
  finalize(rep);
  return res;
}

// ---------------------------------------------------------------------------
// Verification against the dense reference

inline std::optional<std::size_t> first_mismatch(const Tensor& a, const Tensor& b) {
  if (a.dims != b.dims) return 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.data[i] != b.data[i]) return i;
  }
  return std::nullopt;
}

inline std::string describe_index(const Tensor& t, std::size_t i) {
  if (t.dims.size() != 3) return "neuron " + std::to_string(i);
  const std::size_t plane = static_cast<std::size_t>(t.dims[1]) * t.dims[2];
  return "neuron " + std::to_string(i) + " (c=" + std::to_string(i / plane) +
         ", y=" + std::to_string(i % plane / t.dims[2]) + ", x=" + std::to_string(i % t.dims[2]) + ")";
}

// Throws OracleMismatch naming the first stage and neuron that differ.
inline void verify_stage_outputs(const NetworkSpec& net, const std::vector<Tensor>& stage_outputs,
                                 const oracle::DenseResult& dense, const std::string& what) {
  const auto stages = lower_network(net);
  for (std::size_t s = 0; s < stages.size() && s < stage_outputs.size(); ++s) {
    const Tensor& want = dense.layer_outputs[stages[s].last_layer];
    const Tensor& got = stage_outputs[s];
    if (auto i = first_mismatch(got, want)) {
      if (got.dims != want.dims) {
        throw OracleMismatch(what + ": layer " + std::to_string(stages[s].last_layer) +
                             " output shape " + shape_string(got.dims) + ", oracle " +
                             shape_string(want.dims));
      }
      throw OracleMismatch(what + ": layer " + std::to_string(stages[s].last_layer) +
                           " first differs at " + describe_index(want, *i) + ": got " +
                           std::to_string(got.data[*i]) + ", oracle " +
                           std::to_string(want.data[*i]));
    }
  }
}

}  // namespace mnf
