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

// Cycle-approximate model of one processing element.
//
//   router -> in_fifo -> decode -> load (weight-vector reads) -> load_fifo
//          -> dispatcher -> per-bank mac_fifo -> MAC module (read, add, write)
//
// Every stage takes one cycle and FIFOs decouple them. Stages are evaluated
// back to front so a value produced in cycle t is consumed in cycle t + 1.
// Partial sums are applied when a lane op retires in issue order, so the final
// sums equal the functional model. Without forwarding, an op whose address is
// still in the add or write stage waits for the write.
// The fire phase after end-of-data is costed analytically.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mnf/dataflow.hpp"
#include "mnf/error.hpp"
#include "mnf/events.hpp"
#include "mnf/mapping.hpp"
#include "mnf/model.hpp"

namespace mnf {

struct LaneItem {
  int channel = 0;          // local output channel; 0 for fc
  int neuron = 0;           // accumulator address within the channel
  std::size_t weight = 0;   // index into the layer weight array
  std::int8_t input = 0;
  int bank = 0;

  friend bool operator==(const LaneItem&, const LaneItem&) = default;
};

using WeightVector = std::vector<LaneItem>;

// Lane ops one MAC module issues together.
struct Bundle {
  std::array<LaneItem, kMaxMultipliersPerMac> items{};
  int size = 0;

  bool touches(const LaneItem& it) const {
    for (int i = 0; i < size; ++i) {
      if (items[i].channel == it.channel && items[i].neuron == it.neuron) return true;
    }
    return false;
  }
  bool conflicts(const Bundle& o) const {
    for (int i = 0; i < o.size; ++i) {
      if (touches(o.items[i])) return true;
    }
    return false;
  }
};

// Accumulated-SRAM bank of a neuron address.
class BankMap {
 public:
  BankMap(const HardwareConfig& hw, const LayerSpec& l)
      : banks_(hw.mac_modules), mpm_(hw.multipliers_per_mac), fc_(l.kind == LayerKind::fc) {
    if (!fc_) out_w_ = l.conv.out_w;
    if (hw.bank_mapping == BankMapping::interleave_2d) {
      int s = 1;
      while (s * s < banks_) ++s;
      if (s * s == banks_) side_ = s;  // non-square module counts fall back to modulo
    }
  }

  int operator()(int neuron) const {
    if (fc_) return side_ ? (neuron / mpm_) % banks_ : neuron % banks_;
    if (!side_) return neuron % banks_;
    const int oy = neuron / out_w_;
    const int ox = neuron % out_w_;
    return (oy % side_) * side_ + ox % side_;
  }

 private:
  int banks_;
  int mpm_;
  bool fc_;
  int out_w_ = 1;
  int side_ = 0;
};

// What one PE executes for one layer.
struct PeLayerTask {
  const LayerSpec* layer = nullptr;
  std::optional<PoolSpec> pool;
  PeAssignment assignment;
  const std::vector<std::int8_t>* weights = nullptr;
};

// Lane items of one event for the PE's resident channels. Conv items are
// ordered channel-block-major (blocks of multipliers_per_mac channels), then
// by output position, then by channel, so each block of a 3x3 window fills
// every bank evenly.
inline std::vector<LaneItem> lane_items(const Event& ev, const PeLayerTask& task,
                                        const HardwareConfig& hw, const BankMap& banks) {
  std::vector<LaneItem> items;
  const LayerSpec& l = *task.layer;
  const int first = task.assignment.first;
  const int count = task.assignment.count;
  if (const auto* e = std::get_if<ConvEvent>(&ev)) {
    const auto& g = l.conv;
    std::vector<WeightNeuronPair> pairs = expand_conv_event(*e, g);
    const int mpm = hw.multipliers_per_mac;
    items.reserve(pairs.size() * count);
    for (int cb = 0; cb < count; cb += mpm) {
      const int ce = std::min(count, cb + mpm);
      for (const auto& p : pairs) {
        const int bank = banks(p.neuron_addr);
        for (int c = cb; c < ce; ++c) {
          items.push_back({c, p.neuron_addr, conv_weight_index(g, first + c, e->ch_id, p.weight_addr),
                           e->input, bank});
        }
      }
    }
  } else if (const auto* f = std::get_if<FcEvent>(&ev)) {
    const auto& g = l.fc;
    if (f->neuron_addr < 0 || f->neuron_addr >= g.in_neurons) {
      throw AddressError("fc event neuron " + std::to_string(f->neuron_addr) + " outside " +
                         std::to_string(g.in_neurons) + " inputs");
    }
    items.reserve(count);
    for (int j = 0; j < count; ++j) {
      items.push_back({0, j, fc_weight_index(g, f->neuron_addr, first + j), f->input, banks(j)});
    }
  }
  return items;
}

// Cuts lane items into weight-vector reads of at most multipliers_per_pe.
inline std::vector<WeightVector> pack_lanes(const std::vector<LaneItem>& items,
                                            const HardwareConfig& hw) {
  std::vector<WeightVector> vectors;
  const std::size_t width = hw.multipliers_per_pe();
  std::vector<int> per_bank(hw.mac_modules, 0);
  WeightVector cur;
  for (const auto& it : items) {
    const bool full = cur.size() == width ||
                      (hw.packing == LanePacking::bank_aware &&
                       per_bank[it.bank] == hw.multipliers_per_mac);
    if (full) {
      vectors.push_back(std::move(cur));
      cur.clear();
      std::fill(per_bank.begin(), per_bank.end(), 0);
    }
    cur.push_back(it);
    ++per_bank[it.bank];
  }
  if (!cur.empty()) vectors.push_back(std::move(cur));
  return vectors;
}

struct StallCounters {
  std::uint64_t fifo_full = 0;      // dispatcher blocked by a full MAC FIFO
  std::uint64_t bank_conflict = 0;  // vector needs a second dispatch cycle for one bank
  std::uint64_t raw_hazard = 0;     // MAC module waits for a pending write
  std::uint64_t load_full = 0;      // load blocked by a full load FIFO
  std::uint64_t backpressure = 0;   // router holds a flit because in_fifo is full
  std::uint64_t input_starved = 0;  // PE empty, waiting for input

  StallCounters& operator+=(const StallCounters& o) {
    fifo_full += o.fifo_full;
    bank_conflict += o.bank_conflict;
    raw_hazard += o.raw_hazard;
    load_full += o.load_full;
    backpressure += o.backpressure;
    input_starved += o.input_starved;
    return *this;
  }

  friend bool operator==(const StallCounters&, const StallCounters&) = default;
};

// Per-cycle telemetry. Consumers check `schema` before reading fields.
struct CycleRecord {
  static constexpr int kSchemaVersion = 1;

  enum Stall : std::uint8_t {
    kFifoFull = 1,
    kBankConflict = 2,
    kRawHazard = 4,
    kLoadFull = 8,
    kBackpressure = 16,
    kStarved = 32,
  };

  int schema = kSchemaVersion;
  std::int64_t cycle = 0;
  int busy_multipliers = 0;
  int weight_reads = 0;
  int acc_reads = 0;
  int acc_writes = 0;
  std::uint8_t stalls = 0;
};

struct PeTelemetry {
  int pe_id = 0;
  int multipliers = 0;
  std::int64_t start_cycle = 0;
  std::int64_t multiply_done = 0;  // first cycle after the multiply phase drained
  std::uint64_t events = 0;
  std::uint64_t macs = 0;  // lane ops retired
  std::uint64_t weight_reads = 0;
  std::uint64_t acc_reads = 0;
  std::uint64_t acc_writes = 0;
  std::uint64_t busy_multiplier_cycles = 0;
  std::uint64_t active_cycles = 0;
  std::uint64_t fire_read_cycles = 0;
  std::uint64_t fired = 0;
  StallCounters stalls;

  std::int64_t multiply_cycles() const { return multiply_done - start_cycle; }
};

struct Utilization {
  double active = 0;  // busy / (multipliers x active cycles)
  double total = 0;   // busy / (multipliers x elapsed cycles)
};

inline double busy_fraction(std::uint64_t busy, std::uint64_t multipliers, std::uint64_t cycles) {
  return cycles == 0 || multipliers == 0
             ? 0.0
             : static_cast<double>(busy) / (static_cast<double>(multipliers) * cycles);
}

// `elapsed` defaults to the multiply phase.
inline Utilization utilization(const PeTelemetry& t, std::int64_t elapsed = -1) {
  if (elapsed < 0) elapsed = t.multiply_cycles();
  return {busy_fraction(t.busy_multiplier_cycles, t.multipliers, t.active_cycles),
          busy_fraction(t.busy_multiplier_cycles, t.multipliers, static_cast<std::uint64_t>(elapsed))};
}

struct Arrival {
  std::int64_t cycle = 0;
  Event event;
};

class ProcessingElement {
 public:
  ProcessingElement(const HardwareConfig& hw, PeLayerTask task, std::vector<Arrival> arrivals,
                    std::int64_t start_cycle = 0)
      : hw_(hw),
        task_(std::move(task)),
        banks_(hw, *task_.layer),
        arrivals_(std::move(arrivals)),
        mac_(hw.mac_modules),
        acc_(task_.layer->kind == LayerKind::fc ? 1 : task_.assignment.count,
             task_.layer->kind == LayerKind::fc ? task_.assignment.count
                                                : task_.layer->conv.plane()),
        now_(start_cycle) {
    tel_.pe_id = task_.assignment.pe_id;
    tel_.multipliers = hw.multipliers_per_pe();
    tel_.start_cycle = start_cycle;
  }

  std::int64_t cycle() const { return now_; }
  bool done() const { return eod_ && empty(); }
  const PeTelemetry& telemetry() const { return tel_; }
  const Accumulators& accumulators() const { return acc_; }

  // Pipeline holds no work. Input may still be pending in the router.
  bool empty() const {
    if (decoded_ || !load_fifo_.empty() || dispatching_ || !in_fifo_.empty()) return false;
    for (const auto& m : mac_) {
      if (!m.fifo.empty() || m.read || m.add || m.write) return false;
    }
    return true;
  }

  // Cycle of the next flit still to arrive, or -1.
  std::int64_t next_arrival() const {
    return next_ < arrivals_.size() ? arrivals_[next_].cycle : -1;
  }

  CycleRecord step() {
    CycleRecord rec;
    rec.cycle = now_;
    if (empty() && !eod_ && (next_ >= arrivals_.size() || arrivals_[next_].cycle > now_)) {
      rec.stalls |= CycleRecord::kStarved;
      ++tel_.stalls.input_starved;
      ++starved_;
    }
    step_mac(rec);
    step_dispatch(rec);
    step_load(rec);
    step_decode();
    step_router(rec);
    ++now_;
    if (done() && !finished_) {
      finished_ = true;
      tel_.multiply_done = now_;
      if (issued_any_) {
        tel_.active_cycles =
            static_cast<std::uint64_t>(last_issue_ - first_issue_ + 1) -
            (starved_at_last_ - starved_at_first_);
      }
    }
    return rec;
  }

  // Skips cycles in which the PE is empty and waits for input.
  void fast_forward() {
    if (!empty() || eod_ || next_ >= arrivals_.size()) return;
    const std::int64_t t = arrivals_[next_].cycle;
    if (t > now_) {
      const auto gap = static_cast<std::uint64_t>(t - now_);
      tel_.stalls.input_starved += gap;
      starved_ += gap;
      now_ = t;
    }
  }

 private:
  struct MacModule {
    std::deque<Bundle> fifo;
    std::optional<Bundle> read, add, write;
  };

  void step_mac(CycleRecord& rec) {
    bool issued = false;
    bool hazard = false;
    for (auto& m : mac_) {
      if (m.write) {
        for (int i = 0; i < m.write->size; ++i) {
          const LaneItem& it = m.write->items[i];
          accumulate(acc_.at(it.channel, it.neuron),
                     static_cast<std::int64_t>((*task_.weights)[it.weight]) * it.input);
        }
        tel_.acc_writes += m.write->size;
        tel_.macs += m.write->size;
        rec.acc_writes += m.write->size;
      }
      m.write = std::move(m.add);
      m.add = std::move(m.read);
      m.read.reset();
      if (m.fifo.empty()) continue;
      const Bundle& b = m.fifo.front();
      if (!hw_.acc_forwarding &&
          ((m.add && m.add->conflicts(b)) || (m.write && m.write->conflicts(b)))) {
        hazard = true;
        continue;
      }
      const int n = b.size;
      m.read = b;
      m.fifo.pop_front();
      tel_.acc_reads += n;
      tel_.busy_multiplier_cycles += n;
      rec.acc_reads += n;
      rec.busy_multipliers += n;
      issued = true;
    }
    if (hazard) {
      ++tel_.stalls.raw_hazard;
      rec.stalls |= CycleRecord::kRawHazard;
    }
    if (issued) {
      if (!issued_any_) {
        issued_any_ = true;
        first_issue_ = now_;
        starved_at_first_ = starved_;
      }
      last_issue_ = now_;
      starved_at_last_ = starved_;
    }
  }

  void step_dispatch(CycleRecord& rec) {
    if (!dispatching_) {
      if (load_fifo_.empty()) return;
      pending_.assign(hw_.mac_modules, {});
      for (const auto& it : load_fifo_.front()) pending_[it.bank].push_back(it);
      load_fifo_.pop_front();
      dispatching_ = true;
    }
    bool blocked = false;
    bool left = false;
    for (int b = 0; b < hw_.mac_modules; ++b) {
      auto& items = pending_[b];
      if (items.empty()) continue;
      auto& fifo = mac_[b].fifo;
      if (static_cast<int>(fifo.size()) >= hw_.fifo_depth) {
        blocked = true;
        left = true;
        continue;
      }
      Bundle bundle;
      const int n = std::min<int>(hw_.multipliers_per_mac, static_cast<int>(items.size()));
      std::copy_n(items.begin(), n, bundle.items.begin());
      bundle.size = n;
      items.erase(items.begin(), items.begin() + n);
      fifo.push_back(bundle);
      if (!items.empty()) left = true;
    }
    if (!left) {
      dispatching_ = false;
    } else if (blocked) {
      ++tel_.stalls.fifo_full;
      rec.stalls |= CycleRecord::kFifoFull;
    } else {
      ++tel_.stalls.bank_conflict;
      rec.stalls |= CycleRecord::kBankConflict;
    }
  }

  void step_load(CycleRecord& rec) {
    if (!decoded_) return;
    if (static_cast<int>(load_fifo_.size()) >= hw_.fifo_depth) {
      ++tel_.stalls.load_full;
      rec.stalls |= CycleRecord::kLoadFull;
      return;
    }
    load_fifo_.push_back(std::move(decoded_->vectors[decoded_->next++]));
    ++tel_.weight_reads;
    ++rec.weight_reads;
    if (decoded_->next == decoded_->vectors.size()) decoded_.reset();
  }

  void step_decode() {
    if (decoded_ || in_fifo_.empty()) return;
    Event ev = std::move(in_fifo_.front());
    in_fifo_.pop_front();
    if (is_end_of_data(ev)) {
      eod_ = true;
      return;
    }
    ++tel_.events;
    auto vectors = pack_lanes(lane_items(ev, task_, hw_, banks_), hw_);
    if (!vectors.empty()) decoded_ = Decoded{std::move(vectors), 0};
  }

  void step_router(CycleRecord& rec) {
    if (next_ >= arrivals_.size() || arrivals_[next_].cycle > now_) return;
    if (static_cast<int>(in_fifo_.size()) >= hw_.fifo_depth) {
      ++tel_.stalls.backpressure;
      rec.stalls |= CycleRecord::kBackpressure;
      return;
    }
    in_fifo_.push_back(arrivals_[next_++].event);
  }

  struct Decoded {
    std::vector<WeightVector> vectors;
    std::size_t next = 0;
  };

  HardwareConfig hw_;
  PeLayerTask task_;
  BankMap banks_;
  std::vector<Arrival> arrivals_;
  std::size_t next_ = 0;

  std::deque<Event> in_fifo_;
  std::optional<Decoded> decoded_;
  std::deque<WeightVector> load_fifo_;
  bool dispatching_ = false;
  std::vector<std::vector<LaneItem>> pending_;
  std::vector<MacModule> mac_;
  bool eod_ = false;
  bool finished_ = false;

  Accumulators acc_;
  PeTelemetry tel_;
  std::int64_t now_;
  bool issued_any_ = false;
  std::int64_t first_issue_ = 0;
  std::int64_t last_issue_ = 0;
  std::uint64_t starved_ = 0;
  std::uint64_t starved_at_first_ = 0;
  std::uint64_t starved_at_last_ = 0;
};

// ---------------------------------------------------------------------------
// Fire phase

struct FiredFlit {
  std::size_t index = 0;  // flat position in the layer output tensor
  std::int8_t value = 0;
  std::int64_t ready = 0;  // cycle the activation module hands it to the router

  friend bool operator==(const FiredFlit&, const FiredFlit&) = default;
};

inline constexpr int kActivationLatency = 2;  // quantize, then threshold/pool

struct PeLayerResult {
  PeTelemetry telemetry;
  Accumulators accumulators;
  std::vector<FiredFlit> fired;
  std::int64_t eod_ready = 0;  // end-of-data leaves after the last fired value
};

// Accumulated-SRAM words each bank streams out during the fire phase: a word
// holds multipliers_per_mac partial sums (channels of one conv neuron, or
// consecutive fc neurons).
inline std::uint64_t fire_read_cycles(const PeLayerTask& task, const HardwareConfig& hw) {
  const LayerSpec& l = *task.layer;
  const BankMap banks(hw, l);
  const bool fc = l.kind == LayerKind::fc;
  const int positions = fc ? task.assignment.count : l.conv.plane();
  std::vector<std::uint64_t> per_bank(hw.mac_modules, 0);
  for (int n = 0; n < positions; ++n) ++per_bank[banks(n)];
  const std::uint64_t mpm = hw.multipliers_per_mac;
  const std::uint64_t words_per_neuron =
      fc ? 1 : (static_cast<std::uint64_t>(task.assignment.count) + mpm - 1) / mpm;
  std::uint64_t worst = 0;
  for (auto c : per_bank) {
    worst = std::max(worst, fc ? (c + mpm - 1) / mpm : c * words_per_neuron);
  }
  return worst;
}

// Drains the PE's accumulators through requantize, pooling and threshold.
inline void fire_phase(const PeLayerTask& task, const HardwareConfig& hw, PeLayerResult& r) {
  const LayerSpec& l = *task.layer;
  const int first = task.assignment.first;
  const int count = task.assignment.count;
  const std::uint64_t reads = fire_read_cycles(task, hw);
  const std::int64_t begin = r.telemetry.multiply_done + kActivationLatency;
  r.telemetry.fire_read_cycles = reads;

  std::vector<std::int8_t> out;
  std::size_t out_plane = 1;
  if (l.kind == LayerKind::fc) {
    out.resize(count);
    for (int j = 0; j < count; ++j) {
      const std::int32_t bias = l.bias.empty() ? 0 : l.bias[first + j];
      out[j] = activate(requantize_with_bias(r.accumulators.at(0, j), bias, l.quant),
                        l.fire_threshold);
    }
    r.telemetry.acc_reads += count;
  } else {
    const auto& g = l.conv;
    out_plane = static_cast<std::size_t>(shape_size(stage_output_shape(l, task.pool))) /
                g.out_channels;
    out.resize(out_plane * count);
    for (int c = 0; c < count; ++c) {
      const std::int32_t bias = l.bias.empty() ? 0 : l.bias[first + c];
      fire_conv_plane(std::span(r.accumulators.data).subspan(static_cast<std::size_t>(c) * g.plane(),
                                                             g.plane()),
                      g.out_h, g.out_w, bias, l.quant, task.pool, l.fire_threshold,
                      std::span(out).subspan(c * out_plane, out_plane));
    }
    r.telemetry.acc_reads += static_cast<std::uint64_t>(count) * g.plane();
  }

  // Output k becomes available once its share of the bank reads is done.
  const std::uint64_t total = out.size();
  const std::size_t base = static_cast<std::size_t>(first) * (l.kind == LayerKind::fc ? 1 : out_plane);
  for (std::size_t k = 0; k < total; ++k) {
    if (out[k] == 0) continue;
    const auto ready = begin + static_cast<std::int64_t>((k + 1) * reads / total);
    r.fired.push_back({base + k, out[k], ready});
  }
  r.telemetry.fired = r.fired.size();
  r.eod_ready = begin + static_cast<std::int64_t>(reads);
}

using CycleSink = std::function<void(const CycleRecord&)>;

// Runs one PE through a layer: multiply phase cycle by cycle, then the fire
// phase. `arrivals` must end with the end-of-data flit and be sorted by cycle.
inline PeLayerResult pe_run_layer(const HardwareConfig& hw, const PeLayerTask& task,
                                  std::vector<Arrival> arrivals, std::int64_t start_cycle = 0,
                                  const CycleSink& sink = {}) {
  if (arrivals.empty() || !is_end_of_data(arrivals.back().event)) {
    throw Error("PE input must end with an end-of-data event");
  }
  ProcessingElement pe(hw, task, std::move(arrivals), start_cycle);
  // Every cycle either advances a stage or is backpressure/stall bound; a PE
  // that makes no progress for this long is wedged.
  constexpr std::int64_t kWatchdog = 1 << 16;
  std::int64_t quiet = 0;
  std::uint64_t last_progress = 0;
  while (!pe.done()) {
    if (!sink) pe.fast_forward();
    const CycleRecord rec = pe.step();
    if (sink) sink(rec);
    const auto& t = pe.telemetry();
    const std::uint64_t progress = t.events + t.weight_reads + t.acc_reads + t.acc_writes;
    if (progress != last_progress || (rec.stalls & CycleRecord::kStarved)) {
      last_progress = progress;
      quiet = 0;
    } else if (++quiet > kWatchdog) {
      throw Error("PE " + std::to_string(t.pe_id) + " deadlocked at cycle " +
                  std::to_string(pe.cycle()));
    }
  }
  PeLayerResult r{pe.telemetry(), pe.accumulators(), {}, 0};
  fire_phase(task, hw, r);
  return r;
}

}  // namespace mnf
