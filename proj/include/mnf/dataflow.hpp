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

// Timing-free multiply-and-fire execution. This is the semantic core the cycle
// simulator must agree with, and the event-level golden model.

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mnf/error.hpp"
#include "mnf/events.hpp"
#include "mnf/model.hpp"

namespace mnf {

struct WeightNeuronPair {
  int weight_addr = 0;
  int neuron_addr = 0;

  friend bool operator==(const WeightNeuronPair&, const WeightNeuronPair&) = default;
};

// Predefined parameters of the conv replay loop plus the bounds the produced
// addresses are checked against.
struct ExpansionParams {
  int stride = 1;
  int nc_filter = 1;
  int nc_output = 1;
  int filter_size = 1;  // weight addresses must be < filter_size
  int plane = 1;        // neuron addresses must be < plane

  static ExpansionParams from(const ConvLayerGeometry& g) {
    return {g.stride, g.nc_filter(), g.nc_output(), g.filter_size(), g.plane()};
  }
};

// Replays one conv event: walks the filter backwards by `stride` while the
// output neuron advances by one, restarting each row from the start addresses.
template <class Fn>
void for_each_conv_pair(const ConvEvent& e, const ExpansionParams& p, Fn&& fn) {
  for (int y = 0; y <= e.y_jump; ++y) {
    int weight_addr = e.start_weight - p.nc_filter * y * p.stride;
    int neuron_addr = e.start_neuron + p.nc_output * y;
    for (int x = 0; x <= e.x_jump; ++x) {
      if (weight_addr < 0 || weight_addr >= p.filter_size || neuron_addr < 0 ||
          neuron_addr >= p.plane) {
        throw AddressError("conv event expands to (weight " + std::to_string(weight_addr) +
                           ", neuron " + std::to_string(neuron_addr) +
                           ") outside filter " + std::to_string(p.filter_size) +
                           " / plane " + std::to_string(p.plane));
      }
      fn(weight_addr, neuron_addr);
      neuron_addr += 1;
      weight_addr -= p.stride;
    }
  }
}

inline std::vector<WeightNeuronPair> expand_conv_event(const ConvEvent& e,
                                                       const ExpansionParams& p) {
  std::vector<WeightNeuronPair> out;
  out.reserve(static_cast<std::size_t>(e.x_jump + 1) * (e.y_jump + 1));
  for_each_conv_pair(e, p, [&](int w, int n) { out.push_back({w, n}); });
  return out;
}

inline std::vector<WeightNeuronPair> expand_conv_event(const ConvEvent& e,
                                                       const ConvLayerGeometry& g) {
  return expand_conv_event(e, ExpansionParams::from(g));
}

// ---------------------------------------------------------------------------

// 32-bit partial sums, one plane per output channel (FC: one channel holding
// all output neurons).
struct Accumulators {
  int channels = 0;
  int size = 0;  // per channel
  std::vector<std::int32_t> data;

  Accumulators() = default;
  Accumulators(int channels_, int size_)
      : channels(channels_), size(size_),
        data(static_cast<std::size_t>(channels_) * size_, 0) {}

  std::int32_t& at(int ch, int n) { return data[static_cast<std::size_t>(ch) * size + n]; }
  std::int32_t at(int ch, int n) const {
    return data[static_cast<std::size_t>(ch) * size + n];
  }

  friend bool operator==(const Accumulators&, const Accumulators&) = default;
};

// Partial sums never wrap: leaving the 32-bit range is a fault.
inline void accumulate(std::int32_t& acc, std::int64_t delta) {
  const std::int64_t r = static_cast<std::int64_t>(acc) + delta;
  if (r < std::numeric_limits<std::int32_t>::min() ||
      r > std::numeric_limits<std::int32_t>::max()) {
    throw AccumulatorOverflow("partial sum " + std::to_string(r) +
                              " exceeds the 32-bit accumulator");
  }
  acc = static_cast<std::int32_t>(r);
}

inline Accumulators make_accumulators(const LayerSpec& l) {
  if (l.kind == LayerKind::fc) return Accumulators(1, l.fc.out_neurons);
  return Accumulators(l.conv.out_channels, l.conv.plane());
}

// Returns the number of MACs performed.
inline std::int64_t apply_conv_event(const ConvEvent& e, std::span<const std::int8_t> weights,
                                     Accumulators& acc, const ConvLayerGeometry& g) {
  const auto pairs = expand_conv_event(e, g);
  for (int o = 0; o < g.out_channels; ++o) {
    const std::size_t base = conv_weight_index(g, o, e.ch_id, 0);
    for (const auto& p : pairs) {
      accumulate(acc.at(o, p.neuron_addr),
                 static_cast<std::int64_t>(weights[base + p.weight_addr]) * e.input);
    }
  }
  return static_cast<std::int64_t>(g.out_channels) * static_cast<std::int64_t>(pairs.size());
}

// Weights are row-major by input neuron, so the event's weights are the
// contiguous run starting at neuron_addr * out_neurons.
inline std::int64_t apply_fc_event(const FcEvent& e, std::span<const std::int8_t> weights,
                                   Accumulators& acc, const FcLayerGeometry& g) {
  if (e.neuron_addr < 0 || e.neuron_addr >= g.in_neurons) {
    throw AddressError("fc event neuron " + std::to_string(e.neuron_addr) +
                       " outside " + std::to_string(g.in_neurons) + " inputs");
  }
  std::size_t weight_addr = fc_weight_index(g, e.neuron_addr, 0);
  for (int j = 0; j < g.out_neurons; ++j, ++weight_addr) {
    accumulate(acc.at(0, j), static_cast<std::int64_t>(weights[weight_addr]) * e.input);
  }
  return g.out_neurons;
}

// ---------------------------------------------------------------------------
// Fire phase

inline std::int8_t requantize_with_bias(std::int32_t acc, std::int32_t bias,
                                        const QuantParams& q) {
  std::int32_t sum = acc;
  accumulate(sum, bias);
  return requantize(sum, q);
}

// ReLU-style threshold: only values strictly above it fire; silent positions
// read as zero in the next layer.
inline std::int8_t activate(std::int8_t value, int threshold) {
  return value > threshold ? value : std::int8_t{0};
}

// Activation of one conv output channel. Pooling takes the max over
// requantized values, then thresholds once per window. `acc` is the channel's
// out_h x out_w plane; `out` receives the pooled plane.
inline void fire_conv_plane(std::span<const std::int32_t> acc, int out_h, int out_w,
                            std::int32_t bias, const QuantParams& q,
                            const std::optional<PoolSpec>& pool, int threshold,
                            std::span<std::int8_t> out) {
  if (!pool) {
    for (int n = 0; n < out_h * out_w; ++n) {
      out[n] = activate(requantize_with_bias(acc[n], bias, q), threshold);
    }
    return;
  }
  const int ph = pool->out_extent(out_h);
  const int pw = pool->out_extent(out_w);
  for (int py = 0; py < ph; ++py) {
    for (int px = 0; px < pw; ++px) {
      int best = -129;
      for (int wy = 0; wy < pool->window; ++wy) {
        for (int wx = 0; wx < pool->window; ++wx) {
          const int y = py * pool->stride + wy;
          const int x = px * pool->stride + wx;
          best = std::max<int>(best, requantize_with_bias(acc[y * out_w + x], bias, q));
        }
      }
      out[py * pw + px] = activate(static_cast<std::int8_t>(best), threshold);
    }
  }
}

struct FiredValue {
  std::size_t index = 0;  // flat position in the layer output tensor
  std::int8_t value = 0;

  friend bool operator==(const FiredValue&, const FiredValue&) = default;
};

struct FireResult {
  Tensor output;
  std::vector<FiredValue> fired;  // in scan order
};

inline Shape stage_output_shape(const LayerSpec& l, const std::optional<PoolSpec>& pool) {
  if (l.kind == LayerKind::fc) return {l.fc.out_neurons};
  const auto& g = l.conv;
  if (!pool) return {g.out_channels, g.out_h, g.out_w};
  return {g.out_channels, pool->out_extent(g.out_h), pool->out_extent(g.out_w)};
}

inline FireResult fire(const Accumulators& acc, const LayerSpec& l,
                       const std::optional<PoolSpec>& pool) {
  FireResult r{Tensor(stage_output_shape(l, pool)), {}};
  auto bias_of = [&](int c) { return l.bias.empty() ? 0 : l.bias[c]; };
  if (l.kind == LayerKind::fc) {
    for (int j = 0; j < l.fc.out_neurons; ++j) {
      r.output.data[j] =
          activate(requantize_with_bias(acc.at(0, j), bias_of(j), l.quant), l.fire_threshold);
    }
  } else {
    const auto& g = l.conv;
    const std::size_t out_plane = r.output.size() / g.out_channels;
    for (int c = 0; c < g.out_channels; ++c) {
      fire_conv_plane(std::span(acc.data).subspan(static_cast<std::size_t>(c) * acc.size, acc.size),
                      g.out_h, g.out_w, bias_of(c), l.quant, pool, l.fire_threshold,
                      std::span(r.output.data).subspan(c * out_plane, out_plane));
    }
  }
  for (std::size_t i = 0; i < r.output.size(); ++i) {
    if (r.output.data[i] != 0) r.fired.push_back({i, r.output.data[i]});
  }
  return r;
}

// ---------------------------------------------------------------------------

struct LayerCounters {
  std::size_t layer = 0;       // network layer index of the conv/fc layer
  std::size_t events = 0;      // events delivered (nonzero, influential inputs)
  std::size_t nonzero = 0;     // nonzero input activations
  std::size_t uninfluential = 0;
  std::int64_t macs = 0;
  std::size_t fired = 0;

  friend bool operator==(const LayerCounters&, const LayerCounters&) = default;
};

struct FunctionalResult {
  Tensor output;
  std::vector<Tensor> stage_outputs;  // one per execution stage
  std::vector<LayerCounters> counters;
};

inline Tensor as_layer_input(const Tensor& t, const LayerSpec& l) {
  if (l.kind == LayerKind::fc && t.dims.size() != 1) {
    return Tensor(Shape{static_cast<int>(t.size())}, t.data);
  }
  return t;
}

// Layer-by-layer encode -> multiply -> fire.
inline FunctionalResult run_network_functional(const NetworkSpec& net, const WeightStore& weights,
                                               const Tensor& input) {
  require_valid(net);
  FunctionalResult result;
  Tensor cur = input;
  for (const auto& stage : lower_network(net)) {
    const LayerSpec& l = net.layers[stage.layer];
    const Tensor in = as_layer_input(cur, l);
    const EventStream stream = event_stream(in, l, static_cast<int>(stage.layer));
    Accumulators acc = make_accumulators(l);
    LayerCounters c;
    c.layer = stage.layer;
    c.nonzero = stream.nonzero;
    c.uninfluential = stream.diag.uninfluential_pixels;
    c.events = stream.event_count();
    const auto& w = weights[stage.layer];
    for (const Event& e : stream.events) {
      if (const auto* ce = std::get_if<ConvEvent>(&e)) {
        c.macs += apply_conv_event(*ce, w, acc, l.conv);
      } else if (const auto* fe = std::get_if<FcEvent>(&e)) {
        c.macs += apply_fc_event(*fe, w, acc, l.fc);
      }
    }
    FireResult fr = fire(acc, l, stage.pool);
    c.fired = fr.fired.size();
    result.counters.push_back(c);
    result.stage_outputs.push_back(fr.output);
    cur = std::move(fr.output);
  }
  result.output = std::move(cur);
  return result;
}

}  // namespace mnf
