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

// PE counts, channel/neuron assignment and mesh placement.
//
// A conv PE owns whole output channels; an FC PE owns whole output neurons.
// Compute PEs are reused by every layer. One extra storage PE buffers layer
// outputs and re-broadcasts them.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "mnf/error.hpp"
#include "mnf/model.hpp"

namespace mnf {

struct PeCapacity {
  std::int64_t neurons = 0;  // N: 32-bit partial sums in accumulated SRAM
  std::int64_t weights = 0;  // W: int8 weights in weight SRAM

  static PeCapacity from(const HardwareConfig& hw) {
    return {hw.acc_sram_bytes / 4, hw.weight_sram_bytes};
  }
};

namespace detail {
inline std::int64_t ceil_div64(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }
}  // namespace detail

// Output channels one PE can hold: both SRAMs must fit whole channels.
inline std::int64_t conv_channels_per_pe(const ConvLayerGeometry& g, const PeCapacity& cap) {
  const std::int64_t plane = static_cast<std::int64_t>(g.out_h) * g.out_w;
  const std::int64_t filter = static_cast<std::int64_t>(g.filter_size()) * g.in_channels;
  if (plane > cap.neurons) {
    throw MappingError("one output channel needs " + std::to_string(plane) +
                       " partial sums but a PE holds " + std::to_string(cap.neurons));
  }
  if (filter > cap.weights) {
    throw MappingError("one output channel needs " + std::to_string(filter) +
                       " weights but a PE holds " + std::to_string(cap.weights));
  }
  return std::min(cap.neurons / plane, cap.weights / filter);
}

inline int conv_pe_count(const ConvLayerGeometry& g, const PeCapacity& cap) {
  return static_cast<int>(detail::ceil_div64(g.out_channels, conv_channels_per_pe(g, cap)));
}

// Closed-form minimum, ceil(max(n/N, m*n/W)). It may split a neuron's weights
// across PEs; see fc_neurons_per_pe for the whole-neuron assignment.
inline int fc_pe_count(const FcLayerGeometry& g, const PeCapacity& cap) {
  const std::int64_t n = g.out_neurons;
  const std::int64_t mn = static_cast<std::int64_t>(g.in_neurons) * n;
  return static_cast<int>(
      std::max(detail::ceil_div64(n, cap.neurons), detail::ceil_div64(mn, cap.weights)));
}

inline std::int64_t fc_neurons_per_pe(const FcLayerGeometry& g, const PeCapacity& cap) {
  const std::int64_t per = std::min(cap.neurons, cap.weights / g.in_neurons);
  if (per < 1) {
    throw MappingError("one output neuron needs " + std::to_string(g.in_neurons) +
                       " weights but a PE holds " + std::to_string(cap.weights));
  }
  return per;
}

struct PeAssignment {
  int pe_id = 0;
  int first = 0;  // first output channel (conv) or neuron (fc)
  int count = 0;
  std::int64_t neurons = 0;  // accumulated-SRAM words used
  std::int64_t weights = 0;  // weight-SRAM bytes used

  friend bool operator==(const PeAssignment&, const PeAssignment&) = default;
};

struct LayerMapping {
  std::size_t stage = 0;
  std::size_t layer = 0;  // network layer index
  LayerKind kind = LayerKind::conv;
  int min_pes = 0;  // closed-form count
  std::vector<PeAssignment> assignments;

  int pes() const { return static_cast<int>(assignments.size()); }

  friend bool operator==(const LayerMapping&, const LayerMapping&) = default;
};

struct MappedNetwork {
  PeCapacity capacity;
  std::vector<LayerMapping> layers;  // one per execution stage
  int compute_pes = 0;
  int grid_rows = 0;
  int grid_cols = 0;
  int storage_pe = 0;

  int total_pes() const { return compute_pes + 1; }
};

// Splits `total` items over `parts` PEs in contiguous blocks. Blocks are
// whole multiples of `unit` when that keeps every block non-empty and within
// `cap`; otherwise an even split.
inline std::vector<int> balanced_blocks(int total, int parts, int unit, std::int64_t cap) {
  std::vector<int> sizes(parts);
  const int units = (total + unit - 1) / unit;
  bool ok = units >= parts;
  if (ok) {
    int left = total;
    for (int p = 0; p < parts; ++p) {
      const int u = units / parts + (p < units % parts ? 1 : 0);
      sizes[p] = std::min(left, u * unit);
      left -= sizes[p];
      if (sizes[p] < 1 || sizes[p] > cap) ok = false;
    }
  }
  if (!ok) {
    for (int p = 0; p < parts; ++p) sizes[p] = total / parts + (p < total % parts ? 1 : 0);
  }
  return sizes;
}

inline LayerMapping map_layer(const LayerSpec& l, const PeCapacity& cap,
                              const HardwareConfig& hw) {
  LayerMapping m;
  m.kind = l.kind;
  std::vector<int> sizes;
  std::int64_t neurons_per_item = 1;
  std::int64_t weights_per_item = 1;
  if (l.kind == LayerKind::conv) {
    const auto& g = l.conv;
    const std::int64_t cpp = conv_channels_per_pe(g, cap);
    m.min_pes = conv_pe_count(g, cap);
    sizes = balanced_blocks(g.out_channels, m.min_pes, hw.multipliers_per_mac, cpp);
    neurons_per_item = static_cast<std::int64_t>(g.out_h) * g.out_w;
    weights_per_item = static_cast<std::int64_t>(g.filter_size()) * g.in_channels;
  } else if (l.kind == LayerKind::fc) {
    const auto& g = l.fc;
    const std::int64_t per = fc_neurons_per_pe(g, cap);
    m.min_pes = fc_pe_count(g, cap);
    const int assigned = static_cast<int>(detail::ceil_div64(g.out_neurons, per));
    sizes = balanced_blocks(g.out_neurons, assigned, hw.multipliers_per_pe(), per);
    weights_per_item = g.in_neurons;
  } else {
    throw MappingError("maxpool layers are executed by the preceding conv layer");
  }
  int first = 0;
  for (int p = 0; p < static_cast<int>(sizes.size()); ++p) {
    m.assignments.push_back({p, first, sizes[p], sizes[p] * neurons_per_item,
                             sizes[p] * weights_per_item});
    first += sizes[p];
  }
  return m;
}

inline std::pair<int, int> grid_dims(int compute_pes) {
  int side = 1;
  while (side * side < compute_pes + 1) ++side;
  return {side, side};
}

inline MappedNetwork map_network(const NetworkSpec& net, const HardwareConfig& hw) {
  require_valid(net);
  MappedNetwork mn;
  mn.capacity = PeCapacity::from(hw);
  const auto stages = lower_network(net);
  for (std::size_t s = 0; s < stages.size(); ++s) {
    LayerMapping m;
    try {
      m = map_layer(net.layers[stages[s].layer], mn.capacity, hw);
    } catch (const MappingError& e) {
      throw MappingError("layer " + std::to_string(stages[s].layer) + ": " + e.what());
    }
    m.stage = s;
    m.layer = stages[s].layer;
    mn.compute_pes = std::max(mn.compute_pes, m.pes());
    mn.layers.push_back(std::move(m));
  }
  if (mn.compute_pes > hw.num_pes) {
    throw MappingError("network needs " + std::to_string(mn.compute_pes) +
                       " compute PEs but the hardware has " + std::to_string(hw.num_pes));
  }
  std::tie(mn.grid_rows, mn.grid_cols) = grid_dims(mn.compute_pes);
  mn.storage_pe = mn.compute_pes;
  return mn;
}

}  // namespace mnf
