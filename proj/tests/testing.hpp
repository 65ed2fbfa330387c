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

// Test-only helpers: random small networks and independent counting oracles.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mnf/mnf.hpp"

namespace mnf::testing {

struct RandomCase {
  NetworkSpec net;
  WeightStore weights;
  Tensor input;
  HardwareConfig hw;
  double density = 0;
};

inline int pick(Rng& r, std::initializer_list<int> v) {
  return *(v.begin() + static_cast<std::ptrdiff_t>(r.below(v.size())));
}

// Random conv layer on `in` with kernel in {1,3,5}, stride in {1,2},
// padding in {0,1}; nullopt when the geometry produces no output.
inline std::optional<LayerSpec> random_conv(Rng& r, const Shape& in, int idx) {
  const int k = pick(r, {1, 3, 5});
  const int s = pick(r, {1, 2});
  const int p = pick(r, {0, 1});
  if (conv_out_extent(in[1], k, s, p) < 1 || conv_out_extent(in[2], k, s, p) < 1) return std::nullopt;
  LayerSpec l;
  l.kind = LayerKind::conv;
  l.name = "conv" + std::to_string(idx);
  l.conv = ConvLayerGeometry::make(in[0], static_cast<int>(r.uniform_int(1, 8)), in[1], in[2], k, s, p);
  return l;
}

// Networks of 1-3 conv layers (optionally pooled, fused or standalone) and an
// optional fc tail. Channels <= 8, spatial sizes <= 16.
inline RandomCase random_case(std::uint64_t seed) {
  Rng r(seed);
  RandomCase c;
  c.net.name = "random" + std::to_string(seed);
  Shape cur{static_cast<int>(r.uniform_int(1, 8)), static_cast<int>(r.uniform_int(1, 16)),
            static_cast<int>(r.uniform_int(1, 16))};
  c.net.input = cur;
  const int convs = static_cast<int>(r.uniform_int(1, 3));
  for (int i = 0; i < convs; ++i) {
    auto l = random_conv(r, cur, i);
    if (!l) continue;
    const int oh = l->conv.out_h;
    const int ow = l->conv.out_w;
    const PoolSpec pool{2, 2};
    const bool can_pool = pool.divides(oh) && pool.divides(ow);
    const auto mode = r.below(4);  // 0: fused pool, 1: standalone maxpool, else none
    if (can_pool && mode == 0) l->fuse_maxpool = pool;
    cur = layer_output_shape(*l, cur);
    c.net.layers.push_back(*l);
    if (can_pool && mode == 1) {
      LayerSpec mp;
      mp.kind = LayerKind::maxpool;
      mp.name = "pool" + std::to_string(i);
      mp.pool = pool;
      cur = layer_output_shape(mp, cur);
      c.net.layers.push_back(mp);
    }
  }
  if (c.net.layers.empty() || r.bernoulli(0.5)) {
    LayerSpec fc;
    fc.kind = LayerKind::fc;
    fc.name = "fc";
    fc.fc = FcLayerGeometry{static_cast<int>(shape_size(cur)), static_cast<int>(r.uniform_int(1, 16))};
    c.net.layers.push_back(fc);
  }
  for (auto& l : c.net.layers) {
    if (l.kind == LayerKind::maxpool) continue;
    if (r.bernoulli(0.3)) {
      for (int i = 0; i < l.output_channels(); ++i) {
        l.bias.push_back(static_cast<std::int32_t>(r.uniform_int(-2000, 2000)));
      }
    }
  }

  c.weights = random_weights(c.net, r);
  static constexpr double kDensities[] = {0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  c.density = kDensities[r.below(11)];
  c.input = random_tensor(c.net.input, c.density, r);
  for (auto& v : c.input.data) {
    if (v != 0 && r.bernoulli(0.25)) v = static_cast<std::int8_t>(-v);
  }
  calibrate(c.net, c.weights, c.input);
  for (auto& l : c.net.layers) {
    if (l.kind == LayerKind::maxpool) continue;
    if (r.bernoulli(0.3)) l.fire_threshold = static_cast<int>(r.uniform_int(0, 20));
    if (r.bernoulli(0.2)) l.quant.zero_point = static_cast<int>(r.uniform_int(-10, 10));
  }

  // Hardware knobs, with accumulated-SRAM capacity small enough that layers
  // spread over several PEs.
  c.hw.num_pes = 64;
  c.hw.mac_modules = pick(r, {1, 4, 9});
  c.hw.multipliers_per_mac = pick(r, {1, 2, 3});
  c.hw.fifo_depth = static_cast<int>(r.uniform_int(1, 6));
  c.hw.packing = r.bernoulli(0.5) ? LanePacking::bank_aware : LanePacking::linear;
  c.hw.bank_mapping = r.bernoulli(0.5) ? BankMapping::interleave_2d : BankMapping::linear;
  c.hw.hop_latency = static_cast<int>(r.uniform_int(1, 2));
  c.hw.acc_forwarding = r.bernoulli(0.5);
  std::int64_t max_plane = 1;
  for (const auto& l : c.net.layers) {
    if (l.kind == LayerKind::conv) max_plane = std::max<std::int64_t>(max_plane, l.conv.plane());
    if (l.kind == LayerKind::fc) max_plane = std::max<std::int64_t>(max_plane, 1);
  }
  c.hw.acc_sram_bytes = 4 * max_plane * r.uniform_int(1, 4);
  return c;
}

// Output windows containing input pixel (iy, ix), by enumeration.
inline std::int64_t windows_covering(const ConvLayerGeometry& g, int iy, int ix) {
  std::int64_t n = 0;
  for (int oy = 0; oy < g.out_h; ++oy) {
    for (int ox = 0; ox < g.out_w; ++ox) {
      const int ky = iy - (oy * g.stride - g.padding);
      const int kx = ix - (ox * g.stride - g.padding);
      if (ky >= 0 && ky < g.kernel_h && kx >= 0 && kx < g.kernel_w) ++n;
    }
  }
  return n;
}

struct LayerLaw {
  std::int64_t nonzero = 0;
  std::int64_t uninfluential = 0;
  std::int64_t macs = 0;
};

// Expected counters of one layer computed by brute force from its input.
inline LayerLaw layer_law(const LayerSpec& l, const Tensor& in) {
  LayerLaw law;
  if (l.kind == LayerKind::fc) {
    for (auto v : in.data) law.nonzero += v != 0;
    law.macs = law.nonzero * l.fc.out_neurons;
    return law;
  }
  const auto& g = l.conv;
  for (int c = 0; c < g.in_channels; ++c) {
    for (int y = 0; y < g.in_h; ++y) {
      for (int x = 0; x < g.in_w; ++x) {
        if (in.at(c, y, x) == 0) continue;
        ++law.nonzero;
        const auto w = windows_covering(g, y, x);
        if (w == 0) ++law.uninfluential;
        law.macs += w * g.out_channels;
      }
    }
  }
  return law;
}

}  // namespace mnf::testing
