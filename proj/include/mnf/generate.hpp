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

// Synthetic networks, weights and inputs.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mnf/error.hpp"
#include "mnf/model.hpp"
#include "mnf/oracle.hpp"
#include "mnf/random.hpp"

namespace mnf {

namespace detail {

inline LayerSpec conv_layer(std::string name, const Shape& in, int out_c, int k, int s = 1,
                            int p = 0, std::optional<PoolSpec> pool = std::nullopt) {
  LayerSpec l;
  l.kind = LayerKind::conv;
  l.name = std::move(name);
  l.conv = ConvLayerGeometry::make(in.at(0), out_c, in.at(1), in.at(2), k, s, p);
  l.fuse_maxpool = pool;
  return l;
}

inline LayerSpec fc_layer(std::string name, const Shape& in, int out) {
  LayerSpec l;
  l.kind = LayerKind::fc;
  l.name = std::move(name);
  l.fc = FcLayerGeometry{static_cast<int>(shape_size(in)), out};
  return l;
}

class NetBuilder {
 public:
  NetBuilder(std::string name, Shape input) {
    net_.name = std::move(name);
    net_.input = input;
    cur_ = std::move(input);
  }
  NetBuilder& conv(int out_c, int k, int s = 1, int p = 0,
                   std::optional<PoolSpec> pool = std::nullopt) {
    return add(conv_layer("conv" + std::to_string(++convs_), cur_, out_c, k, s, p, pool));
  }
  NetBuilder& fc(int out) { return add(fc_layer("fc" + std::to_string(++fcs_), cur_, out)); }
  NetworkSpec build() const { return net_; }

 private:
  NetBuilder& add(LayerSpec l) {
    cur_ = layer_output_shape(l, cur_);
    net_.layers.push_back(std::move(l));
    return *this;
  }
  NetworkSpec net_;
  Shape cur_;
  int convs_ = 0;
  int fcs_ = 0;
};

}  // namespace detail

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"tiny", "lenet", "vgg", "alexnet"};
  return names;
}

// Desk-scale topologies. "vgg" and "alexnet" keep the kernel sizes and strides
// of their namesakes with shrunken spatial dims and channel counts.
inline NetworkSpec preset_network(std::string_view name) {
  const PoolSpec p2{2, 2};
  const PoolSpec p3{3, 2};
  if (name == "tiny") {
    return detail::NetBuilder("tiny", {1, 28, 28}).conv(2, 3, 1, 1, p2).fc(10).build();
  }
  if (name == "lenet") {
    return detail::NetBuilder("lenet", {1, 28, 28})
        .conv(6, 5, 1, 2, p2)
        .conv(16, 5, 1, 0, p2)
        .fc(120)
        .fc(84)
        .fc(10)
        .build();
  }
  if (name == "vgg") {
    return detail::NetBuilder("vgg", {3, 32, 32})
        .conv(16, 3, 1, 1)
        .conv(16, 3, 1, 1, p2)
        .conv(32, 3, 1, 1)
        .conv(32, 3, 1, 1, p2)
        .conv(64, 3, 1, 1)
        .conv(64, 3, 1, 1, p2)
        .fc(128)
        .fc(10)
        .build();
  }
  if (name == "alexnet") {
    return detail::NetBuilder("alexnet", {3, 64, 64})
        .conv(16, 11, 4, 2, p3)
        .conv(32, 5, 1, 2, p3)
        .conv(48, 3, 1, 1)
        .conv(48, 3, 1, 1)
        .conv(32, 3, 1, 1, p3)
        .fc(64)
        .fc(64)
        .fc(10)
        .build();
  }
  throw ValidationError("unknown preset '" + std::string(name) + "'");
}

// Exactly round(density * n) nonzero values in [1, 127] at shuffled positions.
inline Tensor random_tensor(const Shape& dims, double density, Rng& rng) {
  if (!(density >= 0.0 && density <= 1.0)) throw ValidationError("density must be in [0, 1]");
  Tensor t(dims);
  const auto nz = static_cast<std::size_t>(std::llround(density * static_cast<double>(t.size())));
  std::vector<std::size_t> pos(t.size());
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
  rng.shuffle(pos);
  for (std::size_t i = 0; i < nz; ++i) t.data[pos[i]] = static_cast<std::int8_t>(rng.uniform_int(1, 127));
  return t;
}

// Signed weights, uniform in [-127, 127].
inline WeightStore random_weights(const NetworkSpec& net, Rng& rng) {
  WeightStore w = zero_weights(net);
  for (auto& layer : w.layers) {
    for (auto& v : layer) v = static_cast<std::int8_t>(rng.uniform_int(-127, 127));
  }
  return w;
}

// Picks each weighted layer's requantization so that the 99.9th percentile of
// its positive pre-activation sums on `input` maps to 127.
inline void calibrate(NetworkSpec& net, const WeightStore& w, const Tensor& input) {
  constexpr int kShift = 20;
  Tensor cur = input;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    LayerSpec& l = net.layers[i];
    if (l.kind == LayerKind::maxpool) {
      cur = oracle::dense_maxpool(cur, l.pool.window, l.pool.stride);
      continue;
    }
    const Tensor flat = l.kind == LayerKind::fc ? Tensor({static_cast<int>(cur.size())}, cur.data) : cur;
    const auto sums = l.kind == LayerKind::conv ? oracle::dense_conv_sums(flat, w[i], l.conv, l.bias)
                                                : oracle::dense_fc_sums(flat, w[i], l.fc, l.bias);
    std::vector<std::int64_t> pos;
    for (auto s : sums) {
      if (s > 0) pos.push_back(s);
    }
    l.quant = QuantParams{};
    if (!pos.empty()) {
      const std::size_t k = std::min(pos.size() - 1, static_cast<std::size_t>(0.999 * pos.size()));
      std::nth_element(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(k), pos.end());
      const double m = 127.0 / static_cast<double>(pos[k]);
      const std::int64_t one = std::int64_t{1} << kShift;
      l.quant.shift = kShift;
      l.quant.scale_multiplier =
          std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(m * one)), 1, one);
    }
    if (l.kind == LayerKind::conv) {
      cur = oracle::dense_conv(flat, w[i], l.conv, l.quant, l.fire_threshold, l.bias);
      if (l.fuse_maxpool) cur = oracle::dense_maxpool(cur, l.fuse_maxpool->window, l.fuse_maxpool->stride);
    } else {
      cur = oracle::dense_fc(flat, w[i], l.fc, l.quant, l.fire_threshold, l.bias);
    }
  }
}

struct GeneratedCase {
  NetworkSpec network;
  WeightStore weights;
  Tensor input;
};

// Weights, input and calibration are all drawn from `seed`.
inline GeneratedCase generate_case(NetworkSpec net, double density, std::uint64_t seed) {
  require_valid(net);
  Rng wr(Rng::derive(seed, 0));
  Rng ir(Rng::derive(seed, 1));
  GeneratedCase c;
  c.weights = random_weights(net, wr);
  c.input = random_tensor(net.input, density, ir);
  calibrate(net, c.weights, c.input);
  c.network = std::move(net);
  return c;
}

inline GeneratedCase generate_case(std::string_view preset, double density, std::uint64_t seed) {
  return generate_case(preset_network(preset), density, seed);
}

}  // namespace mnf
