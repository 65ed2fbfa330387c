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

// Dense reference: direct loop nests over the full input, no events, no
// address arithmetic shared with the event path. Deliberately naive.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mnf/error.hpp"
#include "mnf/model.hpp"

namespace mnf::oracle {

namespace detail {

inline std::int32_t narrow_sum(std::int64_t s) {
  if (s < std::numeric_limits<std::int32_t>::min() ||
      s > std::numeric_limits<std::int32_t>::max()) {
    throw AccumulatorOverflow("dense sum " + std::to_string(s) + " exceeds 32 bits");
  }
  return static_cast<std::int32_t>(s);
}

inline std::int8_t floor_at_threshold(std::int8_t r, int threshold) {
  return r > threshold ? r : std::int8_t{0};
}

}  // namespace detail

// Raw convolution sums (plus bias), [out_c][out_h][out_w].
inline std::vector<std::int64_t> dense_conv_sums(const Tensor& in,
                                                 const std::vector<std::int8_t>& w,
                                                 const ConvLayerGeometry& g,
                                                 const std::vector<std::int32_t>& bias = {}) {
  if (in.dims != Shape{g.in_channels, g.in_h, g.in_w}) {
    throw ShapeError("dense_conv: input " + shape_string(in.dims) + " does not match layer");
  }
  std::vector<std::int64_t> out(static_cast<std::size_t>(g.out_channels) * g.out_h * g.out_w);
  std::size_t idx = 0;
  for (int o = 0; o < g.out_channels; ++o) {
    for (int oy = 0; oy < g.out_h; ++oy) {
      for (int ox = 0; ox < g.out_w; ++ox, ++idx) {
        std::int64_t s = bias.empty() ? 0 : bias[o];
        for (int ci = 0; ci < g.in_channels; ++ci) {
          for (int ky = 0; ky < g.kernel_h; ++ky) {
            const int iy = oy * g.stride - g.padding + ky;
            if (iy < 0 || iy >= g.in_h) continue;
            for (int kx = 0; kx < g.kernel_w; ++kx) {
              const int ix = ox * g.stride - g.padding + kx;
              if (ix < 0 || ix >= g.in_w) continue;
              const std::size_t wi =
                  ((static_cast<std::size_t>(o) * g.in_channels + ci) * g.kernel_h + ky) *
                      g.kernel_w + kx;
              s += static_cast<std::int64_t>(w[wi]) * in.at(ci, iy, ix);
            }
          }
        }
        out[idx] = s;
      }
    }
  }
  return out;
}

inline Tensor dense_conv(const Tensor& in, const std::vector<std::int8_t>& w,
                         const ConvLayerGeometry& g, const QuantParams& q, int threshold = 0,
                         const std::vector<std::int32_t>& bias = {}) {
  const auto sums = dense_conv_sums(in, w, g, bias);
  Tensor out(Shape{g.out_channels, g.out_h, g.out_w});
  for (std::size_t i = 0; i < sums.size(); ++i) {
    out.data[i] = detail::floor_at_threshold(requantize(detail::narrow_sum(sums[i]), q), threshold);
  }
  return out;
}

// Matrix-vector product over the flattened input; weights are [in][out].
inline std::vector<std::int64_t> dense_fc_sums(const Tensor& in, const std::vector<std::int8_t>& w,
                                               const FcLayerGeometry& g,
                                               const std::vector<std::int32_t>& bias = {}) {
  if (static_cast<int>(in.size()) != g.in_neurons) {
    throw ShapeError("dense_fc: input has " + std::to_string(in.size()) + " elements, layer takes " +
                     std::to_string(g.in_neurons));
  }
  std::vector<std::int64_t> out(g.out_neurons);
  for (int j = 0; j < g.out_neurons; ++j) {
    std::int64_t s = bias.empty() ? 0 : bias[j];
    for (int i = 0; i < g.in_neurons; ++i) {
      s += static_cast<std::int64_t>(w[static_cast<std::size_t>(i) * g.out_neurons + j]) *
           in.data[i];
    }
    out[j] = s;
  }
  return out;
}

inline Tensor dense_fc(const Tensor& in, const std::vector<std::int8_t>& w,
                       const FcLayerGeometry& g, const QuantParams& q, int threshold = 0,
                       const std::vector<std::int32_t>& bias = {}) {
  const auto sums = dense_fc_sums(in, w, g, bias);
  Tensor out(Shape{g.out_neurons});
  for (int j = 0; j < g.out_neurons; ++j) {
    out.data[j] = detail::floor_at_threshold(requantize(detail::narrow_sum(sums[j]), q), threshold);
  }
  return out;
}

inline Tensor dense_maxpool(const Tensor& in, int window, int stride) {
  if (in.dims.size() != 3 || window < 1 || stride < 1) {
    throw ShapeError("dense_maxpool: needs a [c, h, w] input and positive window/stride");
  }
  const int c = in.dims[0];
  const int h = in.dims[1];
  const int w = in.dims[2];
  if (h < window || w < window || (h - window) % stride || (w - window) % stride) {
    throw ShapeError("dense_maxpool: window does not tile " + shape_string(in.dims));
  }
  const int oh = (h - window) / stride + 1;
  const int ow = (w - window) / stride + 1;
  Tensor out(Shape{c, oh, ow});
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        std::int8_t m = std::numeric_limits<std::int8_t>::min();
        for (int dy = 0; dy < window; ++dy) {
          for (int dx = 0; dx < window; ++dx) {
            m = std::max(m, in.at(ch, y * stride + dy, x * stride + dx));
          }
        }
        out.at(ch, y, x) = m;
      }
    }
  }
  return out;
}

struct DenseResult {
  Tensor output;
  std::vector<Tensor> layer_outputs;  // one per network layer, maxpool included
};

// Runs every network layer separately; a conv's attached pool runs after its
// activation.
inline DenseResult run_network_dense(const NetworkSpec& net, const WeightStore& weights,
                                     const Tensor& input) {
  require_valid(net);
  DenseResult r;
  Tensor cur = input;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    switch (l.kind) {
      case LayerKind::conv:
        cur = dense_conv(cur, weights[i], l.conv, l.quant, l.fire_threshold, l.bias);
        if (l.fuse_maxpool) cur = dense_maxpool(cur, l.fuse_maxpool->window, l.fuse_maxpool->stride);
        break;
      case LayerKind::fc:
        cur = dense_fc(cur, weights[i], l.fc, l.quant, l.fire_threshold, l.bias);
        break;
      case LayerKind::maxpool:
        cur = dense_maxpool(cur, l.pool.window, l.pool.stride);
        break;
    }
    r.layer_outputs.push_back(cur);
  }
  r.output = cur;
  return r;
}

}  // namespace mnf::oracle
