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

// Domain vocabulary shared by every module: quantization, layer geometry,
// network descriptions, int8 tensors, weight storage and the hardware config.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mnf/error.hpp"

namespace mnf {

using Shape = std::vector<int>;

inline std::int64_t shape_size(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::int64_t{1},
                         std::multiplies<>());
}

inline std::string shape_string(const Shape& s) {
  std::ostringstream os;
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  return os.str();
}

inline std::int8_t saturate_int8(std::int64_t v) {
  return static_cast<std::int8_t>(std::clamp<std::int64_t>(v, -128, 127));
}

// Fixed-point affine requantization: real multiplier
// M = scale_multiplier * 2^-shift, M in (0, 1].
struct QuantParams {
  std::int64_t scale_multiplier = 1;
  int shift = 0;
  int zero_point = 0;

  double real_multiplier() const {
    return std::ldexp(static_cast<double>(scale_multiplier), -shift);
  }

  friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

// clamp(round_half_away_from_zero(acc * M) + zero_point, -128, 127).
// Requires shift in [0, 31] and scale_multiplier <= 2^31.
inline std::int8_t requantize(std::int32_t acc, const QuantParams& q) {
  const std::int64_t prod = static_cast<std::int64_t>(acc) * q.scale_multiplier;
  std::int64_t scaled = prod;
  if (q.shift > 0) {
    const std::int64_t half = std::int64_t{1} << (q.shift - 1);
    scaled = prod >= 0 ? (prod + half) >> q.shift : -((-prod + half) >> q.shift);
  }
  return saturate_int8(scaled + q.zero_point);
}

// ---------------------------------------------------------------------------
// Layer geometry

inline int conv_out_extent(int in, int kernel, int stride, int padding) {
  const int span = in + 2 * padding - kernel;
  if (span < 0 || stride <= 0) return 0;
  return span / stride + 1;
}

struct ConvLayerGeometry {
  int in_channels = 1;
  int out_channels = 1;
  int in_h = 1;
  int in_w = 1;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  int padding = 0;
  int out_h = 1;
  int out_w = 1;

  int kernel() const { return kernel_h; }
  int nc_filter() const { return kernel_w; }
  int nc_output() const { return out_w; }
  int filter_size() const { return kernel_h * kernel_w; }
  int plane() const { return out_h * out_w; }

  // Square-kernel geometry with the output extent derived from the shape law.
  static ConvLayerGeometry make(int in_channels, int out_channels, int in_h,
                                int in_w, int kernel, int stride = 1,
                                int padding = 0) {
    ConvLayerGeometry g;
    g.in_channels = in_channels;
    g.out_channels = out_channels;
    g.in_h = in_h;
    g.in_w = in_w;
    g.kernel_h = kernel;
    g.kernel_w = kernel;
    g.stride = stride;
    g.padding = padding;
    g.out_h = conv_out_extent(in_h, kernel, stride, padding);
    g.out_w = conv_out_extent(in_w, kernel, stride, padding);
    return g;
  }

  friend bool operator==(const ConvLayerGeometry&,
                         const ConvLayerGeometry&) = default;
};

struct FcLayerGeometry {
  int in_neurons = 1;
  int out_neurons = 1;

  friend bool operator==(const FcLayerGeometry&,
                         const FcLayerGeometry&) = default;
};

struct PoolSpec {
  int window = 2;
  int stride = 2;

  int out_extent(int in) const {
    return in < window ? 0 : (in - window) / stride + 1;
  }
  bool divides(int in) const {
    return in >= window && stride > 0 && (in - window) % stride == 0;
  }

  friend bool operator==(const PoolSpec&, const PoolSpec&) = default;
};

enum class LayerKind { conv, fc, maxpool };

inline const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::conv:
      return "conv";
    case LayerKind::fc:
      return "fc";
    case LayerKind::maxpool:
      return "maxpool";
  }
  return "?";
}

struct LayerSpec {
  LayerKind kind = LayerKind::conv;
  std::string name;
  ConvLayerGeometry conv;  // kind == conv
  FcLayerGeometry fc;      // kind == fc
  PoolSpec pool;           // kind == maxpool
  std::optional<PoolSpec> fuse_maxpool;  // conv only
  int fire_threshold = 0;
  QuantParams quant;
  std::vector<std::int32_t> bias;  // empty, or one per output channel/neuron

  int output_channels() const {
    return kind == LayerKind::fc ? fc.out_neurons : conv.out_channels;
  }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct NetworkSpec {
  std::string name;
  Shape input;  // [c, h, w] or [n]
  std::vector<LayerSpec> layers;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Output shape of a layer given its input shape (pre-validation: uses the
// declared geometry for conv/fc and the actual input for maxpool).
inline Shape layer_output_shape(const LayerSpec& l, const Shape& in) {
  switch (l.kind) {
    case LayerKind::conv: {
      int h = l.conv.out_h;
      int w = l.conv.out_w;
      if (l.fuse_maxpool) {
        h = l.fuse_maxpool->out_extent(h);
        w = l.fuse_maxpool->out_extent(w);
      }
      return {l.conv.out_channels, h, w};
    }
    case LayerKind::fc:
      return {l.fc.out_neurons};
    case LayerKind::maxpool:
      if (in.size() != 3) return {};
      return {in[0], l.pool.out_extent(in[1]), l.pool.out_extent(in[2])};
  }
  return {};
}

// Conv/FC layers with any pooling folded in: the unit the accelerator
// executes (the activation module performs max-pooling).
struct ExecutionStage {
  std::size_t layer = 0;
  std::optional<PoolSpec> pool;
  std::size_t last_layer = 0;  // index of the last network layer covered
};

inline std::vector<ExecutionStage> lower_network(const NetworkSpec& net) {
  std::vector<ExecutionStage> stages;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    if (l.kind == LayerKind::maxpool) {
      if (stages.empty() || net.layers[stages.back().layer].kind != LayerKind::conv ||
          stages.back().pool) {
        throw ValidationError("layer " + std::to_string(i) +
                              ": maxpool must directly follow a conv layer");
      }
      stages.back().pool = l.pool;
      stages.back().last_layer = i;
      continue;
    }
    stages.push_back({i, l.kind == LayerKind::conv ? l.fuse_maxpool : std::nullopt, i});
  }
  return stages;
}

// ---------------------------------------------------------------------------
// Tensors and weights

struct Tensor {
  Shape dims;
  std::vector<std::int8_t> data;

  Tensor() = default;
  explicit Tensor(Shape d, std::int8_t fill = 0)
      : dims(std::move(d)), data(static_cast<std::size_t>(shape_size(dims)), fill) {}
  Tensor(Shape d, std::vector<std::int8_t> values)
      : dims(std::move(d)), data(std::move(values)) {
    if (static_cast<std::int64_t>(data.size()) != shape_size(dims)) {
      throw ShapeError("tensor data length " + std::to_string(data.size()) +
                       " does not match dims " + shape_string(dims));
    }
  }

  std::size_t size() const { return data.size(); }
  int channels() const { return dims.size() == 3 ? dims[0] : 1; }
  int height() const { return dims.size() == 3 ? dims[1] : 1; }
  int width() const { return dims.size() == 3 ? dims[2] : static_cast<int>(data.size()); }

  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * dims[1] + y) * dims[2] + x;
  }
  std::int8_t at(int c, int y, int x) const { return data[index(c, y, x)]; }
  std::int8_t& at(int c, int y, int x) { return data[index(c, y, x)]; }

  std::size_t nonzero() const {
    return static_cast<std::size_t>(
        std::count_if(data.begin(), data.end(), [](std::int8_t v) { return v != 0; }));
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

// Conv: [out_channel][in_channel][ky][kx]; the in-filter address of (ky, kx)
// is ky * nc_filter + kx. FC: [in_neuron][out_neuron].
inline std::size_t conv_weight_index(const ConvLayerGeometry& g, int o, int ci,
                                     int filter_addr) {
  return (static_cast<std::size_t>(o) * g.in_channels + ci) * g.filter_size() +
         filter_addr;
}
inline std::size_t conv_weight_index(const ConvLayerGeometry& g, int o, int ci,
                                     int ky, int kx) {
  return conv_weight_index(g, o, ci, ky * g.nc_filter() + kx);
}
inline std::size_t fc_weight_index(const FcLayerGeometry& g, int i, int j) {
  return static_cast<std::size_t>(i) * g.out_neurons + j;
}

inline std::size_t layer_weight_count(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::conv:
      return static_cast<std::size_t>(l.conv.out_channels) * l.conv.in_channels *
             l.conv.filter_size();
    case LayerKind::fc:
      return static_cast<std::size_t>(l.fc.in_neurons) * l.fc.out_neurons;
    case LayerKind::maxpool:
      return 0;
  }
  return 0;
}

inline Shape layer_weight_dims(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::conv:
      return {l.conv.out_channels, l.conv.in_channels, l.conv.kernel_h, l.conv.kernel_w};
    case LayerKind::fc:
      return {l.fc.in_neurons, l.fc.out_neurons};
    case LayerKind::maxpool:
      return {};
  }
  return {};
}

// One int8 array per network layer (empty for maxpool layers).
struct WeightStore {
  std::vector<std::vector<std::int8_t>> layers;

  const std::vector<std::int8_t>& operator[](std::size_t i) const { return layers.at(i); }
  std::vector<std::int8_t>& operator[](std::size_t i) { return layers.at(i); }

  friend bool operator==(const WeightStore&, const WeightStore&) = default;
};

inline WeightStore zero_weights(const NetworkSpec& net) {
  WeightStore w;
  for (const auto& l : net.layers) w.layers.emplace_back(layer_weight_count(l), 0);
  return w;
}

// ---------------------------------------------------------------------------
// Hardware

// How the load module cuts an event's lane items into weight-vector reads.
enum class LanePacking {
  bank_aware,  // close a vector before any bank exceeds its multipliers
  linear,      // plain groups of multipliers_per_pe items
};

// Which accumulated-SRAM bank (MAC module) owns a neuron address.
enum class BankMapping {
  interleave_2d,  // (oy mod s)*s + (ox mod s), s = sqrt(mac_modules)
  linear,         // neuron_addr mod mac_modules
};

inline const char* to_string(LanePacking p) {
  return p == LanePacking::bank_aware ? "bank_aware" : "linear";
}
inline const char* to_string(BankMapping b) {
  return b == BankMapping::interleave_2d ? "interleave_2d" : "linear";
}

// Defaults are the reference chip: 11 PEs, 9 MAC modules x 3 multipliers,
// 691.2 KB weight SRAM, 67.5 KB accumulated SRAM, 200 MHz, 8-bit data and
// 32-bit partial sums.
struct HardwareConfig {
  int num_pes = 11;
  int mac_modules = 9;
  int multipliers_per_mac = 3;
  std::int64_t weight_sram_bytes = 691200;
  std::int64_t acc_sram_bytes = 67500;
  int fifo_depth = 4;
  double frequency_mhz = 200.0;
  int accumulator_bits = 32;
  int hop_latency = 1;
  LanePacking packing = LanePacking::bank_aware;
  BankMapping bank_mapping = BankMapping::interleave_2d;
  bool acc_forwarding = true;  // false: a dependent add waits for the write

  int multipliers_per_pe() const { return mac_modules * multipliers_per_mac; }

  friend bool operator==(const HardwareConfig&, const HardwareConfig&) = default;
};

inline constexpr int kMaxMultipliersPerMac = 8;

inline std::vector<std::string> validate_hardware(const HardwareConfig& hw) {
  std::vector<std::string> v;
  if (hw.num_pes < 1) v.push_back("num_pes must be >= 1");
  if (hw.mac_modules < 1) v.push_back("mac_modules must be >= 1");
  if (hw.multipliers_per_mac < 1 || hw.multipliers_per_mac > kMaxMultipliersPerMac)
    v.push_back("multipliers_per_mac must be in [1, " +
                std::to_string(kMaxMultipliersPerMac) + "]");
  if (hw.weight_sram_bytes < 1) v.push_back("weight_sram_bytes must be >= 1");
  if (hw.acc_sram_bytes < 4) v.push_back("acc_sram_bytes must hold one partial sum");
  if (hw.fifo_depth < 1) v.push_back("fifo_depth must be >= 1");
  if (!(hw.frequency_mhz > 0)) v.push_back("frequency_mhz must be > 0");
  if (hw.accumulator_bits != 32) v.push_back("accumulator_bits must be 32");
  if (hw.hop_latency < 1) v.push_back("hop_latency must be >= 1");
  return v;
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  int layer = -1;  // -1: network-level
  std::string rule;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

inline std::string to_string(const Violation& v) {
  return (v.layer < 0 ? std::string("network") : "layer " + std::to_string(v.layer)) +
         " [" + v.rule + "] " + v.message;
}

namespace detail {

inline void check_quant(std::vector<Violation>& out, int idx, const QuantParams& q) {
  if (q.shift < 0 || q.shift > 31) {
    out.push_back({idx, "quant", "shift must be in [0, 31]"});
    return;
  }
  if (q.scale_multiplier <= 0 || q.scale_multiplier > (std::int64_t{1} << q.shift)) {
    out.push_back({idx, "quant", "scale_multiplier * 2^-shift must be in (0, 1]"});
  }
  if (q.zero_point < -128 || q.zero_point > 127) {
    out.push_back({idx, "quant", "zero_point must be in [-128, 127]"});
  }
}

}  // namespace detail

// Checks every structural rule. Returns one entry per failed rule; empty means
// the network is executable.
inline std::vector<Violation> validate_network(const NetworkSpec& net) {
  std::vector<Violation> out;
  if (net.input.empty() || net.input.size() == 2 || net.input.size() > 3 ||
      std::any_of(net.input.begin(), net.input.end(), [](int d) { return d < 1; })) {
    out.push_back({-1, "input", "input shape must be [c, h, w] or [n] with positive dims"});
    return out;
  }
  if (net.layers.empty()) out.push_back({-1, "layers", "network has no layers"});

  Shape cur = net.input;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const int idx = static_cast<int>(i);
    const LayerSpec& l = net.layers[i];
    if (l.fire_threshold < 0 || l.fire_threshold > 127) {
      out.push_back({idx, "threshold", "fire_threshold must be in [0, 127]"});
    }
    switch (l.kind) {
      case LayerKind::conv: {
        const auto& g = l.conv;
        detail::check_quant(out, idx, l.quant);
        if (g.in_channels < 1 || g.out_channels < 1 || g.in_h < 1 || g.in_w < 1 ||
            g.kernel_h < 1 || g.kernel_w < 1 || g.stride < 1 || g.padding < 0) {
          out.push_back({idx, "positive_dims", "conv dims must be positive"});
          break;
        }
        if (g.kernel_h != g.kernel_w) {
          out.push_back({idx, "square_filter", "rectangular filters are not supported"});
        }
        const int eh = conv_out_extent(g.in_h, g.kernel_h, g.stride, g.padding);
        const int ew = conv_out_extent(g.in_w, g.kernel_w, g.stride, g.padding);
        if (eh != g.out_h || ew != g.out_w || eh < 1 || ew < 1) {
          out.push_back({idx, "shape",
                         "declared output " + std::to_string(g.out_h) + "x" +
                             std::to_string(g.out_w) + " but shape law gives " +
                             std::to_string(eh) + "x" + std::to_string(ew)});
        }
        const Shape want{g.in_channels, g.in_h, g.in_w};
        if (cur != want) {
          out.push_back({idx, "chain", "input " + shape_string(want) +
                                           " does not match previous output " +
                                           shape_string(cur)});
        }
        if (l.fuse_maxpool) {
          const auto& p = *l.fuse_maxpool;
          if (p.window < 1 || p.stride < 1 || !p.divides(g.out_h) || !p.divides(g.out_w)) {
            out.push_back({idx, "pool_divisible", "pool window/stride must tile the output"});
          }
        }
        if (!l.bias.empty() && static_cast<int>(l.bias.size()) != g.out_channels) {
          out.push_back({idx, "bias", "bias length must equal out_channels"});
        }
        break;
      }
      case LayerKind::fc: {
        const auto& g = l.fc;
        detail::check_quant(out, idx, l.quant);
        if (g.in_neurons < 1 || g.out_neurons < 1) {
          out.push_back({idx, "positive_dims", "fc dims must be >= 1"});
          break;
        }
        if (shape_size(cur) != g.in_neurons) {
          out.push_back({idx, "chain", "in_neurons " + std::to_string(g.in_neurons) +
                                           " does not match previous output " +
                                           shape_string(cur)});
        }
        if (!l.bias.empty() && static_cast<int>(l.bias.size()) != g.out_neurons) {
          out.push_back({idx, "bias", "bias length must equal out_neurons"});
        }
        break;
      }
      case LayerKind::maxpool: {
        const bool after_conv = i > 0 && net.layers[i - 1].kind == LayerKind::conv &&
                                !net.layers[i - 1].fuse_maxpool;
        if (!after_conv) {
          out.push_back({idx, "pool_placement",
                         "maxpool must directly follow a conv layer without pooling"});
        }
        if (cur.size() != 3) {
          out.push_back({idx, "chain", "maxpool needs a [c, h, w] input"});
          break;
        }
        if (l.pool.window < 1 || l.pool.stride < 1 || !l.pool.divides(cur[1]) ||
            !l.pool.divides(cur[2])) {
          out.push_back({idx, "pool_divisible", "pool window/stride must tile the input"});
        }
        break;
      }
    }
    cur = layer_output_shape(l, cur);
  }
  return out;
}

inline void require_valid(const NetworkSpec& net) {
  const auto v = validate_network(net);
  if (v.empty()) return;
  std::string msg = "invalid network:";
  for (const auto& e : v) msg += "\n  " + to_string(e);
  throw ValidationError(msg);
}

inline Shape network_output_shape(const NetworkSpec& net) {
  Shape cur = net.input;
  for (const auto& l : net.layers) cur = layer_output_shape(l, cur);
  return cur;
}

}  // namespace mnf
