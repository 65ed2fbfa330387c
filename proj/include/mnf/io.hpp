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

// File formats.
//
// Network: UTF-8 JSON
//   {"name": "...", "input": [c, h, w] | [n],
//    "layers": [
//      {"type": "conv", "name"?, "out_channels", "kernel": k | [kh, kw],
//       "stride"?: 1, "padding"?: 0, "in_channels"?, "in_h"?, "in_w"?,
//       "out_h"?, "out_w"?, "threshold"?: 0,
//       "quant"?: {"multiplier": 1, "shift": 0, "zero_point": 0},
//       "bias"?: [...], "pool"?: {"window": 2, "stride": 2}},
//      {"type": "maxpool", "window"?: 2, "stride"?: 2},
//      {"type": "fc", "out_neurons", "in_neurons"?, "threshold"?, "quant"?, "bias"?}]}
//   Omitted input/output dims are derived from the previous layer.
//
// Tensor: "MNFTENSR", u16 version (1), u16 rank, rank x u32 dims, then int8
// data row-major. All integers little-endian.
// Weights: one tensor record per conv/fc layer, in layer order.

#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mnf/error.hpp"
#include "mnf/metrics.hpp"
#include "mnf/model.hpp"

namespace mnf {

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open '" + p.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes to a sibling temporary, then renames over the target.
inline void write_file_atomic(const std::filesystem::path& p, std::string_view data) {
  const auto tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp + "'");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error("short write to '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, p, ec);
  if (ec) throw Error("cannot rename '" + tmp + "' to '" + p.string() + "': " + ec.message());
}

// ---------------------------------------------------------------------------
// Network JSON

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

using json = nlohmann::json;

template <class T>
T get_or(const json& o, const char* key, const std::string& where, T fallback) {
  if (!o.contains(key)) return fallback;
  try {
    return o.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(where + "." + key + ": wrong type");
  }
}

template <class T>
T get_req(const json& o, const char* key, const std::string& where) {
  if (!o.contains(key)) throw FormatError(where + ": missing '" + key + "'");
  return get_or<T>(o, key, where, T{});
}

inline QuantParams parse_quant(const json& o, const std::string& where) {
  QuantParams q;
  if (!o.contains("quant")) return q;
  const json& j = o.at("quant");
  if (!j.is_object()) throw FormatError(where + ".quant: expected an object");
  q.scale_multiplier = get_or<std::int64_t>(j, "multiplier", where + ".quant", 1);
  q.shift = get_or<int>(j, "shift", where + ".quant", 0);
  q.zero_point = get_or<int>(j, "zero_point", where + ".quant", 0);
  return q;
}

}  // namespace detail

inline NetworkSpec parse_network(const std::string& text) {
  using detail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte ? e.byte - 1 : 0);
    throw FormatError(std::string("network JSON: ") + e.what(), line, col, e.byte);
  }
  if (!j.is_object()) throw FormatError("network: expected a JSON object", 1, 1);
  NetworkSpec net;
  net.name = detail::get_or<std::string>(j, "name", "network", "network");
  net.input = detail::get_req<std::vector<int>>(j, "input", "network");
  if (!j.contains("layers") || !j.at("layers").is_array()) {
    throw FormatError("network: missing 'layers' array");
  }
  Shape cur = net.input;
  std::size_t idx = 0;
  for (const json& o : j.at("layers")) {
    const std::string where = "layers[" + std::to_string(idx) + "]";
    if (!o.is_object()) throw FormatError(where + ": expected an object");
    const auto type = detail::get_req<std::string>(o, "type", where);
    LayerSpec l;
    l.name = detail::get_or<std::string>(o, "name", where, type + std::to_string(idx));
    l.fire_threshold = detail::get_or<int>(o, "threshold", where, 0);
    l.quant = detail::parse_quant(o, where);
    l.bias = detail::get_or<std::vector<std::int32_t>>(o, "bias", where, {});
    if (type == "conv") {
      l.kind = LayerKind::conv;
      auto& g = l.conv;
      const int c0 = cur.size() == 3 ? cur[0] : 0;
      const int h0 = cur.size() == 3 ? cur[1] : 0;
      const int w0 = cur.size() == 3 ? cur[2] : 0;
      g.in_channels = detail::get_or<int>(o, "in_channels", where, c0);
      g.in_h = detail::get_or<int>(o, "in_h", where, h0);
      g.in_w = detail::get_or<int>(o, "in_w", where, w0);
      g.out_channels = detail::get_req<int>(o, "out_channels", where);
      if (!o.contains("kernel")) throw FormatError(where + ": missing 'kernel'");
      if (o.at("kernel").is_array()) {
        const auto k = detail::get_req<std::vector<int>>(o, "kernel", where);
        if (k.size() != 2) throw FormatError(where + ".kernel: expected k or [kh, kw]");
        g.kernel_h = k[0];
        g.kernel_w = k[1];
      } else {
        g.kernel_h = g.kernel_w = detail::get_req<int>(o, "kernel", where);
      }
      g.stride = detail::get_or<int>(o, "stride", where, 1);
      g.padding = detail::get_or<int>(o, "padding", where, 0);
      g.out_h = detail::get_or<int>(o, "out_h", where,
                                    conv_out_extent(g.in_h, g.kernel_h, g.stride, g.padding));
      g.out_w = detail::get_or<int>(o, "out_w", where,
                                    conv_out_extent(g.in_w, g.kernel_w, g.stride, g.padding));
      if (o.contains("pool")) {
        const json& p = o.at("pool");
        if (!p.is_object()) throw FormatError(where + ".pool: expected an object");
        l.fuse_maxpool = PoolSpec{detail::get_or<int>(p, "window", where + ".pool", 2),
                                  detail::get_or<int>(p, "stride", where + ".pool", 2)};
      }
    } else if (type == "fc") {
      l.kind = LayerKind::fc;
      l.fc.in_neurons =
          detail::get_or<int>(o, "in_neurons", where, static_cast<int>(shape_size(cur)));
      l.fc.out_neurons = detail::get_req<int>(o, "out_neurons", where);
    } else if (type == "maxpool") {
      l.kind = LayerKind::maxpool;
      l.pool = PoolSpec{detail::get_or<int>(o, "window", where, 2),
                        detail::get_or<int>(o, "stride", where, 2)};
    } else {
      throw FormatError(where + ".type: unknown layer type '" + type + "'");
    }
    cur = layer_output_shape(l, cur);
    net.layers.push_back(std::move(l));
    ++idx;
  }
  return net;
}

// Canonical form: every field explicit, fixed key order.
inline nlohmann::ordered_json network_to_json(const NetworkSpec& net) {
  nlohmann::ordered_json j;
  j["name"] = net.name;
  j["input"] = net.input;
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& l : net.layers) {
    nlohmann::ordered_json o;
    o["type"] = to_string(l.kind);
    o["name"] = l.name;
    if (l.kind == LayerKind::maxpool) {
      o["window"] = l.pool.window;
      o["stride"] = l.pool.stride;
      j["layers"].push_back(o);
      continue;
    }
    if (l.kind == LayerKind::conv) {
      const auto& g = l.conv;
      o["in_channels"] = g.in_channels;
      o["in_h"] = g.in_h;
      o["in_w"] = g.in_w;
      o["out_channels"] = g.out_channels;
      if (g.kernel_h == g.kernel_w) {
        o["kernel"] = g.kernel_h;
      } else {
        o["kernel"] = {g.kernel_h, g.kernel_w};
      }
      o["stride"] = g.stride;
      o["padding"] = g.padding;
      o["out_h"] = g.out_h;
      o["out_w"] = g.out_w;
      if (l.fuse_maxpool) {
        o["pool"] = {{"window", l.fuse_maxpool->window}, {"stride", l.fuse_maxpool->stride}};
      }
    } else {
      o["in_neurons"] = l.fc.in_neurons;
      o["out_neurons"] = l.fc.out_neurons;
    }
    o["threshold"] = l.fire_threshold;
    o["quant"] = {{"multiplier", l.quant.scale_multiplier},
                  {"shift", l.quant.shift},
                  {"zero_point", l.quant.zero_point}};
    if (!l.bias.empty()) o["bias"] = l.bias;
    j["layers"].push_back(o);
  }
  return j;
}

inline std::string emit_network(const NetworkSpec& net) { return network_to_json(net).dump(2) + "\n"; }

inline NetworkSpec load_network(const std::filesystem::path& p) { return parse_network(read_file(p)); }

// ---------------------------------------------------------------------------
// Binary tensors

inline constexpr std::array<char, 8> kTensorMagic{'M', 'N', 'F', 'T', 'E', 'N', 'S', 'R'};
inline constexpr std::uint16_t kTensorVersion = 1;

namespace detail {

inline void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint64_t le(int bytes, const char* what) {
    need(bytes, what);
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += bytes;
    return v;
  }
  std::string_view bytes(std::size_t n, const char* what) {
    need(n, what);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n, const char* what) {
    if (data_.size() - pos_ < n) {
      throw FormatError(std::string("truncated tensor: expected ") + what, 0, 0, pos_);
    }
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

inline Tensor read_tensor_record(ByteReader& r) {
  const std::size_t start = r.offset();
  const auto magic = r.bytes(8, "magic");
  if (!std::equal(magic.begin(), magic.end(), kTensorMagic.begin())) {
    throw FormatError("bad tensor magic (expected MNFTENSR)", 0, 0, start);
  }
  const auto version = r.le(2, "version");
  if (version != kTensorVersion) {
    throw FormatError("unsupported tensor version " + std::to_string(version), 0, 0, start + 8);
  }
  const auto rank = r.le(2, "rank");
  if (rank == 0 || rank > 8) {
    throw FormatError("tensor rank " + std::to_string(rank) + " out of range", 0, 0, start + 10);
  }
  Shape dims;
  std::uint64_t count = 1;
  for (std::uint64_t i = 0; i < rank; ++i) {
    const auto d = r.le(4, "dimension");
    if (d == 0 || d > (1u << 30) || count * d > (std::uint64_t{1} << 32)) {
      throw FormatError("tensor dimension " + std::to_string(d) + " out of range", 0, 0,
                        r.offset() - 4);
    }
    count *= d;
    dims.push_back(static_cast<int>(d));
  }
  const auto data = r.bytes(count, "tensor data");
  std::vector<std::int8_t> values(data.size());
  std::memcpy(values.data(), data.data(), data.size());
  return Tensor(std::move(dims), std::move(values));
}

}  // namespace detail

inline std::string encode_tensor(const Tensor& t) {
  std::string out(kTensorMagic.begin(), kTensorMagic.end());
  detail::put_le(out, kTensorVersion, 2);
  detail::put_le(out, t.dims.size(), 2);
  for (int d : t.dims) detail::put_le(out, static_cast<std::uint32_t>(d), 4);
  out.append(reinterpret_cast<const char*>(t.data.data()), t.data.size());
  return out;
}

inline Tensor decode_tensor(std::string_view bytes) {
  detail::ByteReader r(bytes);
  Tensor t = detail::read_tensor_record(r);
  if (!r.at_end()) throw FormatError("trailing bytes after tensor", 0, 0, r.offset());
  return t;
}

inline std::string encode_weights(const NetworkSpec& net, const WeightStore& w) {
  std::string out;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (net.layers[i].kind == LayerKind::maxpool) continue;
    out += encode_tensor(Tensor(layer_weight_dims(net.layers[i]), w[i]));
  }
  return out;
}

inline WeightStore decode_weights(std::string_view bytes, const NetworkSpec& net) {
  detail::ByteReader r(bytes);
  WeightStore w;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    if (l.kind == LayerKind::maxpool) {
      w.layers.emplace_back();
      continue;
    }
    if (r.at_end()) {
      throw FormatError("weights file ends before layer " + std::to_string(i), 0, 0, r.offset());
    }
    const std::size_t at = r.offset();
    Tensor t = detail::read_tensor_record(r);
    if (t.dims != layer_weight_dims(l)) {
      throw FormatError("layer " + std::to_string(i) + " weights have dims " +
                            shape_string(t.dims) + ", expected " +
                            shape_string(layer_weight_dims(l)),
                        0, 0, at);
    }
    w.layers.push_back(std::move(t.data));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after the last layer's weights", 0, 0, r.offset());
  return w;
}

inline Tensor load_tensor(const std::filesystem::path& p) { return decode_tensor(read_file(p)); }
inline WeightStore load_weights(const std::filesystem::path& p, const NetworkSpec& net) {
  return decode_weights(read_file(p), net);
}

// ---------------------------------------------------------------------------
// Config overrides (`--hw.<field>=<value>`, `--energy.<field>=<value>`)

namespace detail {

inline std::int64_t parse_int(std::string_view key, std::string_view v) {
  std::int64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ValidationError(std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
  }
  return out;
}

inline double parse_real(std::string_view key, std::string_view v) {
  double out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ValidationError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

inline bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw ValidationError(std::string(key) + ": expected true or false");
}

}  // namespace detail

// Returns false for an unknown field; throws ValidationError for a bad value.
inline bool apply_hw_override(HardwareConfig& hw, std::string_view key, std::string_view v) {
  auto as_int = [&] { return static_cast<int>(detail::parse_int(key, v)); };
  if (key == "num_pes") hw.num_pes = as_int();
  else if (key == "mac_modules") hw.mac_modules = as_int();
  else if (key == "multipliers_per_mac") hw.multipliers_per_mac = as_int();
  else if (key == "weight_sram_bytes") hw.weight_sram_bytes = detail::parse_int(key, v);
  else if (key == "acc_sram_bytes") hw.acc_sram_bytes = detail::parse_int(key, v);
  else if (key == "fifo_depth") hw.fifo_depth = as_int();
  else if (key == "frequency_mhz") hw.frequency_mhz = detail::parse_real(key, v);
  else if (key == "accumulator_bits") hw.accumulator_bits = as_int();
  else if (key == "hop_latency") hw.hop_latency = as_int();
  else if (key == "acc_forwarding") hw.acc_forwarding = detail::parse_bool(key, v);
  else if (key == "packing") {
    if (v == "bank_aware") hw.packing = LanePacking::bank_aware;
    else if (v == "linear") hw.packing = LanePacking::linear;
    else throw ValidationError("packing: expected bank_aware or linear");
  } else if (key == "bank_mapping") {
    if (v == "interleave_2d") hw.bank_mapping = BankMapping::interleave_2d;
    else if (v == "linear") hw.bank_mapping = BankMapping::linear;
    else throw ValidationError("bank_mapping: expected interleave_2d or linear");
  } else {
    return false;
  }
  return true;
}

inline bool apply_energy_override(EnergyModel& m, std::string_view key, std::string_view v) {
  if (key == "weight_vector_read_pj") m.weight_vector_read_pj = detail::parse_real(key, v);
  else if (key == "sram_32b_access_pj") m.sram_32b_access_pj = detail::parse_real(key, v);
  else if (key == "register_8b_pj") m.register_8b_pj = detail::parse_real(key, v);
  else if (key == "registers_per_lane_op") m.registers_per_lane_op = detail::parse_real(key, v);
  else if (key == "dram_32b_pj") m.dram_32b_pj = detail::parse_real(key, v);
  else if (key == "include_dram") m.include_dram = detail::parse_bool(key, v);
  else if (key == "active_cycle_pj") m.active_cycle_pj = detail::parse_real(key, v);
  else if (key == "idle_cycle_pj") m.idle_cycle_pj = detail::parse_real(key, v);
  else if (key == "noc_hop_pj") m.noc_hop_pj = detail::parse_real(key, v);
  else return false;
  return true;
}

// Stable text form of everything that influences a simulation result.
inline std::string config_fingerprint(const NetworkSpec& net, const HardwareConfig& hw,
                                      const EnergyModel& m) {
  std::ostringstream os;
  os << network_to_json(net).dump() << "|hw:" << hw.num_pes << ',' << hw.mac_modules << ','
     << hw.multipliers_per_mac << ',' << hw.weight_sram_bytes << ',' << hw.acc_sram_bytes << ','
     << hw.fifo_depth << ',' << detail::format_double(hw.frequency_mhz) << ','
     << hw.accumulator_bits << ',' << hw.hop_latency << ',' << to_string(hw.packing) << ','
     << to_string(hw.bank_mapping) << ',' << hw.acc_forwarding
     << "|energy:" << detail::format_double(m.weight_vector_read_pj)
     << ',' << detail::format_double(m.sram_32b_access_pj) << ','
     << detail::format_double(m.register_8b_pj) << ','
     << detail::format_double(m.registers_per_lane_op) << ','
     << detail::format_double(m.dram_32b_pj) << ',' << m.include_dram << ','
     << detail::format_double(m.active_cycle_pj) << ',' << detail::format_double(m.idle_cycle_pj)
     << ',' << detail::format_double(m.noc_hop_pj);
  return os.str();
}

inline std::string config_hash(const NetworkSpec& net, const HardwareConfig& hw,
                               const EnergyModel& m) {
  return hex64(fnv1a64(config_fingerprint(net, hw, m)));
}

}  // namespace mnf
