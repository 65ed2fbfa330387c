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

// Access-energy model, the simulation report and its serializations.
//
// Report formats:
//   kv    one `key=value` per line, layers as `layer.<i>.<field>`
//   json  one object, layers as an array
//   csv   `# mnf-report v1 ...` header line, column header, one row per
//         layer, then the `total` row
//   text  aligned table for people (not parsed back)
// Doubles are written in shortest round-trip form, so parse(emit(r)) == r.

#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "mnf/error.hpp"

namespace mnf {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportVersion = 1;

// Defaults: 216-bit weight-vector read, 32-bit accumulated-SRAM access and
// 8-bit register access (three registers per lane op).
struct EnergyModel {
  double weight_vector_read_pj = 12.35;
  double sram_32b_access_pj = 3.87;
  double register_8b_pj = 0.018;
  double registers_per_lane_op = 3;
  double dram_32b_pj = 256;
  bool include_dram = false;  // one-time weight load from DRAM
  double active_cycle_pj = 0;
  double idle_cycle_pj = 0;
  double noc_hop_pj = 0;

  friend bool operator==(const EnergyModel&, const EnergyModel&) = default;
};

inline std::vector<std::string> validate_energy(const EnergyModel& m) {
  std::vector<std::string> v;
  const std::pair<const char*, double> fields[] = {
      {"weight_vector_read_pj", m.weight_vector_read_pj},
      {"sram_32b_access_pj", m.sram_32b_access_pj},
      {"register_8b_pj", m.register_8b_pj},
      {"registers_per_lane_op", m.registers_per_lane_op},
      {"dram_32b_pj", m.dram_32b_pj},
      {"active_cycle_pj", m.active_cycle_pj},
      {"idle_cycle_pj", m.idle_cycle_pj},
      {"noc_hop_pj", m.noc_hop_pj},
  };
  for (const auto& [name, value] : fields) {
    if (!(value >= 0)) v.push_back(std::string(name) + " must be >= 0");
  }
  return v;
}

struct EnergyCounters {
  std::uint64_t weight_reads = 0;
  std::uint64_t acc_reads = 0;
  std::uint64_t acc_writes = 0;
  std::uint64_t lane_ops = 0;
  std::uint64_t dram_words = 0;
  std::uint64_t active_cycles = 0;
  std::uint64_t idle_cycles = 0;
  std::uint64_t flit_hops = 0;
};

struct EnergyBreakdown {
  double weight_pj = 0;
  double acc_pj = 0;
  double register_pj = 0;
  double dram_pj = 0;
  double static_pj = 0;
  double noc_pj = 0;
  double total_pj = 0;

  friend bool operator==(const EnergyBreakdown&, const EnergyBreakdown&) = default;
};

inline EnergyBreakdown energy(const EnergyCounters& c, const EnergyModel& m) {
  EnergyBreakdown e;
  e.weight_pj = static_cast<double>(c.weight_reads) * m.weight_vector_read_pj;
  e.acc_pj = static_cast<double>(c.acc_reads + c.acc_writes) * m.sram_32b_access_pj;
  e.register_pj =
      static_cast<double>(c.lane_ops) * m.registers_per_lane_op * m.register_8b_pj;
  e.dram_pj = m.include_dram ? static_cast<double>(c.dram_words) * m.dram_32b_pj : 0.0;
  e.static_pj = static_cast<double>(c.active_cycles) * m.active_cycle_pj +
                static_cast<double>(c.idle_cycles) * m.idle_cycle_pj;
  e.noc_pj = static_cast<double>(c.flit_hops) * m.noc_hop_pj;
  e.total_pj = e.weight_pj + e.acc_pj + e.register_pj + e.dram_pj + e.static_pj + e.noc_pj;
  return e;
}

// ---------------------------------------------------------------------------
// Report

struct LayerReport {
  std::string name;
  std::string kind;
  std::uint64_t layer = 0;  // network layer index
  std::uint64_t pes = 0;
  std::uint64_t min_pes = 0;
  std::uint64_t cycles = 0;
  std::uint64_t events = 0;
  std::uint64_t nonzero = 0;
  std::uint64_t uninfluential = 0;
  std::uint64_t macs = 0;
  std::uint64_t fired = 0;
  std::uint64_t weight_reads = 0;
  std::uint64_t acc_reads = 0;
  std::uint64_t acc_writes = 0;
  std::uint64_t busy_multiplier_cycles = 0;
  std::uint64_t active_cycles = 0;  // summed over the layer's PEs
  std::uint64_t pe_cycles = 0;      // pes x cycles
  std::uint64_t stall_fifo_full = 0;
  std::uint64_t stall_bank_conflict = 0;
  std::uint64_t stall_raw_hazard = 0;
  std::uint64_t stall_load_full = 0;
  std::uint64_t stall_backpressure = 0;
  std::uint64_t stall_input_starved = 0;
  std::uint64_t noc_flits = 0;
  std::uint64_t noc_flit_hops = 0;
  double energy_weight_pj = 0;
  double energy_acc_pj = 0;
  double energy_register_pj = 0;
  double energy_dram_pj = 0;
  double energy_static_pj = 0;
  double energy_noc_pj = 0;
  double energy_pj = 0;
  double utilization_active = 0;
  double utilization_total = 0;

  void set_energy(const EnergyBreakdown& e) {
    energy_weight_pj = e.weight_pj;
    energy_acc_pj = e.acc_pj;
    energy_register_pj = e.register_pj;
    energy_dram_pj = e.dram_pj;
    energy_static_pj = e.static_pj;
    energy_noc_pj = e.noc_pj;
    energy_pj = e.total_pj;
  }

  friend bool operator==(const LayerReport&, const LayerReport&) = default;
};

// Visits every serialized field in a fixed order.
template <class R, class F>
void for_each_field(R& r, F&& f) {
  f("name", r.name);
  f("kind", r.kind);
  f("layer", r.layer);
  f("pes", r.pes);
  f("min_pes", r.min_pes);
  f("cycles", r.cycles);
  f("events", r.events);
  f("nonzero", r.nonzero);
  f("uninfluential", r.uninfluential);
  f("macs", r.macs);
  f("fired", r.fired);
  f("weight_reads", r.weight_reads);
  f("acc_reads", r.acc_reads);
  f("acc_writes", r.acc_writes);
  f("busy_multiplier_cycles", r.busy_multiplier_cycles);
  f("active_cycles", r.active_cycles);
  f("pe_cycles", r.pe_cycles);
  f("stall_fifo_full", r.stall_fifo_full);
  f("stall_bank_conflict", r.stall_bank_conflict);
  f("stall_raw_hazard", r.stall_raw_hazard);
  f("stall_load_full", r.stall_load_full);
  f("stall_backpressure", r.stall_backpressure);
  f("stall_input_starved", r.stall_input_starved);
  f("noc_flits", r.noc_flits);
  f("noc_flit_hops", r.noc_flit_hops);
  f("energy_weight_pj", r.energy_weight_pj);
  f("energy_acc_pj", r.energy_acc_pj);
  f("energy_register_pj", r.energy_register_pj);
  f("energy_dram_pj", r.energy_dram_pj);
  f("energy_static_pj", r.energy_static_pj);
  f("energy_noc_pj", r.energy_noc_pj);
  f("energy_pj", r.energy_pj);
  f("utilization_active", r.utilization_active);
  f("utilization_total", r.utilization_total);
}

struct SimReport {
  std::string tool_version = kToolVersion;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string network;
  double frequency_mhz = 200;
  std::uint64_t multipliers_per_pe = 27;
  std::vector<LayerReport> layers;
  LayerReport total;
  double frames_per_second = 0;
  double frames_per_joule = 0;

  friend bool operator==(const SimReport&, const SimReport&) = default;
};

inline double ratio(double num, double den) { return den == 0 ? 0.0 : num / den; }

inline void set_utilization(LayerReport& l, std::uint64_t multipliers_per_pe) {
  const double m = static_cast<double>(multipliers_per_pe);
  l.utilization_active =
      ratio(static_cast<double>(l.busy_multiplier_cycles), m * static_cast<double>(l.active_cycles));
  l.utilization_total =
      ratio(static_cast<double>(l.busy_multiplier_cycles), m * static_cast<double>(l.pe_cycles));
}

// Fills `total` from the layers, then the headline rates.
inline void finalize(SimReport& r) {
  LayerReport t;
  t.name = "total";
  t.kind = "total";
  for (const auto& l : r.layers) {
    t.pes = std::max(t.pes, l.pes);
    t.min_pes = std::max(t.min_pes, l.min_pes);
    t.cycles += l.cycles;
    t.events += l.events;
    t.nonzero += l.nonzero;
    t.uninfluential += l.uninfluential;
    t.macs += l.macs;
    t.fired += l.fired;
    t.weight_reads += l.weight_reads;
    t.acc_reads += l.acc_reads;
    t.acc_writes += l.acc_writes;
    t.busy_multiplier_cycles += l.busy_multiplier_cycles;
    t.active_cycles += l.active_cycles;
    t.pe_cycles += l.pe_cycles;
    t.stall_fifo_full += l.stall_fifo_full;
    t.stall_bank_conflict += l.stall_bank_conflict;
    t.stall_raw_hazard += l.stall_raw_hazard;
    t.stall_load_full += l.stall_load_full;
    t.stall_backpressure += l.stall_backpressure;
    t.stall_input_starved += l.stall_input_starved;
    t.noc_flits += l.noc_flits;
    t.noc_flit_hops += l.noc_flit_hops;
    t.energy_weight_pj += l.energy_weight_pj;
    t.energy_acc_pj += l.energy_acc_pj;
    t.energy_register_pj += l.energy_register_pj;
    t.energy_dram_pj += l.energy_dram_pj;
    t.energy_static_pj += l.energy_static_pj;
    t.energy_noc_pj += l.energy_noc_pj;
    t.energy_pj += l.energy_pj;
  }
  t.layer = r.layers.size();
  set_utilization(t, r.multipliers_per_pe);
  r.total = t;
  r.frames_per_second = ratio(r.frequency_mhz * 1e6, static_cast<double>(t.cycles));
  r.frames_per_joule = ratio(1e12, t.energy_pj);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// Scalar text encoding

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_value(const std::string& s) {
  // Percent-escape the characters that delimit the line-based formats.
  std::string out;
  for (char c : s) {
    if (c == '%' || c == ',' || c == '"' || c == '=' || c == ' ' || c == '\n' || c == '\r') {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", static_cast<unsigned char>(c));
      out += buf;
    } else {
      out += c;
    }
  }
  return out;
}
inline std::string format_value(std::uint64_t v) { return std::to_string(v); }
inline std::string format_value(double v) { return format_double(v); }

inline void parse_value(std::string_view text, std::string& out) {
  out.clear();
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '%') {
      if (i + 2 >= text.size()) throw FormatError("truncated escape in '" + std::string(text) + "'");
      unsigned v = 0;
      const auto r = std::from_chars(text.data() + i + 1, text.data() + i + 3, v, 16);
      if (r.ec != std::errc() || r.ptr != text.data() + i + 3) {
        throw FormatError("bad escape in '" + std::string(text) + "'");
      }
      out += static_cast<char>(v);
      i += 2;
    } else {
      out += text[i];
    }
  }
}
inline void parse_value(std::string_view text, std::uint64_t& out) {
  const auto r = std::from_chars(text.data(), text.data() + text.size(), out);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size()) {
    throw FormatError("expected an unsigned integer, got '" + std::string(text) + "'");
  }
}
inline void parse_value(std::string_view text, double& out) {
  const auto r = std::from_chars(text.data(), text.data() + text.size(), out);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size()) {
    throw FormatError("expected a number, got '" + std::string(text) + "'");
  }
}

template <class F>
void for_each_header_field(SimReport& r, F&& f) {
  f("tool_version", r.tool_version);
  f("config_hash", r.config_hash);
  f("seed", r.seed);
  f("network", r.network);
  f("frequency_mhz", r.frequency_mhz);
  f("multipliers_per_pe", r.multipliers_per_pe);
}

template <class F>
void for_each_rate_field(SimReport& r, F&& f) {
  f("frames_per_second", r.frames_per_second);
  f("frames_per_joule", r.frames_per_joule);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::vector<std::string> lines_of(const std::string& text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
  }
  return lines;
}

}  // namespace detail

enum class ReportFormat { text, kv, json, csv };

inline const char* to_string(ReportFormat f) {
  switch (f) {
    case ReportFormat::text:
      return "text";
    case ReportFormat::kv:
      return "kv";
    case ReportFormat::json:
      return "json";
    case ReportFormat::csv:
      return "csv";
  }
  return "?";
}

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "text") return ReportFormat::text;
  if (s == "kv") return ReportFormat::kv;
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  throw ValidationError("unknown report format '" + std::string(s) + "' (text|kv|json|csv)");
}

// -- kv --------------------------------------------------------------------

inline std::string emit_kv(SimReport r) {
  std::ostringstream os;
  os << "format=mnf-report\nversion=" << kReportVersion << "\n";
  auto put = [&](const std::string& prefix) {
    return [&os, prefix](const char* key, auto& v) {
      os << prefix << key << '=' << detail::format_value(v) << '\n';
    };
  };
  detail::for_each_header_field(r, put(""));
  os << "layers=" << r.layers.size() << '\n';
  for (std::size_t i = 0; i < r.layers.size(); ++i) {
    for_each_field(r.layers[i], put("layer." + std::to_string(i) + "."));
  }
  for_each_field(r.total, put("total."));
  detail::for_each_rate_field(r, put(""));
  return os.str();
}

inline SimReport parse_kv(const std::string& text) {
  std::map<std::string, std::pair<std::string, std::size_t>> kv;
  const auto lines = detail::lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i][0] == '#') continue;
    const auto eq = lines[i].find('=');
    if (eq == std::string::npos) throw FormatError("expected key=value", i + 1, 1);
    kv[lines[i].substr(0, eq)] = {lines[i].substr(eq + 1), i + 1};
  }
  auto take = [&](const std::string& key, auto& out) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw FormatError("missing key '" + key + "'");
    try {
      detail::parse_value(it->second.first, out);
    } catch (const FormatError& e) {
      throw FormatError(key + ": " + e.what(), it->second.second, key.size() + 2);
    }
  };
  std::string fmt;
  std::uint64_t version = 0;
  take("format", fmt);
  take("version", version);
  if (fmt != "mnf-report" || version != kReportVersion) {
    throw FormatError("not an mnf-report v" + std::to_string(kReportVersion), 1, 1);
  }
  SimReport r;
  detail::for_each_header_field(r, [&](const char* k, auto& v) { take(k, v); });
  std::uint64_t n = 0;
  take("layers", n);
  r.layers.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string prefix = "layer." + std::to_string(i) + ".";
    for_each_field(r.layers[i], [&](const char* k, auto& v) { take(prefix + k, v); });
  }
  for_each_field(r.total, [&](const char* k, auto& v) { take(std::string("total.") + k, v); });
  detail::for_each_rate_field(r, [&](const char* k, auto& v) { take(k, v); });
  return r;
}

// -- json ------------------------------------------------------------------

inline std::string emit_json(SimReport r) {
  nlohmann::ordered_json j;
  j["format"] = "mnf-report";
  j["version"] = kReportVersion;
  detail::for_each_header_field(r, [&](const char* k, auto& v) { j[k] = v; });
  auto layer_json = [](LayerReport& l) {
    nlohmann::ordered_json o;
    for_each_field(l, [&](const char* k, auto& v) { o[k] = v; });
    return o;
  };
  j["layers"] = nlohmann::ordered_json::array();
  for (auto& l : r.layers) j["layers"].push_back(layer_json(l));
  j["total"] = layer_json(r.total);
  detail::for_each_rate_field(r, [&](const char* k, auto& v) { j[k] = v; });
  return j.dump(2) + "\n";
}

inline SimReport parse_json_report(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("report JSON: ") + e.what(), 0, 0, e.byte);
  }
  auto take = [](const nlohmann::json& o, const char* k, auto& out) {
    if (!o.contains(k)) throw FormatError(std::string("missing key '") + k + "'");
    try {
      o.at(k).get_to(out);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string(k) + ": " + e.what());
    }
  };
  if (!j.is_object() || j.value("format", "") != "mnf-report" ||
      j.value("version", 0) != kReportVersion) {
    throw FormatError("not an mnf-report v" + std::to_string(kReportVersion));
  }
  SimReport r;
  detail::for_each_header_field(r, [&](const char* k, auto& v) { take(j, k, v); });
  if (!j.contains("layers") || !j["layers"].is_array()) throw FormatError("missing layers array");
  for (const auto& o : j["layers"]) {
    LayerReport l;
    for_each_field(l, [&](const char* k, auto& v) { take(o, k, v); });
    r.layers.push_back(std::move(l));
  }
  if (!j.contains("total")) throw FormatError("missing total");
  for_each_field(r.total, [&](const char* k, auto& v) { take(j["total"], k, v); });
  detail::for_each_rate_field(r, [&](const char* k, auto& v) { take(j, k, v); });
  return r;
}

// -- csv -------------------------------------------------------------------

inline std::string emit_csv(SimReport r) {
  std::ostringstream os;
  os << "# mnf-report v" << kReportVersion;
  auto hdr = [&](const char* k, auto& v) { os << ' ' << k << '=' << detail::format_value(v); };
  detail::for_each_header_field(r, hdr);
  detail::for_each_rate_field(r, hdr);
  os << "\nrow";
  for_each_field(r.total, [&](const char* k, auto&) { os << ',' << k; });
  os << '\n';
  auto row = [&](const std::string& id, LayerReport& l) {
    os << id;
    for_each_field(l, [&](const char*, auto& v) { os << ',' << detail::format_value(v); });
    os << '\n';
  };
  for (std::size_t i = 0; i < r.layers.size(); ++i) row(std::to_string(i), r.layers[i]);
  row("total", r.total);
  return os.str();
}

inline SimReport parse_csv(const std::string& text) {
  const auto lines = detail::lines_of(text);
  const std::string magic = "# mnf-report v" + std::to_string(kReportVersion);
  if (lines.empty() || lines[0].rfind(magic, 0) != 0) {
    throw FormatError("missing '" + magic + "' header line", 1, 1);
  }
  SimReport r;
  std::map<std::string, std::string> hdr;
  for (const auto& tok : detail::split(lines[0].substr(magic.size()), ' ')) {
    if (tok.empty()) continue;
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw FormatError("bad header token '" + tok + "'", 1, 1);
    hdr[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  auto take = [&](const char* k, auto& v) {
    const auto it = hdr.find(k);
    if (it == hdr.end()) throw FormatError(std::string("header lacks '") + k + "'", 1, 1);
    detail::parse_value(it->second, v);
  };
  detail::for_each_header_field(r, take);
  detail::for_each_rate_field(r, take);

  if (lines.size() < 3) throw FormatError("csv needs a column header and a total row", lines.size(), 1);
  std::vector<std::string> columns{"row"};
  for_each_field(r.total, [&](const char* k, auto&) { columns.emplace_back(k); });
  if (detail::split(lines[1], ',') != columns) throw FormatError("unexpected column header", 2, 1);
  bool saw_total = false;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto cells = detail::split(lines[i], ',');
    if (cells.size() != columns.size()) {
      throw FormatError("row has " + std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(columns.size()),
                        i + 1, 1);
    }
    if (saw_total) throw FormatError("rows after the total row", i + 1, 1);
    LayerReport l;
    std::size_t c = 1;
    try {
      for_each_field(l, [&](const char*, auto& v) { detail::parse_value(cells[c++], v); });
    } catch (const FormatError& e) {
      throw FormatError(e.what(), i + 1, c + 1);
    }
    if (cells[0] == "total") {
      r.total = std::move(l);
      saw_total = true;
    } else if (cells[0] == std::to_string(r.layers.size())) {
      r.layers.push_back(std::move(l));
    } else {
      throw FormatError("unexpected row id '" + cells[0] + "'", i + 1, 1);
    }
  }
  if (!saw_total) throw FormatError("missing total row", lines.size(), 1);
  return r;
}

// -- text ------------------------------------------------------------------

inline std::string emit_text(const SimReport& r) {
  std::ostringstream os;
  os << "mnf-report v" << kReportVersion << "  tool " << r.tool_version << "  config "
     << r.config_hash << "  seed " << r.seed << "\n";
  os << "network " << r.network << " @ " << detail::format_double(r.frequency_mhz) << " MHz, "
     << r.multipliers_per_pe << " multipliers/PE\n\n";
  os << std::left << std::setw(12) << "layer" << std::setw(8) << "kind" << std::right
     << std::setw(5) << "PEs" << std::setw(12) << "cycles" << std::setw(10) << "events"
     << std::setw(13) << "MACs" << std::setw(10) << "fired" << std::setw(11) << "w-reads"
     << std::setw(9) << "util" << std::setw(9) << "util-t" << std::setw(14) << "energy(nJ)"
     << "\n";
  auto row = [&](const LayerReport& l) {
    char util[16], utilt[16], nj[32];
    std::snprintf(util, sizeof util, "%.4f", l.utilization_active);
    std::snprintf(utilt, sizeof utilt, "%.4f", l.utilization_total);
    std::snprintf(nj, sizeof nj, "%.3f", l.energy_pj / 1000.0);
    os << std::left << std::setw(12) << l.name << std::setw(8) << l.kind << std::right
       << std::setw(5) << l.pes << std::setw(12) << l.cycles << std::setw(10) << l.events
       << std::setw(13) << l.macs << std::setw(10) << l.fired << std::setw(11) << l.weight_reads
       << std::setw(9) << util << std::setw(9) << utilt << std::setw(14) << nj << "\n";
  };
  for (const auto& l : r.layers) row(l);
  row(r.total);
  const LayerReport& t = r.total;
  os << "\nstalls: fifo_full " << t.stall_fifo_full << ", bank_conflict "
     << t.stall_bank_conflict << ", raw_hazard " << t.stall_raw_hazard << ", load_full "
     << t.stall_load_full << ", backpressure " << t.stall_backpressure << ", input_starved "
     << t.stall_input_starved << "\n";
  os << "noc: " << t.noc_flits << " flits, " << t.noc_flit_hops << " flit-hops\n";
  os << "energy (pJ): weight " << detail::format_double(t.energy_weight_pj) << ", acc "
     << detail::format_double(t.energy_acc_pj) << ", register "
     << detail::format_double(t.energy_register_pj) << ", dram "
     << detail::format_double(t.energy_dram_pj) << ", static "
     << detail::format_double(t.energy_static_pj) << ", noc "
     << detail::format_double(t.energy_noc_pj) << ", total "
     << detail::format_double(t.energy_pj) << "\n";
  os << "frames/s " << detail::format_double(r.frames_per_second) << "  frames/J "
     << detail::format_double(r.frames_per_joule) << "\n";
  return os.str();
}

inline std::string emit_report(const SimReport& r, ReportFormat f) {
  switch (f) {
    case ReportFormat::text:
      return emit_text(r);
    case ReportFormat::kv:
      return emit_kv(r);
    case ReportFormat::json:
      return emit_json(r);
    case ReportFormat::csv:
      return emit_csv(r);
  }
  return {};
}

// Detects the format from the first line.
inline SimReport parse_report(const std::string& text) {
  std::size_t i = text.find_first_not_of(" \t\r\n");
  if (i == std::string::npos) throw FormatError("empty report");
  if (text[i] == '{') return parse_json_report(text);
  if (text.compare(i, 14, "# mnf-report v") == 0) return parse_csv(text);
  if (text.compare(i, 7, "format=") == 0) return parse_kv(text);
  throw FormatError("unrecognised report format", 1, 1);
}

}  // namespace mnf
