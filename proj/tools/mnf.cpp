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

// mnf: command-line front end.
//
//   mnf [--hw.<field>=<v>]... [--energy.<field>=<v>]... <command> [options]
//
// Exit codes: 0 success, 1 usage, 2 validation/format/mapping/I-O, 3 oracle mismatch.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "mnf/mnf.hpp"

namespace {

using namespace mnf;

constexpr int kExitUsage = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitMismatch = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string network;
  std::string weights;
  std::string input;
  std::string preset;
  std::string out;
  std::string format = "text";
  std::string sweep;
  std::string report_file;
  std::string expected;
  double density = 0.5;
  std::uint64_t seed = 0;
  int threads = 0;
  bool no_verify = false;
  HardwareConfig hw;
  EnergyModel energy;
};

// Removes --hw.* / --energy.* arguments (both "--k=v" and "--k v" forms).
std::vector<std::string> extract_overrides(int argc, char** argv, Options& o) {
  std::vector<std::string> rest;
  for (int i = 0; i < argc; ++i) {
    std::string a = argv[i];
    const bool hw = a.rfind("--hw.", 0) == 0;
    const bool en = a.rfind("--energy.", 0) == 0;
    if (!hw && !en) {
      rest.push_back(std::move(a));
      continue;
    }
    std::string body = a.substr(hw ? 5 : 9);
    std::string key;
    std::string value;
    if (const auto eq = body.find('='); eq != std::string::npos) {
      key = body.substr(0, eq);
      value = body.substr(eq + 1);
    } else {
      if (i + 1 >= argc) throw UsageError(a + " needs a value");
      key = body;
      value = argv[++i];
    }
    const bool known = hw ? apply_hw_override(o.hw, key, value)
                          : apply_energy_override(o.energy, key, value);
    if (!known) throw UsageError("unknown option " + std::string(hw ? "--hw." : "--energy.") + key);
  }
  return rest;
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(o.out, text);
  }
}

int thread_count(const Options& o) {
  if (o.threads > 0) return o.threads;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// Network, weights and input from files, a preset, or a mix. Missing weights
// are drawn from the seed and the network calibrated on the input.
GeneratedCase load_case(const Options& o) {
  if (o.network.empty() == o.preset.empty()) {
    throw UsageError("exactly one of --network or --preset is required");
  }
  NetworkSpec net = o.network.empty() ? preset_network(o.preset) : load_network(o.network);
  require_valid(net);
  GeneratedCase c;
  if (o.weights.empty()) {
    c = generate_case(net, o.density, o.seed);
    if (!o.input.empty()) {
      c.input = load_tensor(o.input);
      calibrate(c.network, c.weights, c.input);
    }
    return c;
  }
  c.network = std::move(net);
  c.weights = load_weights(o.weights, c.network);
  if (o.input.empty()) {
    Rng r(Rng::derive(o.seed, 1));
    c.input = random_tensor(c.network.input, o.density, r);
  } else {
    c.input = load_tensor(o.input);
  }
  return c;
}

// Compares a final output with a reference tensor given by --expected.
void check_expected(const Options& o, const Tensor& got) {
  if (o.expected.empty()) return;
  const Tensor want = load_tensor(o.expected);
  if (auto i = first_mismatch(got, want)) {
    if (got.dims != want.dims) {
      throw OracleMismatch("output shape " + shape_string(got.dims) + ", expected " +
                           shape_string(want.dims));
    }
    throw OracleMismatch("output first differs from --expected at " + describe_index(want, *i) +
                         ": got " + std::to_string(got.data[*i]) + ", expected " +
                         std::to_string(want.data[*i]));
  }
}

SimResult simulate_checked(const GeneratedCase& c, const Options& o) {
  SimResult r = simulate_network(c.network, c.weights, c.input, o.hw, o.energy,
                                 {thread_count(o), o.seed});
  if (!o.no_verify) {
    const auto dense = oracle::run_network_dense(c.network, c.weights, c.input);
    verify_stage_outputs(c.network, r.stage_outputs, dense, "cycle simulation");
  }
  check_expected(o, r.output);
  return r;
}

std::vector<double> parse_sweep(const std::string& spec) {
  const auto parts = detail::split(spec, ':');
  if (parts.size() != 3) throw UsageError("--density-sweep expects start:stop:step");
  double v[3];
  for (int i = 0; i < 3; ++i) {
    try {
      std::size_t used = 0;
      v[i] = std::stod(parts[i], &used);
      if (used != parts[i].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw UsageError("--density-sweep: bad number '" + parts[i] + "'");
    }
  }
  if (v[2] <= 0 || v[1] < v[0] || v[0] < 0 || v[1] > 1) {
    throw UsageError("--density-sweep needs 0 <= start <= stop <= 1 and step > 0");
  }
  const auto n = static_cast<int>(std::floor((v[1] - v[0]) / v[2] + 1e-9)) + 1;
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(std::round((v[0] + i * v[2]) * 1e9) / 1e9);
  return out;
}

int cmd_run(const Options& o) {
  const GeneratedCase c = load_case(o);
  if (o.sweep.empty()) {
    emit(o, emit_report(simulate_checked(c, o).report, parse_report_format(o.format)));
    return 0;
  }
  if (!o.expected.empty()) throw UsageError("--expected cannot be combined with --density-sweep");
  std::ostringstream csv;
  csv << "density,cycles,utilization_active,utilization_total,energy_pj,frames_per_second,"
         "frames_per_joule,events,macs\n";
  const auto points = parse_sweep(o.sweep);
  for (std::size_t i = 0; i < points.size(); ++i) {
    GeneratedCase p = c;
    Rng r(Rng::derive(o.seed, 1000 + i));
    p.input = random_tensor(c.network.input, points[i], r);
    const SimReport rep = simulate_checked(p, o).report;
    const LayerReport& t = rep.total;
    csv << detail::format_double(points[i]) << ',' << t.cycles << ','
        << detail::format_double(t.utilization_active) << ','
        << detail::format_double(t.utilization_total) << ','
        << detail::format_double(t.energy_pj) << ','
        << detail::format_double(rep.frames_per_second) << ','
        << detail::format_double(rep.frames_per_joule) << ',' << t.events << ',' << t.macs
        << '\n';
  }
  emit(o, csv.str());
  return 0;
}

std::string kind_unit(LayerKind k) { return k == LayerKind::fc ? "neurons" : "channels"; }

int cmd_map(const Options& o) {
  if (o.network.empty() == o.preset.empty()) {
    throw UsageError("exactly one of --network or --preset is required");
  }
  const NetworkSpec net = o.network.empty() ? preset_network(o.preset) : load_network(o.network);
  const MappedNetwork m = map_network(net, o.hw);
  if (o.format == "json") {
    nlohmann::ordered_json j;
    j["network"] = net.name;
    j["capacity"] = {{"neurons", m.capacity.neurons}, {"weights", m.capacity.weights}};
    j["compute_pes"] = m.compute_pes;
    j["storage_pe"] = m.storage_pe;
    j["total_pes"] = m.total_pes();
    j["grid"] = {m.grid_rows, m.grid_cols};
    j["layers"] = nlohmann::ordered_json::array();
    for (const auto& lm : m.layers) {
      nlohmann::ordered_json l;
      l["name"] = net.layers[lm.layer].name;
      l["kind"] = to_string(lm.kind);
      l["min_pes"] = lm.min_pes;
      l["pes"] = lm.pes();
      for (const auto& a : lm.assignments) {
        l["assignments"].push_back({{"pe", a.pe_id},
                                    {"first", a.first},
                                    {"count", a.count},
                                    {"neurons", a.neurons},
                                    {"weights", a.weights}});
      }
      j["layers"].push_back(l);
    }
    emit(o, j.dump(2) + "\n");
    return 0;
  }
  if (o.format != "text") throw UsageError("map supports --format text or json");
  std::ostringstream os;
  os << "network " << net.name << ": PE capacity " << m.capacity.neurons << " neurons, "
     << m.capacity.weights << " weights\n";
  for (const auto& lm : m.layers) {
    os << net.layers[lm.layer].name << " (" << to_string(lm.kind) << "): " << lm.pes()
       << " PEs (minimum " << lm.min_pes << ")\n";
    for (const auto& a : lm.assignments) {
      os << "  pe " << a.pe_id << ": " << kind_unit(lm.kind) << " [" << a.first << ", "
         << a.first + a.count << "), neurons " << a.neurons << "/" << m.capacity.neurons
         << ", weights " << a.weights << "/" << m.capacity.weights << "\n";
    }
  }
  os << "total: " << m.compute_pes << " compute PEs, +1 storage (pe " << m.storage_pe
     << "), grid " << m.grid_rows << "x" << m.grid_cols << ", " << m.total_pes() << " PEs\n";
  emit(o, os.str());
  return 0;
}

int cmd_gen(const Options& o) {
  if (o.out.empty()) throw UsageError("gen needs --out <directory>");
  Options src = o;
  src.weights.clear();
  src.input.clear();
  const GeneratedCase c = load_case(src);
  const std::filesystem::path dir(o.out);
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "network.json", emit_network(c.network));
  write_file_atomic(dir / "weights.bin", encode_weights(c.network, c.weights));
  write_file_atomic(dir / "input.bin", encode_tensor(c.input));
  write_file_atomic(dir / "expected.bin",
                    encode_tensor(oracle::run_network_dense(c.network, c.weights, c.input).output));
  std::cout << "wrote " << (dir / "network.json").string() << ", weights.bin, input.bin, expected.bin ("
            << c.network.layers.size() << " layers, input " << shape_string(c.input.dims)
            << ", density " << detail::format_double(static_cast<double>(c.input.nonzero()) /
                                                     static_cast<double>(c.input.size()))
            << ")\n";
  return 0;
}

int cmd_verify(const Options& o) {
  const GeneratedCase c = load_case(o);
  const auto dense = oracle::run_network_dense(c.network, c.weights, c.input);
  const auto functional = run_network_functional(c.network, c.weights, c.input);
  verify_stage_outputs(c.network, functional.stage_outputs, dense, "event-driven execution");
  const SimResult r = simulate_network(c.network, c.weights, c.input, o.hw, o.energy,
                                       {thread_count(o), o.seed});
  verify_stage_outputs(c.network, r.stage_outputs, dense, "cycle simulation");
  check_expected(o, r.output);
  std::cout << "ok: " << c.network.layers.size()
            << " layers, event-driven and cycle-level outputs match the dense reference\n";
  return 0;
}

int cmd_report(const Options& o) {
  emit(o, emit_report(parse_report(read_file(o.report_file)), parse_report_format(o.format)));
  return 0;
}

void add_case_options(CLI::App* c, Options& o) {
  c->add_option("--network", o.network, "network description (JSON)");
  c->add_option("--weights", o.weights, "weights file");
  c->add_option("--input", o.input, "input tensor file");
  c->add_option("--preset", o.preset, "built-in network")
      ->check(CLI::IsMember(preset_names()));
  c->add_option("--density", o.density, "input density for generated inputs")
      ->check(CLI::Range(0.0, 1.0));
  c->add_option("--seed", o.seed, "seed for generated weights and inputs");
}

int run(int argc, char** argv) {
  Options o;
  const auto args = extract_overrides(argc, argv, o);
  if (auto v = validate_hardware(o.hw); !v.empty()) throw ValidationError("hardware: " + v.front());
  if (auto v = validate_energy(o.energy); !v.empty()) throw ValidationError("energy: " + v.front());

  CLI::App app{"Event-driven sparse CNN accelerator simulator", "mnf"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.footer("Hardware and energy fields are set with --hw.<field>=<value> and "
             "--energy.<field>=<value>.");
  const std::vector<std::string> formats{"text", "kv", "json", "csv"};

  auto* run = app.add_subcommand("run", "simulate a network and emit a report");
  add_case_options(run, o);
  run->add_option("--out", o.out, "output file (default stdout)");
  run->add_option("--format", o.format, "report format")->check(CLI::IsMember(formats));
  run->add_option("--density-sweep", o.sweep, "start:stop:step; emits CSV");
  run->add_option("--expected", o.expected, "reference output tensor to compare against");
  run->add_flag("--no-verify", o.no_verify, "skip the dense-reference check");
  run->add_option("--threads", o.threads, "PE simulation threads (0: all cores)");

  auto* map = app.add_subcommand("map", "print the PE mapping");
  map->add_option("--network", o.network, "network description (JSON)");
  map->add_option("--preset", o.preset, "built-in network")->check(CLI::IsMember(preset_names()));
  map->add_option("--out", o.out, "output file (default stdout)");
  map->add_option("--format", o.format, "text or json")
      ->check(CLI::IsMember(std::vector<std::string>{"text", "json"}));

  auto* gen = app.add_subcommand("gen", "write a synthetic network, weights and input");
  add_case_options(gen, o);
  gen->add_option("--out", o.out, "output directory")->required();

  auto* verify = app.add_subcommand("verify", "check both execution models against the reference");
  add_case_options(verify, o);
  verify->add_option("--expected", o.expected, "reference output tensor to compare against");
  verify->add_option("--threads", o.threads, "PE simulation threads (0: all cores)");

  auto* report = app.add_subcommand("report", "convert a report between formats");
  report->add_option("file", o.report_file, "report file (any format)")->required();
  report->add_option("--out", o.out, "output file (default stdout)");
  report->add_option("--format", o.format, "output format")->check(CLI::IsMember(formats));

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  if (run->parsed()) return cmd_run(o);
  if (map->parsed()) return cmd_map(o);
  if (gen->parsed()) return cmd_gen(o);
  if (verify->parsed()) return cmd_verify(o);
  return cmd_report(o);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const OracleMismatch& e) {
    std::cerr << "oracle mismatch: " << e.what() << "\n";
    return kExitMismatch;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what();
    if (e.line() > 0) std::cerr << " (line " << e.line() << ", column " << e.column() << ")";
    else if (e.offset() > 0) std::cerr << " (byte offset " << e.offset() << ")";
    std::cerr << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}
