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

// 2-D mesh with X-then-Y routing. One flit per event; every link, injection
// port and ejection port moves one flit per cycle. Multicast replicates a flit
// along the union of the XY paths to its destinations.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mnf/error.hpp"

namespace mnf {

struct Coord {
  int x = 0;  // column
  int y = 0;  // row

  friend bool operator==(const Coord&, const Coord&) = default;
};

struct MeshConfig {
  int rows = 1;
  int cols = 1;
  int hop_latency = 1;

  int nodes() const { return rows * cols; }
};

inline bool on_grid(Coord c, const MeshConfig& m) {
  return c.x >= 0 && c.y >= 0 && c.x < m.cols && c.y < m.rows;
}

// PE ids are laid out row-major.
inline Coord coord_of(int id, const MeshConfig& m) {
  if (id < 0 || id >= m.nodes()) {
    throw ValidationError("PE id " + std::to_string(id) + " is off the " +
                          std::to_string(m.rows) + "x" + std::to_string(m.cols) + " grid");
  }
  return {id % m.cols, id / m.cols};
}

inline int id_of(Coord c, const MeshConfig& m) { return c.y * m.cols + c.x; }

// Nodes visited after `src`, ending at `dst`. Empty when src == dst.
inline std::vector<Coord> route(Coord src, Coord dst, const MeshConfig& m) {
  if (!on_grid(src, m) || !on_grid(dst, m)) throw ValidationError("route endpoint off grid");
  std::vector<Coord> path;
  Coord c = src;
  while (c.x != dst.x) {
    c.x += dst.x > c.x ? 1 : -1;
    path.push_back(c);
  }
  while (c.y != dst.y) {
    c.y += dst.y > c.y ? 1 : -1;
    path.push_back(c);
  }
  return path;
}

struct Link {
  int from = 0;
  int to = 0;

  friend bool operator==(const Link&, const Link&) = default;
};

// Union of XY paths from src, in destination order; each link appears once.
inline std::vector<Link> multicast_tree(int src, const std::vector<int>& dests,
                                        const MeshConfig& m) {
  std::vector<Link> links;
  std::vector<bool> reached(m.nodes(), false);
  reached[src] = true;
  for (int d : dests) {
    int prev = src;
    for (Coord c : route(coord_of(src, m), coord_of(d, m), m)) {
      const int id = id_of(c, m);
      if (!reached[id]) {
        links.push_back({prev, id});
        reached[id] = true;
      }
      prev = id;
    }
  }
  return links;
}

struct NocTelemetry {
  std::uint64_t flits = 0;       // injected flits (a multicast counts once)
  std::uint64_t deliveries = 0;  // flit copies ejected
  std::uint64_t flit_hops = 0;   // link traversals
  std::map<std::int64_t, std::uint64_t> queue_delay;  // cycles beyond hop latency -> count

  void merge(const NocTelemetry& o) {
    flits += o.flits;
    deliveries += o.deliveries;
    flit_hops += o.flit_hops;
    for (const auto& [k, v] : o.queue_delay) queue_delay[k] += v;
  }

  friend bool operator==(const NocTelemetry&, const NocTelemetry&) = default;
};

// Reservation-based link model. Flits must be sent in the order they would be
// arbitrated; each resource keeps the next cycle it is free.
class MeshNetwork {
 public:
  explicit MeshNetwork(MeshConfig cfg)
      : cfg_(cfg),
        link_free_(static_cast<std::size_t>(cfg.nodes()) * 4, 0),
        inject_free_(cfg.nodes(), 0),
        eject_free_(cfg.nodes(), 0) {}

  const MeshConfig& config() const { return cfg_; }
  const NocTelemetry& telemetry() const { return tel_; }

  // Sends one flit that is ready at `ready` cycles at `src`. Returns the cycle
  // each destination ejects it, in `dests` order.
  std::vector<std::int64_t> send(int src, const std::vector<int>& dests, std::int64_t ready) {
    if (dests.empty()) throw ValidationError("flit without destinations");
    std::vector<std::int64_t> at(cfg_.nodes(), -1);
    std::vector<int> hops(cfg_.nodes(), 0);
    const std::int64_t inject = std::max(ready, inject_free_[src]);
    inject_free_[src] = inject + 1;
    at[src] = inject;
    ++tel_.flits;

    std::vector<std::int64_t> out;
    out.reserve(dests.size());
    for (int d : dests) {
      int prev = src;
      for (Coord c : route(coord_of(src, cfg_), coord_of(d, cfg_), cfg_)) {
        const int id = id_of(c, cfg_);
        if (at[id] < 0) {
          std::int64_t& free = link_free_[link_slot(prev, id)];
          const std::int64_t depart = std::max(at[prev], free);
          free = depart + 1;
          at[id] = depart + cfg_.hop_latency;
          hops[id] = hops[prev] + 1;
          ++tel_.flit_hops;
        }
        prev = id;
      }
      const std::int64_t eject = std::max(at[d], eject_free_[d]);
      eject_free_[d] = eject + 1;
      ++tel_.deliveries;
      ++tel_.queue_delay[eject - ready - static_cast<std::int64_t>(hops[d]) * cfg_.hop_latency];
      out.push_back(eject);
    }
    return out;
  }

 private:
  // Output port of `from` towards the neighbour `to`: 0 east, 1 west, 2 south, 3 north.
  std::size_t link_slot(int from, int to) const {
    const Coord a = coord_of(from, cfg_);
    const Coord b = coord_of(to, cfg_);
    const int dir = b.x > a.x ? 0 : b.x < a.x ? 1 : b.y > a.y ? 2 : 3;
    return static_cast<std::size_t>(from) * 4 + dir;
  }

  MeshConfig cfg_;
  std::vector<std::int64_t> link_free_;
  std::vector<std::int64_t> inject_free_;
  std::vector<std::int64_t> eject_free_;
  NocTelemetry tel_;
};

// Multicasts `count` flits (the layer's events, end-of-data last) from
// `storage` to every destination, all ready at `start`. Result is indexed
// [destination][flit].
inline std::vector<std::vector<std::int64_t>> deliver_layer_events(std::size_t count,
                                                                   const std::vector<int>& dests,
                                                                   int storage,
                                                                   std::int64_t start,
                                                                   MeshNetwork& net) {
  std::vector<std::vector<std::int64_t>> arrivals(dests.size());
  for (auto& a : arrivals) a.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto t = net.send(storage, dests, start);
    for (std::size_t d = 0; d < dests.size(); ++d) arrivals[d].push_back(t[d]);
  }
  return arrivals;
}

}  // namespace mnf
