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

// Event encodings: a nonzero activation plus the addressing metadata a PE
// needs to replay it against its resident weights.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "mnf/error.hpp"
#include "mnf/model.hpp"

namespace mnf {

struct ConvEvent {
  std::int8_t input = 0;
  int ch_id = 0;
  int start_weight = 0;  // in-filter address, ky * nc_filter + kx
  int start_neuron = 0;  // OFM address, oy * nc_output + ox
  int x_jump = 0;
  int y_jump = 0;

  friend bool operator==(const ConvEvent&, const ConvEvent&) = default;
};

struct FcEvent {
  std::int8_t input = 0;
  int neuron_addr = 0;

  friend bool operator==(const FcEvent&, const FcEvent&) = default;
};

struct EndOfData {
  int layer = 0;

  friend bool operator==(const EndOfData&, const EndOfData&) = default;
};

using Event = std::variant<ConvEvent, FcEvent, EndOfData>;

inline bool is_end_of_data(const Event& e) { return std::holds_alternative<EndOfData>(e); }

struct EncodeDiagnostics {
  // Nonzero pixels that no output window covers (stride > kernel, or rows and
  // columns past the last window). They produce no event.
  std::size_t uninfluential_pixels = 0;
};

namespace detail {

inline int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
inline int ceil_div(int a, int b) { return -floor_div(-a, b); }

}  // namespace detail

// Range of output positions along one axis that input coordinate `i` feeds.
struct OutputSpan {
  int first = 0;
  int last = -1;
  bool empty() const { return last < first; }
};

inline OutputSpan output_span(int i, int kernel, int stride, int padding, int out_extent) {
  OutputSpan s;
  s.first = std::max(0, detail::ceil_div(i + padding - kernel + 1, stride));
  s.last = std::min(out_extent - 1, detail::floor_div(i + padding, stride));
  return s;
}

// Returns nullopt for zero activations and for pixels that influence no
// output (the latter also bump `diag`).
inline std::optional<ConvEvent> encode_conv_event(int iy, int ix, std::int8_t value, int ch,
                                                  const ConvLayerGeometry& g,
                                                  EncodeDiagnostics* diag = nullptr) {
  if (value == 0) return std::nullopt;
  const OutputSpan ys = output_span(iy, g.kernel_h, g.stride, g.padding, g.out_h);
  const OutputSpan xs = output_span(ix, g.kernel_w, g.stride, g.padding, g.out_w);
  if (ys.empty() || xs.empty()) {
    if (diag) ++diag->uninfluential_pixels;
    return std::nullopt;
  }
  ConvEvent e;
  e.input = value;
  e.ch_id = ch;
  e.y_jump = ys.last - ys.first;
  e.x_jump = xs.last - xs.first;
  e.start_neuron = ys.first * g.nc_output() + xs.first;
  e.start_weight = (iy + g.padding - ys.first * g.stride) * g.nc_filter() +
                   (ix + g.padding - xs.first * g.stride);
  return e;
}

inline std::optional<FcEvent> encode_fc_event(int idx, std::int8_t value) {
  if (value == 0) return std::nullopt;
  return FcEvent{value, idx};
}

struct EventStream {
  std::vector<Event> events;  // real events in scan order, then EndOfData
  std::size_t nonzero = 0;
  EncodeDiagnostics diag;

  std::size_t event_count() const { return events.empty() ? 0 : events.size() - 1; }
};

// Channel-major, row-major scan of a conv input.
inline EventStream event_stream(const Tensor& t, const ConvLayerGeometry& g, int layer = 0) {
  if (t.dims != Shape{g.in_channels, g.in_h, g.in_w}) {
    throw ShapeError("conv input " + shape_string(t.dims) + " does not match geometry " +
                     std::to_string(g.in_channels) + "x" + std::to_string(g.in_h) + "x" +
                     std::to_string(g.in_w));
  }
  EventStream s;
  for (int c = 0; c < g.in_channels; ++c) {
    for (int y = 0; y < g.in_h; ++y) {
      for (int x = 0; x < g.in_w; ++x) {
        const std::int8_t v = t.at(c, y, x);
        if (v == 0) continue;
        ++s.nonzero;
        if (auto e = encode_conv_event(y, x, v, c, g, &s.diag)) s.events.emplace_back(*e);
      }
    }
  }
  s.events.emplace_back(EndOfData{layer});
  return s;
}

// FC inputs are consumed flattened (channel-major for a conv output).
inline EventStream event_stream(const Tensor& t, const FcLayerGeometry& g, int layer = 0) {
  if (static_cast<int>(t.size()) != g.in_neurons) {
    throw ShapeError("fc input " + shape_string(t.dims) + " does not have " +
                     std::to_string(g.in_neurons) + " elements");
  }
  EventStream s;
  for (int i = 0; i < g.in_neurons; ++i) {
    if (auto e = encode_fc_event(i, t.data[i])) {
      ++s.nonzero;
      s.events.emplace_back(*e);
    }
  }
  s.events.emplace_back(EndOfData{layer});
  return s;
}

inline EventStream event_stream(const Tensor& t, const LayerSpec& l, int layer = 0) {
  switch (l.kind) {
    case LayerKind::conv:
      return event_stream(t, l.conv, layer);
    case LayerKind::fc:
      return event_stream(t, l.fc, layer);
    case LayerKind::maxpool:
      break;
  }
  throw ValidationError("maxpool layers have no input events");
}

}  // namespace mnf
