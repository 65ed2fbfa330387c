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

#include <gtest/gtest.h>

#include "mnf/events.hpp"
#include "mnf/random.hpp"
#include "testing.hpp"

namespace mnf {
namespace {

TEST(EncodeConv, ZeroValueIsSkipped) {
  const auto g = ConvLayerGeometry::make(1, 1, 4, 4, 3);
  EXPECT_FALSE(encode_conv_event(1, 1, 0, 0, g).has_value());
}

TEST(EncodeConv, CornerPixelHitsOneWindow) {
  const auto g = ConvLayerGeometry::make(1, 1, 4, 4, 3);
  const auto e = encode_conv_event(0, 0, 9, 0, g);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->start_weight, 0);
  EXPECT_EQ(e->start_neuron, 0);
  EXPECT_EQ(e->x_jump, 0);
  EXPECT_EQ(e->y_jump, 0);
}

TEST(EncodeConv, WalkthroughPixel) {
  const auto g = ConvLayerGeometry::make(1, 1, 4, 4, 3);
  const auto e = encode_conv_event(1, 1, 100, 0, g);
  ASSERT_TRUE(e);
  EXPECT_EQ(*e, (ConvEvent{100, 0, 4, 0, 1, 1}));
}

TEST(EncodeConv, PaddedPixel) {
  const auto g = ConvLayerGeometry::make(1, 1, 4, 4, 3, 1, 1);
  const auto e = encode_conv_event(1, 1, 1, 0, g);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->start_weight, 8);
  EXPECT_EQ(e->start_neuron, 0);
  EXPECT_EQ(e->x_jump, 2);
  EXPECT_EQ(e->y_jump, 2);
}

TEST(EncodeConv, UncoveredPixelCountsAsUninfluential) {
  // 1x1 kernel, stride 2: odd rows/columns feed no output.
  const auto g = ConvLayerGeometry::make(1, 1, 4, 4, 1, 2);
  EncodeDiagnostics d;
  EXPECT_FALSE(encode_conv_event(1, 0, 5, 0, g, &d));
  EXPECT_EQ(d.uninfluential_pixels, 1u);
}

TEST(EncodeFc, CarriesValueAndAddress) {
  EXPECT_EQ(encode_fc_event(1, 100), (FcEvent{100, 1}));
  EXPECT_FALSE(encode_fc_event(3, 0));
  EXPECT_EQ(encode_fc_event(3, -5), (FcEvent{-5, 3}));
}

TEST(EventStream, AllZeroIsOnlyEndOfData) {
  const auto g = ConvLayerGeometry::make(2, 1, 5, 5, 3);
  const auto s = event_stream(Tensor({2, 5, 5}), g, 3);
  ASSERT_EQ(s.events.size(), 1u);
  EXPECT_EQ(std::get<EndOfData>(s.events[0]).layer, 3);
}

TEST(EventStream, SevenNonzerosGiveSevenEvents) {
  const auto g = ConvLayerGeometry::make(1, 1, 6, 6, 3, 1, 1);
  Tensor t({1, 6, 6});
  for (int i = 0; i < 7; ++i) t.data[i * 5] = static_cast<std::int8_t>(i + 1);
  const auto s = event_stream(t, g);
  EXPECT_EQ(s.event_count(), 7u);
  EXPECT_EQ(s.events.size(), 8u);
  EXPECT_TRUE(is_end_of_data(s.events.back()));
}

TEST(EventStream, EventCountMatchesDirectScan) {
  Rng r(7);
  for (double d : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    const auto g = ConvLayerGeometry::make(3, 2, 16, 16, 5, 2, 1);
    const Tensor t = random_tensor({3, 16, 16}, d, r);
    const auto s = event_stream(t, g);
    std::size_t nz = 0;
    std::size_t covered = 0;
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
          if (t.at(c, y, x) == 0) continue;
          ++nz;
          covered += testing::windows_covering(g, y, x) > 0;
        }
    EXPECT_EQ(s.nonzero, nz);
    EXPECT_EQ(s.event_count(), covered);
    EXPECT_EQ(s.event_count() + s.diag.uninfluential_pixels, nz);
  }
}

// Every event's window matches a brute-force enumeration of the outputs the
// pixel feeds, and the start weight is the filter tap for the first output.
TEST(EncodeConv, MatchesWindowEnumeration) {
  for (int k : {1, 3, 5})
    for (int s : {1, 2})
      for (int p : {0, 1}) {
        const auto g = ConvLayerGeometry::make(1, 1, 9, 9, k, s, p);
        for (int iy = 0; iy < 9; ++iy)
          for (int ix = 0; ix < 9; ++ix) {
            int y0 = -1, y1 = -1, x0 = -1, x1 = -1;
            for (int oy = 0; oy < g.out_h; ++oy)
              for (int ox = 0; ox < g.out_w; ++ox) {
                const int ky = iy - (oy * s - p);
                const int kx = ix - (ox * s - p);
                if (ky < 0 || ky >= k || kx < 0 || kx >= k) continue;
                if (y0 < 0) y0 = oy;
                y1 = oy;
                if (x0 < 0 || ox < x0) x0 = ox;
                x1 = std::max(x1, ox);
              }
            const auto e = encode_conv_event(iy, ix, 1, 0, g);
            if (y0 < 0) {
              EXPECT_FALSE(e);
              continue;
            }
            ASSERT_TRUE(e);
            EXPECT_EQ(e->start_neuron, y0 * g.out_w + x0);
            EXPECT_EQ(e->y_jump, y1 - y0);
            EXPECT_EQ(e->x_jump, x1 - x0);
            EXPECT_EQ(e->start_weight, (iy - (y0 * s - p)) * k + (ix - (x0 * s - p)));
          }
      }
}

}  // namespace
}  // namespace mnf
