// tests/unit/frontend-test.cc

// Copyright 2026  GMMD Toolkit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>

#include "gmmd/common.h"
#include "gmmd/frontend.h"
#include "test-util.h"

using namespace gmmd;
using namespace gmmd::testing;

namespace {

FeatureMatrix RandomMatrix(Rng &rng, const std::string &id, std::size_t frames, std::size_t dim) {
  FeatureMatrix x(id, frames, dim);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t i = 0; i < dim; ++i) x(t, i) = Gauss(rng);
  return x;
}

}  // namespace

TEST_CASE("offsets: ranges expand") {
  CHECK(ParseOffsets("-10,-5..5,10") ==
        std::vector<int>{-10, -5, -4, -3, -2, -1, 0, 1, 2, 3, 4, 5, 10});
  CHECK(ParseOffsets("0") == std::vector<int>{0});
  CHECK_THROWS(ParseOffsets(""));
  CHECK_THROWS(ParseOffsets("1,0"));
  CHECK_THROWS(ParseOffsets("3..1"));
  CHECK_THROWS(ParseOffsets("a"));
}

TEST_CASE("splice: one frame repeated under clamping") {
  FeatureMatrix x("u", 1, 2);
  x(0, 0) = 1.5;
  x(0, 1) = -2;
  auto y = Splice(x, ParseOffsets("-10,-5..5,10"));
  REQUIRE(y.NumFrames() == 1);
  REQUIRE(y.Dim() == 26);
  for (std::size_t k = 0; k < 13; ++k) {
    CHECK(y(0, 2 * k) == 1.5);
    CHECK(y(0, 2 * k + 1) == -2);
  }
}

TEST_CASE("splice: zero offset is the identity") {
  Rng rng(1);
  auto x = RandomMatrix(rng, "u", 6, 3);
  CHECK(Splice(x, {0}) == x);
}

TEST_CASE("splice: matches index arithmetic") {
  Rng rng(2);
  auto x = RandomMatrix(rng, "u", 5, 2);
  const std::vector<int> offsets = {-1, 0, 1};
  auto y = Splice(x, offsets);
  REQUIRE(y.NumFrames() == 5);
  REQUIRE(y.Dim() == 6);
  for (int t = 0; t < 5; ++t)
    for (int k = 0; k < 3; ++k) {
      const int src = std::clamp(t + offsets[k], 0, 4);
      for (int i = 0; i < 2; ++i) CHECK(y(t, 2 * k + i) == x(src, i));
    }
  CHECK(y.UtteranceId() == "u");
}

TEST_CASE("splice: empty input is rejected") {
  CHECK_THROWS_AS(Splice(FeatureMatrix("u", 3), {0}), ValidationError);
}

TEST_CASE("dct: constant frame keeps sqrt(d) times the value") {
  FeatureMatrix x("u", 1, 9, 2.5);
  auto y = DctReduce(x, 1);
  REQUIRE(y.Dim() == 1);
  CHECK(y(0, 0) == doctest::Approx(3.0 * 2.5).epsilon(1e-12));
}

TEST_CASE("dct: full size preserves energy") {
  Rng rng(3);
  auto x = RandomMatrix(rng, "u", 4, 17);
  auto y = DctReduce(x, 17);
  for (std::size_t t = 0; t < 4; ++t) {
    double ex = 0, ey = 0;
    for (std::size_t i = 0; i < 17; ++i) ex += x(t, i) * x(t, i), ey += y(t, i) * y(t, i);
    CHECK(std::fabs(std::sqrt(ex) - std::sqrt(ey)) <= 1e-9);
  }
}

TEST_CASE("dct: 473 to 258 matches the cosine sum") {
  Rng rng(4);
  auto x = RandomMatrix(rng, "u", 2, 473);
  auto y = DctReduce(x, 258);
  REQUIRE(y.Dim() == 258);
  for (std::size_t t = 0; t < 2; ++t) {
    auto want = DirectDct(x.Row(t), 258);
    for (std::size_t k = 0; k < 258; ++k) CHECK(std::fabs(y(t, k) - want[k]) <= 1e-10);
  }
}

TEST_CASE("dct: output size must be in [1, d]") {
  FeatureMatrix x("u", 1, 4, 1.0);
  CHECK_THROWS_AS(DctReduce(x, 5), ValidationError);
  CHECK_THROWS_AS(DctReduce(x, 0), ValidationError);
}

TEST_CASE("concat: shapes, identity and mismatch errors") {
  Rng rng(5);
  auto a = RandomMatrix(rng, "u", 3, 2), b = RandomMatrix(rng, "u", 3, 4);
  auto c = ConcatFeatures(a, b);
  REQUIRE(c.Dim() == 6);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t i = 0; i < 2; ++i) CHECK(c(t, i) == a(t, i));
    for (std::size_t i = 0; i < 4; ++i) CHECK(c(t, 2 + i) == b(t, i));
  }
  CHECK(ConcatFeatures(a, FeatureMatrix("u", 3, 0)) == a);
  CHECK(ConcatFeatures(FeatureMatrix("u", 3, 0), b) == b);
  CHECK(ConcatFeatures(RandomMatrix(rng, "u", 2, 120), RandomMatrix(rng, "u", 2, 40)).Dim() == 160);
  CHECK_THROWS_AS(ConcatFeatures(a, RandomMatrix(rng, "u", 4, 4)), ValidationError);
  CHECK_THROWS_AS(ConcatFeatures(a, RandomMatrix(rng, "v", 3, 4)), ValidationError);
}

TEST_CASE("mean/variance normalization") {
  Rng rng(6);
  auto x = RandomMatrix(rng, "u", 50, 3);
  for (std::size_t t = 0; t < 50; ++t) x(t, 1) = 7 + 3 * x(t, 1);
  auto y = NormalizeMeanVariance(x);
  for (std::size_t i = 0; i < 3; ++i) {
    double m = 0, v = 0;
    for (std::size_t t = 0; t < 50; ++t) m += y(t, i);
    m /= 50;
    for (std::size_t t = 0; t < 50; ++t) v += (y(t, i) - m) * (y(t, i) - m);
    CHECK(std::fabs(m) < 1e-12);
    CHECK(v / 50 == doctest::Approx(1.0).epsilon(1e-9));
  }
}
