// tests/unit/lattice-test.cc

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
#include <map>
#include <set>

#include "gmmd/common.h"
#include "gmmd/lattice-functions.h"
#include "test-util.h"

using namespace gmmd;
using namespace gmmd::testing;

namespace {

Lattice Chain(const std::vector<int> &symbols, int frames_each = 2) {
  Lattice lat;
  lat.utterance_id = "u";
  lat.num_nodes = static_cast<int>(symbols.size()) + 1;
  lat.start = 0;
  lat.end = lat.num_nodes - 1;
  for (std::size_t i = 0; i < symbols.size(); ++i)
    lat.arcs.push_back({static_cast<int>(i), static_cast<int>(i) + 1, symbols[i],
                        static_cast<int>(i) * frames_each, static_cast<int>(i + 1) * frames_each, -1.0 * (i + 1),
                        -0.5, {}});
  return lat;
}

Lattice Parallel(int sym_a, double score_a, int sym_b, double score_b, int frames = 3) {
  Lattice lat;
  lat.utterance_id = "u";
  lat.num_nodes = 2;
  lat.start = 0;
  lat.end = 1;
  lat.arcs = {{0, 1, sym_a, 0, frames, score_a, 0.0, {}}, {0, 1, sym_b, 0, frames, score_b, 0.0, {}}};
  return lat;
}

SymbolTable Phones(int n) {
  SymbolTable t;
  for (int i = 1; i <= n; ++i) t.Add("ph" + std::to_string(i), i);
  return t;
}

}  // namespace

TEST_CASE("symbol table basics") {
  SymbolTable t;
  CHECK(t.Size() == 1);
  CHECK(t.Id("<eps>") == 0);
  t.Add("a", 3);
  t.Add("a", 3);
  CHECK(t.AddOrGet("a") == 3);
  CHECK(t.AddOrGet("b") == 4);
  CHECK_THROWS_AS(t.Add("a", 5), ValidationError);
  CHECK_THROWS_AS(t.Add("c", 3), ValidationError);
  CHECK_FALSE(t.Find("zz").has_value());
  CHECK(t.Find(4).value() == "b");
}

TEST_CASE("posteriors: parallel equal arcs and a single path") {
  auto p = ArcPosteriors(Parallel(1, -2.0, 2, -2.0), 1.0).posteriors;
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));
  auto chain = ArcPosteriors(Chain({1, 2, 3, 4}), 3.0);
  for (double v : chain.posteriors) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(chain.total_log_like == doctest::Approx(-10.0 / 3 - 2.0).epsilon(1e-14));
}

TEST_CASE("posteriors: 8-arc diamond against enumeration") {
  Lattice lat;
  lat.utterance_id = "d";
  lat.num_nodes = 5;
  lat.start = 0;
  lat.end = 4;
  lat.arcs = {{0, 1, 1, 0, 2, -3, -1, {}}, {0, 1, 2, 0, 2, -4, -0.5, {}}, {0, 2, 3, 0, 2, -2, -2, {}},
              {1, 3, 4, 2, 4, -5, 0, {}},  {2, 3, 4, 2, 4, -6, -1, {}},   {1, 4, 5, 2, 6, -9, -1, {}},
              {3, 4, 1, 4, 6, -1, -1, {}}, {3, 4, 2, 4, 6, -1.5, -0.2, {}}};
  lat.Validate();
  for (double scale : {1.0, 7.5, 12.0}) {
    auto want = EnumeratePaths(lat, scale);
    auto got = ArcPosteriors(lat, scale);
    CHECK(want.num_paths == 8);
    for (std::size_t a = 0; a < 8; ++a) CHECK(std::fabs(got.posteriors[a] - want.posteriors[a]) <= 1e-12 * want.posteriors[a]);
    CHECK(std::fabs(got.total_log_like - want.total_log_like) < 1e-12 * std::fabs(want.total_log_like));
  }
}

TEST_CASE("posteriors: large scores stay finite") {
  // Scores near 1e5 carry ~1e-11 absolute rounding into the log domain.
  auto p = ArcPosteriors(Parallel(1, -1e5, 2, -1e5 - 1), 1.0).posteriors;
  CHECK(p[0] == doctest::Approx(1 / (1 + std::exp(-1.0))).epsilon(1e-9));
  CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("posteriors: invalid input") {
  Lattice empty;
  empty.utterance_id = "e";
  empty.num_nodes = 2;
  empty.end = 1;
  CHECK_THROWS_AS(ArcPosteriors(empty, 1.0), ValidationError);
  CHECK_THROWS_AS(ArcPosteriors(Chain({1}), 0.0), ValidationError);
  CHECK_THROWS_AS(ArcPosteriors(Chain({1}), -1.0), ValidationError);
}

TEST_CASE("posteriors: attached values match and survive validation") {
  Rng rng(3);
  auto lat = RandomLattice(rng, "r", 10, 3);
  auto with = AttachPosteriors(lat, 2.0);
  with.Validate();
  CHECK(with.AllArcsHavePosteriors());
  auto p = ArcPosteriors(lat, 2.0).posteriors;
  for (std::size_t a = 0; a < p.size(); ++a) CHECK(*with.arcs[a].posterior == p[a]);
}

TEST_CASE("phone features: single path and two equal parallel arcs") {
  auto eps = kDefaultPosteriorFloor;
  auto f = PhonePosteriorFeatures(Chain({2, 1, 2}), Phones(3), 1.0);
  REQUIRE(f.NumFrames() == 6);
  REQUIRE(f.phone_ids == std::vector<int>{1, 2, 3});
  const int spans[6] = {2, 2, 1, 1, 2, 2};
  for (int t = 0; t < 6; ++t)
    for (int p = 1; p <= 3; ++p) CHECK(f.probs(t, f.Column(p)) == (p == spans[t] ? 1.0 : eps));

  auto g = PhonePosteriorFeatures(Parallel(1, -1, 3, -1), Phones(3), 1.0);
  for (int t = 0; t < 3; ++t) {
    CHECK(g.probs(t, 0) == doctest::Approx(0.5));
    CHECK(g.probs(t, 1) == eps);
    CHECK(g.probs(t, 2) == doctest::Approx(0.5));
  }
  auto logs = g.ToLog();
  CHECK(logs(0, 1) == std::log(eps));
}

TEST_CASE("phone features: random lattices against enumerated spans") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    auto lat = RandomLattice(rng, "r", 10, 4);
    auto want = EnumeratePaths(lat, 3.0);
    auto mass = FrameSymbolMass(lat, want.posteriors, lat.EndFrame(), 4);
    auto f = PhonePosteriorFeatures(lat, Phones(4), 3.0, 1e-6, lat.EndFrame() + 2);
    REQUIRE(static_cast<int>(f.NumFrames()) == lat.EndFrame() + 2);
    for (int t = 0; t < lat.EndFrame(); ++t)
      for (int p = 1; p <= 4; ++p)
        CHECK(std::fabs(f.probs(t, p - 1) - std::max<long double>(mass[t][p], 1e-6)) < 1e-12);
    for (int p = 1; p <= 4; ++p) CHECK(f.probs(lat.EndFrame(), p - 1) == 1e-6);
  }
}

TEST_CASE("phone features: spans beyond the utterance and unknown phones") {
  CHECK_THROWS_AS(PhonePosteriorFeatures(Chain({1, 2}), Phones(2), 1.0, 1e-9, 3), ValidationError);
  CHECK_THROWS_AS(PhonePosteriorFeatures(Chain({1, 7}), Phones(2), 1.0), ValidationError);
  CHECK_THROWS_AS(PhonePosteriorFeatures(Chain({1}), Phones(2), 1.0, 0.0), ValidationError);
}

TEST_CASE("confusion network: single path") {
  auto cn = BuildConfusionNetwork(Chain({5, 6, 7}), 1.0);
  REQUIRE(cn.bins.size() == 3);
  for (int i = 0; i < 3; ++i) {
    REQUIRE(cn.bins[i].size() == 1);
    CHECK(cn.bins[i][0].symbol == 5 + i);
    CHECK(cn.bins[i][0].posterior == doctest::Approx(1.0));
  }
  CHECK(ConsensusHypothesis(cn) == std::vector<int>{5, 6, 7});
}

TEST_CASE("confusion network: diamond with equal scores shares one bin") {
  auto cn = BuildConfusionNetwork(Parallel(1, -2, 2, -2), 1.0);
  REQUIRE(cn.bins.size() == 1);
  std::map<int, double> bin;
  for (const auto &e : cn.bins[0]) bin[e.symbol] = e.posterior;
  CHECK(bin.size() == 2);
  CHECK(bin[1] == doctest::Approx(0.5));
  CHECK(bin[2] == doctest::Approx(0.5));
  CHECK(ConsensusHypothesis(cn) == std::vector<int>{1});  // tie goes to the lower id

  auto skewed = BuildConfusionNetwork(Parallel(1, std::log(0.6), 2, std::log(0.4)), 1.0);
  CHECK(ConsensusHypothesis(skewed) == std::vector<int>{1});
}

TEST_CASE("confusion network: optional word becomes a null entry") {
  // 0 -a-> 1 -b-> 2 and 0 -a-> 2 (b skipped).
  Lattice lat;
  lat.utterance_id = "u";
  lat.num_nodes = 3;
  lat.start = 0;
  lat.end = 2;
  lat.arcs = {{0, 1, 1, 0, 2, std::log(0.3), 0, {}}, {1, 2, 2, 2, 4, 0, 0, {}}, {0, 2, 1, 0, 4, std::log(0.7), 0, {}}};
  auto cn = BuildConfusionNetwork(lat, 1.0);
  cn.Validate();
  REQUIRE(cn.bins.size() == 2);
  double null_mass = 0;
  for (const auto &e : cn.bins[1])
    if (e.symbol == 0) null_mass = e.posterior;
  CHECK(null_mass == doctest::Approx(0.7));
  CHECK(ConsensusHypothesis(cn) == std::vector<int>{1});
}

TEST_CASE("confusion network: random lattices keep per-word mass") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto lat = RandomLattice(rng, "r", 10, 4);
    auto want = EnumeratePaths(lat, 2.0);
    auto cn = BuildConfusionNetwork(lat, 2.0);
    cn.Validate();
    std::map<int, long double> expected, got;
    for (std::size_t a = 0; a < lat.arcs.size(); ++a) expected[lat.arcs[a].symbol] += want.posteriors[a];
    for (const auto &bin : cn.bins)
      for (const auto &e : bin)
        if (e.symbol != 0) got[e.symbol] += e.posterior;
    for (const auto &[sym, m] : expected) CHECK(std::fabs(got[sym] - m) < 1e-9);
    for (const auto &bin : cn.bins) {
      std::set<int> seen;
      for (const auto &e : bin) CHECK(seen.insert(e.symbol).second);
    }
  }
}

TEST_CASE("consensus: null entries") {
  ConfusionNetwork cn{"u", {{{1, 0.9}, {0, 0.1}}}};
  CHECK(ConsensusHypothesis(cn) == std::vector<int>{1});
  ConfusionNetwork null_wins{"u", {{{1, 0.3}, {0, 0.7}}, {{2, 1.0}}}};
  CHECK(ConsensusHypothesis(null_wins) == std::vector<int>{2});
  CHECK(ConsensusHypothesis(ConfusionNetwork{"u", {}}).empty());
}

TEST_CASE("lattice validation messages name the utterance") {
  auto lat = Chain({1, 2});
  lat.utterance_id = "spk1-007";
  lat.arcs[1].start_frame = 3;
  lat.arcs[1].end_frame = 5;
  try {
    lat.Validate();
    FAIL("expected a validation error");
  } catch (const ValidationError &e) {
    CHECK(std::string(e.what()).find("spk1-007") != std::string::npos);
  }
}
