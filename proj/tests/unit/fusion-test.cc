// tests/unit/fusion-test.cc

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
#include "gmmd/fusion.h"
#include "gmmd/lattice-functions.h"
#include "gmmd/parallel.h"
#include "test-util.h"

using namespace gmmd;
using namespace gmmd::testing;

namespace {

Lattice Chain(const std::vector<int> &symbols, const std::string &utt = "u") {
  Lattice lat;
  lat.utterance_id = utt;
  lat.num_nodes = static_cast<int>(symbols.size()) + 1;
  lat.start = 0;
  lat.end = lat.num_nodes - 1;
  for (std::size_t i = 0; i < symbols.size(); ++i)
    lat.arcs.push_back({int(i), int(i) + 1, symbols[i], int(i) * 3, int(i + 1) * 3, -2.0, -1.0, {}});
  return lat;
}

FeatureMatrix RandomPosteriors(Rng &rng, std::size_t frames, std::size_t dim) {
  FeatureMatrix p("u", frames, dim);
  for (std::size_t t = 0; t < frames; ++t) {
    double s = 0;
    for (std::size_t i = 0; i < dim; ++i) s += p(t, i) = Uniform(rng, 0.01, 1);
    for (std::size_t i = 0; i < dim; ++i) p(t, i) /= s;
  }
  return p;
}

}  // namespace

TEST_CASE("scaled loglike: identities and the elementwise oracle") {
  FeatureMatrix uniform("u", 3, 4, 0.25);
  auto c = ScaledLoglike(uniform, std::vector<double>(4, 0.25));
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t i = 0; i < 4; ++i) CHECK(c(t, i) == 0.0);

  Rng rng(1);
  auto p = RandomPosteriors(rng, 5, 6);
  auto plain = ScaledLoglike(p, std::vector<double>(6, 1.0));
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t i = 0; i < 6; ++i) CHECK(plain(t, i) == std::log(p(t, i)));

  std::vector<double> priors = {0.1, 0.3, 0.05, 0.15, 0.2, 0.2};
  auto s = ScaledLoglike(p, priors);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t i = 0; i < 6; ++i)
      CHECK(std::fabs(s(t, i) - (std::log((long double)p(t, i)) - std::log((long double)priors[i]))) < 1e-14);

  auto uniform_priors = ScaledLoglike(p, std::vector<double>(6, 1.0 / 6));
  CHECK(FrameArgmax(uniform_priors) == FrameArgmax(p));
}

TEST_CASE("scaled loglike: invalid priors and rows") {
  FeatureMatrix p("u", 1, 2, 0.5);
  CHECK_THROWS_AS(ScaledLoglike(p, {0.5, 0.0}), ValidationError);
  CHECK_THROWS_AS(ScaledLoglike(p, {0.5, -0.5}), ValidationError);
  CHECK_THROWS_AS(ScaledLoglike(p, {1.0}), ValidationError);
  FeatureMatrix bad("u", 1, 2, 0.7);
  CHECK_THROWS_AS(ScaledLoglike(bad, {0.5, 0.5}), ValidationError);
}

TEST_CASE("posterior fuse: endpoints, self-fusion and errors") {
  Rng rng(2);
  FeatureMatrix a("u", 4, 3), b("u", 4, 3);
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t i = 0; i < 3; ++i) a(t, i) = Gauss(rng), b(t, i) = Gauss(rng);
  CHECK(PosteriorFuse(a, b, 1.0) == a);
  CHECK(PosteriorFuse(a, b, 0.0) == b);
  CHECK(PosteriorFuse(a, a, 0.45) == a);
  CHECK(PosteriorFuse(a, b, 0.45) == PosteriorFuse(b, a, 0.55));
  auto half = PosteriorFuse(a, b, 0.5);
  CHECK(half(2, 1) == doctest::Approx(0.5 * (a(2, 1) + b(2, 1))));
  CHECK_THROWS_AS(PosteriorFuse(a, FeatureMatrix("u", 3, 3), 0.5), ValidationError);
  CHECK_THROWS_AS(PosteriorFuse(a, FeatureMatrix("u", 4, 2), 0.5), ValidationError);
  CHECK_THROWS_AS(PosteriorFuse(a, b, 1.5), ValidationError);
  CHECK_THROWS_AS(PosteriorFuse(a, b, -0.1), ValidationError);
}

TEST_CASE("lattice fuse: identical single paths") {
  auto lat = Chain({4, 5});
  auto fused = LatticeFuse(lat, lat, 0.5, 1.0, 1.0);
  CHECK(fused.arcs.size() == 4);
  for (const auto &arc : fused.arcs) CHECK(*arc.posterior == doctest::Approx(0.5));
  CHECK(LatticePosteriorMass(fused) == doctest::Approx(1.0));
  auto cn = BuildConfusionNetwork(fused, 1.0);
  REQUIRE(cn.bins.size() == 2);
  for (const auto &bin : cn.bins) {
    REQUIRE(bin.size() == 1);
    CHECK(bin[0].posterior == doctest::Approx(1.0));
  }
  CHECK(ConsensusHypothesis(cn) == std::vector<int>{4, 5});
}

TEST_CASE("lattice fuse: merged mass against enumeration, endpoints") {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    auto a = RandomLattice(rng, "u", 8, 3, 10);
    auto b = RandomLattice(rng, "u", 8, 3, 10, a.EndFrame());
    const double alpha = Uniform(rng, 0, 1), la = Uniform(rng, 1, 10), lb = Uniform(rng, 1, 10);
    auto fused = LatticeFuse(a, b, alpha, la, lb);
    auto pa = EnumeratePaths(a, la), pb = EnumeratePaths(b, lb);
    long double want_a = 0, want_b = 0, got_a = 0, got_b = 0;
    for (std::size_t k = 0; k < a.arcs.size(); ++k) {
      if (a.arcs[k].from == a.start) want_a += alpha * pa.posteriors[k];
      if (fused.arcs[k].from == fused.start) got_a += *fused.arcs[k].posterior;
    }
    for (std::size_t k = 0; k < b.arcs.size(); ++k) {
      if (b.arcs[k].from == b.start) want_b += (1 - alpha) * pb.posteriors[k];
      const auto &arc = fused.arcs[a.arcs.size() + k];
      if (arc.from == fused.start) got_b += *arc.posterior;
    }
    CHECK(std::fabs(got_a - want_a) < 1e-12);
    CHECK(std::fabs(got_b - want_b) < 1e-12);
    CHECK(LatticePosteriorMass(fused) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ConsensusHypothesis(BuildConfusionNetwork(LatticeFuse(a, b, 1.0, la, lb), 1.0)) ==
          ConsensusHypothesis(BuildConfusionNetwork(a, la)));
  }
}

TEST_CASE("lattice fuse: errors") {
  auto a = Chain({1, 2});
  CHECK_THROWS_AS(LatticeFuse(a, Chain({1, 2}, "v"), 0.5, 1, 1), ValidationError);
  CHECK_THROWS_AS(LatticeFuse(a, Chain({1, 2, 3}), 0.5, 1, 1), ValidationError);
  Lattice empty;
  empty.utterance_id = "u";
  empty.num_nodes = 2;
  empty.end = 1;
  CHECK_THROWS_AS(LatticeFuse(a, empty, 0.5, 1, 1), ValidationError);
  CHECK_THROWS_AS(LatticeFuse(a, a, 2.0, 1, 1), ValidationError);
  CHECK_THROWS_AS(LatticePosteriorMass(a), ValidationError);
}

TEST_CASE("alpha grid parsing") {
  auto g = ParseGrid("0:0.05:1");
  REQUIRE(g.size() == 21);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(g[9] == 0.45);
  CHECK(ParseGrid("0.5") == std::vector<double>{0.5});
  CHECK(ParseGrid("0.2,0.4") == std::vector<double>{0.2, 0.4});
  CHECK_THROWS(ParseGrid("0:0:1"));
  CHECK_THROWS(ParseGrid("0:0.1:2"));
  CHECK_THROWS(ParseGrid("-0.1"));
  CHECK_THROWS(ParseGrid(""));
}

TEST_CASE("alpha search: single point, identical systems, dominant system") {
  AlignmentArchive ali;
  FeatureArchive a, b;
  // System a is right on every frame; b is wrong with a confidence that
  // grows along the utterance, so each extra bit of weight on a fixes frames.
  ali["u"] = {"u", {}};
  FeatureMatrix sa("u", 20, 2), sb("u", 20, 2);
  for (int t = 0; t < 20; ++t) {
    const int ref = t % 2;
    ali["u"].labels.push_back({ref, 1, 0});
    sa(t, ref) = 0.0;
    sa(t, 1 - ref) = -1.0;
    const double threshold = 0.025 + 0.05 * t;  // alpha needed to fix frame t
    sb(t, ref) = -threshold / (1 - threshold);
    sb(t, 1 - ref) = 0.0;
  }
  a.emplace("u", sa);
  b.emplace("u", sb);
  const auto grid = ParseGrid("0:0.05:1");
  auto r = AlphaSearchPosterior(ali, a, b, grid);
  CHECK(r.best_alpha == 1.0);
  REQUIRE(r.table.size() == grid.size());
  for (std::size_t g = 1; g < grid.size(); ++g) CHECK(r.table[g].second.total.Errors() < r.table[g - 1].second.total.Errors());
  // Exhaustive re-evaluation of the table.
  for (const auto &[alpha, rep] : r.table) {
    std::size_t wrong = 0;
    for (int t = 0; t < 20; ++t) {
      const int ref = t % 2;
      const double right = alpha * sa(t, ref) + (1 - alpha) * sb(t, ref);
      const double other = alpha * sa(t, 1 - ref) + (1 - alpha) * sb(t, 1 - ref);
      wrong += !(right > other);
    }
    CHECK(rep.total.Errors() == wrong);
  }

  CHECK(AlphaSearchPosterior(ali, a, b, {0.5}).best_alpha == 0.5);
  auto same = AlphaSearchPosterior(ali, a, a, grid);
  CHECK(same.best_alpha == 0.5);
  for (const auto &[alpha, rep] : same.table) CHECK(rep.Wer() == same.table[0].second.Wer());

  CHECK_THROWS_AS(AlphaSearchPosterior({}, a, b, grid), ValidationError);
  CHECK_THROWS_AS(AlphaSearchPosterior(ali, a, b, {}), ValidationError);
}

TEST_CASE("alpha search: lattice mode on identical systems, thread independence") {
  Rng rng(4);
  LatticeSet a;
  TranscriptSet refs;
  for (int u = 0; u < 4; ++u) {
    const std::string id = "u" + std::to_string(u);
    a[id] = RandomLattice(rng, id, 10, 3, 12);
    refs[id] = {"1", "2"};
  }
  const auto grid = ParseGrid("0:0.25:1");
  auto r = AlphaSearchLattice(refs, a, a, grid, 2.0, 2.0, nullptr);
  CHECK(r.best_alpha == 0.5);
  SetNumThreads(4);
  auto r4 = AlphaSearchLattice(refs, a, a, grid, 2.0, 2.0, nullptr);
  SetNumThreads(1);
  for (std::size_t g = 0; g < grid.size(); ++g)
    CHECK(r.table[g].second.total == r4.table[g].second.total);
  TranscriptSet unknown = refs;
  unknown["zz"] = {"1"};
  CHECK_THROWS_AS(AlphaSearchLattice(unknown, a, a, grid, 2.0, 2.0, nullptr), ValidationError);
}
