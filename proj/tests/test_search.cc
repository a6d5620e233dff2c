// tests/test_search.cc
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "dysflux/search.h"
#include "oracles.h"
#include "test_util.h"

using namespace dysflux;
using dysflux::testing::RandomBigram;
using dysflux::testing::RandomEmission;

using dysflux::testing::EnumerateLabelings;
using dysflux::testing::LabelingScore;

TEST_CASE("decoder matches exhaustive enumeration") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial != 200; ++trial) {
    const std::size_t t = dysflux::testing::UniformInt(rng, 1, 7);
    const std::size_t n = dysflux::testing::UniformInt(rng, 1, 3);
    const EmissionInput e = RandomEmission(rng, t, n);
    const BigramLM lm = RandomBigram(rng, n);
    SearchConfig cfg;
    cfg.lm_weight = dysflux::testing::Uniform(rng, 0.0, 1.0);
    cfg.boundary_weight = dysflux::testing::Uniform(rng, 0.0, 2.0);

    const auto bf = EnumerateLabelings(e, lm, cfg.lm_weight, cfg.boundary_weight);
    const auto decoded = ViterbiDecode(e, lm, cfg).ToFrames();
    CHECK(LabelingScore(e, lm, cfg.lm_weight, cfg.boundary_weight, decoded) == bf.best);
    CHECK(PathScore(e, lm, cfg, decoded) == bf.best);
    if (bf.count_at_best == 1) CHECK(decoded == bf.argmax);
  }
}

TEST_CASE("decoded segments are canonical") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial != 50; ++trial) {
    const EmissionInput e = RandomEmission(rng, 40, 5);
    const auto a = ViterbiDecode(e, RandomBigram(rng, 5), SearchConfig{});
    CHECK_NOTHROW(CheckCanonical(a));
    CHECK(a.num_frames() == 40);
  }
}

TEST_CASE("transition count is (t-1) N^2 with an unlimited beam") {
  for (auto [t, n] : {std::pair<int64_t, int64_t>{1, 1}, {2, 3}, {10, 4}, {37, 40}}) {
    const ComplexityProbe p = SearchComplexityProbe(t, n);
    CHECK(p.transitions == p.expected);
    CHECK(p.expected == static_cast<uint64_t>((t - 1) * n * n));
  }
}

TEST_CASE("beam limits scored transitions and equals the full search when wide") {
  std::mt19937_64 rng(3);
  const EmissionInput e = RandomEmission(rng, 30, 6);
  const BigramLM lm = RandomBigram(rng, 6);
  SearchConfig full, narrow, wide;
  narrow.beam_width = 2;
  wide.beam_width = 6;
  SearchStats s_full, s_narrow;
  const auto a = ViterbiDecode(e, lm, full, &s_full);
  const auto b = ViterbiDecode(e, lm, narrow, &s_narrow);
  CHECK(ViterbiDecode(e, lm, wide) == a);
  CHECK(s_narrow.transitions == 29u * 2u * 6u);
  CHECK(s_full.transitions == 29u * 36u);
  CHECK(PathScore(e, lm, full, b.ToFrames()) <= PathScore(e, lm, full, a.ToFrames()));
}

TEST_CASE("ties prefer the lowest index and staying") {
  EmissionInput e;
  e.log_posteriors = Matrix<double>(3, 2, std::log(0.5));
  e.boundary_probs = {0.5, 0.5, 0.5};
  SearchConfig cfg;
  cfg.lm_weight = 0.0;
  cfg.boundary_weight = 0.0;
  const auto a = ViterbiDecode(e, BigramLM::Uniform(2), cfg);
  REQUIRE(a.size() == 1);
  CHECK(a.segments[0].phone == 0);
}

TEST_CASE("short segments are merged into the stronger neighbour") {
  // Frames: 0 0 1 2 2; phoneme 1 lasts one frame and phoneme 2 scores
  // better on it than phoneme 0.
  EmissionInput e;
  const double hi = std::log(0.8), mid = std::log(0.15), lo = std::log(0.05);
  e.log_posteriors = Matrix<double>(5, 3);
  const double rows[5][3] = {{hi, mid, lo}, {hi, mid, lo}, {lo, hi, mid},
                             {lo, mid, hi}, {lo, mid, hi}};
  for (int t = 0; t != 5; ++t)
    for (int k = 0; k != 3; ++k) e.log_posteriors(t, k) = rows[t][k];
  e.boundary_probs = {0.5, 0.5, 0.5, 0.5, 0.5};
  SearchConfig cfg;
  cfg.lm_weight = 0.0;
  cfg.boundary_weight = 0.0;
  CHECK(ViterbiDecode(e, BigramLM::Uniform(3), cfg).ToFrames() ==
        std::vector<PhoneId>{0, 0, 1, 2, 2});
  cfg.min_segment_frames = 2;
  CHECK(ViterbiDecode(e, BigramLM::Uniform(3), cfg).ToFrames() ==
        std::vector<PhoneId>{0, 0, 2, 2, 2});
}

TEST_CASE("segment decode keeps absolute offsets") {
  std::mt19937_64 rng(5);
  const EmissionInput e = RandomEmission(rng, 20, 4);
  const BigramLM lm = RandomBigram(rng, 4);
  const auto a = DecodeSegment(e, 5, 12, lm, SearchConfig{});
  CHECK_NOTHROW(CheckCanonical(a, 5));
  CHECK(a.segments.back().end == 12);
  CHECK_THROWS_AS(DecodeSegment(e, 5, 5, lm, SearchConfig{}), DataError);
  CHECK_THROWS_AS(DecodeSegment(e, 0, 21, lm, SearchConfig{}), DataError);
}

TEST_CASE("input errors") {
  EmissionInput e;
  e.log_posteriors = Matrix<double>(2, 2, std::log(0.5));
  e.boundary_probs = {0.5, 0.5};
  CHECK_THROWS_AS(ViterbiDecode(e, BigramLM::Uniform(3), SearchConfig{}), DataError);
  e.log_posteriors(1, 0) = e.log_posteriors(1, 1) = -std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(ViterbiDecode(e, BigramLM::Uniform(2), SearchConfig{}), DataError);
  SearchConfig bad;
  bad.lm_weight = -1;
  CHECK_THROWS_AS(bad.Validate(), DataError);
}
