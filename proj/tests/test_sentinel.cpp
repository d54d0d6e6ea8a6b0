#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ekg/sentinel/segmenter.hpp"
#include "ekg/sentinel/series.hpp"
#include "ekg/sentinel/window.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using Catch::Approx;
using testutil::frames_from_profile;

namespace {

ekg::DistanceSeries series_of(std::vector<double> values, double fps) {
  ekg::DistanceSeries s;
  s.values = std::move(values);
  for (std::size_t i = 0; i <= s.values.size(); ++i)
    s.frame_ts.push_back(static_cast<double>(i) / fps);
  return s;
}

}  // namespace

TEST_CASE("adjacent_distance basics") {
  const auto same = frames_from_profile({0.0}, 8.0);
  CHECK(ekg::adjacent_distance(same).values == std::vector<double>{0.0});

  std::vector<ekg::FrameEmbedding> orth = {{0.0, {1.0, 0.0}}, {0.125, {0.0, 1.0}}};
  CHECK(ekg::adjacent_distance(orth).values == std::vector<double>{1.0});

  const auto constant = frames_from_profile({0.0, 0.0, 0.0, 0.0}, 8.0);
  CHECK(ekg::adjacent_distance(constant).values ==
        std::vector<double>(4, 0.0));

  std::vector<ekg::FrameEmbedding> one = {{0.0, {1.0, 0.0}}};
  CHECK_THROWS_AS(ekg::adjacent_distance(one), std::invalid_argument);

  std::vector<ekg::FrameEmbedding> unordered = {{1.0, {1.0, 0.0}}, {1.0, {0.0, 1.0}}};
  CHECK_THROWS_AS(ekg::adjacent_distance(unordered), std::invalid_argument);
}

TEST_CASE("gaussian_smooth preserves constants and honors sigma=0") {
  auto s = series_of({0.37, 0.37, 0.37, 0.37}, 8.0);
  for (double sigma : {0.0, 0.5, 1.0, 2.5}) {
    const auto out = ekg::gaussian_smooth(s, sigma);
    for (double v : out.values) CHECK(v == Approx(0.37).margin(1e-12));
  }
  auto arbitrary = series_of({0.1, 0.9, 0.0, 0.4}, 8.0);
  CHECK(ekg::gaussian_smooth(arbitrary, 0.0).values == arbitrary.values);
}

TEST_CASE("gaussian_smooth impulse response matches the direct-convolution oracle") {
  auto s = series_of({0.0, 0.0, 1.0, 0.0, 0.0}, 8.0);
  const auto out = ekg::gaussian_smooth(s, 1.0);
  const auto expect = oracle::direct_gaussian(s.values, 1.0);
  REQUIRE(out.values == expect);  // bitwise
  // frozen values from an independent run of the padded convolution
  CHECK(out.values[0] == Approx(0.10801116524482897).margin(1e-12));
  CHECK(out.values[1] == Approx(0.24646927755135806).margin(1e-12));
  CHECK(out.values[2] == Approx(0.39905027965245488).margin(1e-12));
  CHECK(out.values[3] == Approx(0.24646927755135806).margin(1e-12));
  CHECK(out.values[4] == Approx(0.10801116524482897).margin(1e-12));
}

TEST_CASE("gaussian_smooth equals oracle on random series") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::uniform_int_distribution<std::size_t> len(1, 60);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(len(rng));
    for (auto& x : v) x = u(rng);
    auto s = series_of(v, 8.0);
    const double sigma = trial % 3 == 0 ? 2.0 : 1.0;
    REQUIRE(ekg::gaussian_smooth(s, sigma).values ==
            oracle::direct_gaussian(v, sigma));
  }
}

TEST_CASE("detect_anchors applies threshold and strict local max") {
  ekg::SegConfig cfg;  // tau_evt 0.97 -> distance threshold 0.03
  auto s = series_of({0.005, 0.05, 0.02}, 8.0);
  const auto anchors = ekg::detect_anchors(s, cfg);
  REQUIRE(anchors.size() == 1);
  CHECK(anchors[0].idx == 1);
  CHECK(anchors[0].d == 0.05);

  CHECK(ekg::detect_anchors(series_of({0.05, 0.05, 0.05}, 8.0), cfg).empty());
  CHECK(ekg::detect_anchors(series_of({0.001, 0.001, 0.001}, 8.0), cfg).empty());
  // endpoints never anchor
  CHECK(ekg::detect_anchors(series_of({0.9, 0.001, 0.9}, 8.0), cfg).empty());
}

TEST_CASE("expand_window walks to the quiet run and excludes it") {
  ekg::SegConfig cfg;  // tau_bg 0.99 -> quiet threshold 0.01, m=2
  auto s = series_of({0.001, 0.02, 0.06, 0.02, 0.015, 0.001, 0.001}, 1.0);
  const auto w = ekg::expand_window({2, 0.06}, s, cfg);
  REQUIRE(w.has_value());
  CHECK(w->lo() == 1);
  CHECK(w->hi() == 4);
  CHECK(w->a == 1);
  CHECK(w->b == 2);
  CHECK(w->start == s.frame_ts[1]);
  CHECK(w->end == s.frame_ts[5]);
}

TEST_CASE("expand_window caps the extent at p_u") {
  ekg::SegConfig cfg;
  const std::size_t n = static_cast<std::size_t>(cfg.p_u * 8.0) + 10;
  std::vector<double> loud(n, 0.02);
  loud[n / 2] = 0.06;  // the anchor
  auto s = series_of(loud, 8.0);
  const auto w = ekg::expand_window({n / 2, 0.06}, s, cfg);
  REQUIRE(w.has_value());
  CHECK(w->hi() - w->lo() + 1 == static_cast<std::size_t>(cfg.p_u * 8.0));
  CHECK(w->end - w->start == Approx(cfg.p_u).margin(1e-12));
}

TEST_CASE("expand_window discards windows at or below p_l") {
  ekg::SegConfig cfg;  // p_l = 1.0 s
  std::vector<double> v(20, 0.001);
  v[10] = 0.06;  // isolated loud transition: 0.125 s at 8 fps
  auto s = series_of(v, 8.0);
  CHECK_FALSE(ekg::expand_window({10, 0.06}, s, cfg).has_value());
  CHECK_THROWS_AS(ekg::expand_window({100, 0.5}, s, cfg), std::out_of_range);
}

TEST_CASE("merge_speech extends over islands to fixpoint") {
  ekg::EventWindow w{0, 0, 0, 6.0, 8.0};
  const std::vector<ekg::SpeechIsland> one = {{5.0, 9.0, "a"}};
  auto out = ekg::merge_speech(w, one);
  CHECK(out.start == 5.0);
  CHECK(out.end == 9.0);

  const std::vector<ekg::SpeechIsland> disjoint = {{10.0, 12.0, "b"}};
  out = ekg::merge_speech(w, disjoint);
  CHECK(out.start == 6.0);
  CHECK(out.end == 8.0);

  const std::vector<ekg::SpeechIsland> chain = {{4.0, 5.5, "c"}, {5.0, 7.0, "d"}};
  out = ekg::merge_speech(w, chain);
  CHECK(out.start == 4.0);
  CHECK(out.end == 8.0);
}

TEST_CASE("constant stream becomes one static chunk at 2 FPS") {
  std::vector<double> quiet(480, 0.0);  // 60 s at 8 fps
  const auto frames = frames_from_profile(quiet, 8.0);
  ekg::SegConfig cfg;
  const auto chunks = ekg::segment_stream(frames, {}, cfg);
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].kind == ekg::ChunkKind::StaticBackground);
  CHECK(chunks[0].start == 0.0);
  CHECK(chunks[0].end == 60.0);
  CHECK(chunks[0].sampled_ts.size() == 120);
}

TEST_CASE("a capped event chunk carries 96 sampled timestamps") {
  std::vector<double> profile;
  profile.insert(profile.end(), 32, 0.001);
  profile.insert(profile.end(), {0.2, 0.5, 0.3});
  profile.insert(profile.end(), 130, 0.02);  // loud plateau, no further anchors
  profile.insert(profile.end(), 32, 0.001);
  const auto frames = frames_from_profile(profile, 8.0);
  ekg::SegConfig cfg;
  const auto chunks = ekg::segment_stream(frames, {}, cfg);
  std::vector<ekg::EventChunk> dynamic;
  for (const auto& c : chunks)
    if (c.kind == ekg::ChunkKind::DynamicEvent) dynamic.push_back(c);
  REQUIRE(dynamic.size() == 1);
  CHECK(dynamic[0].end - dynamic[0].start == Approx(12.0).margin(1e-12));
  CHECK(dynamic[0].sampled_ts.size() == 96);
  REQUIRE(chunks == oracle::segment(frames, {}, cfg));
}

TEST_CASE("two planted bursts yield two dynamic chunks over three static gaps") {
  std::vector<double> profile(200, 0.001);
  const auto plant = [&](std::size_t at) {
    const std::vector<double> burst = {0.1, 0.2, 0.35, 0.5,  0.45,
                                       0.4, 0.45, 0.38, 0.2, 0.1};
    for (std::size_t i = 0; i < burst.size(); ++i) profile[at + i] = burst[i];
  };
  plant(40);
  plant(120);
  const auto frames = frames_from_profile(profile, 8.0);
  ekg::SegConfig cfg;
  const auto chunks = ekg::segment_stream(frames, {}, cfg);
  REQUIRE(chunks == oracle::segment(frames, {}, cfg));
  std::size_t dyn = 0, stat = 0;
  for (const auto& c : chunks)
    (c.kind == ekg::ChunkKind::DynamicEvent ? dyn : stat)++;
  CHECK(dyn == 2);
  CHECK(stat == 3);
}

TEST_CASE("speech extension splits oversized windows and shares the transcript") {
  std::vector<double> profile(240, 0.001);  // 30 s at 8 fps
  const std::vector<double> burst = {0.1, 0.3, 0.5, 0.4, 0.3, 0.25, 0.2, 0.1};
  for (std::size_t i = 0; i < burst.size(); ++i) profile[100 + i] = burst[i];
  const auto frames = frames_from_profile(profile, 8.0);
  const std::vector<ekg::SpeechIsland> islands = {{2.0, 16.5, "long narration."}};
  ekg::SegConfig cfg;
  const auto chunks = ekg::segment_stream(frames, islands, cfg);
  REQUIRE(chunks == oracle::segment(frames, islands, cfg));
  std::vector<ekg::EventChunk> dynamic;
  for (const auto& c : chunks)
    if (c.kind == ekg::ChunkKind::DynamicEvent) dynamic.push_back(c);
  REQUIRE(dynamic.size() == 2);  // 14.5+ s window split at 12 s
  CHECK(dynamic[0].start == 2.0);
  CHECK(dynamic[0].end - dynamic[0].start == Approx(12.0).margin(1e-12));
  for (const auto& c : dynamic) {
    REQUIRE(c.transcript.size() == 1);
    CHECK(c.transcript[0].text == "long narration.");
    CHECK(c.end - c.start <= 12.0 + 1e-12);
  }
}

TEST_CASE("islands outside the frame timeline are clamped away") {
  std::vector<double> profile(80, 0.001);
  const std::vector<double> burst = {0.1, 0.3, 0.5, 0.4, 0.3, 0.25, 0.2, 0.1};
  for (std::size_t i = 0; i < burst.size(); ++i) profile[10 + i] = burst[i];
  const auto frames = frames_from_profile(profile, 8.0);
  const std::vector<ekg::SpeechIsland> islands = {{-3.0, 1.6, "before the video"}};
  ekg::SegConfig cfg;
  const auto chunks = ekg::segment_stream(frames, islands, cfg);
  REQUIRE(chunks == oracle::segment(frames, islands, cfg));
  CHECK(chunks.front().start == 0.0);
  CHECK(chunks.back().end == frames.back().t);
}

TEST_CASE("segmentation equals the brute-force oracle on random streams") {
  std::mt19937_64 rng(2026);
  ekg::SegConfig cfg;
  for (int trial = 0; trial < 150; ++trial) {
    const auto profile = testutil::random_profile(rng);
    const auto frames = frames_from_profile(profile, 8.0);
    const auto islands = testutil::random_islands(rng, frames.back().t);
    const auto got = ekg::segment_stream(frames, islands, cfg);
    const auto want = oracle::segment(frames, islands, cfg);
    REQUIRE(got == want);
  }
}

TEST_CASE("chunks partition the timeline seamlessly") {
  std::mt19937_64 rng(99);
  ekg::SegConfig cfg;
  for (int trial = 0; trial < 100; ++trial) {
    const auto profile = testutil::random_profile(rng);
    const auto frames = frames_from_profile(profile, 8.0);
    const auto islands = testutil::random_islands(rng, frames.back().t);
    const auto chunks = ekg::segment_stream(frames, islands, cfg);
    REQUIRE_FALSE(chunks.empty());
    CHECK(chunks.front().start == frames.front().t);
    CHECK(chunks.back().end == frames.back().t);
    for (std::size_t i = 0; i + 1 < chunks.size(); ++i) {
      REQUIRE(chunks[i].end == chunks[i + 1].start);
      REQUIRE(chunks[i].start < chunks[i].end);
    }
    for (const auto& c : chunks) {
      if (c.kind == ekg::ChunkKind::DynamicEvent)
        CHECK(c.end - c.start <= cfg.p_u + 1e-12);
      for (double t : c.sampled_ts) {
        CHECK(t >= c.start);
        CHECK(t < c.end);
      }
    }
  }
}

TEST_CASE("identical inputs produce bit-identical chunk lists") {
  std::mt19937_64 rng(5);
  const auto profile = testutil::random_profile(rng);
  const auto frames = frames_from_profile(profile, 8.0);
  const auto islands = testutil::random_islands(rng, frames.back().t);
  ekg::SegConfig cfg;
  CHECK(ekg::segment_stream(frames, islands, cfg) ==
        ekg::segment_stream(frames, islands, cfg));
}

TEST_CASE("streaming state stays bounded") {
  ekg::SegConfig cfg;
  const double fps = 8.0;
  const std::size_t bound =
      static_cast<std::size_t>(cfg.p_u * fps) +
      2 * static_cast<std::size_t>(std::ceil(3.0 * cfg.sigma)) +
      static_cast<std::size_t>(cfg.patience_m);
  ekg::StreamingSegmenter seg(cfg, {});
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> loud(0.05, 0.6);
  double theta = 0.0;
  std::size_t max_retained = 0;
  for (std::size_t i = 0; i < 50000; ++i) {
    const bool burst = (i % 1000) < 40;
    const double d = burst ? loud(rng) : 0.001;
    theta += std::acos(1.0 - d);
    seg.push({static_cast<double>(i) / fps,
              ekg::normalize({std::cos(theta), std::sin(theta)})});
    max_retained = std::max(max_retained, seg.retained_entries());
    if (i % 4096 == 0) seg.take_ready();
  }
  seg.finish();
  CHECK(max_retained <= bound);
}

TEST_CASE("segmenter input validation") {
  ekg::SegConfig cfg;
  ekg::StreamingSegmenter seg(cfg, {});
  seg.push({0.0, {1.0, 0.0}});
  CHECK_THROWS_AS(seg.push({0.0, {1.0, 0.0}}), std::invalid_argument);  // not increasing
  CHECK_THROWS_AS(seg.push({1.0, {1.0, 0.0, 0.0}}), std::invalid_argument);  // dim
  CHECK_THROWS_AS(seg.push({1.0, {0.5, 0.0}}), std::invalid_argument);  // not unit
  CHECK(ekg::segment_stream(std::vector<ekg::FrameEmbedding>{}, {}, cfg).empty());
}
