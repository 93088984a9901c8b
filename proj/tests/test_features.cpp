// Visual feature tests: motion deltas against an elementwise oracle,
// closed-form linear interpolation checks, concatenation index oracles,
// per-channel statistics against two-pass loops, CSV round trips.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "avsi/features.hpp"
#include "avsi/rng.hpp"
#include "doctest.h"

using namespace avsi;
namespace fs = std::filesystem;

namespace {

LandmarkTrack random_track(uint64_t seed, int frames) {
  Rng rng(seed);
  LandmarkTrack t;
  t.frames = frames;
  t.xy.resize(static_cast<size_t>(frames) * kVisualDim);
  for (double& v : t.xy) v = rng.uniform(0.0, 1.0);
  return t;
}

}  // namespace

TEST_CASE("motion_vectors of a static face is all zero") {
  LandmarkTrack one = random_track(1, 1);
  LandmarkTrack t;
  t.frames = 3;
  for (int f = 0; f < 3; ++f) t.xy.insert(t.xy.end(), one.xy.begin(), one.xy.end());
  auto motion = motion_vectors(t);
  REQUIRE(motion.size() == 3);
  for (const auto& frame : motion)
    for (double v : frame) CHECK(v == 0.0);
}

TEST_CASE("uniform translation gives constant motion vectors") {
  const double delta = 0.01;
  LandmarkTrack t = random_track(2, 1);
  t.frames = 5;
  t.xy.resize(static_cast<size_t>(5) * kVisualDim);
  for (int f = 1; f < 5; ++f)
    for (int j = 0; j < kVisualDim; ++j) t.at(f, j) = t.at(f - 1, j) + delta;
  auto motion = motion_vectors(t);
  for (double v : motion[0]) CHECK(v == 0.0);
  for (int f = 1; f < 5; ++f)
    for (double v : motion[static_cast<size_t>(f)])
      CHECK(v == doctest::Approx(delta).epsilon(1e-12));
}

TEST_CASE("motion_vectors matches the elementwise difference oracle") {
  LandmarkTrack t = random_track(3, 12);
  auto motion = motion_vectors(t);
  REQUIRE(static_cast<int>(motion.size()) == t.frames);
  for (double v : motion[0]) CHECK(v == 0.0);
  for (int f = 1; f < t.frames; ++f)
    for (int j = 0; j < kVisualDim; ++j)
      CHECK(motion[static_cast<size_t>(f)][static_cast<size_t>(j)] ==
            doctest::Approx(t.at(f, j) - t.at(f - 1, j)).epsilon(1e-15));
}

TEST_CASE("motion sums telescope to last minus first") {
  LandmarkTrack t = random_track(4, 30);
  auto motion = motion_vectors(t);
  for (int j = 0; j < kVisualDim; ++j) {
    double sum = 0.0;
    for (const auto& frame : motion) sum += frame[static_cast<size_t>(j)];
    CHECK(sum == doctest::Approx(t.at(t.frames - 1, j) - t.at(0, j)).epsilon(1e-9));
  }
}

TEST_CASE("motion_vectors requires at least two frames") {
  LandmarkTrack t = random_track(5, 1);
  CHECK_THROWS_AS(motion_vectors(t), std::invalid_argument);
}

TEST_CASE("upsample_visual maps 75 video frames to 250 audio frames") {
  std::vector<std::vector<double>> feats(75, std::vector<double>(2, 0.0));
  VisualTrack out = upsample_visual(feats, 250);
  CHECK(out.frames == 250);
  CHECK(out.dim == 2);
}

TEST_CASE("upsample_visual keeps a constant signal constant") {
  std::vector<std::vector<double>> feats(75, std::vector<double>(3, 0.0));
  for (auto& f : feats) f = {1.5, -2.0, 0.25};
  VisualTrack out = upsample_visual(feats, 250);
  for (int l = 0; l < out.frames; ++l) {
    CHECK(out.at(l, 0) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(out.at(l, 1) == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(out.at(l, 2) == doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("upsample_visual reproduces a linear ramp at interior points") {
  // values proportional to source time (f+0.5)/25: interpolation is exact
  const int src = 75;
  std::vector<std::vector<double>> feats(src, std::vector<double>(1, 0.0));
  for (int f = 0; f < src; ++f) feats[static_cast<size_t>(f)][0] = (f + 0.5) / 25.0;
  VisualTrack out = upsample_visual(feats, 250);
  for (int l = 0; l < out.frames; ++l) {
    double t = (l + 0.5) * 0.012;
    double lo = (0.5) / 25.0, hi = (src - 1 + 0.5) / 25.0;
    double want = std::min(std::max(t, lo), hi);  // clamped outside the grid
    CHECK(out.at(l, 0) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("upsample_visual matches a direct interpolation oracle") {
  Rng rng(6);
  const int src = 20;
  std::vector<std::vector<double>> feats(src, std::vector<double>(4));
  for (auto& f : feats)
    for (double& v : f) v = rng.normal(0.0, 1.0);
  VisualTrack out = upsample_visual(feats, 67);
  for (int l = 0; l < 67; ++l) {
    double pos = (l + 0.5) * 0.012 * 25.0 - 0.5;
    pos = std::min(std::max(pos, 0.0), static_cast<double>(src - 1));
    int f0 = static_cast<int>(std::floor(pos));
    int f1 = std::min(f0 + 1, src - 1);
    double a = pos - f0;
    for (int j = 0; j < 4; ++j) {
      double want = (1.0 - a) * feats[static_cast<size_t>(f0)][static_cast<size_t>(j)] +
                    a * feats[static_cast<size_t>(f1)][static_cast<size_t>(j)];
      CHECK(out.at(l, j) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("upsample_visual never overshoots channel bounds") {
  Rng rng(7);
  std::vector<std::vector<double>> feats(40, std::vector<double>(2));
  double lo = 1e18, hi = -1e18;
  for (auto& f : feats)
    for (double& v : f) {
      v = rng.normal(0.0, 2.0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  VisualTrack out = upsample_visual(feats, 133);
  for (double v : out.v) {
    CHECK(v >= lo - 1e-12);
    CHECK(v <= hi + 1e-12);
  }
  CHECK_THROWS_AS(upsample_visual({}, 10), std::invalid_argument);
}

TEST_CASE("concat_av places audio first and visual second") {
  Rng rng(8);
  Spectrogram a(9, 5, SpecScale::normalized_log);
  for (double& x : a.v) x = rng.normal(0.0, 1.0);
  VisualTrack v(9, 4);
  for (double& x : v.v) x = rng.normal(0.0, 1.0);

  auto out = concat_av(a, &v);
  REQUIRE(static_cast<int>(out.size()) == 9);
  REQUIRE(static_cast<int>(out[0].size()) == 5 + 4);
  for (int l = 0; l < 9; ++l) {
    for (int k = 0; k < 5; ++k) CHECK(out[static_cast<size_t>(l)][static_cast<size_t>(k)] == a.at(l, k));
    for (int j = 0; j < 4; ++j) CHECK(out[static_cast<size_t>(l)][static_cast<size_t>(5 + j)] == v.at(l, j));
  }
}

TEST_CASE("concat_av without a visual track passes audio through") {
  Spectrogram a(6, 257, SpecScale::normalized_log, 0.5);
  auto out = concat_av(a, nullptr);
  REQUIRE(static_cast<int>(out.size()) == 6);
  CHECK(static_cast<int>(out[0].size()) == 257);
  for (int l = 0; l < 6; ++l)
    for (int k = 0; k < 257; ++k) CHECK(out[static_cast<size_t>(l)][static_cast<size_t>(k)] == 0.5);
}

TEST_CASE("concat_av shape checks") {
  Spectrogram a(250, 257, SpecScale::normalized_log);
  VisualTrack v(250, 136);
  auto out = concat_av(a, &v);
  CHECK(out.size() == 250);
  CHECK(out[0].size() == 393);

  VisualTrack wrong(249, 136);
  CHECK_THROWS_AS(concat_av(a, &wrong), std::invalid_argument);
}

TEST_CASE("fit_feature_stats matches per-channel two-pass oracle") {
  Rng rng(9);
  std::vector<VisualTrack> tracks;
  for (int i = 0; i < 3; ++i) {
    VisualTrack t(10 + 5 * i, 6);
    for (double& v : t.v) v = rng.normal(1.0, 2.0);
    tracks.push_back(std::move(t));
  }
  FeatureStats fs = fit_feature_stats(tracks);
  REQUIRE(static_cast<int>(fs.mean.size()) == 6);

  for (int j = 0; j < 6; ++j) {
    std::vector<double> col;
    for (const auto& t : tracks)
      for (int l = 0; l < t.frames; ++l) col.push_back(t.at(l, j));
    double mean = 0.0;
    for (double x : col) mean += x;
    mean /= static_cast<double>(col.size());
    double var = 0.0;
    for (double x : col) var += (x - mean) * (x - mean);
    var /= static_cast<double>(col.size());
    CHECK(fs.mean[static_cast<size_t>(j)] == doctest::Approx(mean).epsilon(1e-9));
    CHECK(fs.std[static_cast<size_t>(j)] == doctest::Approx(std::sqrt(var)).epsilon(1e-9));
  }
}

TEST_CASE("fit_feature_stats floors constant channels") {
  VisualTrack t(20, 2);
  for (int l = 0; l < 20; ++l) {
    t.at(l, 0) = 3.0;           // constant channel
    t.at(l, 1) = 0.1 * l;       // varying channel
  }
  FeatureStats fs = fit_feature_stats({t});
  CHECK(fs.std[0] == 1e-6);
  CHECK(fs.std[1] > 0.1);
  CHECK_THROWS_AS(fit_feature_stats({}), std::invalid_argument);
}

TEST_CASE("standardize centers and scales per channel") {
  Rng rng(10);
  VisualTrack t(40, 3);
  for (double& v : t.v) v = rng.normal(-2.0, 4.0);
  FeatureStats fs = fit_feature_stats({t});
  VisualTrack z = standardize(t, fs);
  for (int j = 0; j < 3; ++j) {
    double mean = 0.0, var = 0.0;
    for (int l = 0; l < 40; ++l) mean += z.at(l, j);
    mean /= 40.0;
    for (int l = 0; l < 40; ++l) var += (z.at(l, j) - mean) * (z.at(l, j) - mean);
    var /= 40.0;
    CHECK(std::abs(mean) < 1e-9);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
  }

  FeatureStats wrong;
  wrong.mean = {0.0};
  wrong.std = {1.0};
  CHECK_THROWS_AS(standardize(t, wrong), std::invalid_argument);
}

TEST_CASE("landmark CSV round trip preserves the track") {
  fs::path dir = fs::temp_directory_path() / "avsi_feature_tests";
  fs::create_directories(dir);
  fs::path p = dir / "track.csv";

  LandmarkTrack t = random_track(11, 7);
  write_landmarks_csv(p.string(), t);
  LandmarkTrack back = read_landmarks_csv(p.string());
  REQUIRE(back.frames == t.frames);
  for (int f = 0; f < t.frames; ++f)
    for (int j = 0; j < kVisualDim; ++j)
      CHECK(back.at(f, j) == doctest::Approx(t.at(f, j)).epsilon(1e-9));
}

TEST_CASE("landmark CSV rejects malformed files") {
  fs::path dir = fs::temp_directory_path() / "avsi_feature_tests";
  fs::create_directories(dir);

  CHECK_THROWS_AS(read_landmarks_csv((dir / "missing.csv").string()), std::runtime_error);

  fs::path empty = dir / "empty.csv";
  std::ofstream(empty) << "";
  CHECK_THROWS_AS(read_landmarks_csv(empty.string()), std::runtime_error);

  fs::path short_row = dir / "short_row.csv";
  std::ofstream(short_row) << "h\n0.1,0.2,0.3\n";
  CHECK_THROWS_AS(read_landmarks_csv(short_row.string()), std::runtime_error);
}
