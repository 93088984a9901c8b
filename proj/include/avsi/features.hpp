// Visual feature handling: 68-landmark motion vectors, temporal upsampling
// from the 25 fps video rate to the audio frame rate, per-channel
// standardization and frame-wise audio-visual concatenation.
#ifndef AVSI_FEATURES_HPP
#define AVSI_FEATURES_HPP

#include <string>
#include <vector>

#include "avsi/types.hpp"

namespace avsi {

constexpr int kNumLandmarks = 68;
constexpr int kVisualDim = 2 * kNumLandmarks;  // 136
constexpr double kVideoFps = 25.0;

// Per-video-frame landmark coordinates, normalized to [0,1] by frame size.
struct LandmarkTrack {
  int frames = 0;
  std::vector<double> xy;  // frames x 136, row-major (x0,y0,...,x67,y67)

  double& at(int f, int j) { return xy[static_cast<size_t>(f) * kVisualDim + j]; }
  double at(int f, int j) const { return xy[static_cast<size_t>(f) * kVisualDim + j]; }
};

// Per-channel standardization statistics for visual features.
struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> std;
};

// First-order temporal difference of the landmark coordinates; the first
// frame gets a zero vector. Output: frames x 136 at the video rate.
std::vector<std::vector<double>> motion_vectors(const LandmarkTrack& t);

// Linear interpolation from the 25 fps video timeline to the audio frame
// timeline; source frame f sits at (f+0.5)/25 s, target frame l at
// (l+0.5)*hop_ms. Endpoints clamp.
VisualTrack upsample_visual(const std::vector<std::vector<double>>& video_feats,
                            int target_frames, double fps = kVideoFps,
                            double hop_ms = kHopMs);

// Frame-by-frame concatenation, audio bins first: frames x (bins + dim).
// With a null visual track the audio passes through unchanged.
std::vector<std::vector<double>> concat_av(const Spectrogram& a,
                                           const VisualTrack* v);

FeatureStats fit_feature_stats(const std::vector<VisualTrack>& train_tracks);
VisualTrack standardize(const VisualTrack& v, const FeatureStats& fs);

// CSV per utterance: header row, one row per video frame, 136 columns.
LandmarkTrack read_landmarks_csv(const std::string& path);
void write_landmarks_csv(const std::string& path, const LandmarkTrack& t);

}  // namespace avsi

#endif  // AVSI_FEATURES_HPP
