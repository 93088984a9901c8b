#include "avsi/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace avsi {

std::vector<std::vector<double>> motion_vectors(const LandmarkTrack& t) {
  if (t.frames < 2) throw std::invalid_argument("motion_vectors: need at least 2 frames");
  std::vector<std::vector<double>> out(static_cast<size_t>(t.frames),
                                       std::vector<double>(kVisualDim, 0.0));
  for (int f = 1; f < t.frames; ++f) {
    for (int j = 0; j < kVisualDim; ++j) out[f][j] = t.at(f, j) - t.at(f - 1, j);
  }
  return out;
}

VisualTrack upsample_visual(const std::vector<std::vector<double>>& video_feats,
                            int target_frames, double fps, double hop_ms) {
  if (video_feats.empty()) throw std::invalid_argument("upsample_visual: empty source");
  const int src_frames = static_cast<int>(video_feats.size());
  const int dim = static_cast<int>(video_feats[0].size());

  VisualTrack out(target_frames, dim);
  for (int l = 0; l < target_frames; ++l) {
    const double t = (l + 0.5) * hop_ms / 1000.0;
    double pos = t * fps - 0.5;  // source frame f at time (f+0.5)/fps
    pos = std::clamp(pos, 0.0, static_cast<double>(src_frames - 1));
    const int f0 = static_cast<int>(std::floor(pos));
    const int f1 = std::min(f0 + 1, src_frames - 1);
    const double a = pos - f0;
    for (int j = 0; j < dim; ++j) {
      out.at(l, j) = (1.0 - a) * video_feats[f0][j] + a * video_feats[f1][j];
    }
  }
  return out;
}

std::vector<std::vector<double>> concat_av(const Spectrogram& a, const VisualTrack* v) {
  if (v && v->frames != a.frames)
    throw std::invalid_argument("concat_av: frame-count mismatch");
  const int dim = a.bins + (v ? v->dim : 0);
  std::vector<std::vector<double>> out(static_cast<size_t>(a.frames),
                                       std::vector<double>(dim));
  for (int l = 0; l < a.frames; ++l) {
    for (int k = 0; k < a.bins; ++k) out[l][k] = a.at(l, k);
    if (v) {
      for (int j = 0; j < v->dim; ++j) out[l][a.bins + j] = v->at(l, j);
    }
  }
  return out;
}

FeatureStats fit_feature_stats(const std::vector<VisualTrack>& train_tracks) {
  if (train_tracks.empty()) throw std::invalid_argument("fit_feature_stats: empty set");
  const int dim = train_tracks[0].dim;
  FeatureStats fs;
  fs.mean.assign(dim, 0.0);
  fs.std.assign(dim, 0.0);
  size_t count = 0;
  for (const VisualTrack& t : train_tracks) {
    for (int l = 0; l < t.frames; ++l) {
      for (int j = 0; j < dim; ++j) fs.mean[j] += t.at(l, j);
    }
    count += static_cast<size_t>(t.frames);
  }
  for (int j = 0; j < dim; ++j) fs.mean[j] /= static_cast<double>(count);
  for (const VisualTrack& t : train_tracks) {
    for (int l = 0; l < t.frames; ++l) {
      for (int j = 0; j < dim; ++j) {
        const double d = t.at(l, j) - fs.mean[j];
        fs.std[j] += d * d;
      }
    }
  }
  for (int j = 0; j < dim; ++j) {
    // floor keeps degenerate (constant) channels from exploding
    fs.std[j] = std::max(std::sqrt(fs.std[j] / static_cast<double>(count)), 1e-6);
  }
  return fs;
}

VisualTrack standardize(const VisualTrack& v, const FeatureStats& fs) {
  if (static_cast<int>(fs.mean.size()) != v.dim)
    throw std::invalid_argument("standardize: dim mismatch");
  VisualTrack out = v;
  for (int l = 0; l < v.frames; ++l) {
    for (int j = 0; j < v.dim; ++j) out.at(l, j) = (v.at(l, j) - fs.mean[j]) / fs.std[j];
  }
  return out;
}

LandmarkTrack read_landmarks_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open landmarks csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("landmarks csv missing header: " + path);

  LandmarkTrack t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    t.xy.resize(t.xy.size() + kVisualDim, 0.0);
    while (std::getline(ss, cell, ',') && col < kVisualDim) {
      t.xy[static_cast<size_t>(t.frames) * kVisualDim + col] = std::stod(cell);
      ++col;
    }
    if (col != kVisualDim)
      throw std::runtime_error("landmarks csv row has wrong column count: " + path);
    ++t.frames;
  }
  return t;
}

void write_landmarks_csv(const std::string& path, const LandmarkTrack& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write landmarks csv: " + path);
  for (int j = 0; j < kNumLandmarks; ++j) {
    out << (j ? "," : "") << "x" << j << ",y" << j;
  }
  out << "\n";
  char buf[32];
  for (int f = 0; f < t.frames; ++f) {
    for (int j = 0; j < kVisualDim; ++j) {
      std::snprintf(buf, sizeof(buf), "%.10g", t.at(f, j));
      out << (j ? "," : "") << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("failed writing landmarks csv: " + path);
}

}  // namespace avsi
