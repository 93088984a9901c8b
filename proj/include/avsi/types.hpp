// Core domain types shared across the pipeline.
#ifndef AVSI_TYPES_HPP
#define AVSI_TYPES_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace avsi {

constexpr int kSampleRate = 16000;
constexpr int kFftSize = 512;
constexpr int kWinLength = 384;
constexpr int kHopLength = 192;
constexpr int kNumBins = kFftSize / 2 + 1;  // 257
constexpr double kHopMs = 1000.0 * kHopLength / kSampleRate;  // 12 ms
constexpr double kLogFloor = 1e-7;

struct Waveform {
  std::vector<double> samples;  // amplitudes in [-1, 1]
  int sample_rate = kSampleRate;

  int size() const { return static_cast<int>(samples.size()); }
  double duration_ms() const {
    return 1000.0 * static_cast<double>(samples.size()) / sample_rate;
  }
};

enum class SpecScale { linear_magnitude, log_magnitude, normalized_log };

// Real-valued frames x bins grid, row-major.
struct Spectrogram {
  int frames = 0;
  int bins = 0;
  std::vector<double> v;
  SpecScale scale = SpecScale::linear_magnitude;

  Spectrogram() = default;
  Spectrogram(int frames_, int bins_, SpecScale scale_, double fill = 0.0)
      : frames(frames_), bins(bins_),
        v(static_cast<size_t>(frames_) * bins_, fill), scale(scale_) {}

  double& at(int l, int k) { return v[static_cast<size_t>(l) * bins + k]; }
  double at(int l, int k) const { return v[static_cast<size_t>(l) * bins + k]; }
};

struct ComplexSpectrogram {
  int frames = 0;
  int bins = 0;
  std::vector<std::complex<double>> v;

  ComplexSpectrogram() = default;
  ComplexSpectrogram(int frames_, int bins_)
      : frames(frames_), bins(bins_),
        v(static_cast<size_t>(frames_) * bins_) {}

  std::complex<double>& at(int l, int k) {
    return v[static_cast<size_t>(l) * bins + k];
  }
  const std::complex<double>& at(int l, int k) const {
    return v[static_cast<size_t>(l) * bins + k];
  }
};

// frames x bins grid of {0,1}; gaps span whole frame columns.
struct BinaryMask {
  int frames = 0;
  int bins = 0;
  std::vector<uint8_t> v;

  BinaryMask() = default;
  BinaryMask(int frames_, int bins_, uint8_t fill = 0)
      : frames(frames_), bins(bins_),
        v(static_cast<size_t>(frames_) * bins_, fill) {}

  uint8_t& at(int l, int k) { return v[static_cast<size_t>(l) * bins + k]; }
  uint8_t at(int l, int k) const { return v[static_cast<size_t>(l) * bins + k]; }
};

struct NormStats {
  double mean = 0.0;
  double std = 1.0;
};

// Per-audio-frame visual feature vectors (dim 136 for 68 landmarks).
struct VisualTrack {
  int frames = 0;
  int dim = 0;
  std::vector<double> v;

  VisualTrack() = default;
  VisualTrack(int frames_, int dim_, double fill = 0.0)
      : frames(frames_), dim(dim_),
        v(static_cast<size_t>(frames_) * dim_, fill) {}

  double& at(int l, int j) { return v[static_cast<size_t>(l) * dim + j]; }
  double at(int l, int j) const { return v[static_cast<size_t>(l) * dim + j]; }
};

using PhoneSequence = std::vector<int>;

}  // namespace avsi

#endif  // AVSI_TYPES_HPP
