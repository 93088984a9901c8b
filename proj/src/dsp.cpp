#include "avsi/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace avsi {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_finite(const Waveform& w) {
  for (double s : w.samples) {
    if (!std::isfinite(s)) throw std::invalid_argument("waveform has non-finite samples");
  }
}

}  // namespace

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  if (!is_pow2(static_cast<int>(n))) throw std::invalid_argument("fft size must be a power of two");
  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

std::vector<std::complex<double>> rfft(const std::vector<double>& x) {
  std::vector<std::complex<double>> a(x.begin(), x.end());
  fft_inplace(a, false);
  a.resize(x.size() / 2 + 1);
  return a;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& bins, int n) {
  if (static_cast<int>(bins.size()) != n / 2 + 1)
    throw std::invalid_argument("irfft: bin count does not match n/2+1");
  std::vector<std::complex<double>> a(static_cast<size_t>(n));
  for (int k = 0; k <= n / 2; ++k) a[k] = bins[k];
  for (int k = n / 2 + 1; k < n; ++k) a[k] = std::conj(bins[n - k]);
  fft_inplace(a, true);
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = a[i].real();
  return out;
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double s = std::sin(M_PI * (i + 0.5) / n);
    w[i] = s * s;
  }
  return w;
}

ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg) {
  if (w.samples.empty()) throw std::invalid_argument("stft: empty waveform");
  if (cfg.win > cfg.fft_size || cfg.hop > cfg.win)
    throw std::invalid_argument("stft: require hop <= win <= fft_size");
  check_finite(w);

  const int len = w.size();
  const int frames = (len + cfg.hop - 1) / cfg.hop;  // ceil(len/hop)
  const int bins = cfg.fft_size / 2 + 1;
  const std::vector<double> win = hann_window(cfg.win);

  ComplexSpectrogram out(frames, bins);
  std::vector<double> frame(static_cast<size_t>(cfg.fft_size));
  for (int i = 0; i < frames; ++i) {
    const int start = i * cfg.hop;
    std::fill(frame.begin(), frame.end(), 0.0);
    const int avail = std::min(cfg.win, len - start);
    for (int j = 0; j < avail; ++j) frame[j] = w.samples[start + j] * win[j];
    std::vector<std::complex<double>> spec = rfft(frame);
    std::copy(spec.begin(), spec.end(), out.v.begin() + static_cast<size_t>(i) * bins);
  }
  return out;
}

Waveform istft(const ComplexSpectrogram& s, int original_len, const StftConfig& cfg) {
  if (s.bins != cfg.fft_size / 2 + 1)
    throw std::invalid_argument("istft: bin count does not match fft size");
  if (original_len > cfg.hop * s.frames + cfg.win)
    throw std::invalid_argument("istft: requested length exceeds frame coverage");

  const std::vector<double> win = hann_window(cfg.win);
  const int total = cfg.hop * (s.frames - 1) + cfg.win;
  std::vector<double> num(static_cast<size_t>(total), 0.0);
  std::vector<double> den(static_cast<size_t>(total), 0.0);

  std::vector<std::complex<double>> bins(static_cast<size_t>(s.bins));
  for (int i = 0; i < s.frames; ++i) {
    std::copy(s.v.begin() + static_cast<size_t>(i) * s.bins,
              s.v.begin() + static_cast<size_t>(i + 1) * s.bins, bins.begin());
    std::vector<double> frame = irfft(bins, cfg.fft_size);
    const int start = i * cfg.hop;
    for (int j = 0; j < cfg.win; ++j) {
      num[start + j] += win[j] * frame[j];
      den[start + j] += win[j] * win[j];
    }
  }

  Waveform out;
  out.sample_rate = kSampleRate;
  out.samples.assign(static_cast<size_t>(original_len), 0.0);
  const int covered = std::min(original_len, total);
  for (int n = 0; n < covered; ++n) {
    out.samples[n] = den[n] > 0.0 ? num[n] / den[n] : 0.0;
  }
  return out;
}

Spectrogram magnitude(const ComplexSpectrogram& s) {
  Spectrogram out(s.frames, s.bins, SpecScale::linear_magnitude);
  for (size_t i = 0; i < s.v.size(); ++i) out.v[i] = std::abs(s.v[i]);
  return out;
}

Spectrogram log_magnitude(const ComplexSpectrogram& s) {
  Spectrogram out(s.frames, s.bins, SpecScale::log_magnitude);
  for (size_t i = 0; i < s.v.size(); ++i) out.v[i] = std::log(std::abs(s.v[i]) + kLogFloor);
  return out;
}

NormStats fit_norm_stats(const std::vector<Spectrogram>& train_specs) {
  size_t count = 0;
  double mean = 0.0;
  for (const Spectrogram& s : train_specs) {
    if (s.scale != SpecScale::log_magnitude)
      throw std::invalid_argument("fit_norm_stats: expects log_magnitude spectrograms");
    for (double x : s.v) {
      ++count;
      mean += x;
    }
  }
  if (count < 2) throw std::invalid_argument("fit_norm_stats: need at least 2 bins");
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (const Spectrogram& s : train_specs) {
    for (double x : s.v) var += (x - mean) * (x - mean);
  }
  var /= static_cast<double>(count);  // population variance
  if (var <= 0.0) throw std::invalid_argument("fit_norm_stats: zero variance input");
  return NormStats{mean, std::sqrt(var)};
}

Spectrogram normalize(const Spectrogram& s, const NormStats& ns) {
  if (s.scale != SpecScale::log_magnitude)
    throw std::invalid_argument("normalize: expects log_magnitude input");
  Spectrogram out = s;
  out.scale = SpecScale::normalized_log;
  for (double& x : out.v) x = (x - ns.mean) / ns.std;
  return out;
}

Spectrogram denormalize(const Spectrogram& s, const NormStats& ns) {
  if (s.scale != SpecScale::normalized_log)
    throw std::invalid_argument("denormalize: expects normalized_log input");
  Spectrogram out = s;
  out.scale = SpecScale::log_magnitude;
  for (double& x : out.v) x = x * ns.std + ns.mean;
  return out;
}

ComplexSpectrogram reconstruct_phase(const Spectrogram& mag,
                                     const ComplexSpectrogram& observed,
                                     const BinaryMask& mask, int iters,
                                     const StftConfig& cfg,
                                     std::vector<double>* residual_trace) {
  if (mag.frames != observed.frames || mag.bins != observed.bins ||
      mag.frames != mask.frames || mag.bins != mask.bins)
    throw std::invalid_argument("reconstruct_phase: shape mismatch");
  if (iters <= 0) throw std::invalid_argument("reconstruct_phase: iters must be positive");

  const size_t n = mag.v.size();
  ComplexSpectrogram s(mag.frames, mag.bins);
  // init: reliable bins from observed, masked bins at zero phase
  for (size_t i = 0; i < n; ++i) {
    s.v[i] = mask.v[i] ? std::complex<double>(mag.v[i], 0.0) : observed.v[i];
  }

  const int len = cfg.hop * mag.frames;
  for (int it = 0; it < iters; ++it) {
    Waveform x = istft(s, len, cfg);
    ComplexSpectrogram proj = stft(x, cfg);
    if (residual_trace) {
      double r = 0.0;
      for (size_t i = 0; i < n; ++i) {
        double d = std::abs(proj.v[i]) - mag.v[i];
        r += d * d;
      }
      residual_trace->push_back(std::sqrt(r));
    }
    // magnitude projection on masked bins, clamp reliable bins to observed
    for (size_t i = 0; i < n; ++i) {
      if (!mask.v[i]) {
        s.v[i] = observed.v[i];
        continue;
      }
      double m = std::abs(proj.v[i]);
      s.v[i] = m > 0.0 ? proj.v[i] * (mag.v[i] / m)
                       : std::complex<double>(mag.v[i], 0.0);
    }
  }
  return s;
}

Waveform resample(const Waveform& w, int target_rate) {
  if (w.sample_rate <= 0 || target_rate <= 0)
    throw std::invalid_argument("resample: rates must be positive");
  if (w.sample_rate == target_rate) return w;
  check_finite(w);

  const double ratio = static_cast<double>(target_rate) / w.sample_rate;
  const int out_len = static_cast<int>(std::floor(w.samples.size() * ratio));
  // lowpass at 0.45 of the smaller Nyquist, in input-sample units
  const double fc = 0.45 * std::min(1.0, ratio);
  const int half_width = static_cast<int>(std::ceil(16.0 / fc));

  Waveform out;
  out.sample_rate = target_rate;
  out.samples.assign(static_cast<size_t>(out_len), 0.0);
  const int in_len = w.size();
  for (int m = 0; m < out_len; ++m) {
    const double center = m / ratio;
    const int lo = std::max(0, static_cast<int>(std::ceil(center)) - half_width);
    const int hi = std::min(in_len - 1, static_cast<int>(std::floor(center)) + half_width);
    double acc = 0.0;
    for (int ni = lo; ni <= hi; ++ni) {
      const double t = ni - center;
      const double sinc = t == 0.0 ? 1.0 : std::sin(2.0 * M_PI * fc * t) / (2.0 * M_PI * fc * t);
      const double hann = 0.5 * (1.0 + std::cos(M_PI * t / half_width));
      acc += w.samples[ni] * 2.0 * fc * sinc * hann;
    }
    out.samples[m] = acc;
  }
  return out;
}

}  // namespace avsi
