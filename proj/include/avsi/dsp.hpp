// Waveform <-> time-frequency conversions: STFT, inverse STFT via weighted
// overlap-add, log-magnitude features, global normalization and iterative
// phase reconstruction with reliable-region clamping.
#ifndef AVSI_DSP_HPP
#define AVSI_DSP_HPP

#include <complex>
#include <vector>

#include "avsi/types.hpp"

namespace avsi {

struct StftConfig {
  int fft_size = kFftSize;
  int win = kWinLength;
  int hop = kHopLength;
};

// In-place radix-2 complex FFT (size must be a power of two).
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

// Real FFT: input length n (power of two), output n/2+1 bins.
std::vector<std::complex<double>> rfft(const std::vector<double>& x);

// Inverse of rfft: bins (n/2+1) -> real signal of length n.
std::vector<double> irfft(const std::vector<std::complex<double>>& bins, int n);

// Analysis/synthesis window: Hann shifted by half a sample,
// w[n] = sin^2(pi (n+0.5) / N). Strictly positive, so the overlap-add
// normalization buffer never vanishes and edge samples reconstruct exactly.
std::vector<double> hann_window(int n);

// Frames = ceil(len/hop); frame i covers samples [i*hop, i*hop+win) with
// zero right-padding, windowed and zero-padded to fft_size.
ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg = {});

// Weighted overlap-add inverse; output truncated to original_len.
Waveform istft(const ComplexSpectrogram& s, int original_len,
               const StftConfig& cfg = {});

// ln(|z| + eps), eps = kLogFloor.
Spectrogram log_magnitude(const ComplexSpectrogram& s);

Spectrogram magnitude(const ComplexSpectrogram& s);

// Scalar mean / population std over all bins of all spectrograms.
NormStats fit_norm_stats(const std::vector<Spectrogram>& train_specs);

Spectrogram normalize(const Spectrogram& s, const NormStats& ns);
Spectrogram denormalize(const Spectrogram& s, const NormStats& ns);

// Griffin-Lim with reliable-region clamping: masked (M=1) bins converge to
// `mag` with phases made consistent with the clamped reliable (M=0) bins,
// which are copied from `observed` at every iteration. The returned grid
// has magnitude exactly `mag` on masked bins and equals `observed` on
// reliable bins.
ComplexSpectrogram reconstruct_phase(const Spectrogram& mag,
                                     const ComplexSpectrogram& observed,
                                     const BinaryMask& mask, int iters = 100,
                                     const StftConfig& cfg = {},
                                     std::vector<double>* residual_trace = nullptr);

// Windowed-sinc resampler (Hann-windowed, zero-phase).
Waveform resample(const Waveform& w, int target_rate);

}  // namespace avsi

#endif  // AVSI_DSP_HPP
