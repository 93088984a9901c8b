// Stochastic gap generation and binary time-frequency masking.
// Total lost duration ~ Normal(900 ms, 300 ms), split over 1..8 gaps of at
// least 36 ms each, total capped at 2400 ms; gaps are whole time columns.
#ifndef AVSI_CORRUPTION_HPP
#define AVSI_CORRUPTION_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "avsi/types.hpp"

namespace avsi {

constexpr double kMinGapMs = 36.0;
constexpr double kMaxTotalGapMs = 2400.0;

struct GapPlan {
  std::vector<std::pair<double, double>> gaps;  // (start_ms, duration_ms)

  double total_ms() const {
    double t = 0.0;
    for (const auto& g : gaps) t += g.second;
    return t;
  }
  bool covers(double t_ms) const {
    for (const auto& g : gaps) {
      if (t_ms >= g.first && t_ms < g.first + g.second) return true;
    }
    return false;
  }
};

GapPlan sample_gap_plan(double utterance_ms, uint64_t rng_seed);

// Single gap of fixed length, uniformly placed.
GapPlan fixed_gap_plan(double utterance_ms, double gap_ms, uint64_t rng_seed);

// Frame column l is masked iff its center time (l+0.5)*hop_ms falls inside
// any gap interval; masked frames cover all bins.
BinaryMask plan_to_mask(const GapPlan& plan, int frames, int bins,
                        double hop_ms = kHopMs);

Spectrogram apply_mask(const Spectrogram& s, const BinaryMask& m);

}  // namespace avsi

#endif  // AVSI_CORRUPTION_HPP
