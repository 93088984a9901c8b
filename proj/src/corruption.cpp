#include "avsi/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "avsi/rng.hpp"

namespace avsi {

namespace {

// Split `total` into `count` durations each >= kMinGapMs: reserve the floor,
// stick-break the remainder at count-1 uniform cut points.
std::vector<double> split_total(double total, int count, Rng& rng) {
  std::vector<double> cuts;
  const double excess = total - kMinGapMs * count;
  cuts.reserve(static_cast<size_t>(count) + 1);
  cuts.push_back(0.0);
  for (int i = 0; i < count - 1; ++i) cuts.push_back(rng.uniform(0.0, excess));
  cuts.push_back(excess);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> durations(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) durations[i] = kMinGapMs + (cuts[i + 1] - cuts[i]);
  return durations;
}

bool place_gaps(const std::vector<double>& durations, double utterance_ms,
                Rng& rng, std::vector<std::pair<double, double>>& out) {
  out.clear();
  for (double d : durations) {
    const double start = rng.uniform(0.0, utterance_ms - d);
    for (const auto& g : out) {
      if (start < g.first + g.second && g.first < start + d) return false;  // overlap
    }
    out.emplace_back(start, d);
  }
  return true;
}

}  // namespace

GapPlan sample_gap_plan(double utterance_ms, uint64_t rng_seed) {
  if (utterance_ms < 500.0)
    throw std::invalid_argument("sample_gap_plan: utterance shorter than 500 ms");
  Rng rng(rng_seed);

  const double max_total = std::min(kMaxTotalGapMs, 0.8 * utterance_ms);
  double total;
  do {
    total = rng.normal(900.0, 300.0);
  } while (total < kMinGapMs || total > max_total);

  int count = static_cast<int>(rng.uniform_int(1, 8));
  for (int attempt = 0; attempt < 1000 && total / count < kMinGapMs; ++attempt) {
    count = static_cast<int>(rng.uniform_int(1, 8));
  }
  if (total / count < kMinGapMs) count = 1;

  GapPlan plan;
  while (count >= 1) {
    std::vector<double> durations = split_total(total, count, rng);
    bool placed = false;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      if (place_gaps(durations, utterance_ms, rng, plan.gaps)) {
        placed = true;
        break;
      }
    }
    if (placed) break;
    --count;  // overlap conflicts unresolvable at this count
  }
  std::sort(plan.gaps.begin(), plan.gaps.end());
  return plan;
}

GapPlan fixed_gap_plan(double utterance_ms, double gap_ms, uint64_t rng_seed) {
  if (gap_ms >= utterance_ms)
    throw std::invalid_argument("fixed_gap_plan: gap longer than utterance");
  Rng rng(rng_seed);
  GapPlan plan;
  plan.gaps.emplace_back(rng.uniform(0.0, utterance_ms - gap_ms), gap_ms);
  return plan;
}

BinaryMask plan_to_mask(const GapPlan& plan, int frames, int bins, double hop_ms) {
  const double span = frames * hop_ms;
  for (const auto& g : plan.gaps) {
    if (g.first + g.second > span + 1e-9)
      throw std::invalid_argument("plan_to_mask: plan does not fit in frame span");
  }
  BinaryMask m(frames, bins, 0);
  for (int l = 0; l < frames; ++l) {
    if (plan.covers((l + 0.5) * hop_ms)) {
      for (int k = 0; k < bins; ++k) m.at(l, k) = 1;
    }
  }
  return m;
}

Spectrogram apply_mask(const Spectrogram& s, const BinaryMask& m) {
  if (s.frames != m.frames || s.bins != m.bins)
    throw std::invalid_argument("apply_mask: shape mismatch");
  Spectrogram out = s;
  for (size_t i = 0; i < out.v.size(); ++i) {
    if (m.v[i]) out.v[i] = 0.0;
  }
  return out;
}

}  // namespace avsi
