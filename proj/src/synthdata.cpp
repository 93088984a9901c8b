#include "avsi/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "avsi/corruption.hpp"
#include "avsi/manifest.hpp"
#include "avsi/rng.hpp"
#include "avsi/wav.hpp"

namespace avsi {

namespace {

constexpr double kPhoneMinMs = 150.0;
constexpr double kPhoneMaxMs = 400.0;
constexpr double kSpeechBudgetMs = 2950.0;  // leaves a trailing margin
constexpr double kNoiseAmp = 1.5e-3;  // ambient floor, well below the comb bed
constexpr double kToneAmp = 0.30;
constexpr double kCombAmp = 0.009;  // per-component level of the frozen comb
constexpr double kRampSec = 0.005;
constexpr double kBlendSec = 0.030;   // mouth crossfade half-width at joins
constexpr double kNeutralW = 0.120;
constexpr double kNeutralH = 0.020;
constexpr double kMouthRadius = 0.085;
constexpr double kMouthYScale = 0.55;

double phone_angle(int p) {
  return (5.0 + 80.0 * p / (kNumPhones - 1)) * M_PI / 180.0;
}

struct Segment {
  int phone = -1;  // -1 = silence
  double start_s = 0.0;
  double end_s = 0.0;
};

// Mouth (width, height) at time t, openness oscillating within a phone.
std::pair<double, double> raw_mouth(const std::vector<Segment>& segs, double t) {
  for (const auto& s : segs) {
    if (t >= s.start_s && t < s.end_s && s.phone >= 0) {
      const auto [tw, th] = mouth_template(s.phone);
      const double k = 0.9 + 0.1 * std::sin(2.0 * M_PI * 4.3 * (t - s.start_s) + s.phone);
      return {kNeutralW + k * (tw - kNeutralW), kNeutralH + k * (th - kNeutralH)};
    }
  }
  return {kNeutralW, kNeutralH};
}

std::pair<double, double> mouth_at(const std::vector<Segment>& segs, double t, double total_s) {
  // crossfade across the nearest segment boundary
  for (const auto& s : segs) {
    for (double b : {s.start_s, s.end_s}) {
      if (std::abs(t - b) < kBlendSec) {
        const double t0 = std::max(0.0, b - kBlendSec);
        const double t1 = std::min(total_s, b + kBlendSec);
        const auto [w0, h0] = raw_mouth(segs, t0);
        const auto [w1, h1] = raw_mouth(segs, t1 - 1e-9);
        const double a = (t - t0) / (t1 - t0);
        return {w0 + a * (w1 - w0), h0 + a * (h1 - h0)};
      }
    }
  }
  return raw_mouth(segs, t);
}

// Static face geometry for a given mouth shape; normalized [0,1], y down.
// accent_pt (landmark index) gets its offset from the mouth center scaled by
// 1+accent: each phone recruits its own outer-lip point, giving phones
// visually distinct articulation patterns like real speech does.
void face_landmarks(double mouth_w, double mouth_h, double* xy /*136*/, int accent_pt = -1,
                    double accent = 0.0) {
  auto set = [&](int i, double x, double y) {
    xy[2 * i] = x;
    xy[2 * i + 1] = y;
  };
  // jaw 0-16: elliptic arc ear-chin-ear
  for (int i = 0; i <= 16; ++i) {
    const double phi = M_PI + M_PI * i / 16.0;
    set(i, 0.5 + 0.28 * std::cos(phi), 0.40 - 0.38 * std::sin(phi));
  }
  // eyebrows 17-21 / 22-26
  for (int i = 0; i < 5; ++i) {
    const double arc = 0.02 * std::sin(M_PI * i / 4.0);
    set(17 + i, 0.30 + 0.035 * i, 0.30 - arc);
    set(22 + i, 0.56 + 0.035 * i, 0.30 - 0.02 * std::sin(M_PI * (4 - i) / 4.0));
    (void)arc;
  }
  // nose bridge 27-30 and base 31-35
  for (int i = 0; i < 4; ++i) set(27 + i, 0.5, 0.38 + 0.045 * i);
  for (int i = 0; i < 5; ++i)
    set(31 + i, 0.44 + 0.03 * i, 0.555 + 0.008 * std::sin(M_PI * i / 4.0));
  // eyes 36-41 / 42-47: hexagons
  for (int i = 0; i < 6; ++i) {
    const double a = M_PI * i / 3.0;
    set(36 + i, 0.37 + 0.045 * std::cos(a + M_PI), 0.38 - 0.018 * std::sin(a + M_PI));
    set(42 + i, 0.63 + 0.045 * std::cos(a + M_PI), 0.38 - 0.018 * std::sin(a + M_PI));
  }
  // mouth: outer 48-59 (12 pts), inner 60-67 (8 pts, 0.55 scale)
  const double cx = 0.5, cy = 0.62;
  for (int k = 0; k < 12; ++k) {
    const double psi = M_PI - k * (M_PI / 6.0);
    const double s = (48 + k == accent_pt) ? 1.0 + accent : 1.0;
    set(48 + k, cx + s * 0.5 * mouth_w * std::cos(psi), cy - s * 0.5 * mouth_h * std::sin(psi));
  }
  for (int k = 0; k < 8; ++k) {
    const double psi = M_PI - k * (M_PI / 4.0);
    set(60 + k, cx + 0.275 * mouth_w * std::cos(psi), cy - 0.275 * mouth_h * std::sin(psi));
  }
}

}  // namespace

std::vector<std::string> phone_symbols() {
  return {"aa", "eh", "iy", "ow", "uw", "mm", "ss", "sh", "ff", "kk", "tt", "rr"};
}

double phone_f0(int p) { return 95.0 + 12.0 * p; }
double phone_formant(int p) { return 350.0 + 290.0 * p; }

std::pair<double, double> mouth_template(int p) {
  if (p < 0) return {kNeutralW, kNeutralH};
  if (p >= kNumPhones) throw std::invalid_argument("mouth_template: phone out of range");
  const double th = phone_angle(p);
  return {kNeutralW + kMouthRadius * std::cos(th),
          kNeutralH + kMouthYScale * kMouthRadius * std::sin(th)};
}

int decode_mouth(double width, double height) {
  const double dw = width - kNeutralW;
  const double dh = (height - kNeutralH) / kMouthYScale;
  if (std::hypot(dw, dh) < 0.35 * kMouthRadius) return -1;
  const double ang = std::atan2(dh, dw);
  int best = 0;
  double best_diff = 1e300;
  for (int p = 0; p < kNumPhones; ++p) {
    const double diff = std::abs(ang - phone_angle(p));
    if (diff < best_diff) {
      best_diff = diff;
      best = p;
    }
  }
  return best;
}

SynthUtterance synth_utterance(int phone_count, uint64_t seed) {
  if (phone_count < 3 || phone_count > kNumPhones)
    throw std::invalid_argument("synth_utterance: phone_count outside [3, 12]");

  SynthUtterance utt;
  const int total_samples = static_cast<int>(kUtteranceSec * kSampleRate);
  const double total_s = kUtteranceSec;

  // phone sequence and durations
  Rng plan_rng(seed_combine(seed, "plan"));
  utt.phones.resize(static_cast<size_t>(phone_count));
  for (auto& p : utt.phones) p = plan_rng.uniform_int(0, kNumPhones - 1);
  std::vector<double> dur_ms(static_cast<size_t>(phone_count));
  double total_ms = 0.0;
  for (auto& d : dur_ms) {
    d = plan_rng.uniform(kPhoneMinMs, kPhoneMaxMs);
    total_ms += d;
  }
  if (total_ms > kSpeechBudgetMs) {
    // compress the excess above the per-phone floor so everything fits
    const double floor_total = kPhoneMinMs * phone_count;
    const double scale = (kSpeechBudgetMs - floor_total) / (total_ms - floor_total);
    for (auto& d : dur_ms) d = kPhoneMinMs + (d - kPhoneMinMs) * scale;
  }

  std::vector<Segment> segs;
  double cursor = 0.0;
  for (int i = 0; i < phone_count; ++i) {
    Segment s;
    s.phone = utt.phones[static_cast<size_t>(i)];
    s.start_s = cursor;
    cursor += dur_ms[static_cast<size_t>(i)] / 1000.0;
    s.end_s = cursor;
    segs.push_back(s);
    utt.segments.emplace_back(s.start_s * 1000.0, s.end_s * 1000.0);
  }

  // audio: harmonic stack plus a frozen broadband comb per segment, over a
  // low noise floor. The comb replaces white "breath" noise: its amplitudes
  // and phases are fixed functions of the phone, so the log-magnitude of
  // every bin is reproducible across utterances (white noise would leave most
  // bins fluctuating by a fraction of their dynamic range frame to frame).
  utt.wav.sample_rate = kSampleRate;
  utt.wav.samples.assign(static_cast<size_t>(total_samples), 0.0);
  Rng noise_rng(seed_combine(seed, "noise"));
  for (auto& s : utt.wav.samples) s = kNoiseAmp * noise_rng.normal(0.0, 1.0);

  constexpr double kGolden = 0.618033988749895;
  for (const auto& seg : segs) {
    const double f0 = phone_f0(seg.phone);
    const double formant = phone_formant(seg.phone);
    std::vector<double> amp, freq, phase;
    double amp_sum = 0.0;
    for (int h = 1; h * f0 <= 4200.0; ++h) {
      const double d = (h * f0 - formant) / 180.0;
      amp.push_back(std::exp(-d * d) + 0.02 / h);
      freq.push_back(h * f0);
      phase.push_back(2.0 * M_PI * std::fmod(kGolden * h * (seg.phone + 1), 1.0));
      amp_sum += amp.back();
    }
    for (auto& a : amp) a *= kToneAmp / amp_sum;
    // comb spacing ~2 bins keeps every bin lit through the window mainlobe
    for (int j = 1; 62.5 * j <= 7800.0; ++j) {
      const double u = std::fmod(kGolden * j * (seg.phone + 1), 1.0);
      amp.push_back(kCombAmp * (0.35 + 0.65 * u));
      freq.push_back(62.5 * j);
      phase.push_back(2.0 * M_PI * std::fmod(kGolden * kGolden * j * (seg.phone + 2), 1.0));
    }
    const int n0 = static_cast<int>(std::ceil(seg.start_s * kSampleRate));
    const int n1 = std::min(total_samples, static_cast<int>(seg.end_s * kSampleRate));
    for (int n = n0; n < n1; ++n) {
      const double t = n / static_cast<double>(kSampleRate) - seg.start_s;
      const double t_left = (seg.end_s - seg.start_s) - t;
      const double ramp = std::min({1.0, t / kRampSec, t_left / kRampSec});
      double v = 0.0;
      for (size_t h = 0; h < amp.size(); ++h) {
        v += amp[h] * std::sin(2.0 * M_PI * freq[h] * t + phase[h]);
      }
      utt.wav.samples[static_cast<size_t>(n)] += ramp * v;
    }
  }

  // landmarks at 25 fps, frame centers (f + 0.5) / fps
  const int video_frames = static_cast<int>(std::lround(total_s * kVideoFps));
  utt.landmarks.frames = video_frames;
  utt.landmarks.xy.assign(static_cast<size_t>(video_frames) * kVisualDim, 0.0);
  Rng face_rng(seed_combine(seed, "face"));
  const double drift_px = face_rng.uniform(0.0, 2.0 * M_PI);
  const double drift_py = face_rng.uniform(0.0, 2.0 * M_PI);
  Rng jitter_rng(seed_combine(seed, "jitter"));
  auto phone_of = [&](double t) {
    for (const auto& s : segs) {
      if (t >= s.start_s && t < s.end_s) return s.phone;
    }
    return -1;
  };
  for (int f = 0; f < video_frames; ++f) {
    const double t = (f + 0.5) / kVideoFps;
    const auto [mw, mh] = mouth_at(segs, t, total_s);
    const int p = phone_of(t);
    const double accent = 0.18 * std::sin(2.0 * M_PI * 4.3 * t);
    double xy[kVisualDim];
    face_landmarks(mw, mh, xy, p >= 0 ? 48 + p : -1, accent);
    const double dx = 0.008 * std::sin(2.0 * M_PI * 0.23 * t + drift_px);
    const double dy = 0.008 * std::sin(2.0 * M_PI * 0.31 * t + drift_py);
    // tracker jitter stays well below the drift amplitude: standardization
    // rescales every motion channel to unit variance, so white noise on the
    // static points would otherwise dominate the feature matrix
    for (int j = 0; j < kNumLandmarks; ++j) {
      utt.landmarks.at(f, 2 * j) = xy[2 * j] + dx + 3e-5 * jitter_rng.normal(0.0, 1.0);
      utt.landmarks.at(f, 2 * j + 1) = xy[2 * j + 1] + dy + 3e-5 * jitter_rng.normal(0.0, 1.0);
    }
  }
  return utt;
}

DatasetPaths synth_dataset(const std::string& out_dir, int n_train, int n_val, int n_test,
                           uint64_t seed) {
  if (n_train < 1 || n_val < 1 || n_test < 1)
    throw std::invalid_argument("synth_dataset: all split sizes must be >= 1");

  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "wav");
  fs::create_directories(fs::path(out_dir) / "landmarks");

  DatasetPaths paths;
  paths.root = out_dir;
  paths.phones_file = (fs::path(out_dir) / "phones.txt").string();

  {
    std::ofstream os(paths.phones_file);
    if (!os) throw std::runtime_error("synth_dataset: cannot write phone dictionary");
    for (const auto& sym : phone_symbols()) os << sym << "\n";
  }

  const struct {
    const char* name;
    int count;
    std::string* manifest;
  } splits[] = {{"train", n_train, &paths.train_manifest},
                {"val", n_val, &paths.val_manifest},
                {"test", n_test, &paths.test_manifest}};

  for (const auto& split : splits) {
    const uint64_t split_seed = seed_combine(seed, split.name);
    std::vector<ManifestRecord> records;
    for (int i = 0; i < split.count; ++i) {
      char idbuf[32];
      std::snprintf(idbuf, sizeof(idbuf), "%s_%04d", split.name, i);
      const std::string id = idbuf;
      const uint64_t utt_seed = seed_combine(split_seed, id);

      Rng count_rng(seed_combine(utt_seed, "count"));
      const int phone_count = count_rng.uniform_int(3, kNumPhones);
      SynthUtterance utt = synth_utterance(phone_count, seed_combine(utt_seed, "utt"));
      utt.id = id;

      const std::string wav_rel = "wav/" + id + ".wav";
      const std::string lm_rel = "landmarks/" + id + ".csv";
      write_wav((fs::path(out_dir) / wav_rel).string(), utt.wav);
      write_landmarks_csv((fs::path(out_dir) / lm_rel).string(), utt.landmarks);

      ManifestRecord rec;
      rec.id = id;
      rec.wav = wav_rel;
      rec.phones = utt.phones;
      rec.landmarks = lm_rel;
      rec.gaps = sample_gap_plan(utt.wav.duration_ms(), seed_combine(utt_seed, "gaps"));
      records.push_back(std::move(rec));
    }
    const std::string manifest_path = (fs::path(out_dir) / (std::string(split.name) + ".jsonl")).string();
    write_manifest(manifest_path, records);
    *split.manifest = manifest_path;
  }
  return paths;
}

std::vector<std::string> read_phone_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("phone dictionary: cannot open '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  if (out.empty()) throw std::runtime_error("phone dictionary: '" + path + "' is empty");
  return out;
}

}  // namespace avsi
