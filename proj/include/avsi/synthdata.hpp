// Deterministic synthetic audio-visual dataset: harmonic tone-stack
// "phones" with distinct fundamentals and formant peaks, plus a 68-point
// landmark track whose mouth shape encodes the active phone. Small enough
// to train on a desktop CPU, structured enough that visual context genuinely
// helps over long gaps.
#ifndef AVSI_SYNTHDATA_HPP
#define AVSI_SYNTHDATA_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "avsi/features.hpp"
#include "avsi/types.hpp"

namespace avsi {

constexpr int kNumPhones = 12;
constexpr double kUtteranceSec = 3.0;

std::vector<std::string> phone_symbols();  // "aa".."zz"-style two-letter codes

double phone_f0(int p);       // fundamental, Hz
double phone_formant(int p);  // dominant spectral peak, Hz

// Target mouth (width, height) for a phone; the neutral (silent) shape for
// p = -1. Targets fan out from neutral along distinct directions so shape
// identity survives the openness oscillation.
std::pair<double, double> mouth_template(int p);

// Nearest-template decode of a mouth configuration; -1 for near-neutral.
int decode_mouth(double width, double height);

struct SynthUtterance {
  std::string id;
  Waveform wav;  // kUtteranceSec at 16 kHz
  PhoneSequence phones;
  LandmarkTrack landmarks;  // 25 fps
  std::vector<std::pair<double, double>> segments;  // (start_ms, end_ms) per phone
};

// Renders one utterance with `phone_count` phones (3..12), fully determined
// by the seed.
SynthUtterance synth_utterance(int phone_count, uint64_t seed);

struct DatasetPaths {
  std::string root;
  std::string train_manifest;
  std::string val_manifest;
  std::string test_manifest;
  std::string phones_file;
};

// Writes WAVs, landmark CSVs, per-split JSONL manifests with sampled gap
// plans, and the phone dictionary. Split seeds are disjoint; regeneration
// with the same seed is byte-identical.
DatasetPaths synth_dataset(const std::string& out_dir, int n_train, int n_val, int n_test,
                           uint64_t seed);

// Reads a phone dictionary (one symbol per line); returns the symbols.
std::vector<std::string> read_phone_file(const std::string& path);

}  // namespace avsi

#endif  // AVSI_SYNTHDATA_HPP
