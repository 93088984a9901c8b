// Full inpainting model: masked-spectrogram composition, MSE / multi-task
// objectives, the mini-batch training loop with early stopping, checkpoint
// packing and waveform-to-waveform inference.
#ifndef AVSI_INPAINT_HPP
#define AVSI_INPAINT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "avsi/checkpoint.hpp"
#include "avsi/corruption.hpp"
#include "avsi/features.hpp"
#include "avsi/manifest.hpp"
#include "avsi/nn.hpp"
#include "avsi/types.hpp"

namespace avsi {

// Model rows: audio-only / audio-visual, each with or without the CTC
// phone-recognition head trained jointly.
enum class Variant { a, av, a_mtl, av_mtl };

bool variant_uses_visual(Variant v);
bool variant_uses_mtl(Variant v);
std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);

struct TrainConfig {
  Variant variant = Variant::av;
  int hidden = 250;
  int layers = 3;
  int batch_size = 8;
  double lr = 1e-3;
  double lambda = 1e-3;  // CTC weight in the joint loss
  int patience = 5;
  int max_epochs = 50;
  double clip_norm = 5.0;
  uint64_t seed = 1;
  int num_phones = 0;  // dictionary size, required for MTL variants
  int jobs = 1;
};

// Loss-ready training example. `target` is the normalized log-magnitude of
// the clean utterance; `masked` is the same grid with masked bins zeroed.
struct Example {
  std::string id;
  Spectrogram target;
  Spectrogram masked;
  BinaryMask mask;
  VisualTrack visual;  // empty for audio-only variants
  PhoneSequence phones;
};

// Pre-normalization example, used to fit dataset statistics.
struct RawExample {
  std::string id;
  Spectrogram logmag;  // clean log-magnitude
  BinaryMask mask;
  VisualTrack motion;  // upsampled landmark motion, pre-standardization
  PhoneSequence phones;
};

struct FeatureNorms {
  NormStats audio;
  FeatureStats visual;  // empty vectors when no visual stream
};

RawExample load_raw_example(const ManifestRecord& rec, const std::string& manifest_path,
                            bool use_visual);
std::vector<RawExample> load_raw_dataset(const std::string& manifest_path, bool use_visual);

FeatureNorms fit_norms(const std::vector<RawExample>& train, bool use_visual);
Example finalize_example(const RawExample& raw, const FeatureNorms& norms, bool use_visual);

struct InpaintOutput {
  Spectrogram yhat;          // composed output, Eq. 1
  Spectrogram net;           // raw network output O
  std::optional<Mat> phone_logits;  // classes x frames when the head exists
};

// O = FC(BLSTM stack(concat(X, V))); yhat = O on masked bins, X elsewhere
// (reliable bins are copied, so they match X bit-exactly).
InpaintOutput forward_inpaint(const ModelParams& params, const Spectrogram& X,
                              const BinaryMask& M, const VisualTrack* V,
                              ModelCache* cache = nullptr);

// Mean squared difference over every bin.
double mse_loss(const Spectrogram& yhat, const Spectrogram& y);

// mse_loss + lambda * ctc_loss(softmax(phone_logits), phones).
double mtl_loss(const Spectrogram& yhat, const Spectrogram& y, const Mat& phone_logits,
                const PhoneSequence& phones, double lambda);

// Early stopping on a per-epoch validation value: stop after `patience`
// consecutive epochs without strict improvement.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}

  // Records one epoch; returns true when training should stop.
  bool record(double value);
  int best_epoch() const { return best_epoch_; }  // 1-based
  double best_value() const { return best_value_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  int since_best_ = 0;
  double best_value_ = 0.0;
  bool has_best_ = false;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_mse = 0.0;
  double val_ctc = 0.0;
};

struct TrainResult {
  ModelParams params;  // best-validation snapshot
  FeatureNorms norms;
  std::vector<EpochStats> log;
  int best_epoch = 0;
  double best_val_mse = 0.0;
  double best_val_ctc = 0.0;
};

// Mini-batch Adam training with gradient clipping; model selection and
// early stopping by validation MSE. `progress`, when set, gets one line
// per epoch.
TrainResult train(const std::vector<RawExample>& train_set,
                  const std::vector<RawExample>& val_set, const TrainConfig& cfg,
                  std::ostream* progress = nullptr);

// CTC-only training of a phone recognizer on clean (unmasked) features;
// early stopping on validation CTC loss.
struct RecognizerConfig {
  int hidden = 250;
  int layers = 2;
  int batch_size = 8;
  double lr = 1e-3;
  int patience = 5;
  int max_epochs = 50;
  double clip_norm = 5.0;
  uint64_t seed = 1;
  int num_phones = 0;
  int jobs = 1;
};

TrainResult train_recognizer(const std::vector<RawExample>& train_set,
                             const std::vector<RawExample>& val_set,
                             const RecognizerConfig& cfg, std::ostream* progress = nullptr);

void write_metrics_csv(const std::string& path, const std::vector<EpochStats>& log);

// Checkpoint packing. `kind` distinguishes inpainting models from the
// evaluation recognizer.
struct InpaintModel {
  Variant variant = Variant::a;
  ModelParams params;
  FeatureNorms norms;
  int num_phones = 0;
};

struct RecognizerModel {
  ModelParams params;
  NormStats norm;
  int num_phones = 0;
};

void save_inpaint_model(const std::string& path, const InpaintModel& m);
InpaintModel load_inpaint_model(const std::string& path);
void save_recognizer_model(const std::string& path, const RecognizerModel& m);
RecognizerModel load_recognizer_model(const std::string& path);

// Waveform-domain corruption: zeroes every sample inside a gap.
Waveform zero_gaps(const Waveform& w, const GapPlan& plan);

// stft -> log magnitude -> normalize -> mask -> network -> denormalize ->
// magnitude -> phase reconstruction clamped to reliable bins -> istft.
// Reliable time regions match the input within the istft round-trip error.
Waveform infer(const InpaintModel& model, const Waveform& corrupted, const GapPlan& plan,
               const LandmarkTrack* landmarks, int phase_iters = 100);

// Decode the phone sequence of a clean waveform with the recognizer.
PhoneSequence recognize(const RecognizerModel& model, const Waveform& w, int beam_width = 20);

}  // namespace avsi

#endif  // AVSI_INPAINT_HPP
