#include "avsi/inpaint.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "avsi/ctc.hpp"
#include "avsi/dsp.hpp"
#include "avsi/rng.hpp"
#include "avsi/wav.hpp"

namespace avsi {

namespace {

FramePosteriors posteriors_from_logits(const Mat& logits) {
  const Mat sm = softmax_cols(logits);
  FramePosteriors p;
  p.frames = static_cast<int>(sm.cols());
  p.classes = static_cast<int>(sm.rows());
  p.p.resize(static_cast<size_t>(p.frames) * p.classes);
  for (int t = 0; t < p.frames; ++t) {
    for (int k = 0; k < p.classes; ++k) p.p[static_cast<size_t>(t) * p.classes + k] = sm(k, t);
  }
  return p;
}

Mat audio_visual_input(const Spectrogram& X, const VisualTrack* V) {
  const int dim = X.bins + (V ? V->dim : 0);
  Mat input(dim, X.frames);
  for (int t = 0; t < X.frames; ++t) {
    for (int k = 0; k < X.bins; ++k) input(k, t) = X.at(t, k);
    if (V) {
      for (int j = 0; j < V->dim; ++j) input(X.bins + j, t) = V->at(t, j);
    }
  }
  return input;
}

}  // namespace

bool variant_uses_visual(Variant v) { return v == Variant::av || v == Variant::av_mtl; }
bool variant_uses_mtl(Variant v) { return v == Variant::a_mtl || v == Variant::av_mtl; }

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::a: return "a";
    case Variant::av: return "av";
    case Variant::a_mtl: return "a-mtl";
    case Variant::av_mtl: return "av-mtl";
  }
  throw std::logic_error("variant_name: bad enum");
}

Variant parse_variant(const std::string& name) {
  if (name == "a") return Variant::a;
  if (name == "av") return Variant::av;
  if (name == "a-mtl") return Variant::a_mtl;
  if (name == "av-mtl") return Variant::av_mtl;
  throw std::invalid_argument("unknown variant '" + name + "' (expected a, av, a-mtl, av-mtl)");
}

RawExample load_raw_example(const ManifestRecord& rec, const std::string& manifest_path,
                            bool use_visual) {
  RawExample raw;
  raw.id = rec.id;
  raw.phones = rec.phones;

  const Waveform w = read_wav(resolve_path(manifest_path, rec.wav));
  const ComplexSpectrogram spec = stft(w);
  raw.logmag = log_magnitude(spec);
  raw.mask = plan_to_mask(rec.gaps, raw.logmag.frames, raw.logmag.bins);

  if (use_visual) {
    if (rec.landmarks.empty())
      throw std::runtime_error("utterance '" + rec.id + "' has no landmark track");
    const LandmarkTrack lm = read_landmarks_csv(resolve_path(manifest_path, rec.landmarks));
    raw.motion = upsample_visual(motion_vectors(lm), raw.logmag.frames);
  }
  return raw;
}

std::vector<RawExample> load_raw_dataset(const std::string& manifest_path, bool use_visual) {
  const auto records = read_manifest(manifest_path);
  std::vector<RawExample> out;
  out.reserve(records.size());
  for (const auto& rec : records) out.push_back(load_raw_example(rec, manifest_path, use_visual));
  return out;
}

FeatureNorms fit_norms(const std::vector<RawExample>& train, bool use_visual) {
  FeatureNorms norms;
  std::vector<Spectrogram> specs;
  specs.reserve(train.size());
  for (const auto& e : train) specs.push_back(e.logmag);
  norms.audio = fit_norm_stats(specs);
  if (use_visual) {
    std::vector<VisualTrack> tracks;
    tracks.reserve(train.size());
    for (const auto& e : train) tracks.push_back(e.motion);
    norms.visual = fit_feature_stats(tracks);
  }
  return norms;
}

Example finalize_example(const RawExample& raw, const FeatureNorms& norms, bool use_visual) {
  Example ex;
  ex.id = raw.id;
  ex.phones = raw.phones;
  ex.mask = raw.mask;
  ex.target = normalize(raw.logmag, norms.audio);
  ex.masked = apply_mask(ex.target, ex.mask);
  if (use_visual) ex.visual = standardize(raw.motion, norms.visual);
  return ex;
}

InpaintOutput forward_inpaint(const ModelParams& params, const Spectrogram& X,
                              const BinaryMask& M, const VisualTrack* V, ModelCache* cache) {
  if (X.frames != M.frames || X.bins != M.bins)
    throw std::invalid_argument("forward_inpaint: mask shape mismatch");
  if (V && V->frames != X.frames)
    throw std::invalid_argument("forward_inpaint: visual frame count mismatch");
  const ModelDims dims = params.dims();
  const int want = X.bins + (V ? V->dim : 0);
  if (dims.input_dim != want) {
    if (!V && dims.input_dim > X.bins)
      throw std::invalid_argument("forward_inpaint: model expects visual features but none given");
    throw std::invalid_argument("forward_inpaint: input width mismatch");
  }
  if (dims.inpaint_out != X.bins)
    throw std::invalid_argument("forward_inpaint: model output width mismatch");

  const Mat input = audio_visual_input(X, V);
  ModelOutput mo = model_forward(params, input, cache);

  InpaintOutput out;
  out.net = Spectrogram(X.frames, X.bins, X.scale);
  out.yhat = X;
  const Mat& O = *mo.inpaint;
  for (int t = 0; t < X.frames; ++t) {
    for (int k = 0; k < X.bins; ++k) {
      out.net.at(t, k) = O(k, t);
      if (M.at(t, k)) out.yhat.at(t, k) = O(k, t);
    }
  }
  out.phone_logits = std::move(mo.phone_logits);
  return out;
}

double mse_loss(const Spectrogram& yhat, const Spectrogram& y) {
  if (yhat.frames != y.frames || yhat.bins != y.bins)
    throw std::invalid_argument("mse_loss: shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < y.v.size(); ++i) {
    const double d = yhat.v[i] - y.v[i];
    acc += d * d;
  }
  return acc / static_cast<double>(y.v.size());
}

double mtl_loss(const Spectrogram& yhat, const Spectrogram& y, const Mat& phone_logits,
                const PhoneSequence& phones, double lambda) {
  return mse_loss(yhat, y) + lambda * ctc_loss(posteriors_from_logits(phone_logits), phones);
}

bool EarlyStopper::record(double value) {
  ++epoch_;
  if (!has_best_ || value < best_value_) {
    best_value_ = value;
    best_epoch_ = epoch_;
    since_best_ = 0;
    has_best_ = true;
  } else {
    ++since_best_;
  }
  return since_best_ >= patience_;
}

namespace {

enum class Mode { inpaint, recognizer };

struct ItemEval {
  double loss = 0.0;  // objective actually optimized
  double mse = 0.0;
  double ctc = 0.0;
  ModelParams grads;
};

// Loss and (optionally) gradients for one utterance.
ItemEval eval_item(Mode mode, const ModelParams& params, const Example& ex, double lambda,
                   bool use_visual, bool want_grads) {
  ItemEval r;
  ModelCache cache;
  ModelCache* cache_ptr = want_grads ? &cache : nullptr;

  if (mode == Mode::inpaint) {
    const VisualTrack* V = use_visual ? &ex.visual : nullptr;
    InpaintOutput out = forward_inpaint(params, ex.masked, ex.mask, V, cache_ptr);
    r.mse = mse_loss(out.yhat, ex.target);
    r.loss = r.mse;

    Mat d_logits;
    if (out.phone_logits) {
      CtcGrad cg = ctc_grad(*out.phone_logits, ex.phones);
      r.ctc = cg.loss;
      r.loss += lambda * cg.loss;
      if (want_grads) d_logits = lambda * cg.d_logits;
    }
    if (want_grads) {
      const double n = static_cast<double>(ex.target.v.size());
      Mat d_net = Mat::Zero(ex.target.bins, ex.target.frames);
      for (int t = 0; t < ex.target.frames; ++t) {
        for (int k = 0; k < ex.target.bins; ++k) {
          if (ex.mask.at(t, k))
            d_net(k, t) = 2.0 * (out.yhat.at(t, k) - ex.target.at(t, k)) / n;
        }
      }
      r.grads = model_backward(params, cache, &d_net,
                               out.phone_logits ? &d_logits : nullptr);
    }
  } else {
    // recognizer: clean features in, CTC out
    const Mat input = audio_visual_input(ex.target, nullptr);
    ModelOutput mo = model_forward(params, input, cache_ptr);
    if (!mo.phone_logits) throw std::logic_error("recognizer model lacks a phone head");
    CtcGrad cg = ctc_grad(*mo.phone_logits, ex.phones);
    r.ctc = cg.loss;
    r.loss = cg.loss;
    if (want_grads) {
      r.grads = model_backward(params, cache, nullptr, &cg.d_logits);
    }
  }
  return r;
}

// Evaluates items [0, n) with a fixed-order reduction regardless of thread
// count, so results are independent of scheduling.
std::vector<ItemEval> eval_items(Mode mode, const ModelParams& params,
                                 const std::vector<const Example*>& items, double lambda,
                                 bool use_visual, bool want_grads, int jobs) {
  std::vector<ItemEval> results(items.size());
  const int n = static_cast<int>(items.size());
  const int workers = std::max(1, std::min(jobs, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i)
      results[static_cast<size_t>(i)] =
          eval_item(mode, params, *items[static_cast<size_t>(i)], lambda, use_visual, want_grads);
    return results;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        results[static_cast<size_t>(i)] =
            eval_item(mode, params, *items[static_cast<size_t>(i)], lambda, use_visual, want_grads);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return results;
}

struct LoopConfig {
  Mode mode = Mode::inpaint;
  ModelDims dims;
  bool use_visual = false;
  double lambda = 0.0;
  int batch_size = 8;
  double lr = 1e-3;
  double clip_norm = 5.0;
  int patience = 5;
  int max_epochs = 50;
  uint64_t seed = 1;
  int jobs = 1;
  bool stop_on_ctc = false;  // early-stopping metric: val CTC instead of val MSE
};

TrainResult run_training(const LoopConfig& cfg, const std::vector<Example>& train_set,
                         const std::vector<Example>& val_set, std::ostream* progress) {
  if (train_set.empty() || val_set.empty())
    throw std::invalid_argument("train: empty train or validation set");

  TrainResult result;
  ModelParams params = init_model(cfg.dims, seed_combine(cfg.seed, "init"));
  AdamState adam = AdamState::create(params, cfg.lr);
  EarlyStopper stopper(cfg.patience);

  std::vector<size_t> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  const uint64_t shuffle_seed = seed_combine(cfg.seed, "shuffle");

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng rng(seed_combine(shuffle_seed, static_cast<uint64_t>(epoch)));
    rng.shuffle(order);

    double loss_sum = 0.0;
    size_t loss_count = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      std::vector<const Example*> items;
      items.reserve(end - start);
      for (size_t i = start; i < end; ++i) items.push_back(&train_set[order[i]]);

      const auto evals =
          eval_items(cfg.mode, params, items, cfg.lambda, cfg.use_visual, true, cfg.jobs);

      ModelParams grads = zeros_like(params);
      const double scale = 1.0 / static_cast<double>(items.size());
      for (const auto& ev : evals) {
        if (!std::isfinite(ev.loss))
          throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                   std::to_string(epoch));
        loss_sum += ev.loss;
        ++loss_count;
        accumulate(grads, ev.grads, scale);
      }
      clip_global_norm(grads, cfg.clip_norm);
      adam_step(adam, params, grads);
    }

    std::vector<const Example*> val_items;
    val_items.reserve(val_set.size());
    for (const auto& ex : val_set) val_items.push_back(&ex);
    const auto val_evals =
        eval_items(cfg.mode, params, val_items, cfg.lambda, cfg.use_visual, false, cfg.jobs);
    double val_mse = 0.0, val_ctc = 0.0;
    for (const auto& ev : val_evals) {
      val_mse += ev.mse;
      val_ctc += ev.ctc;
    }
    val_mse /= static_cast<double>(val_evals.size());
    val_ctc /= static_cast<double>(val_evals.size());
    if (!std::isfinite(val_mse) || !std::isfinite(val_ctc))
      throw std::runtime_error("training diverged: non-finite validation loss at epoch " +
                               std::to_string(epoch));

    EpochStats es;
    es.epoch = epoch;
    es.train_loss = loss_sum / static_cast<double>(loss_count);
    es.val_mse = val_mse;
    es.val_ctc = val_ctc;
    result.log.push_back(es);

    const double stop_metric = cfg.stop_on_ctc ? val_ctc : val_mse;
    const bool stop = stopper.record(stop_metric);
    if (stopper.best_epoch() == epoch) {
      result.params = params;
      result.best_epoch = epoch;
      result.best_val_mse = val_mse;
      result.best_val_ctc = val_ctc;
    }
    if (progress) {
      (*progress) << "epoch " << epoch << " train " << es.train_loss << " val_mse " << val_mse
                  << " val_ctc " << val_ctc << (stopper.best_epoch() == epoch ? "  (best)" : "")
                  << "\n";
    }
    if (stop) break;
  }
  return result;
}

std::vector<Example> finalize_all(const std::vector<RawExample>& raws, const FeatureNorms& norms,
                                  bool use_visual) {
  std::vector<Example> out;
  out.reserve(raws.size());
  for (const auto& r : raws) out.push_back(finalize_example(r, norms, use_visual));
  return out;
}

}  // namespace

TrainResult train(const std::vector<RawExample>& train_set, const std::vector<RawExample>& val_set,
                  const TrainConfig& cfg, std::ostream* progress) {
  if (train_set.empty() || val_set.empty())
    throw std::invalid_argument("train: empty train or validation set");
  if (variant_uses_mtl(cfg.variant) && cfg.num_phones <= 0)
    throw std::invalid_argument("train: MTL variant needs num_phones");

  const bool visual = variant_uses_visual(cfg.variant);
  FeatureNorms norms = fit_norms(train_set, visual);

  LoopConfig lc;
  lc.mode = Mode::inpaint;
  lc.dims.input_dim = train_set.front().logmag.bins + (visual ? train_set.front().motion.dim : 0);
  lc.dims.hidden = cfg.hidden;
  lc.dims.layers = cfg.layers;
  lc.dims.inpaint_out = train_set.front().logmag.bins;
  lc.dims.phone_out = variant_uses_mtl(cfg.variant) ? cfg.num_phones + 1 : 0;
  lc.use_visual = visual;
  lc.lambda = cfg.lambda;
  lc.batch_size = cfg.batch_size;
  lc.lr = cfg.lr;
  lc.clip_norm = cfg.clip_norm;
  lc.patience = cfg.patience;
  lc.max_epochs = cfg.max_epochs;
  lc.seed = cfg.seed;
  lc.jobs = cfg.jobs;
  lc.stop_on_ctc = false;

  TrainResult result = run_training(lc, finalize_all(train_set, norms, visual),
                                    finalize_all(val_set, norms, visual), progress);
  result.norms = norms;
  return result;
}

TrainResult train_recognizer(const std::vector<RawExample>& train_set,
                             const std::vector<RawExample>& val_set, const RecognizerConfig& cfg,
                             std::ostream* progress) {
  if (train_set.empty() || val_set.empty())
    throw std::invalid_argument("train_recognizer: empty train or validation set");
  if (cfg.num_phones <= 0) throw std::invalid_argument("train_recognizer: needs num_phones");

  FeatureNorms norms = fit_norms(train_set, false);

  LoopConfig lc;
  lc.mode = Mode::recognizer;
  lc.dims.input_dim = train_set.front().logmag.bins;
  lc.dims.hidden = cfg.hidden;
  lc.dims.layers = cfg.layers;
  lc.dims.inpaint_out = 0;
  lc.dims.phone_out = cfg.num_phones + 1;
  lc.use_visual = false;
  lc.lambda = 0.0;
  lc.batch_size = cfg.batch_size;
  lc.lr = cfg.lr;
  lc.clip_norm = cfg.clip_norm;
  lc.patience = cfg.patience;
  lc.max_epochs = cfg.max_epochs;
  lc.seed = cfg.seed;
  lc.jobs = cfg.jobs;
  lc.stop_on_ctc = true;

  TrainResult result = run_training(lc, finalize_all(train_set, norms, false),
                                    finalize_all(val_set, norms, false), progress);
  result.norms = norms;
  return result;
}

void write_metrics_csv(const std::string& path, const std::vector<EpochStats>& log) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("metrics log: cannot open '" + path + "'");
  os << "epoch,train_loss,val_mse,val_ctc\n";
  char buf[160];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g\n", e.epoch, e.train_loss, e.val_mse,
                  e.val_ctc);
    os << buf;
  }
}

namespace {

constexpr double kKindInpaint = 1.0;
constexpr double kKindRecognizer = 2.0;

void pack_params(Checkpoint& ckpt, const ModelParams& params) {
  for (size_t l = 0; l < params.lstm.size(); ++l) {
    const std::string base = "lstm" + std::to_string(l);
    const LstmLayerParams& layer = params.lstm[l];
    ckpt.add_matrix(base + "/fwd/W", layer.fwd.W);
    ckpt.add_matrix(base + "/fwd/U", layer.fwd.U);
    ckpt.add_vector(base + "/fwd/b", layer.fwd.b);
    ckpt.add_matrix(base + "/bwd/W", layer.bwd.W);
    ckpt.add_matrix(base + "/bwd/U", layer.bwd.U);
    ckpt.add_vector(base + "/bwd/b", layer.bwd.b);
  }
  if (params.head_inpaint) {
    ckpt.add_matrix("head_inpaint/W", params.head_inpaint->W);
    ckpt.add_vector("head_inpaint/b", params.head_inpaint->b);
  }
  if (params.head_phone) {
    ckpt.add_matrix("head_phone/W", params.head_phone->W);
    ckpt.add_vector("head_phone/b", params.head_phone->b);
  }
}

ModelParams unpack_params(const Checkpoint& ckpt) {
  ModelParams params;
  for (int l = 0;; ++l) {
    const std::string base = "lstm" + std::to_string(l);
    if (!ckpt.has(base + "/fwd/W")) break;
    LstmLayerParams layer;
    layer.fwd.W = ckpt.matrix(base + "/fwd/W");
    layer.fwd.U = ckpt.matrix(base + "/fwd/U");
    layer.fwd.b = ckpt.vector(base + "/fwd/b");
    layer.bwd.W = ckpt.matrix(base + "/bwd/W");
    layer.bwd.U = ckpt.matrix(base + "/bwd/U");
    layer.bwd.b = ckpt.vector(base + "/bwd/b");
    params.lstm.push_back(std::move(layer));
  }
  if (params.lstm.empty()) throw std::runtime_error("checkpoint: no recurrent layers found");
  if (ckpt.has("head_inpaint/W")) {
    params.head_inpaint = FcParams{ckpt.matrix("head_inpaint/W"), ckpt.vector("head_inpaint/b")};
  }
  if (ckpt.has("head_phone/W")) {
    params.head_phone = FcParams{ckpt.matrix("head_phone/W"), ckpt.vector("head_phone/b")};
  }
  return params;
}

}  // namespace

void save_inpaint_model(const std::string& path, const InpaintModel& m) {
  Checkpoint ckpt;
  ckpt.add_scalar("meta/kind", kKindInpaint);
  ckpt.add_scalar("meta/variant", static_cast<double>(static_cast<int>(m.variant)));
  ckpt.add_scalar("meta/num_phones", m.num_phones);
  ckpt.add_scalar("norm/mean", m.norms.audio.mean);
  ckpt.add_scalar("norm/std", m.norms.audio.std);
  if (variant_uses_visual(m.variant)) {
    ckpt.add_vector("visual/mean", m.norms.visual.mean);
    ckpt.add_vector("visual/std", m.norms.visual.std);
  }
  pack_params(ckpt, m.params);
  write_checkpoint(path, ckpt);
}

InpaintModel load_inpaint_model(const std::string& path) {
  const Checkpoint ckpt = read_checkpoint(path);
  if (ckpt.scalar("meta/kind") != kKindInpaint)
    throw std::runtime_error("'" + path + "' is not an inpainting checkpoint");
  InpaintModel m;
  m.variant = static_cast<Variant>(static_cast<int>(ckpt.scalar("meta/variant")));
  m.num_phones = static_cast<int>(ckpt.scalar("meta/num_phones"));
  m.norms.audio.mean = ckpt.scalar("norm/mean");
  m.norms.audio.std = ckpt.scalar("norm/std");
  if (variant_uses_visual(m.variant)) {
    m.norms.visual.mean = ckpt.vector_std("visual/mean");
    m.norms.visual.std = ckpt.vector_std("visual/std");
  }
  m.params = unpack_params(ckpt);
  return m;
}

void save_recognizer_model(const std::string& path, const RecognizerModel& m) {
  Checkpoint ckpt;
  ckpt.add_scalar("meta/kind", kKindRecognizer);
  ckpt.add_scalar("meta/num_phones", m.num_phones);
  ckpt.add_scalar("norm/mean", m.norm.mean);
  ckpt.add_scalar("norm/std", m.norm.std);
  pack_params(ckpt, m.params);
  write_checkpoint(path, ckpt);
}

RecognizerModel load_recognizer_model(const std::string& path) {
  const Checkpoint ckpt = read_checkpoint(path);
  if (ckpt.scalar("meta/kind") != kKindRecognizer)
    throw std::runtime_error("'" + path + "' is not a recognizer checkpoint");
  RecognizerModel m;
  m.num_phones = static_cast<int>(ckpt.scalar("meta/num_phones"));
  m.norm.mean = ckpt.scalar("norm/mean");
  m.norm.std = ckpt.scalar("norm/std");
  m.params = unpack_params(ckpt);
  return m;
}

Waveform zero_gaps(const Waveform& w, const GapPlan& plan) {
  Waveform out = w;
  for (int n = 0; n < out.size(); ++n) {
    const double t_ms = (n + 0.5) * 1000.0 / out.sample_rate;
    if (plan.covers(t_ms)) out.samples[static_cast<size_t>(n)] = 0.0;
  }
  return out;
}

Waveform infer(const InpaintModel& model, const Waveform& corrupted, const GapPlan& plan,
               const LandmarkTrack* landmarks, int phase_iters) {
  if (corrupted.sample_rate != kSampleRate)
    throw std::invalid_argument("infer: expected 16 kHz input");

  const ComplexSpectrogram observed = stft(corrupted);
  const Spectrogram logmag = log_magnitude(observed);
  const Spectrogram normed = normalize(logmag, model.norms.audio);
  const BinaryMask mask = plan_to_mask(plan, normed.frames, normed.bins);
  const Spectrogram X = apply_mask(normed, mask);

  VisualTrack visual;
  const VisualTrack* vis_ptr = nullptr;
  if (variant_uses_visual(model.variant)) {
    if (!landmarks)
      throw std::invalid_argument("infer: audio-visual checkpoint requires a landmark track");
    visual = standardize(upsample_visual(motion_vectors(*landmarks), normed.frames),
                         model.norms.visual);
    vis_ptr = &visual;
  }

  const InpaintOutput out = forward_inpaint(model.params, X, mask, vis_ptr);
  const Spectrogram restored_log = denormalize(out.yhat, model.norms.audio);

  Spectrogram mag(restored_log.frames, restored_log.bins, SpecScale::linear_magnitude);
  for (size_t i = 0; i < mag.v.size(); ++i) {
    // invert the log: exp(v) - floor, clamped against pathological outputs
    mag.v[i] = std::clamp(std::exp(restored_log.v[i]) - kLogFloor, 0.0, 1e4);
  }

  const ComplexSpectrogram grid = reconstruct_phase(mag, observed, mask, phase_iters);
  return istft(grid, corrupted.size());
}

PhoneSequence recognize(const RecognizerModel& model, const Waveform& w, int beam_width) {
  if (w.sample_rate != kSampleRate)
    throw std::invalid_argument("recognize: expected 16 kHz input");
  const Spectrogram normed = normalize(log_magnitude(stft(w)), model.norm);
  Mat input(normed.bins, normed.frames);
  for (int t = 0; t < normed.frames; ++t) {
    for (int k = 0; k < normed.bins; ++k) input(k, t) = normed.at(t, k);
  }
  const ModelOutput mo = model_forward(model.params, input);
  if (!mo.phone_logits) throw std::logic_error("recognize: checkpoint lacks a phone head");
  return beam_search_decode(posteriors_from_logits(*mo.phone_logits), beam_width);
}

}  // namespace avsi
