// Command-line front end: dataset synthesis, gap (re)sampling, training,
// inference and evaluation. Exit codes: 0 success, 1 validation error,
// 2 runtime failure.
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "avsi/dsp.hpp"
#include "avsi/inpaint.hpp"
#include "avsi/rng.hpp"
#include "avsi/metrics.hpp"
#include "avsi/synthdata.hpp"
#include "avsi/wav.hpp"

namespace {

namespace fs = std::filesystem;

struct SynthOpts {
  std::string out;
  int train = 100;
  int val = 20;
  int test = 20;
};

struct CorruptOpts {
  std::string manifest;
  std::string mode = "variable";
  std::string out;
};

struct TrainOpts {
  std::string variant = "av";
  std::string data;
  std::string out;
  std::string metrics_log;
  int hidden = 250;
  int layers = 3;
  int batch = 8;
  int epochs = 50;
  int patience = 5;
  int jobs = 1;
  double lr = 1e-3;
  double lambda = 1e-3;
  double clip = 5.0;
};

struct RecognizerOpts {
  std::string data;
  std::string out;
  std::string metrics_log;
  int hidden = 250;
  int layers = 2;
  int batch = 8;
  int epochs = 50;
  int patience = 5;
  int jobs = 1;
  double lr = 1e-3;
  double clip = 5.0;
};

struct InferOpts {
  std::string ckpt;
  std::string wav;
  std::string gaps;
  std::string landmarks;
  std::string out;
  int phase_iters = 100;
};

struct EvaluateOpts {
  std::string ckpt;
  std::string recognizer;
  std::string manifest;
  std::string report;
  std::string plots;
  std::string pesq_csv;
  int jobs = 1;
  int phase_iters = 100;
  int beam = 20;
};

struct Options {
  uint64_t seed = 1;
  SynthOpts synth;
  CorruptOpts corrupt;
  TrainOpts train;
  RecognizerOpts recognizer;
  InferOpts infer;
  EvaluateOpts evaluate;
};

// --- config file: TOML-style key=value with optional [section] headers ---

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

int64_t to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int64_t n = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return n;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
  }
}

void apply_config_entry(Options& o, const std::string& full_key, const std::string& value) {
  const std::string v = strip_quotes(value);
  auto is = [&](const char* k) { return full_key == k; };

  if (is("seed")) { o.seed = static_cast<uint64_t>(to_int(full_key, v)); return; }

  if (is("synth.out")) { o.synth.out = v; return; }
  if (is("synth.train")) { o.synth.train = static_cast<int>(to_int(full_key, v)); return; }
  if (is("synth.val")) { o.synth.val = static_cast<int>(to_int(full_key, v)); return; }
  if (is("synth.test")) { o.synth.test = static_cast<int>(to_int(full_key, v)); return; }

  if (is("corrupt.manifest")) { o.corrupt.manifest = v; return; }
  if (is("corrupt.mode")) { o.corrupt.mode = v; return; }
  if (is("corrupt.out")) { o.corrupt.out = v; return; }

  if (is("train.variant")) { o.train.variant = v; return; }
  if (is("train.data")) { o.train.data = v; return; }
  if (is("train.out")) { o.train.out = v; return; }
  if (is("train.metrics-log")) { o.train.metrics_log = v; return; }
  if (is("train.hidden")) { o.train.hidden = static_cast<int>(to_int(full_key, v)); return; }
  if (is("train.layers")) { o.train.layers = static_cast<int>(to_int(full_key, v)); return; }
  if (is("train.batch")) { o.train.batch = static_cast<int>(to_int(full_key, v)); return; }
  if (is("train.epochs")) { o.train.epochs = static_cast<int>(to_int(full_key, v)); return; }
  if (is("train.patience")) { o.train.patience = static_cast<int>(to_int(full_key, v)); return; }
  if (is("train.jobs")) { o.train.jobs = static_cast<int>(to_int(full_key, v)); return; }
  if (is("train.lr")) { o.train.lr = to_double(full_key, v); return; }
  if (is("train.lambda")) { o.train.lambda = to_double(full_key, v); return; }
  if (is("train.clip")) { o.train.clip = to_double(full_key, v); return; }

  if (is("train-recognizer.data")) { o.recognizer.data = v; return; }
  if (is("train-recognizer.out")) { o.recognizer.out = v; return; }
  if (is("train-recognizer.metrics-log")) { o.recognizer.metrics_log = v; return; }
  if (is("train-recognizer.hidden")) { o.recognizer.hidden = static_cast<int>(to_int(full_key, v)); return; }
  if (is("train-recognizer.layers")) { o.recognizer.layers = static_cast<int>(to_int(full_key, v)); return; }
  if (is("train-recognizer.batch")) { o.recognizer.batch = static_cast<int>(to_int(full_key, v)); return; }
  if (is("train-recognizer.epochs")) { o.recognizer.epochs = static_cast<int>(to_int(full_key, v)); return; }
  if (is("train-recognizer.patience")) { o.recognizer.patience = static_cast<int>(to_int(full_key, v)); return; }
  if (is("train-recognizer.jobs")) { o.recognizer.jobs = static_cast<int>(to_int(full_key, v)); return; }
  if (is("train-recognizer.lr")) { o.recognizer.lr = to_double(full_key, v); return; }
  if (is("train-recognizer.clip")) { o.recognizer.clip = to_double(full_key, v); return; }

  if (is("infer.ckpt")) { o.infer.ckpt = v; return; }
  if (is("infer.wav")) { o.infer.wav = v; return; }
  if (is("infer.gaps")) { o.infer.gaps = v; return; }
  if (is("infer.landmarks")) { o.infer.landmarks = v; return; }
  if (is("infer.out")) { o.infer.out = v; return; }
  if (is("infer.phase-iters")) { o.infer.phase_iters = static_cast<int>(to_int(full_key, v)); return; }

  if (is("evaluate.ckpt")) { o.evaluate.ckpt = v; return; }
  if (is("evaluate.recognizer")) { o.evaluate.recognizer = v; return; }
  if (is("evaluate.manifest")) { o.evaluate.manifest = v; return; }
  if (is("evaluate.report")) { o.evaluate.report = v; return; }
  if (is("evaluate.plots")) { o.evaluate.plots = v; return; }
  if (is("evaluate.pesq-csv")) { o.evaluate.pesq_csv = v; return; }
  if (is("evaluate.jobs")) { o.evaluate.jobs = static_cast<int>(to_int(full_key, v)); return; }
  if (is("evaluate.phase-iters")) { o.evaluate.phase_iters = static_cast<int>(to_int(full_key, v)); return; }
  if (is("evaluate.beam")) { o.evaluate.beam = static_cast<int>(to_int(full_key, v)); return; }

  throw std::invalid_argument("config: unknown key '" + full_key + "'");
}

void load_config(Options& o, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::string line, section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: " + path + ":" + std::to_string(line_no) +
                                  ": expected key=value");
    std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    apply_config_entry(o, key, value);
  }
}

void print_effective_config(const Options& o) {
  std::ostringstream s;
  s << "seed=" << o.seed << "\n\n";
  s << "[synth]\nout=" << o.synth.out << "\ntrain=" << o.synth.train << "\nval=" << o.synth.val
    << "\ntest=" << o.synth.test << "\n\n";
  s << "[corrupt]\nmanifest=" << o.corrupt.manifest << "\nmode=" << o.corrupt.mode
    << "\nout=" << o.corrupt.out << "\n\n";
  s << "[train]\nvariant=" << o.train.variant << "\ndata=" << o.train.data
    << "\nout=" << o.train.out << "\nmetrics-log=" << o.train.metrics_log
    << "\nhidden=" << o.train.hidden << "\nlayers=" << o.train.layers
    << "\nbatch=" << o.train.batch << "\nepochs=" << o.train.epochs
    << "\npatience=" << o.train.patience << "\njobs=" << o.train.jobs << "\nlr=" << o.train.lr
    << "\nlambda=" << o.train.lambda << "\nclip=" << o.train.clip << "\n\n";
  s << "[train-recognizer]\ndata=" << o.recognizer.data << "\nout=" << o.recognizer.out
    << "\nmetrics-log=" << o.recognizer.metrics_log << "\nhidden=" << o.recognizer.hidden
    << "\nlayers=" << o.recognizer.layers << "\nbatch=" << o.recognizer.batch
    << "\nepochs=" << o.recognizer.epochs << "\npatience=" << o.recognizer.patience
    << "\njobs=" << o.recognizer.jobs << "\nlr=" << o.recognizer.lr
    << "\nclip=" << o.recognizer.clip << "\n\n";
  s << "[infer]\nckpt=" << o.infer.ckpt << "\nwav=" << o.infer.wav << "\ngaps=" << o.infer.gaps
    << "\nlandmarks=" << o.infer.landmarks << "\nout=" << o.infer.out
    << "\nphase-iters=" << o.infer.phase_iters << "\n\n";
  s << "[evaluate]\nckpt=" << o.evaluate.ckpt << "\nrecognizer=" << o.evaluate.recognizer
    << "\nmanifest=" << o.evaluate.manifest << "\nreport=" << o.evaluate.report
    << "\nplots=" << o.evaluate.plots << "\npesq-csv=" << o.evaluate.pesq_csv
    << "\njobs=" << o.evaluate.jobs << "\nphase-iters=" << o.evaluate.phase_iters
    << "\nbeam=" << o.evaluate.beam << "\n";
  std::cout << s.str();
}

// --- subcommand actions ---

void run_synth(const Options& o) {
  if (o.synth.out.empty()) throw std::invalid_argument("synth: --out is required");
  const auto paths = avsi::synth_dataset(o.synth.out, o.synth.train, o.synth.val, o.synth.test,
                                         o.seed);
  std::cout << "wrote " << paths.train_manifest << ", " << paths.val_manifest << ", "
            << paths.test_manifest << "\n";
}

void run_corrupt(const Options& o) {
  if (o.corrupt.manifest.empty() || o.corrupt.out.empty())
    throw std::invalid_argument("corrupt: --manifest and --out are required");

  bool fixed = false;
  double fixed_ms = 0.0;
  if (o.corrupt.mode == "variable") {
    fixed = false;
  } else if (o.corrupt.mode.rfind("fixed:", 0) == 0) {
    fixed = true;
    fixed_ms = to_double("mode", o.corrupt.mode.substr(6));
    if (fixed_ms <= 0.0) throw std::invalid_argument("corrupt: fixed gap must be positive");
  } else {
    throw std::invalid_argument("corrupt: --mode must be 'variable' or 'fixed:MS'");
  }

  auto records = avsi::read_manifest(o.corrupt.manifest);
  for (auto& rec : records) {
    const avsi::Waveform w = avsi::read_wav(avsi::resolve_path(o.corrupt.manifest, rec.wav));
    const uint64_t s = avsi::seed_combine(o.seed, rec.id);
    rec.gaps = fixed ? avsi::fixed_gap_plan(w.duration_ms(), fixed_ms, s)
                     : avsi::sample_gap_plan(w.duration_ms(), s);
  }
  avsi::write_manifest(o.corrupt.out, records);
  std::cout << "wrote " << o.corrupt.out << " (" << records.size() << " records)\n";
}

int dictionary_size(const std::string& data_dir) {
  return static_cast<int>(
      avsi::read_phone_file((fs::path(data_dir) / "phones.txt").string()).size());
}

void run_train(const Options& o) {
  if (o.train.data.empty() || o.train.out.empty())
    throw std::invalid_argument("train: --data and --out are required");
  const avsi::Variant variant = avsi::parse_variant(o.train.variant);
  const bool visual = avsi::variant_uses_visual(variant);

  const std::string train_manifest = (fs::path(o.train.data) / "train.jsonl").string();
  const std::string val_manifest = (fs::path(o.train.data) / "val.jsonl").string();
  const auto train_set = avsi::load_raw_dataset(train_manifest, visual);
  const auto val_set = avsi::load_raw_dataset(val_manifest, visual);

  avsi::TrainConfig cfg;
  cfg.variant = variant;
  cfg.hidden = o.train.hidden;
  cfg.layers = o.train.layers;
  cfg.batch_size = o.train.batch;
  cfg.lr = o.train.lr;
  cfg.lambda = o.train.lambda;
  cfg.patience = o.train.patience;
  cfg.max_epochs = o.train.epochs;
  cfg.clip_norm = o.train.clip;
  cfg.seed = o.seed;
  cfg.num_phones = dictionary_size(o.train.data);
  cfg.jobs = o.train.jobs;

  const avsi::TrainResult result = avsi::train(train_set, val_set, cfg, &std::cout);

  avsi::InpaintModel model;
  model.variant = variant;
  model.params = result.params;
  model.norms = result.norms;
  model.num_phones = cfg.num_phones;
  avsi::save_inpaint_model(o.train.out, model);

  const std::string log_path =
      o.train.metrics_log.empty() ? o.train.out + ".metrics.csv" : o.train.metrics_log;
  avsi::write_metrics_csv(log_path, result.log);
  std::cout << "best epoch " << result.best_epoch << " val_mse " << result.best_val_mse
            << "; wrote " << o.train.out << " and " << log_path << "\n";
}

void run_train_recognizer(const Options& o) {
  if (o.recognizer.data.empty() || o.recognizer.out.empty())
    throw std::invalid_argument("train-recognizer: --data and --out are required");

  const std::string train_manifest = (fs::path(o.recognizer.data) / "train.jsonl").string();
  const std::string val_manifest = (fs::path(o.recognizer.data) / "val.jsonl").string();
  const auto train_set = avsi::load_raw_dataset(train_manifest, false);
  const auto val_set = avsi::load_raw_dataset(val_manifest, false);

  avsi::RecognizerConfig cfg;
  cfg.hidden = o.recognizer.hidden;
  cfg.layers = o.recognizer.layers;
  cfg.batch_size = o.recognizer.batch;
  cfg.lr = o.recognizer.lr;
  cfg.patience = o.recognizer.patience;
  cfg.max_epochs = o.recognizer.epochs;
  cfg.clip_norm = o.recognizer.clip;
  cfg.seed = o.seed;
  cfg.num_phones = dictionary_size(o.recognizer.data);
  cfg.jobs = o.recognizer.jobs;

  const avsi::TrainResult result = avsi::train_recognizer(train_set, val_set, cfg, &std::cout);

  avsi::RecognizerModel model;
  model.params = result.params;
  model.norm = result.norms.audio;
  model.num_phones = cfg.num_phones;
  avsi::save_recognizer_model(o.recognizer.out, model);

  const std::string log_path = o.recognizer.metrics_log.empty()
                                   ? o.recognizer.out + ".metrics.csv"
                                   : o.recognizer.metrics_log;
  avsi::write_metrics_csv(log_path, result.log);
  std::cout << "best epoch " << result.best_epoch << " val_ctc " << result.best_val_ctc
            << "; wrote " << o.recognizer.out << " and " << log_path << "\n";
}

avsi::GapPlan read_gap_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("gaps: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw std::invalid_argument("gaps: parse error in '" + path + "': " + e.what());
  }
  const nlohmann::json& arr = j.is_array() ? j : j.at("gaps");
  avsi::GapPlan plan;
  for (const auto& g : arr) {
    if (!g.is_array() || g.size() != 2)
      throw std::invalid_argument("gaps: entries must be [start_ms, dur_ms] pairs");
    plan.gaps.emplace_back(g[0].get<double>(), g[1].get<double>());
  }
  return plan;
}

void run_infer(const Options& o) {
  if (o.infer.ckpt.empty() || o.infer.wav.empty() || o.infer.gaps.empty() || o.infer.out.empty())
    throw std::invalid_argument("infer: --ckpt, --wav, --gaps and --out are required");

  const avsi::InpaintModel model = avsi::load_inpaint_model(o.infer.ckpt);
  if (avsi::variant_uses_visual(model.variant) && o.infer.landmarks.empty())
    throw std::invalid_argument(
        "infer: this checkpoint is audio-visual and needs --landmarks <csv>");

  const avsi::Waveform w = avsi::read_wav(o.infer.wav);
  const avsi::GapPlan plan = read_gap_file(o.infer.gaps);

  avsi::LandmarkTrack lm;
  const avsi::LandmarkTrack* lm_ptr = nullptr;
  if (!o.infer.landmarks.empty()) {
    lm = avsi::read_landmarks_csv(o.infer.landmarks);
    lm_ptr = &lm;
  }

  const avsi::Waveform restored = avsi::infer(model, w, plan, lm_ptr, o.infer.phase_iters);
  avsi::write_wav(o.infer.out, restored);
  std::cout << "wrote " << o.infer.out << "\n";
}

void run_evaluate(const Options& o) {
  if (o.evaluate.ckpt.empty() || o.evaluate.recognizer.empty() || o.evaluate.manifest.empty() ||
      o.evaluate.report.empty())
    throw std::invalid_argument(
        "evaluate: --ckpt, --recognizer, --manifest and --report are required");

  const avsi::InpaintModel model = avsi::load_inpaint_model(o.evaluate.ckpt);
  const avsi::RecognizerModel recognizer = avsi::load_recognizer_model(o.evaluate.recognizer);
  const auto records = avsi::read_manifest(o.evaluate.manifest);
  if (records.empty()) throw std::invalid_argument("evaluate: empty manifest");

  std::map<std::string, double> pesq;
  if (!o.evaluate.pesq_csv.empty()) pesq = avsi::read_external_pesq(o.evaluate.pesq_csv);

  const bool visual = avsi::variant_uses_visual(model.variant);
  std::vector<avsi::ReportRow> rows(records.size());

  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= records.size()) return;
      try {
        const auto& rec = records[i];
        const avsi::Waveform clean =
            avsi::read_wav(avsi::resolve_path(o.evaluate.manifest, rec.wav));

        avsi::LandmarkTrack lm;
        const avsi::LandmarkTrack* lm_ptr = nullptr;
        if (visual) {
          if (rec.landmarks.empty())
            throw std::invalid_argument("evaluate: record '" + rec.id +
                                        "' lacks landmarks required by this checkpoint");
          lm = avsi::read_landmarks_csv(avsi::resolve_path(o.evaluate.manifest, rec.landmarks));
          lm_ptr = &lm;
        }

        // spectrogram-domain L1 on masked bins, matching the training target
        const avsi::Spectrogram target =
            avsi::normalize(avsi::log_magnitude(avsi::stft(clean)), model.norms.audio);
        const avsi::BinaryMask mask =
            avsi::plan_to_mask(rec.gaps, target.frames, target.bins);
        const avsi::Spectrogram X = avsi::apply_mask(target, mask);
        avsi::VisualTrack vis;
        const avsi::VisualTrack* vis_ptr = nullptr;
        if (visual) {
          vis = avsi::standardize(
              avsi::upsample_visual(avsi::motion_vectors(*lm_ptr), target.frames),
              model.norms.visual);
          vis_ptr = &vis;
        }
        const avsi::InpaintOutput out = avsi::forward_inpaint(model.params, X, mask, vis_ptr);

        avsi::ReportRow row;
        row.utterance_id = rec.id;
        row.variant = avsi::variant_name(model.variant);
        row.gap_ms_total = rec.gaps.total_ms();
        bool any_masked = false;
        for (uint8_t m : mask.v) any_masked |= (m != 0);
        row.l1 = any_masked ? avsi::masked_l1(out.yhat, target, mask) : 0.0;

        const avsi::Waveform corrupted = avsi::zero_gaps(clean, rec.gaps);
        const avsi::Waveform restored =
            avsi::infer(model, corrupted, rec.gaps, lm_ptr, o.evaluate.phase_iters);
        row.per = avsi::per(avsi::recognize(recognizer, restored, o.evaluate.beam), rec.phones);
        row.stoi = avsi::stoi(clean, restored);
        if (auto it = pesq.find(rec.id); it != pesq.end()) row.pesq_external = it->second;
        rows[i] = std::move(row);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  const int workers = std::max(1, std::min<int>(o.evaluate.jobs, static_cast<int>(records.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  avsi::write_report_csv(o.evaluate.report, rows);
  std::cout << "wrote " << o.evaluate.report << " (" << rows.size() << " utterances)\n";

  if (!o.evaluate.plots.empty()) {
    fs::create_directories(o.evaluate.plots);
    // group means per gap size
    std::map<double, std::vector<const avsi::ReportRow*>> by_gap;
    for (const auto& r : rows) by_gap[r.gap_ms_total].push_back(&r);
    auto series_of = [&](auto metric) {
      avsi::Series s;
      s.label = avsi::variant_name(model.variant);
      for (const auto& [gap, group] : by_gap) {
        double acc = 0.0;
        for (const auto* r : group) acc += metric(*r);
        s.points.emplace_back(gap, acc / static_cast<double>(group.size()));
      }
      return s;
    };
    avsi::write_line_chart_svg(
        (fs::path(o.evaluate.plots) / "l1_vs_gap.svg").string(), "Masked L1 vs gap size",
        "total gap (ms)", "masked L1",
        {series_of([](const avsi::ReportRow& r) { return r.l1; })});
    avsi::write_line_chart_svg(
        (fs::path(o.evaluate.plots) / "per_vs_gap.svg").string(), "PER vs gap size",
        "total gap (ms)", "phone error rate",
        {series_of([](const avsi::ReportRow& r) { return r.per; })});
    avsi::write_line_chart_svg(
        (fs::path(o.evaluate.plots) / "stoi_vs_gap.svg").string(), "STOI vs gap size",
        "total gap (ms)", "STOI",
        {series_of([](const avsi::ReportRow& r) { return r.stoi; })});
    std::cout << "wrote charts to " << o.evaluate.plots << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  Options opts;
  bool show_config = false;
  std::string config_path;

  // --config must apply before flag parsing so flags can override it
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) config_path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0) config_path = arg.substr(9);
    else if (arg == "--show-config") show_config = true;
  }

  try {
    if (!config_path.empty()) load_config(opts, config_path);

    CLI::App app{"Speech inpainting over time-frequency gaps with optional facial-landmark "
                 "conditioning"};
    app.require_subcommand(0, 1);
    std::string config_sink;
    app.add_option("--config", config_sink, "key=value config file (flags take precedence)");
    app.add_flag("--show-config", show_config, "print the effective configuration and exit");
    app.add_option("--seed", opts.seed, "RNG seed");

    // sinks must outlive parsing; the config file itself was applied above
    std::vector<std::unique_ptr<std::string>> config_sinks;
    auto add_common = [&](CLI::App* sub) {
      config_sinks.push_back(std::make_unique<std::string>());
      sub->add_option("--config", *config_sinks.back(),
                      "key=value config file (flags take precedence)");
      sub->add_flag("--show-config", show_config, "print the effective configuration and exit");
      sub->add_option("--seed", opts.seed, "RNG seed");
    };

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic audio-visual dataset");
    add_common(synth);
    synth->add_option("--out", opts.synth.out, "output dataset directory");
    synth->add_option("--train", opts.synth.train, "training utterances");
    synth->add_option("--val", opts.synth.val, "validation utterances");
    synth->add_option("--test", opts.synth.test, "test utterances");

    CLI::App* corrupt = app.add_subcommand("corrupt", "(re)sample gap plans for a manifest");
    add_common(corrupt);
    corrupt->add_option("--manifest", opts.corrupt.manifest, "input manifest (JSONL)");
    corrupt->add_option("--mode", opts.corrupt.mode, "'variable' or 'fixed:MS'");
    corrupt->add_option("--out", opts.corrupt.out, "output manifest path");

    CLI::App* train = app.add_subcommand("train", "train an inpainting model");
    add_common(train);
    train->add_option("--variant", opts.train.variant, "a, av, a-mtl or av-mtl");
    train->add_option("--data", opts.train.data, "dataset directory from 'synth'");
    train->add_option("--out", opts.train.out, "output checkpoint path");
    train->add_option("--metrics-log", opts.train.metrics_log,
                      "per-epoch CSV (default: <out>.metrics.csv)");
    train->add_option("--hidden", opts.train.hidden, "hidden units per direction");
    train->add_option("--layers", opts.train.layers, "recurrent layers");
    train->add_option("--batch", opts.train.batch, "mini-batch size");
    train->add_option("--epochs", opts.train.epochs, "maximum epochs");
    train->add_option("--patience", opts.train.patience, "early-stopping patience");
    train->add_option("--jobs", opts.train.jobs, "worker threads per batch");
    train->add_option("--lr", opts.train.lr, "Adam learning rate");
    train->add_option("--lambda", opts.train.lambda, "CTC weight in the joint loss");
    train->add_option("--clip", opts.train.clip, "global gradient-norm clip");

    CLI::App* train_rec = app.add_subcommand("train-recognizer",
                                             "train the phone recognizer used for PER");
    add_common(train_rec);
    train_rec->add_option("--data", opts.recognizer.data, "dataset directory from 'synth'");
    train_rec->add_option("--out", opts.recognizer.out, "output checkpoint path");
    train_rec->add_option("--metrics-log", opts.recognizer.metrics_log,
                          "per-epoch CSV (default: <out>.metrics.csv)");
    train_rec->add_option("--hidden", opts.recognizer.hidden, "hidden units per direction");
    train_rec->add_option("--layers", opts.recognizer.layers, "recurrent layers");
    train_rec->add_option("--batch", opts.recognizer.batch, "mini-batch size");
    train_rec->add_option("--epochs", opts.recognizer.epochs, "maximum epochs");
    train_rec->add_option("--patience", opts.recognizer.patience, "early-stopping patience");
    train_rec->add_option("--jobs", opts.recognizer.jobs, "worker threads per batch");
    train_rec->add_option("--lr", opts.recognizer.lr, "Adam learning rate");
    train_rec->add_option("--clip", opts.recognizer.clip, "global gradient-norm clip");

    CLI::App* infer = app.add_subcommand("infer", "restore a corrupted waveform");
    add_common(infer);
    infer->add_option("--ckpt", opts.infer.ckpt, "inpainting checkpoint");
    infer->add_option("--wav", opts.infer.wav, "corrupted input wav");
    infer->add_option("--gaps", opts.infer.gaps, "gap plan JSON ({\"gaps\": [[start_ms,dur_ms],...]})");
    infer->add_option("--landmarks", opts.infer.landmarks, "landmark CSV (audio-visual models)");
    infer->add_option("--out", opts.infer.out, "restored wav path");
    infer->add_option("--phase-iters", opts.infer.phase_iters, "phase-reconstruction iterations");

    CLI::App* evaluate = app.add_subcommand("evaluate", "score a checkpoint over a manifest");
    add_common(evaluate);
    evaluate->add_option("--ckpt", opts.evaluate.ckpt, "inpainting checkpoint");
    evaluate->add_option("--recognizer", opts.evaluate.recognizer, "recognizer checkpoint");
    evaluate->add_option("--manifest", opts.evaluate.manifest, "evaluation manifest (JSONL)");
    evaluate->add_option("--report", opts.evaluate.report, "output report CSV");
    evaluate->add_option("--plots", opts.evaluate.plots, "directory for SVG charts");
    evaluate->add_option("--pesq-csv", opts.evaluate.pesq_csv,
                         "external PESQ scores (utterance_id,pesq) to attach");
    evaluate->add_option("--jobs", opts.evaluate.jobs, "worker threads across utterances");
    evaluate->add_option("--phase-iters", opts.evaluate.phase_iters,
                         "phase-reconstruction iterations");
    evaluate->add_option("--beam", opts.evaluate.beam, "decoder beam width");

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }

    if (show_config) {
      print_effective_config(opts);
      return 0;
    }

    if (app.got_subcommand(synth)) run_synth(opts);
    else if (app.got_subcommand(corrupt)) run_corrupt(opts);
    else if (app.got_subcommand(train)) run_train(opts);
    else if (app.got_subcommand(train_rec)) run_train_recognizer(opts);
    else if (app.got_subcommand(infer)) run_infer(opts);
    else if (app.got_subcommand(evaluate)) run_evaluate(opts);
    else {
      std::cerr << app.help();
      return 1;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
