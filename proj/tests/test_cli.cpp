// End-to-end tests of the command-line tool, driven as a subprocess through
// the AVSI_CLI environment variable: dataset synthesis, gap resampling,
// training, inference, evaluation, config precedence and exit codes.
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "avsi/inpaint.hpp"
#include "avsi/manifest.hpp"
#include "avsi/wav.hpp"
#include "doctest.h"

using namespace avsi;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// run the tool with stdout+stderr captured; returns the exit code
int run_cli(const std::string& args, std::string* output = nullptr) {
  const char* cli = std::getenv("AVSI_CLI");
  REQUIRE_MESSAGE(cli != nullptr, "AVSI_CLI must point at the tool binary");
  static int counter = 0;
  const fs::path log =
      fs::temp_directory_path() / ("avsi_cli_out_" + std::to_string(counter++) + ".log");
  const std::string cmd = "\"" + std::string(cli) + "\" " + args + " > \"" + log.string() +
                          "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  if (output) *output = slurp(log);
  fs::remove(log);
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

std::map<std::string, std::string> slurp_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    files[fs::relative(entry.path(), root).string()] = slurp(entry.path());
  }
  return files;
}

// one shared corpus + checkpoints, built on first use by any test case
struct CliFixture {
  fs::path root;
  fs::path data;        // synthesized dataset directory
  fs::path ckpt;        // audio-only inpainting checkpoint (hidden 6)
  fs::path rec_ckpt;    // recognizer checkpoint
  fs::path val_fixed;   // val manifest resampled with fixed 600 ms gaps

  CliFixture() {
    root = fs::temp_directory_path() / "avsi_cli_tests";
    fs::remove_all(root);
    fs::create_directories(root);
    data = root / "data";

    REQUIRE(run_cli("synth --out \"" + data.string() + "\" --train 2 --val 1 --test 1 --seed 3") ==
            0);

    ckpt = root / "a.ckpt";
    REQUIRE(run_cli("train --variant a --data \"" + data.string() + "\" --out \"" +
                    ckpt.string() + "\" --hidden 6 --layers 1 --batch 2 --epochs 1 --seed 5") ==
            0);

    rec_ckpt = root / "rec.ckpt";
    REQUIRE(run_cli("train-recognizer --data \"" + data.string() + "\" --out \"" +
                    rec_ckpt.string() + "\" --hidden 6 --layers 1 --batch 2 --epochs 1") == 0);

    // derived manifests stay in the dataset directory so relative paths resolve
    val_fixed = data / "val_fixed.jsonl";
    REQUIRE(run_cli("corrupt --manifest \"" + (data / "val.jsonl").string() +
                    "\" --mode fixed:600 --out \"" + val_fixed.string() + "\" --seed 11") == 0);
  }
};

const CliFixture& fixture() {
  static CliFixture f;
  return f;
}

}  // namespace

TEST_CASE("running without a subcommand prints help and fails") {
  std::string out;
  CHECK(run_cli("", &out) == 1);
  CHECK(out.find("Usage") != std::string::npos);
  CHECK(run_cli("--help", &out) == 0);
}

TEST_CASE("synth writes a complete dataset and is byte-reproducible") {
  const CliFixture& f = fixture();
  CHECK(fs::exists(f.data / "train.jsonl"));
  CHECK(fs::exists(f.data / "val.jsonl"));
  CHECK(fs::exists(f.data / "test.jsonl"));
  CHECK(fs::exists(f.data / "phones.txt"));

  auto records = read_manifest((f.data / "train.jsonl").string());
  REQUIRE(records.size() == 2);
  for (const auto& rec : records) {
    CHECK(fs::exists(resolve_path((f.data / "train.jsonl").string(), rec.wav)));
    CHECK(fs::exists(resolve_path((f.data / "train.jsonl").string(), rec.landmarks)));
  }

  const fs::path again = f.root / "data_again";
  const fs::path again2 = f.root / "data_again2";
  REQUIRE(run_cli("synth --out \"" + again.string() + "\" --train 2 --val 1 --test 1 --seed 3") ==
          0);
  REQUIRE(run_cli("synth --out \"" + again2.string() + "\" --train 2 --val 1 --test 1 --seed 3") ==
          0);
  CHECK(slurp_tree(again) == slurp_tree(again2));

  const fs::path other = f.root / "data_other";
  REQUIRE(run_cli("synth --out \"" + other.string() + "\" --train 2 --val 1 --test 1 --seed 4") ==
          0);
  CHECK(slurp_tree(again) != slurp_tree(other));

  CHECK(run_cli("synth") == 1);  // --out missing
}

TEST_CASE("corrupt fixed mode plants exactly one gap of the requested size") {
  const CliFixture& f = fixture();
  auto records = read_manifest(f.val_fixed.string());
  REQUIRE(!records.empty());
  for (const auto& rec : records) {
    REQUIRE(rec.gaps.gaps.size() == 1);
    CHECK(rec.gaps.gaps[0].second == doctest::Approx(600.0).epsilon(1e-12));
    CHECK(rec.gaps.gaps[0].first >= 0.0);
    CHECK(rec.gaps.gaps[0].first + 600.0 <= 3000.0 + 1e-9);
  }

  // variable mode resamples within the documented budget
  const fs::path var = f.root / "val_var.jsonl";
  REQUIRE(run_cli("corrupt --manifest \"" + (f.data / "val.jsonl").string() +
                  "\" --mode variable --out \"" + var.string() + "\"") == 0);
  for (const auto& rec : read_manifest(var.string())) {
    CHECK(!rec.gaps.gaps.empty());
    CHECK(rec.gaps.total_ms() <= 2400.0 + 1e-9);
  }

  CHECK(run_cli("corrupt --manifest \"" + (f.data / "val.jsonl").string() +
                "\" --mode fixed:0 --out \"" + var.string() + "\"") == 1);
  CHECK(run_cli("corrupt --manifest \"" + (f.data / "val.jsonl").string() +
                "\" --mode sometimes --out \"" + var.string() + "\"") == 1);
  CHECK(run_cli("corrupt --manifest \"" + (f.data / "val.jsonl").string() + "\"") == 1);
}

TEST_CASE("missing referenced files are runtime failures, not usage errors") {
  const CliFixture& f = fixture();
  const fs::path bad = f.root / "bad.jsonl";
  {
    std::ofstream os(bad);
    os << R"({"id":"x","wav":"missing.wav","phones":[0],"gaps":[]})" << "\n";
  }
  std::string out;
  CHECK(run_cli("corrupt --manifest \"" + bad.string() + "\" --mode variable --out \"" +
                (f.root / "bad_out.jsonl").string() + "\"", &out) == 2);
  CHECK(out.find("error:") != std::string::npos);
}

TEST_CASE("train writes a loadable checkpoint and a metrics log") {
  const CliFixture& f = fixture();
  InpaintModel m = load_inpaint_model(f.ckpt.string());
  CHECK(m.variant == Variant::a);
  CHECK(m.params.dims().hidden == 6);
  CHECK(m.params.dims().layers == 1);
  CHECK(m.params.dims().input_dim == kNumBins);

  const std::string log = slurp(fs::path(f.ckpt.string() + ".metrics.csv"));
  CHECK(log.rfind("epoch,train_loss,val_mse,val_ctc\n", 0) == 0);
  CHECK(log.find("\n1,") != std::string::npos);

  CHECK(run_cli("train --data \"" + f.data.string() + "\"") == 1);  // --out missing
  CHECK(run_cli("train --variant bogus --data \"" + f.data.string() + "\" --out \"" +
                (f.root / "x.ckpt").string() + "\"") == 1);
}

TEST_CASE("config file values apply and flags take precedence") {
  const CliFixture& f = fixture();
  const fs::path cfg = f.root / "train.cfg";
  {
    std::ofstream os(cfg);
    os << "seed = 5\n\n[train]\nvariant = a\nhidden = 5\nlayers = 1\nbatch = 2\nepochs = 1\n"
       << "data = \"" << f.data.string() << "\"\n";
  }

  std::string out;
  CHECK(run_cli("--config \"" + cfg.string() + "\" --show-config", &out) == 0);
  CHECK(out.find("hidden=5") != std::string::npos);
  CHECK(out.find("variant=a") != std::string::npos);

  // a flag overrides the file value in the effective config
  CHECK(run_cli("train --config \"" + cfg.string() + "\" --hidden 7 --show-config", &out) == 0);
  CHECK(out.find("hidden=7") != std::string::npos);

  const fs::path from_file = f.root / "from_file.ckpt";
  REQUIRE(run_cli("train --config \"" + cfg.string() + "\" --out \"" + from_file.string() +
                  "\"") == 0);
  CHECK(load_inpaint_model(from_file.string()).params.dims().hidden == 5);

  const fs::path from_flag = f.root / "from_flag.ckpt";
  REQUIRE(run_cli("train --config \"" + cfg.string() + "\" --hidden 7 --out \"" +
                  from_flag.string() + "\"") == 0);
  CHECK(load_inpaint_model(from_flag.string()).params.dims().hidden == 7);

  const fs::path bad_cfg = f.root / "bad.cfg";
  {
    std::ofstream os(bad_cfg);
    os << "[train]\nhiden = 5\n";
  }
  CHECK(run_cli("--config \"" + bad_cfg.string() + "\" --show-config", &out) == 1);
  CHECK(out.find("unknown key") != std::string::npos);
  CHECK(run_cli("--config \"" + (f.root / "absent.cfg").string() + "\" --show-config") == 1);
}

TEST_CASE("infer restores a corrupted wav end to end") {
  const CliFixture& f = fixture();
  auto records = read_manifest(f.val_fixed.string());
  REQUIRE(!records.empty());
  const fs::path clean_wav = resolve_path(f.val_fixed.string(), records[0].wav);

  // corrupt the waveform on disk the same way evaluation does
  Waveform clean = read_wav(clean_wav.string());
  Waveform corrupted = zero_gaps(clean, records[0].gaps);
  const fs::path corrupted_wav = f.root / "corrupted.wav";
  write_wav(corrupted_wav.string(), corrupted);

  const fs::path gaps_json = f.root / "gaps.json";
  {
    std::ofstream os(gaps_json);
    os << "{\"gaps\": [[" << records[0].gaps.gaps[0].first << ", 600.0]]}";
  }

  const fs::path restored_wav = f.root / "restored.wav";
  REQUIRE(run_cli("infer --ckpt \"" + f.ckpt.string() + "\" --wav \"" + corrupted_wav.string() +
                  "\" --gaps \"" + gaps_json.string() + "\" --out \"" + restored_wav.string() +
                  "\" --phase-iters 8") == 0);
  Waveform restored = read_wav(restored_wav.string());
  CHECK(restored.sample_rate == kSampleRate);
  CHECK(restored.size() == corrupted.size());

  // a bare JSON array works as a gap plan too
  {
    std::ofstream os(gaps_json);
    os << "[[" << records[0].gaps.gaps[0].first << ", 600.0]]";
  }
  CHECK(run_cli("infer --ckpt \"" + f.ckpt.string() + "\" --wav \"" + corrupted_wav.string() +
                "\" --gaps \"" + gaps_json.string() + "\" --out \"" + restored_wav.string() +
                "\" --phase-iters 2") == 0);

  {
    std::ofstream os(gaps_json);
    os << "gap at one second";
  }
  CHECK(run_cli("infer --ckpt \"" + f.ckpt.string() + "\" --wav \"" + corrupted_wav.string() +
                "\" --gaps \"" + gaps_json.string() + "\" --out \"" + restored_wav.string() +
                "\"") == 1);
  CHECK(run_cli("infer --ckpt \"" + f.ckpt.string() + "\"") == 1);
}

TEST_CASE("evaluate writes a report, plots and attaches external scores") {
  const CliFixture& f = fixture();
  auto records = read_manifest(f.val_fixed.string());
  REQUIRE(!records.empty());

  const fs::path pesq_csv = f.root / "pesq.csv";
  {
    std::ofstream os(pesq_csv);
    os << "utterance_id,pesq\n" << records[0].id << ",3.75\n";
  }

  const fs::path report = f.root / "report.csv";
  const fs::path plots = f.root / "plots";
  REQUIRE(run_cli("evaluate --ckpt \"" + f.ckpt.string() + "\" --recognizer \"" +
                  f.rec_ckpt.string() + "\" --manifest \"" + f.val_fixed.string() +
                  "\" --report \"" + report.string() + "\" --plots \"" + plots.string() +
                  "\" --pesq-csv \"" + pesq_csv.string() +
                  "\" --phase-iters 4 --beam 4 --jobs 2") == 0);

  const std::string csv = slurp(report);
  CHECK(csv.rfind("utterance_id,variant,gap_ms_total,l1,per,stoi,pesq_external\n", 0) == 0);
  CHECK(csv.find(records[0].id + ",a,600,") != std::string::npos);
  CHECK(csv.find(",3.75\n") != std::string::npos);
  CHECK(csv.find("aggregate,a,") != std::string::npos);

  CHECK(fs::exists(plots / "l1_vs_gap.svg"));
  CHECK(fs::exists(plots / "per_vs_gap.svg"));
  CHECK(fs::exists(plots / "stoi_vs_gap.svg"));
  CHECK(slurp(plots / "l1_vs_gap.svg").rfind("<svg ", 0) == 0);

  CHECK(run_cli("evaluate --ckpt \"" + f.ckpt.string() + "\"") == 1);
}
