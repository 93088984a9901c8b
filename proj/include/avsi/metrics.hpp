// Evaluation metrics: L1 over masked bins, phone error rate against a
// reference sequence, short-time objective intelligibility, the evaluation
// report CSV and small SVG line charts for metric-vs-gap-size plots.
#ifndef AVSI_METRICS_HPP
#define AVSI_METRICS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "avsi/types.hpp"

namespace avsi {

// Mean absolute difference over bins where the mask is 1.
double masked_l1(const Spectrogram& yhat, const Spectrogram& y, const BinaryMask& m);

// Unit-cost Levenshtein distance.
int edit_distance(const PhoneSequence& a, const PhoneSequence& b);

// edit_distance(hyp, ref) / |ref|.
double per(const PhoneSequence& hyp, const PhoneSequence& ref);

// Short-time objective intelligibility of `processed` against `clean`:
// resample to 10 kHz, drop frames 40 dB below the loudest clean frame,
// 15 one-third-octave bands from 150 Hz, normalized clipped correlations
// over 384 ms segments, averaged. Inputs must be equal-length 16 kHz.
double stoi(const Waveform& clean, const Waveform& processed);

struct ReportRow {
  std::string utterance_id;
  std::string variant;
  double gap_ms_total = 0.0;
  double l1 = 0.0;
  double per = 0.0;
  double stoi = 0.0;
  std::optional<double> pesq_external;  // attached from an external tool
};

// Writes rows plus one trailing aggregate row of column means.
void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows);

// CSV with header (utterance_id,pesq) mapping utterance to an externally
// computed PESQ score.
std::map<std::string, double> read_external_pesq(const std::string& path);

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y), drawn in order
};

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series);

}  // namespace avsi

#endif  // AVSI_METRICS_HPP
