#include "avsi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "avsi/dsp.hpp"

namespace avsi {

double masked_l1(const Spectrogram& yhat, const Spectrogram& y, const BinaryMask& m) {
  if (yhat.frames != y.frames || yhat.bins != y.bins || m.frames != y.frames || m.bins != y.bins)
    throw std::invalid_argument("masked_l1: shape mismatch");
  double acc = 0.0;
  size_t count = 0;
  for (size_t i = 0; i < y.v.size(); ++i) {
    if (m.v[i]) {
      acc += std::abs(yhat.v[i] - y.v[i]);
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("masked_l1: empty mask");
  return acc / static_cast<double>(count);
}

int edit_distance(const PhoneSequence& a, const PhoneSequence& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double per(const PhoneSequence& hyp, const PhoneSequence& ref) {
  if (ref.empty()) throw std::invalid_argument("per: empty reference");
  return static_cast<double>(edit_distance(hyp, ref)) / static_cast<double>(ref.size());
}

namespace {

// STOI constants per the reference conventions.
constexpr int kStoiRate = 10000;
constexpr int kStoiWin = 256;
constexpr int kStoiHop = 128;
constexpr int kStoiFft = 512;
constexpr int kStoiBands = 15;
constexpr double kStoiBandBase = 150.0;
constexpr int kStoiSegFrames = 30;     // 384 ms at 10 kHz / 128 hop
constexpr double kStoiDynRange = 40.0;  // dB for silent-frame removal
constexpr double kStoiBeta = -15.0;     // dB SDR clipping bound

std::vector<double> stoi_window() {
  // Hann tapering to zero at both ends (w[0] = w[n-1] = 0 excluded style):
  // symmetric Hann over the frame, conventional for the metric.
  std::vector<double> w(kStoiWin);
  for (int n = 0; n < kStoiWin; ++n)
    w[static_cast<size_t>(n)] = 0.5 - 0.5 * std::cos(2.0 * M_PI * (n + 1) / (kStoiWin + 1));
  return w;
}

// Removes frames of both signals whose clean-frame energy is more than
// 40 dB below the loudest clean frame; kept windowed frames are
// overlap-added back into shorter signals.
void remove_silent_frames(const std::vector<double>& clean, const std::vector<double>& proc,
                          std::vector<double>& clean_out, std::vector<double>& proc_out) {
  const std::vector<double> w = stoi_window();
  const int n = static_cast<int>(clean.size());
  std::vector<int> starts;
  for (int s = 0; s + kStoiWin <= n; s += kStoiHop) starts.push_back(s);
  if (starts.empty()) throw std::invalid_argument("stoi: input shorter than one frame");

  std::vector<double> energy_db(starts.size());
  double max_db = -1e300;
  for (size_t f = 0; f < starts.size(); ++f) {
    double e = 0.0;
    for (int i = 0; i < kStoiWin; ++i) {
      const double v = clean[static_cast<size_t>(starts[f] + i)] * w[static_cast<size_t>(i)];
      e += v * v;
    }
    energy_db[f] = 10.0 * std::log10(e + 1e-300);
    max_db = std::max(max_db, energy_db[f]);
  }
  if (max_db < -200.0) throw std::invalid_argument("stoi: all-silent input");

  std::vector<size_t> kept;
  for (size_t f = 0; f < starts.size(); ++f) {
    if (energy_db[f] > max_db - kStoiDynRange) kept.push_back(f);
  }
  if (kept.empty()) throw std::invalid_argument("stoi: all-silent input");

  const size_t out_len = (kept.size() - 1) * kStoiHop + kStoiWin;
  clean_out.assign(out_len, 0.0);
  proc_out.assign(out_len, 0.0);
  for (size_t idx = 0; idx < kept.size(); ++idx) {
    const int src = starts[kept[idx]];
    const size_t dst = idx * kStoiHop;
    for (int i = 0; i < kStoiWin; ++i) {
      clean_out[dst + static_cast<size_t>(i)] +=
          clean[static_cast<size_t>(src + i)] * w[static_cast<size_t>(i)];
      proc_out[dst + static_cast<size_t>(i)] +=
          proc[static_cast<size_t>(src + i)] * w[static_cast<size_t>(i)];
    }
  }
}

// frames x bands matrix of one-third-octave band magnitudes.
std::vector<std::vector<double>> band_spectrogram(const std::vector<double>& x) {
  // nearest-bin band edges at 10 kHz / 512-point resolution
  static const auto bands = [] {
    std::vector<std::pair<int, int>> edges(kStoiBands);
    for (int j = 0; j < kStoiBands; ++j) {
      const double cf = kStoiBandBase * std::pow(2.0, j / 3.0);
      const double lo = cf * std::pow(2.0, -1.0 / 6.0);
      const double hi = cf * std::pow(2.0, 1.0 / 6.0);
      auto nearest_bin = [](double f) {
        const double bin_hz = static_cast<double>(kStoiRate) / kStoiFft;
        return static_cast<int>(std::lround(f / bin_hz));
      };
      edges[static_cast<size_t>(j)] = {nearest_bin(lo), nearest_bin(hi)};
    }
    return edges;
  }();

  const std::vector<double> w = stoi_window();
  std::vector<std::vector<double>> out;
  const int n = static_cast<int>(x.size());
  for (int s = 0; s + kStoiWin <= n; s += kStoiHop) {
    std::vector<double> frame(kStoiFft, 0.0);
    for (int i = 0; i < kStoiWin; ++i)
      frame[static_cast<size_t>(i)] = x[static_cast<size_t>(s + i)] * w[static_cast<size_t>(i)];
    const auto spec = rfft(frame);
    std::vector<double> row(kStoiBands);
    for (int j = 0; j < kStoiBands; ++j) {
      double acc = 0.0;
      for (int k = bands[static_cast<size_t>(j)].first; k < bands[static_cast<size_t>(j)].second;
           ++k) {
        acc += std::norm(spec[static_cast<size_t>(k)]);
      }
      row[static_cast<size_t>(j)] = std::sqrt(acc);
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

double stoi(const Waveform& clean, const Waveform& processed) {
  if (clean.size() != processed.size()) throw std::invalid_argument("stoi: length mismatch");
  if (clean.sample_rate != processed.sample_rate)
    throw std::invalid_argument("stoi: sample-rate mismatch");

  const Waveform clean10 = resample(clean, kStoiRate);
  const Waveform proc10 = resample(processed, kStoiRate);

  std::vector<double> c, p;
  remove_silent_frames(clean10.samples, proc10.samples, c, p);

  const auto X = band_spectrogram(c);
  const auto Y = band_spectrogram(p);
  const int frames = static_cast<int>(X.size());
  if (frames < kStoiSegFrames)
    throw std::invalid_argument("stoi: too little active signal for one analysis segment");

  const double clip = std::pow(10.0, -kStoiBeta / 20.0);  // 10^0.75
  double acc = 0.0;
  int count = 0;
  for (int m = kStoiSegFrames; m <= frames; ++m) {
    const int start = m - kStoiSegFrames;
    for (int j = 0; j < kStoiBands; ++j) {
      double ex = 0.0, ey = 0.0;
      for (int t = start; t < m; ++t) {
        ex += X[static_cast<size_t>(t)][static_cast<size_t>(j)] *
              X[static_cast<size_t>(t)][static_cast<size_t>(j)];
        ey += Y[static_cast<size_t>(t)][static_cast<size_t>(j)] *
              Y[static_cast<size_t>(t)][static_cast<size_t>(j)];
      }
      const double alpha = std::sqrt(ex / std::max(ey, 1e-300));
      double xs[kStoiSegFrames], ys[kStoiSegFrames];
      double mx = 0.0, my = 0.0;
      for (int t = 0; t < kStoiSegFrames; ++t) {
        const double xv = X[static_cast<size_t>(start + t)][static_cast<size_t>(j)];
        double yv = alpha * Y[static_cast<size_t>(start + t)][static_cast<size_t>(j)];
        yv = std::min(yv, xv * (1.0 + clip));
        xs[t] = xv;
        ys[t] = yv;
        mx += xv;
        my += yv;
      }
      mx /= kStoiSegFrames;
      my /= kStoiSegFrames;
      double num = 0.0, dx = 0.0, dy = 0.0;
      for (int t = 0; t < kStoiSegFrames; ++t) {
        num += (xs[t] - mx) * (ys[t] - my);
        dx += (xs[t] - mx) * (xs[t] - mx);
        dy += (ys[t] - my) * (ys[t] - my);
      }
      double d;
      if (dx < 1e-24 && dy < 1e-24) {
        d = 1.0;  // both constant: identical up to gain
      } else if (dx < 1e-24 || dy < 1e-24) {
        d = 0.0;
      } else {
        d = num / std::sqrt(dx * dy);
      }
      acc += d;
      ++count;
    }
  }
  return acc / static_cast<double>(count);
}

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("report: cannot open '" + path + "'");
  os << "utterance_id,variant,gap_ms_total,l1,per,stoi,pesq_external\n";
  char buf[256];
  auto emit = [&](const ReportRow& r) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.6g,%.6g,%.6g,%.6g", r.utterance_id.c_str(),
                  r.variant.c_str(), r.gap_ms_total, r.l1, r.per, r.stoi);
    os << buf;
    if (r.pesq_external) {
      std::snprintf(buf, sizeof(buf), ",%.6g\n", *r.pesq_external);
      os << buf;
    } else {
      os << ",\n";
    }
  };
  for (const auto& r : rows) emit(r);

  if (!rows.empty()) {
    ReportRow agg;
    agg.utterance_id = "aggregate";
    agg.variant = rows.front().variant;
    for (const auto& r : rows) {
      if (r.variant != agg.variant) agg.variant = "all";
    }
    double pesq_sum = 0.0;
    int pesq_n = 0;
    for (const auto& r : rows) {
      agg.gap_ms_total += r.gap_ms_total;
      agg.l1 += r.l1;
      agg.per += r.per;
      agg.stoi += r.stoi;
      if (r.pesq_external) {
        pesq_sum += *r.pesq_external;
        ++pesq_n;
      }
    }
    const double n = static_cast<double>(rows.size());
    agg.gap_ms_total /= n;
    agg.l1 /= n;
    agg.per /= n;
    agg.stoi /= n;
    if (pesq_n > 0) agg.pesq_external = pesq_sum / pesq_n;
    emit(agg);
  }
  if (!os) throw std::runtime_error("report: write failed for '" + path + "'");
}

std::map<std::string, double> read_external_pesq(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("pesq csv: cannot open '" + path + "'");
  std::map<std::string, double> out;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (first) {  // header
      first = false;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("pesq csv: malformed line '" + line + "'");
    out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
  }
  return out;
}

namespace {

std::string svg_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string fmt_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series) {
  constexpr double W = 640, H = 420;
  constexpr double ml = 70, mr = 150, mt = 48, mb = 56;  // margins
  const double pw = W - ml - mr, ph = H - mt - mb;

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmin > xmax) {  // no data: degenerate frame
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax - xmin < 1e-12) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  const double ypad = std::max(1e-12, 0.08 * (ymax - ymin));
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#17becf"};
  constexpr int kNumColors = 7;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  svg << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << (ml + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << svg_escape(title) << "</text>\n";

  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << (mt + ph)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << (mt + ph) << "\" x2=\"" << (ml + pw) << "\" y2=\""
      << (mt + ph) << "\" stroke=\"black\"/>\n";

  // ticks: x at data points of the longest series, y at 5 even divisions
  std::vector<double> xticks;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      (void)y;
      if (std::find(xticks.begin(), xticks.end(), x) == xticks.end()) xticks.push_back(x);
    }
  }
  std::sort(xticks.begin(), xticks.end());
  if (xticks.size() > 12) {  // thin out
    std::vector<double> thin;
    for (size_t i = 0; i < xticks.size(); i += xticks.size() / 10) thin.push_back(xticks[i]);
    xticks = thin;
  }
  for (double x : xticks) {
    svg << "<line x1=\"" << px(x) << "\" y1=\"" << (mt + ph) << "\" x2=\"" << px(x) << "\" y2=\""
        << (mt + ph + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px(x) << "\" y=\"" << (mt + ph + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_num(x)
        << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double y = ymin + (ymax - ymin) * i / 5.0;
    svg << "<line x1=\"" << (ml - 5) << "\" y1=\"" << py(y) << "\" x2=\"" << ml << "\" y2=\""
        << py(y) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << (ml - 9) << "\" y=\"" << (py(y) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_num(y)
        << "</text>\n";
  }
  svg << "<text x=\"" << (ml + pw / 2) << "\" y=\"" << (H - 12)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << svg_escape(x_label) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << (mt + ph / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 18 " << (mt + ph / 2) << ")\">" << svg_escape(y_label)
      << "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const char* color = kColors[si % kNumColors];
    const auto& pts = series[si].points;
    if (!pts.empty()) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (const auto& [x, y] : pts) svg << px(x) << "," << py(y) << " ";
      svg << "\"/>\n";
      for (const auto& [x, y] : pts) {
        svg << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color
            << "\"/>\n";
      }
    }
    // legend entry
    const double ly = mt + 14 + 20 * static_cast<double>(si);
    svg << "<line x1=\"" << (ml + pw + 12) << "\" y1=\"" << ly << "\" x2=\"" << (ml + pw + 34)
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << (ml + pw + 40) << "\" y=\"" << (ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << svg_escape(series[si].label)
        << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream os(path);
  if (!os) throw std::runtime_error("svg: cannot open '" + path + "'");
  os << svg.str();
  if (!os) throw std::runtime_error("svg: write failed for '" + path + "'");
}

}  // namespace avsi
