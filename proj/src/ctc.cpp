#include "avsi/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace avsi {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Minimal feasible path length: every label plus a blank between repeats.
int min_path_length(const PhoneSequence& y) {
  int len = static_cast<int>(y.size());
  for (size_t i = 1; i < y.size(); ++i) {
    if (y[i] == y[i - 1]) ++len;
  }
  return len;
}

void validate(const FramePosteriors& p, const PhoneSequence& y) {
  for (int t = 0; t < p.frames; ++t) {
    double sum = 0.0;
    for (int k = 0; k < p.classes; ++k) sum += p.at(t, k);
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("ctc: posterior row not normalized");
  }
  for (int label : y) {
    if (label < 0 || label >= p.blank())
      throw std::invalid_argument("ctc: label outside dictionary");
  }
  if (min_path_length(y) > p.frames)
    throw std::invalid_argument("ctc: label infeasible for frame count");
}

// Extended label with blanks interleaved: length 2|y|+1.
std::vector<int> extend_label(const PhoneSequence& y, int blank) {
  std::vector<int> ext(2 * y.size() + 1, blank);
  for (size_t i = 0; i < y.size(); ++i) ext[2 * i + 1] = y[i];
  return ext;
}

// Forward variables over log emission probabilities lsm (classes x T).
Eigen::MatrixXd ctc_alpha(const Eigen::MatrixXd& lsm, const std::vector<int>& ext) {
  const int T = static_cast<int>(lsm.cols());
  const int S = static_cast<int>(ext.size());
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Constant(S, T, kNegInf);
  alpha(0, 0) = lsm(ext[0], 0);
  if (S > 1) alpha(1, 0) = lsm(ext[1], 0);
  for (int t = 1; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      double a = alpha(s, t - 1);
      if (s >= 1) a = log_add(a, alpha(s - 1, t - 1));
      if (s >= 2 && ext[s] != ext[s - 2]) a = log_add(a, alpha(s - 2, t - 1));
      alpha(s, t) = a + lsm(ext[s], t);
    }
  }
  return alpha;
}

// Backward variables excluding the emission at t, so that
// sum_s exp(alpha(s,t) + beta(s,t)) = P(y) at every t.
Eigen::MatrixXd ctc_beta(const Eigen::MatrixXd& lsm, const std::vector<int>& ext) {
  const int T = static_cast<int>(lsm.cols());
  const int S = static_cast<int>(ext.size());
  Eigen::MatrixXd beta = Eigen::MatrixXd::Constant(S, T, kNegInf);
  beta(S - 1, T - 1) = 0.0;
  if (S > 1) beta(S - 2, T - 1) = 0.0;
  for (int t = T - 2; t >= 0; --t) {
    for (int s = S - 1; s >= 0; --s) {
      double b = beta(s, t + 1) + lsm(ext[s], t + 1);
      if (s + 1 < S) b = log_add(b, beta(s + 1, t + 1) + lsm(ext[s + 1], t + 1));
      if (s + 2 < S && ext[s] != ext[s + 2])
        b = log_add(b, beta(s + 2, t + 1) + lsm(ext[s + 2], t + 1));
      beta(s, t) = b;
    }
  }
  return beta;
}

Eigen::MatrixXd log_posteriors(const FramePosteriors& p) {
  Eigen::MatrixXd lsm(p.classes, p.frames);
  for (int t = 0; t < p.frames; ++t) {
    for (int k = 0; k < p.classes; ++k) lsm(k, t) = std::log(p.at(t, k));
  }
  return lsm;
}

}  // namespace

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double ctc_loss(const FramePosteriors& p, const PhoneSequence& y) {
  validate(p, y);
  const std::vector<int> ext = extend_label(y, p.blank());
  const Eigen::MatrixXd lsm = log_posteriors(p);
  const Eigen::MatrixXd alpha = ctc_alpha(lsm, ext);
  const int S = static_cast<int>(ext.size());
  double log_p = alpha(S - 1, p.frames - 1);
  if (S > 1) log_p = log_add(log_p, alpha(S - 2, p.frames - 1));
  return -log_p;
}

CtcGrad ctc_grad(const Eigen::MatrixXd& logits, const PhoneSequence& y) {
  const int C = static_cast<int>(logits.rows());
  const int T = static_cast<int>(logits.cols());
  const int blank = C - 1;
  for (int label : y) {
    if (label < 0 || label >= blank)
      throw std::invalid_argument("ctc_grad: label outside dictionary");
  }
  if (min_path_length(y) > T)
    throw std::invalid_argument("ctc_grad: label infeasible for frame count");

  // log softmax per frame
  Eigen::MatrixXd lsm(C, T);
  Eigen::MatrixXd sm(C, T);
  for (int t = 0; t < T; ++t) {
    const double m = logits.col(t).maxCoeff();
    const Eigen::ArrayXd shifted = logits.col(t).array() - m;
    const double lse = std::log(shifted.exp().sum());
    lsm.col(t) = shifted - lse;
    sm.col(t) = lsm.col(t).array().exp();
  }

  const std::vector<int> ext = extend_label(y, blank);
  const int S = static_cast<int>(ext.size());
  const Eigen::MatrixXd alpha = ctc_alpha(lsm, ext);
  const Eigen::MatrixXd beta = ctc_beta(lsm, ext);

  double log_p = alpha(S - 1, T - 1);
  if (S > 1) log_p = log_add(log_p, alpha(S - 2, T - 1));

  CtcGrad out;
  out.loss = -log_p;
  out.d_logits = sm;  // softmax minus label occupancy
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      const double occ = alpha(s, t) + beta(s, t) - log_p;
      if (occ != kNegInf) out.d_logits(ext[s], t) -= std::exp(occ);
    }
  }
  return out;
}

PhoneSequence collapse(const std::vector<int>& path, int blank) {
  PhoneSequence out;
  int prev = blank;
  for (int c : path) {
    if (c != blank && c != prev) out.push_back(c);
    prev = c;
  }
  return out;
}

PhoneSequence beam_search_decode(const FramePosteriors& p, int beam_width) {
  if (beam_width < 1) throw std::invalid_argument("beam_search_decode: empty beam");
  const int blank = p.blank();

  // prefix -> (log P ending in blank, log P ending in non-blank)
  using BeamMap = std::map<PhoneSequence, std::pair<double, double>>;
  BeamMap beams;
  beams[{}] = {0.0, kNegInf};

  for (int t = 0; t < p.frames; ++t) {
    BeamMap next;
    auto bucket = [&next](const PhoneSequence& seq) -> std::pair<double, double>& {
      auto [it, inserted] = next.try_emplace(seq, kNegInf, kNegInf);
      (void)inserted;
      return it->second;
    };
    for (const auto& [prefix, pr] : beams) {
      const auto [pb, pnb] = pr;
      const double total = log_add(pb, pnb);
      // stay on blank
      auto& same = bucket(prefix);
      same.first = log_add(same.first, total + std::log(p.at(t, blank)));
      // repeat the final symbol without extending the prefix
      if (!prefix.empty()) {
        same.second = log_add(same.second, pnb + std::log(p.at(t, prefix.back())));
      }
      for (int c = 0; c < blank; ++c) {
        PhoneSequence extended = prefix;
        extended.push_back(c);
        // a repeated symbol only extends the prefix across a blank
        const double base = (!prefix.empty() && prefix.back() == c) ? pb : total;
        auto& ext = bucket(extended);
        ext.second = log_add(ext.second, base + std::log(p.at(t, c)));
      }
    }
    if (static_cast<int>(next.size()) > beam_width) {
      std::vector<std::pair<double, const PhoneSequence*>> scored;
      scored.reserve(next.size());
      for (const auto& [seq, pr] : next) {
        scored.emplace_back(log_add(pr.first, pr.second), &seq);
      }
      std::sort(scored.begin(), scored.end(),
                [](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first > b.first;
                  return *a.second < *b.second;
                });
      BeamMap pruned;
      for (int i = 0; i < beam_width; ++i) pruned[*scored[i].second] = next[*scored[i].second];
      next = std::move(pruned);
    }
    beams = std::move(next);
  }

  const PhoneSequence* best = nullptr;
  double best_score = kNegInf;
  for (const auto& [seq, pr] : beams) {
    const double score = log_add(pr.first, pr.second);
    if (!best || score > best_score) {
      best = &seq;
      best_score = score;
    }
  }
  return best ? *best : PhoneSequence{};
}

}  // namespace avsi
