// CTC loss via the forward algorithm over the blank-extended label, its
// gradient with respect to pre-softmax logits, and prefix beam search
// decoding. All probability arithmetic is in log space. The blank symbol
// is the last class (index = dictionary size).
#ifndef AVSI_CTC_HPP
#define AVSI_CTC_HPP

#include <Eigen/Dense>
#include <vector>

#include "avsi/types.hpp"

namespace avsi {

// T x (L+1) grid of per-frame class probabilities, blank last.
struct FramePosteriors {
  int frames = 0;
  int classes = 0;  // L+1
  std::vector<double> p;

  FramePosteriors() = default;
  FramePosteriors(int frames_, int classes_)
      : frames(frames_), classes(classes_),
        p(static_cast<size_t>(frames_) * classes_, 0.0) {}

  double& at(int t, int k) { return p[static_cast<size_t>(t) * classes + k]; }
  double at(int t, int k) const { return p[static_cast<size_t>(t) * classes + k]; }
  int blank() const { return classes - 1; }
};

// log(exp(a) + exp(b)) with -inf handling.
double log_add(double a, double b);

// -ln P(y | p). Throws when a row is not normalized or when the label is
// infeasible for the frame count (|y| plus required blanks between repeats
// exceeds T).
double ctc_loss(const FramePosteriors& p, const PhoneSequence& y);

// Loss and gradient wrt pre-softmax logits (classes x T, one column per
// frame, blank last). Gradient has the softmax-minus-occupancy form.
struct CtcGrad {
  double loss = 0.0;
  Eigen::MatrixXd d_logits;
};
CtcGrad ctc_grad(const Eigen::MatrixXd& logits, const PhoneSequence& y);

// Remove consecutive repeats, then blanks.
PhoneSequence collapse(const std::vector<int>& path, int blank);

// Prefix beam search merging equal prefixes; returns the collapsed label
// sequence with the highest total posterior probability.
PhoneSequence beam_search_decode(const FramePosteriors& p, int beam_width = 20);

}  // namespace avsi

#endif  // AVSI_CTC_HPP
