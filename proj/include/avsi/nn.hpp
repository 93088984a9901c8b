// Trainable substrate: BLSTM layers, fully-connected heads, softmax,
// analytic backpropagation through time and the Adam optimizer.
// Sequences are column-major: one column per frame.
#ifndef AVSI_NN_HPP
#define AVSI_NN_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

namespace avsi {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Gate row layout within the 4H dimension: [input; forget; cell; output].
struct LstmDirParams {
  Mat W;  // 4H x input_dim
  Mat U;  // 4H x H
  Vec b;  // 4H
};

struct LstmLayerParams {
  LstmDirParams fwd, bwd;
  int input_dim() const { return static_cast<int>(fwd.W.cols()); }
  int hidden_dim() const { return static_cast<int>(fwd.U.cols()); }
};

struct FcParams {
  Mat W;
  Vec b;
};

struct ModelDims {
  int input_dim = 0;
  int hidden = 250;
  int layers = 3;
  int inpaint_out = 0;  // 0 = head absent
  int phone_out = 0;    // 0 = head absent
};

struct ModelParams {
  std::vector<LstmLayerParams> lstm;
  std::optional<FcParams> head_inpaint;
  std::optional<FcParams> head_phone;

  ModelDims dims() const;
  int64_t param_count() const;
};

// Flat views over every tensor, in a fixed order; used by the optimizer,
// clipping and serialization.
std::vector<Eigen::Map<Vec>> tensor_views(ModelParams& p);
std::vector<Eigen::Map<const Vec>> tensor_views(const ModelParams& p);

ModelParams zeros_like(const ModelParams& p);

// Uniform init scaled by sqrt(6/(fan_in+fan_out)); forget-gate bias 1.0.
ModelParams init_model(const ModelDims& dims, uint64_t rng_seed);

struct LstmDirCache {
  Mat x;      // input_dim x T, in propagation order
  Mat gates;  // 4H x T, post-nonlinearity
  Mat c;      // H x T
  Mat h;      // H x T
};

struct LstmLayerCache {
  LstmDirCache fwd, bwd;
};

struct ModelCache {
  std::vector<LstmLayerCache> layers;
  Mat top;  // 2H x T output of the last BLSTM layer
};

// Single bidirectional layer: inputs (input_dim x T) -> (2H x T), forward
// direction stacked on top of backward.
Mat blstm_forward(const LstmLayerParams& p, const Mat& inputs,
                  LstmLayerCache* cache = nullptr);

// dOut (2H x T) -> dInputs; parameter gradients accumulate into `grad`.
Mat blstm_backward(const LstmLayerParams& p, const LstmLayerCache& cache,
                   const Mat& d_out, LstmLayerParams& grad);

Mat fc_forward(const FcParams& p, const Mat& inputs);
Mat fc_backward(const FcParams& p, const Mat& inputs, const Mat& d_out,
                FcParams& grad);

// Numerically stable softmax over each column.
Vec softmax(const Vec& logits);
Mat softmax_cols(const Mat& logits);

struct ModelOutput {
  std::optional<Mat> inpaint;       // inpaint_out x T
  std::optional<Mat> phone_logits;  // phone_out x T
};

ModelOutput model_forward(const ModelParams& p, const Mat& inputs,
                          ModelCache* cache = nullptr);

// Backprop from head gradients (either may be null) through the stack.
// Gradients sum over time steps. Returns gradients shaped like the params.
ModelParams model_backward(const ModelParams& p, const ModelCache& cache,
                           const Mat* d_inpaint, const Mat* d_phone_logits);

void accumulate(ModelParams& acc, const ModelParams& g, double scale = 1.0);
double global_norm(const ModelParams& g);
// Scales gradients so the global norm does not exceed max_norm.
void clip_global_norm(ModelParams& g, double max_norm);

struct AdamState {
  int64_t step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  ModelParams m, v;

  static AdamState create(const ModelParams& params, double lr = 1e-3);
};

// Standard Adam with bias correction; throws on non-finite gradients so
// diverging runs abort instead of silently poisoning the params.
void adam_step(AdamState& state, ModelParams& params, const ModelParams& grads);

}  // namespace avsi

#endif  // AVSI_NN_HPP
