#include "avsi/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "avsi/rng.hpp"

namespace avsi {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Mat reverse_cols(const Mat& m) {
  Mat out(m.rows(), m.cols());
  const Eigen::Index T = m.cols();
  for (Eigen::Index t = 0; t < T; ++t) out.col(t) = m.col(T - 1 - t);
  return out;
}

// Forward recurrence for one direction; x is already in propagation order.
Mat lstm_dir_forward(const LstmDirParams& p, const Mat& x, LstmDirCache* cache) {
  const int H = static_cast<int>(p.U.cols());
  const Eigen::Index T = x.cols();

  Mat z_in = p.W * x;               // precomputed input contribution
  z_in.colwise() += p.b;

  Mat gates(4 * H, T), c(H, T), h(H, T);
  Vec h_prev = Vec::Zero(H), c_prev = Vec::Zero(H);
  Vec z(4 * H);
  for (Eigen::Index t = 0; t < T; ++t) {
    z = z_in.col(t) + p.U * h_prev;
    for (int j = 0; j < H; ++j) {
      const double i_g = sigmoid(z[j]);
      const double f_g = sigmoid(z[H + j]);
      const double g_g = std::tanh(z[2 * H + j]);
      const double o_g = sigmoid(z[3 * H + j]);
      const double c_t = f_g * c_prev[j] + i_g * g_g;
      gates(j, t) = i_g;
      gates(H + j, t) = f_g;
      gates(2 * H + j, t) = g_g;
      gates(3 * H + j, t) = o_g;
      c(j, t) = c_t;
      h(j, t) = o_g * std::tanh(c_t);
    }
    h_prev = h.col(t);
    c_prev = c.col(t);
  }
  if (cache) {
    cache->x = x;
    cache->gates = std::move(gates);
    cache->c = std::move(c);
    cache->h = h;
  }
  return h;
}

Mat lstm_dir_backward(const LstmDirParams& p, const LstmDirCache& cache,
                      const Mat& dh_out, LstmDirParams& grad) {
  const int H = static_cast<int>(p.U.cols());
  const Eigen::Index T = cache.x.cols();

  Mat dz_all(4 * H, T);
  Vec dh_next = Vec::Zero(H), dc_next = Vec::Zero(H);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    for (int j = 0; j < H; ++j) {
      const double i_g = cache.gates(j, t);
      const double f_g = cache.gates(H + j, t);
      const double g_g = cache.gates(2 * H + j, t);
      const double o_g = cache.gates(3 * H + j, t);
      const double tc = std::tanh(cache.c(j, t));
      const double dh = dh_out(j, t) + dh_next[j];
      const double dc = dh * o_g * (1.0 - tc * tc) + dc_next[j];
      const double c_prev = t > 0 ? cache.c(j, t - 1) : 0.0;
      dz_all(j, t) = dc * g_g * i_g * (1.0 - i_g);
      dz_all(H + j, t) = dc * c_prev * f_g * (1.0 - f_g);
      dz_all(2 * H + j, t) = dc * i_g * (1.0 - g_g * g_g);
      dz_all(3 * H + j, t) = dh * tc * o_g * (1.0 - o_g);
      dc_next[j] = dc * f_g;
    }
    dh_next = p.U.transpose() * dz_all.col(t);
  }

  grad.W += dz_all * cache.x.transpose();
  if (T > 1) {
    grad.U += dz_all.rightCols(T - 1) * cache.h.leftCols(T - 1).transpose();
  }
  grad.b += dz_all.rowwise().sum();
  return p.W.transpose() * dz_all;
}

FcParams zero_fc_like(const FcParams& p) {
  return FcParams{Mat::Zero(p.W.rows(), p.W.cols()), Vec::Zero(p.b.size())};
}

}  // namespace

ModelDims ModelParams::dims() const {
  ModelDims d;
  d.layers = static_cast<int>(lstm.size());
  if (!lstm.empty()) {
    d.input_dim = lstm.front().input_dim();
    d.hidden = lstm.front().hidden_dim();
  }
  d.inpaint_out = head_inpaint ? static_cast<int>(head_inpaint->W.rows()) : 0;
  d.phone_out = head_phone ? static_cast<int>(head_phone->W.rows()) : 0;
  return d;
}

int64_t ModelParams::param_count() const {
  int64_t n = 0;
  for (const auto& view : tensor_views(*this)) n += view.size();
  return n;
}

std::vector<Eigen::Map<Vec>> tensor_views(ModelParams& p) {
  std::vector<Eigen::Map<Vec>> views;
  auto add = [&views](Mat& m) { views.emplace_back(m.data(), m.size()); };
  auto addv = [&views](Vec& v) { views.emplace_back(v.data(), v.size()); };
  for (auto& layer : p.lstm) {
    for (LstmDirParams* d : {&layer.fwd, &layer.bwd}) {
      add(d->W);
      add(d->U);
      addv(d->b);
    }
  }
  if (p.head_inpaint) {
    add(p.head_inpaint->W);
    addv(p.head_inpaint->b);
  }
  if (p.head_phone) {
    add(p.head_phone->W);
    addv(p.head_phone->b);
  }
  return views;
}

std::vector<Eigen::Map<const Vec>> tensor_views(const ModelParams& p) {
  std::vector<Eigen::Map<const Vec>> views;
  auto add = [&views](const Mat& m) { views.emplace_back(m.data(), m.size()); };
  auto addv = [&views](const Vec& v) { views.emplace_back(v.data(), v.size()); };
  for (const auto& layer : p.lstm) {
    for (const LstmDirParams* d : {&layer.fwd, &layer.bwd}) {
      add(d->W);
      add(d->U);
      addv(d->b);
    }
  }
  if (p.head_inpaint) {
    add(p.head_inpaint->W);
    addv(p.head_inpaint->b);
  }
  if (p.head_phone) {
    add(p.head_phone->W);
    addv(p.head_phone->b);
  }
  return views;
}

ModelParams zeros_like(const ModelParams& p) {
  ModelParams z;
  z.lstm.reserve(p.lstm.size());
  for (const auto& layer : p.lstm) {
    LstmLayerParams zl;
    for (auto [src, dst] : {std::pair{&layer.fwd, &zl.fwd}, std::pair{&layer.bwd, &zl.bwd}}) {
      dst->W = Mat::Zero(src->W.rows(), src->W.cols());
      dst->U = Mat::Zero(src->U.rows(), src->U.cols());
      dst->b = Vec::Zero(src->b.size());
    }
    z.lstm.push_back(std::move(zl));
  }
  if (p.head_inpaint) z.head_inpaint = zero_fc_like(*p.head_inpaint);
  if (p.head_phone) z.head_phone = zero_fc_like(*p.head_phone);
  return z;
}

ModelParams init_model(const ModelDims& dims, uint64_t rng_seed) {
  if (dims.layers < 1 || dims.hidden < 1 || dims.input_dim < 1)
    throw std::invalid_argument("init_model: invalid dims");
  Rng rng(rng_seed);
  const int H = dims.hidden;

  auto uniform_mat = [&rng](int rows, int cols) {
    const double bound = std::sqrt(6.0 / (rows + cols));
    Mat m(rows, cols);
    for (int c = 0; c < cols; ++c) {
      for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(-bound, bound);
    }
    return m;
  };
  auto init_dir = [&](int input_dim) {
    LstmDirParams d;
    d.W = uniform_mat(4 * H, input_dim);
    d.U = uniform_mat(4 * H, H);
    d.b = Vec::Zero(4 * H);
    d.b.segment(H, H).setConstant(1.0);  // forget gate bias
    return d;
  };

  ModelParams p;
  int in = dims.input_dim;
  for (int layer = 0; layer < dims.layers; ++layer) {
    LstmLayerParams l;
    l.fwd = init_dir(in);
    l.bwd = init_dir(in);
    p.lstm.push_back(std::move(l));
    in = 2 * H;
  }
  if (dims.inpaint_out > 0) {
    p.head_inpaint = FcParams{uniform_mat(dims.inpaint_out, in), Vec::Zero(dims.inpaint_out)};
  }
  if (dims.phone_out > 0) {
    p.head_phone = FcParams{uniform_mat(dims.phone_out, in), Vec::Zero(dims.phone_out)};
  }
  return p;
}

Mat blstm_forward(const LstmLayerParams& p, const Mat& inputs, LstmLayerCache* cache) {
  if (inputs.rows() != p.input_dim())
    throw std::invalid_argument("blstm_forward: input dimension mismatch");
  const int H = p.hidden_dim();
  LstmLayerCache local;
  LstmLayerCache* c = cache ? cache : &local;

  Mat h_f = lstm_dir_forward(p.fwd, inputs, &c->fwd);
  Mat h_b_rev = lstm_dir_forward(p.bwd, reverse_cols(inputs), &c->bwd);

  Mat out(2 * H, inputs.cols());
  out.topRows(H) = h_f;
  out.bottomRows(H) = reverse_cols(h_b_rev);
  return out;
}

Mat blstm_backward(const LstmLayerParams& p, const LstmLayerCache& cache,
                   const Mat& d_out, LstmLayerParams& grad) {
  const int H = p.hidden_dim();
  Mat dx = lstm_dir_backward(p.fwd, cache.fwd, d_out.topRows(H), grad.fwd);
  Mat dx_rev = lstm_dir_backward(p.bwd, cache.bwd, reverse_cols(d_out.bottomRows(H)), grad.bwd);
  dx += reverse_cols(dx_rev);
  return dx;
}

Mat fc_forward(const FcParams& p, const Mat& inputs) {
  Mat out = p.W * inputs;
  out.colwise() += p.b;
  return out;
}

Mat fc_backward(const FcParams& p, const Mat& inputs, const Mat& d_out, FcParams& grad) {
  grad.W += d_out * inputs.transpose();
  grad.b += d_out.rowwise().sum();
  return p.W.transpose() * d_out;
}

Vec softmax(const Vec& logits) {
  const double m = logits.maxCoeff();
  Vec e = (logits.array() - m).exp();
  return e / e.sum();
}

Mat softmax_cols(const Mat& logits) {
  Mat out(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.cols(); ++t) out.col(t) = softmax(logits.col(t));
  return out;
}

ModelOutput model_forward(const ModelParams& p, const Mat& inputs, ModelCache* cache) {
  ModelCache local;
  ModelCache* c = cache ? cache : &local;
  c->layers.resize(p.lstm.size());

  Mat h = inputs;
  for (size_t i = 0; i < p.lstm.size(); ++i) {
    h = blstm_forward(p.lstm[i], h, &c->layers[i]);
  }
  c->top = h;

  ModelOutput out;
  if (p.head_inpaint) out.inpaint = fc_forward(*p.head_inpaint, h);
  if (p.head_phone) out.phone_logits = fc_forward(*p.head_phone, h);
  return out;
}

ModelParams model_backward(const ModelParams& p, const ModelCache& cache,
                           const Mat* d_inpaint, const Mat* d_phone_logits) {
  ModelParams grad = zeros_like(p);
  Mat d_top = Mat::Zero(cache.top.rows(), cache.top.cols());
  if (d_inpaint) d_top += fc_backward(*p.head_inpaint, cache.top, *d_inpaint, *grad.head_inpaint);
  if (d_phone_logits)
    d_top += fc_backward(*p.head_phone, cache.top, *d_phone_logits, *grad.head_phone);

  Mat d = d_top;
  for (size_t i = p.lstm.size(); i-- > 0;) {
    d = blstm_backward(p.lstm[i], cache.layers[i], d, grad.lstm[i]);
  }
  return grad;
}

void accumulate(ModelParams& acc, const ModelParams& g, double scale) {
  auto dst = tensor_views(acc);
  auto src = tensor_views(g);
  for (size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
}

double global_norm(const ModelParams& g) {
  double sq = 0.0;
  for (const auto& view : tensor_views(g)) sq += view.squaredNorm();
  return std::sqrt(sq);
}

void clip_global_norm(ModelParams& g, double max_norm) {
  const double norm = global_norm(g);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto& view : tensor_views(g)) view *= scale;
  }
}

AdamState AdamState::create(const ModelParams& params, double lr) {
  AdamState s;
  s.lr = lr;
  s.m = zeros_like(params);
  s.v = zeros_like(params);
  return s;
}

void adam_step(AdamState& state, ModelParams& params, const ModelParams& grads) {
  auto g = tensor_views(grads);
  for (const auto& view : g) {
    if (!view.allFinite()) throw std::runtime_error("adam_step: non-finite gradient");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

  auto theta = tensor_views(params);
  auto m = tensor_views(state.m);
  auto v = tensor_views(state.v);
  for (size_t i = 0; i < theta.size(); ++i) {
    m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
    v[i] = state.beta2 * v[i].array() + (1.0 - state.beta2) * g[i].array().square();
    Eigen::ArrayXd m_hat = m[i].array() / bc1;
    Eigen::ArrayXd v_hat = v[i].array() / bc2;
    theta[i].array() -= state.lr * m_hat / (v_hat.sqrt() + state.eps);
  }
}

}  // namespace avsi
