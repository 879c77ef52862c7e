#include "acnn/nn.hpp"

#include <algorithm>
#include <cmath>

#include "acnn/errors.hpp"

namespace acnn {

void glorot_init(ParamTensor& t, Rng& rng) {
  const double a = glorot_bound(t);
  for (auto& x : t.value.v) x = rng.uniform(-a, a);
}

double glorot_bound(const ParamTensor& t) {
  return std::sqrt(6.0 / (t.value.rows + t.value.cols));
}

namespace nn {

// -- convolution -----------------------------------------------------------

Matrix im2col(const Matrix& input, int kernel_width) {
  const int d = input.rows, s = input.cols, k = kernel_width;
  const int t_out = s - k + 1;
  Matrix cols(d * k, t_out);
  for (int i = 0; i < d; ++i) {
    const double* src = input.row(i);
    for (int j = 0; j < k; ++j)
      std::copy(src + j, src + j + t_out, cols.row(i * k + j));
  }
  return cols;
}

Matrix conv_full_height_forward(const Matrix& input, const Matrix& kernels,
                                std::span<const double> bias, int kernel_width,
                                ConvCache* cache) {
  const int d = input.rows, s = input.cols, k = kernel_width;
  if (k < 1) throw InvalidRange("kernel width must be >= 1");
  if (k > s)
    throw KernelTooWide("kernel width " + std::to_string(k) + " exceeds " + std::to_string(s) +
                        " input frames");
  if (kernels.cols != d * k)
    throw ShapeMismatch("kernels have " + std::to_string(kernels.cols) + " weights, expected " +
                        std::to_string(d * k));
  if (static_cast<int>(bias.size()) != kernels.rows)
    throw ShapeMismatch("bias length does not match kernel count");

  const Matrix cols = im2col(input, k);
  Matrix out;
  matmul(kernels, cols, out, bias.data());
  if (cache) {
    cache->input = &input;
    cache->kernel_width = k;
  }
  return out;
}

ConvGrads conv_full_height_backward(const Matrix& input, const Matrix& kernels, int kernel_width,
                                    const Matrix& upstream, bool want_input_grad) {
  const int d = input.rows, s = input.cols, k = kernel_width;
  const int t_out = s - k + 1;
  if (upstream.rows != kernels.rows || upstream.cols != t_out)
    throw ShapeMismatch("upstream is " + upstream.shape_str() + ", expected " +
                        std::to_string(kernels.rows) + "x" + std::to_string(t_out));

  ConvGrads grads;
  grads.bias_grad.assign(kernels.rows, 0.0);
  for (int c = 0; c < upstream.rows; ++c) {
    const double* row = upstream.row(c);
    double acc = 0.0;
    for (int t = 0; t < t_out; ++t) acc += row[t];
    grads.bias_grad[c] = acc;
  }

  const Matrix cols_t = transposed(im2col(input, k));  // t_out x (d*k)
  matmul(upstream, cols_t, grads.kernel_grad);

  if (want_input_grad) {
    Matrix folded;  // (d*k) x t_out
    matmul(transposed(kernels), upstream, folded);
    grads.input_grad.resize(d, s);
    for (int i = 0; i < d; ++i) {
      double* dst = grads.input_grad.row(i);
      for (int j = 0; j < k; ++j) axpy(1.0, folded.row(i * k + j), dst + j, t_out);
    }
  }
  return grads;
}

ConvGrads conv_full_height_backward(const ConvCache& cache, const Matrix& kernels,
                                    const Matrix& upstream, bool want_input_grad) {
  if (cache.input == nullptr || cache.kernel_width < 1)
    throw MissingCache("conv backward called without a forward cache");
  return conv_full_height_backward(*cache.input, kernels, cache.kernel_width, upstream,
                                   want_input_grad);
}

// -- activations ------------------------------------------------------------

Matrix relu_forward(const Matrix& x) {
  Matrix y = x;
  for (auto& v : y.v) v = v > 0.0 ? v : 0.0;
  return y;
}

Matrix relu_backward(const Matrix& y, const Matrix& upstream) {
  if (!y.same_shape(upstream)) throw ShapeMismatch("relu backward shape mismatch");
  Matrix g = upstream;
  for (size_t i = 0; i < g.v.size(); ++i)
    if (y.v[i] <= 0.0) g.v[i] = 0.0;
  return g;
}

Matrix tanh_forward(const Matrix& x) {
  Matrix y = x;
  for (auto& v : y.v) v = std::tanh(v);
  return y;
}

Matrix tanh_backward(const Matrix& y, const Matrix& upstream) {
  if (!y.same_shape(upstream)) throw ShapeMismatch("tanh backward shape mismatch");
  Matrix g = upstream;
  for (size_t i = 0; i < g.v.size(); ++i) g.v[i] *= 1.0 - y.v[i] * y.v[i];
  return g;
}

// -- max pooling -------------------------------------------------------------

Matrix maxpool1d_forward(const Matrix& map, int pool, int stride, MaxPoolCache* cache) {
  if (pool < 1 || stride < 1) throw InvalidRange("pool and stride must be >= 1");
  if (map.cols < pool)
    throw MapTooShort("map length " + std::to_string(map.cols) + " below pool size " +
                      std::to_string(pool));
  const int out_len = (map.cols - pool) / stride + 1;
  Matrix out(map.rows, out_len);
  std::vector<int> argmax(static_cast<size_t>(map.rows) * out_len);
  for (int c = 0; c < map.rows; ++c) {
    const double* row = map.row(c);
    double* dst = out.row(c);
    for (int t = 0; t < out_len; ++t) {
      const int start = t * stride;
      int best = start;
      double best_val = row[start];
      for (int j = start + 1; j < start + pool; ++j) {
        if (row[j] > best_val) {  // strict: first occurrence wins ties
          best_val = row[j];
          best = j;
        }
      }
      dst[t] = best_val;
      argmax[static_cast<size_t>(c) * out_len + t] = best;
    }
  }
  if (cache) {
    cache->argmax = std::move(argmax);
    cache->rows = map.rows;
    cache->input_len = map.cols;
    cache->out_len = out_len;
    cache->pool = pool;
    cache->stride = stride;
  }
  return out;
}

Matrix maxpool1d_backward(const MaxPoolCache& cache, const Matrix& upstream) {
  if (cache.argmax.empty() && cache.rows == 0)
    throw MissingCache("maxpool backward called without a forward cache");
  if (upstream.rows != cache.rows || upstream.cols != cache.out_len)
    throw ShapeMismatch("maxpool upstream shape mismatch");
  Matrix grad(cache.rows, cache.input_len);
  for (int c = 0; c < cache.rows; ++c) {
    const double* up = upstream.row(c);
    double* dst = grad.row(c);
    const int* am = cache.argmax.data() + static_cast<size_t>(c) * cache.out_len;
    for (int t = 0; t < cache.out_len; ++t) dst[am[t]] += up[t];
  }
  return grad;
}

// -- attention ----------------------------------------------------------------

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw EmptySequence("softmax of empty sequence");
  double mx = logits[0];
  for (double x : logits) mx = std::max(mx, x);
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (auto& x : out) x /= sum;
  return out;
}

std::vector<double> attention_forward(const Matrix& x, std::span<const double> score_param,
                                      std::vector<double>* alphas) {
  const int m = x.rows, t_len = x.cols;
  if (t_len < 1) throw EmptySequence("attention over empty sequence");
  if (static_cast<int>(score_param.size()) != m)
    throw ShapeMismatch("score parameter dimension mismatch");

  std::vector<double> scores(t_len, 0.0);
  for (int i = 0; i < m; ++i) axpy(score_param[i], x.row(i), scores.data(), t_len);

  std::vector<double> a = softmax(scores);
  std::vector<double> out(m, 0.0);
  for (int i = 0; i < m; ++i) out[i] = dot(x.row(i), a.data(), t_len);
  if (alphas) *alphas = std::move(a);
  return out;
}

AttentionGrads attention_backward(const Matrix& x, std::span<const double> score_param,
                                  std::span<const double> alphas,
                                  std::span<const double> upstream) {
  const int m = x.rows, t_len = x.cols;
  if (static_cast<int>(alphas.size()) != t_len)
    throw MissingCache("attention backward needs the forward alphas");
  if (static_cast<int>(upstream.size()) != m)
    throw ShapeMismatch("attention upstream dimension mismatch");

  // g_t = upstream . x_t; score_grad_t = alpha_t (g_t - sum_j alpha_j g_j)
  std::vector<double> g(t_len, 0.0);
  for (int i = 0; i < m; ++i) axpy(upstream[i], x.row(i), g.data(), t_len);
  double gbar = dot(alphas.data(), g.data(), t_len);
  std::vector<double> dscore(t_len);
  for (int t = 0; t < t_len; ++t) dscore[t] = alphas[t] * (g[t] - gbar);

  AttentionGrads grads;
  grads.x_grad.resize(m, t_len);
  grads.score_param_grad.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double* dst = grads.x_grad.row(i);
    const double* xi = x.row(i);
    const double u = upstream[i], w = score_param[i];
    double acc = 0.0;
    for (int t = 0; t < t_len; ++t) {
      dst[t] = alphas[t] * u + w * dscore[t];
      acc += dscore[t] * xi[t];
    }
    grads.score_param_grad[i] = acc;
  }
  return grads;
}

// -- linear ---------------------------------------------------------------------

std::vector<double> linear_forward(std::span<const double> x, const Matrix& weight,
                                   std::span<const double> bias) {
  if (static_cast<int>(x.size()) != weight.cols || static_cast<int>(bias.size()) != weight.rows)
    throw ShapeMismatch("linear forward shape mismatch");
  std::vector<double> y(weight.rows);
  for (int i = 0; i < weight.rows; ++i) y[i] = bias[i] + dot(weight.row(i), x.data(), weight.cols);
  return y;
}

void linear_backward(std::span<const double> x, const Matrix& weight,
                     std::span<const double> upstream, Matrix& weight_grad,
                     std::span<double> bias_grad, std::vector<double>* x_grad) {
  if (!weight_grad.same_shape(weight) || static_cast<int>(upstream.size()) != weight.rows ||
      static_cast<int>(bias_grad.size()) != weight.rows)
    throw ShapeMismatch("linear backward shape mismatch");
  for (int i = 0; i < weight.rows; ++i) {
    axpy(upstream[i], x.data(), weight_grad.row(i), weight.cols);
    bias_grad[i] += upstream[i];
  }
  if (x_grad) {
    x_grad->assign(weight.cols, 0.0);
    for (int i = 0; i < weight.rows; ++i) axpy(upstream[i], weight.row(i), x_grad->data(), weight.cols);
  }
}

// -- softmax cross entropy ---------------------------------------------------------

SoftmaxXentResult softmax_cross_entropy(std::span<const double> logits, int target) {
  if (target < 0 || target >= static_cast<int>(logits.size()))
    throw LabelOutOfRange("target " + std::to_string(target) + " for " +
                          std::to_string(logits.size()) + " logits");
  SoftmaxXentResult res;
  res.logit_grad = softmax(logits);
  // -log p[target], recomputed stably from the shifted logits.
  double mx = logits[0];
  for (double x : logits) mx = std::max(mx, x);
  double lse = 0.0;
  for (double x : logits) lse += std::exp(x - mx);
  res.loss = std::log(lse) - (logits[target] - mx);
  res.logit_grad[target] -= 1.0;
  return res;
}

// -- dropout -------------------------------------------------------------------------

void dropout_forward(std::vector<double>& x, double drop_prob, Rng& rng, bool training,
                     std::vector<uint8_t>* mask) {
  if (drop_prob < 0.0 || drop_prob >= 1.0)
    throw InvalidRange("drop probability must be in [0, 1)");
  if (mask) mask->clear();
  if (!training || drop_prob == 0.0) return;
  const double scale = 1.0 / (1.0 - drop_prob);
  if (mask) mask->resize(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const bool keep = rng.uniform() >= drop_prob;
    x[i] = keep ? x[i] * scale : 0.0;
    if (mask) (*mask)[i] = keep;
  }
}

void dropout_backward(std::vector<double>& upstream, double drop_prob,
                      const std::vector<uint8_t>& mask) {
  if (mask.empty()) return;  // inference or p = 0: identity
  if (mask.size() != upstream.size()) throw ShapeMismatch("dropout mask size mismatch");
  const double scale = 1.0 / (1.0 - drop_prob);
  for (size_t i = 0; i < upstream.size(); ++i) upstream[i] = mask[i] ? upstream[i] * scale : 0.0;
}

// -- gradient checking ------------------------------------------------------------------

GradCheckReport grad_check(const std::function<double()>& loss_fn,
                           const std::vector<ParamTensor*>& params, double h) {
  GradCheckReport report;
  for (ParamTensor* p : params) {
    GradCheckReport::Entry entry;
    entry.name = p->name;
    for (size_t i = 0; i < p->value.v.size(); ++i) {
      const double saved = p->value.v[i];
      p->value.v[i] = saved + h;
      const double up = loss_fn();
      p->value.v[i] = saved - h;
      const double down = loss_fn();
      p->value.v[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad.v[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      entry.max_rel_err = std::max(entry.max_rel_err, std::abs(analytic - numeric) / denom);
    }
    report.worst = std::max(report.worst, entry.max_rel_err);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace nn
}  // namespace acnn
