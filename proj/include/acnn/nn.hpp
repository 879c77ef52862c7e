#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "acnn/matrix.hpp"
#include "acnn/rng.hpp"

namespace acnn {

// Trainable tensor with its gradient accumulator. Vectors are stored as
// n x 1 matrices so the optimizer and the parameter file treat everything
// uniformly.
struct ParamTensor {
  std::string name;
  Matrix value;
  Matrix grad;

  ParamTensor() = default;
  ParamTensor(std::string n, int rows, int cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols) {}

  void zero_grad() { grad.fill(0.0); }
  bool empty() const { return value.empty(); }
};

// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)), fans taken as the
// tensor's cols/rows. Biases stay zero-initialized.
void glorot_init(ParamTensor& t, Rng& rng);
double glorot_bound(const ParamTensor& t);

namespace nn {

// -- convolution over time with kernels spanning all feature rows -------------

// input: d x s. kernels: n x (d*k), each row one kernel flattened row-major
// (feature row major, kernel column minor). Output: n x (s - k + 1), where
// out(c, t) = bias[c] + sum_{i,j} input(i, t + j) * kernel_c(i, j).
// Accumulation order per output element is fixed: i major, j minor.
struct ConvCache {
  const Matrix* input = nullptr;
  int kernel_width = 0;
};

Matrix conv_full_height_forward(const Matrix& input, const Matrix& kernels,
                                std::span<const double> bias, int kernel_width,
                                ConvCache* cache = nullptr);

struct ConvGrads {
  Matrix input_grad;   // d x s (empty when not requested)
  Matrix kernel_grad;  // n x (d*k)
  std::vector<double> bias_grad;
};

ConvGrads conv_full_height_backward(const Matrix& input, const Matrix& kernels, int kernel_width,
                                    const Matrix& upstream, bool want_input_grad = true);
ConvGrads conv_full_height_backward(const ConvCache& cache, const Matrix& kernels,
                                    const Matrix& upstream, bool want_input_grad = true);

// Windows of input rows packed for the convolution matmul: row (i*k + j) of
// the result holds input(i, j..j+T-1), so kernels * im2col == conv output.
Matrix im2col(const Matrix& input, int kernel_width);

// -- elementwise activations ---------------------------------------------------

Matrix relu_forward(const Matrix& x);
// upstream masked by which outputs were active; y is the forward output.
Matrix relu_backward(const Matrix& y, const Matrix& upstream);

Matrix tanh_forward(const Matrix& x);
Matrix tanh_backward(const Matrix& y, const Matrix& upstream);

// -- max pooling over time, per row ---------------------------------------------

struct MaxPoolCache {
  std::vector<int> argmax;  // flattened rows x out_len, absolute column index
  int rows = 0, input_len = 0, out_len = 0, pool = 0, stride = 0;
};

// out(c, t) = max over input columns [t*stride, t*stride + pool); ties go to
// the leftmost column. MapTooShort when the input is shorter than the pool.
Matrix maxpool1d_forward(const Matrix& map, int pool, int stride, MaxPoolCache* cache = nullptr);
Matrix maxpool1d_backward(const MaxPoolCache& cache, const Matrix& upstream);

// -- attention over a sequence of column vectors ---------------------------------

// x: m x T (T steps of dimension m). score_param: m weights. Returns the
// attention-weighted sum of the columns; alphas receives the softmax weights.
std::vector<double> attention_forward(const Matrix& x, std::span<const double> score_param,
                                      std::vector<double>* alphas);

struct AttentionGrads {
  Matrix x_grad;                        // m x T
  std::vector<double> score_param_grad; // m
};

// Full gradient including the softmax Jacobian coupling through the scores.
AttentionGrads attention_backward(const Matrix& x, std::span<const double> score_param,
                                  std::span<const double> alphas,
                                  std::span<const double> upstream);

// -- dense head -------------------------------------------------------------------

std::vector<double> linear_forward(std::span<const double> x, const Matrix& weight,
                                   std::span<const double> bias);

// Accumulates into weight_grad/bias_grad; x_grad (if non-null) is overwritten.
void linear_backward(std::span<const double> x, const Matrix& weight,
                     std::span<const double> upstream, Matrix& weight_grad,
                     std::span<double> bias_grad, std::vector<double>* x_grad);

// -- softmax cross entropy ----------------------------------------------------------

std::vector<double> softmax(std::span<const double> logits);

struct SoftmaxXentResult {
  double loss = 0.0;
  std::vector<double> logit_grad;
};
SoftmaxXentResult softmax_cross_entropy(std::span<const double> logits, int target);

// -- dropout -------------------------------------------------------------------------

// Inverted dropout: in training each unit is zeroed with probability
// drop_prob and survivors are scaled by 1/(1 - drop_prob); in inference the
// input passes through unchanged and mask stays empty.
void dropout_forward(std::vector<double>& x, double drop_prob, Rng& rng, bool training,
                     std::vector<uint8_t>* mask);
void dropout_backward(std::vector<double>& upstream, double drop_prob,
                      const std::vector<uint8_t>& mask);

// -- finite-difference gradient checking ------------------------------------------------

struct GradCheckReport {
  struct Entry {
    std::string name;
    double max_rel_err = 0.0;
  };
  std::vector<Entry> entries;
  double worst = 0.0;

  bool passed(double tolerance = 1e-4) const { return worst < tolerance; }
};

// Compares the gradients already stored in params (from an analytic backward
// pass) against central differences of loss_fn. loss_fn must re-evaluate the
// scalar loss from the current parameter values without touching grads.
GradCheckReport grad_check(const std::function<double()>& loss_fn,
                           const std::vector<ParamTensor*>& params, double h = 1e-5);

}  // namespace nn
}  // namespace acnn
