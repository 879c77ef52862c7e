#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace acnn {

// Dense row-major double matrix. The whole pipeline trains and checks in
// f64; sizes are desk-scale so there is no reason to drop precision.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(int r, int c, double init = 0.0)
      : rows(r), cols(c), v(static_cast<size_t>(r) * static_cast<size_t>(c), init) {}

  double& operator()(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }

  double* row(int r) { return v.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const { return v.data() + static_cast<size_t>(r) * cols; }

  size_t size() const { return v.size(); }
  bool empty() const { return v.empty(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

  void fill(double x) { std::fill(v.begin(), v.end(), x); }
  void resize(int r, int c) {
    rows = r;
    cols = c;
    v.assign(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0);
  }

  bool all_finite() const;
  std::string shape_str() const;
};

// out = a * b, optionally seeding each output row with row_bias[i] before
// accumulation. Accumulation over a's columns runs in ascending index order
// for every output element, so results are bit-reproducible regardless of
// blocking or vectorization.
void matmul(const Matrix& a, const Matrix& b, Matrix& out, const double* row_bias = nullptr);

Matrix transposed(const Matrix& a);

// y += alpha * x over n entries.
inline void axpy(double alpha, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

inline double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace acnn
