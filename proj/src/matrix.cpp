#include "acnn/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "acnn/errors.hpp"

namespace acnn {

bool Matrix::all_finite() const {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

std::string Matrix::shape_str() const {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

namespace {

inline void fill_row(double* p, int n, double x) {
  for (int j = 0; j < n; ++j) p[j] = x;
}

}  // namespace

void matmul(const Matrix& a, const Matrix& b, Matrix& out, const double* row_bias) {
  if (a.cols != b.rows)
    throw DimensionMismatch("matmul: " + a.shape_str() + " * " + b.shape_str());
  out.resize(a.rows, b.cols);
  const int n = a.rows, k = a.cols, m = b.cols;

  // Rows are processed four at a time so each row of b is loaded once per
  // block instead of once per output row. Each out(i, j) still accumulates
  // over l in ascending order, identical to the naive triple loop.
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    double* c0 = out.row(i);
    double* c1 = out.row(i + 1);
    double* c2 = out.row(i + 2);
    double* c3 = out.row(i + 3);
    fill_row(c0, m, row_bias ? row_bias[i] : 0.0);
    fill_row(c1, m, row_bias ? row_bias[i + 1] : 0.0);
    fill_row(c2, m, row_bias ? row_bias[i + 2] : 0.0);
    fill_row(c3, m, row_bias ? row_bias[i + 3] : 0.0);
    const double* a0 = a.row(i);
    const double* a1 = a.row(i + 1);
    const double* a2 = a.row(i + 2);
    const double* a3 = a.row(i + 3);
    for (int l = 0; l < k; ++l) {
      const double* br = b.row(l);
      const double x0 = a0[l], x1 = a1[l], x2 = a2[l], x3 = a3[l];
      for (int j = 0; j < m; ++j) {
        c0[j] += x0 * br[j];
        c1[j] += x1 * br[j];
        c2[j] += x2 * br[j];
        c3[j] += x3 * br[j];
      }
    }
  }
  for (; i < n; ++i) {
    double* c = out.row(i);
    fill_row(c, m, row_bias ? row_bias[i] : 0.0);
    const double* ar = a.row(i);
    for (int l = 0; l < k; ++l) axpy(ar[l], b.row(l), c, m);
  }
}

Matrix transposed(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i) {
    const double* r = a.row(i);
    for (int j = 0; j < a.cols; ++j) t(j, i) = r[j];
  }
  return t;
}

}  // namespace acnn
