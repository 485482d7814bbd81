#include "ifolab/nn/matrix.hpp"

#include <cassert>

namespace ifolab::nn {

// i-k-j loop order keeps both the b rows and the out rows streaming, which is
// what the auto-vectorizer wants for row-major data.
void matmul_into(Matrix& out, const Matrix& a, const Matrix& b, bool accumulate) {
  assert(a.cols() == b.rows());
  const int m = a.rows(), k = a.cols(), n = b.cols();
  if (!accumulate || out.rows() != m || out.cols() != n) out = Matrix(m, n, 0.0);
  for (int i = 0; i < m; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (int kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      if (av == 0.0) continue;
      const double* brow = b.row(kk);
      for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out;
  matmul_into(out, a, b, false);
  return out;
}

void matmul_at_b_into(Matrix& out, const Matrix& a, const Matrix& b, bool accumulate) {
  assert(a.rows() == b.rows());
  const int k = a.rows(), m = a.cols(), n = b.cols();
  if (!accumulate || out.rows() != m || out.cols() != n) out = Matrix(m, n, 0.0);
  for (int kk = 0; kk < k; ++kk) {
    const double* arow = a.row(kk);
    const double* brow = b.row(kk);
    for (int i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* orow = out.row(i);
      for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  Matrix out;
  matmul_at_b_into(out, a, b, false);
  return out;
}

void matmul_a_bt_into(Matrix& out, const Matrix& a, const Matrix& b, bool accumulate) {
  assert(a.cols() == b.cols());
  const int m = a.rows(), k = a.cols(), n = b.rows();
  if (!accumulate || out.rows() != m || out.cols() != n) out = Matrix(m, n, 0.0);
  for (int i = 0; i < m; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (int j = 0; j < n; ++j) {
      const double* brow = b.row(j);
      double acc = 0.0;
      for (int kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
      orow[j] += acc;
    }
  }
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
  Matrix out;
  matmul_a_bt_into(out, a, b, false);
  return out;
}

}  // namespace ifolab::nn
