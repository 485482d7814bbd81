#pragma once

#include <cassert>
#include <initializer_list>
#include <span>
#include <vector>

namespace ifolab::nn {

// Dense row-major matrix of doubles. Double precision throughout: the engine
// is verified against central finite differences, which needs the headroom.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    assert(rows >= 0 && cols >= 0);
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const int r = static_cast<int>(rows.size());
    const int c = r > 0 ? static_cast<int>(rows.begin()->size()) : 0;
    Matrix m(r, c);
    int i = 0;
    for (const auto& row : rows) {
      assert(static_cast<int>(row.size()) == c);
      int j = 0;
      for (double v : row) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  double* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const double* row(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  std::span<double> row_span(int r) { return {row(r), static_cast<std::size_t>(cols_)}; }
  std::span<const double> row_span(int r) const {
    return {row(r), static_cast<std::size_t>(cols_)};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  void fill(double v) { data_.assign(data_.size(), v); }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// out = a * b (m×k times k×n). `accumulate` adds into out instead.
void matmul_into(Matrix& out, const Matrix& a, const Matrix& b, bool accumulate = false);
Matrix matmul(const Matrix& a, const Matrix& b);

// out = aᵀ * b (a: k×m, b: k×n → m×n)
void matmul_at_b_into(Matrix& out, const Matrix& a, const Matrix& b, bool accumulate = false);
Matrix matmul_at_b(const Matrix& a, const Matrix& b);

// out = a * bᵀ (a: m×k, b: n×k → m×n)
void matmul_a_bt_into(Matrix& out, const Matrix& a, const Matrix& b, bool accumulate = false);
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

}  // namespace ifolab::nn
