#pragma once

#include <cstdint>
#include <vector>

#include "naus/common.hpp"

namespace naus {

// Dense row-major double matrix; just enough linear algebra for the model.
struct Matrix {
  int32_t rows = 0;
  int32_t cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int32_t r, int32_t c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int32_t i, int32_t j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int32_t i, int32_t j) const { return a[static_cast<size_t>(i) * cols + j]; }

  size_t size() const { return a.size(); }

  void fill(double v) { std::fill(a.begin(), a.end(), v); }
};

// C = A * B
inline Matrix matmul(const Matrix& A, const Matrix& B) {
  Matrix C(A.rows, B.cols);
  for (int32_t i = 0; i < A.rows; ++i)
    for (int32_t k = 0; k < A.cols; ++k) {
      double aik = A(i, k);
      if (aik == 0.0) continue;
      for (int32_t j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
    }
  return C;
}

// C = A^T * B
inline Matrix matmul_tn(const Matrix& A, const Matrix& B) {
  Matrix C(A.cols, B.cols);
  for (int32_t k = 0; k < A.rows; ++k)
    for (int32_t i = 0; i < A.cols; ++i) {
      double aki = A(k, i);
      if (aki == 0.0) continue;
      for (int32_t j = 0; j < B.cols; ++j) C(i, j) += aki * B(k, j);
    }
  return C;
}

// C = A * B^T
inline Matrix matmul_nt(const Matrix& A, const Matrix& B) {
  Matrix C(A.rows, B.rows);
  for (int32_t i = 0; i < A.rows; ++i)
    for (int32_t j = 0; j < B.rows; ++j) {
      double acc = 0.0;
      for (int32_t k = 0; k < A.cols; ++k) acc += A(i, k) * B(j, k);
      C(i, j) = acc;
    }
  return C;
}

inline void add_inplace(Matrix& A, const Matrix& B) {
  for (size_t i = 0; i < A.a.size(); ++i) A.a[i] += B.a[i];
}

inline Matrix add(const Matrix& A, const Matrix& B) {
  Matrix C = A;
  add_inplace(C, B);
  return C;
}

}  // namespace naus
