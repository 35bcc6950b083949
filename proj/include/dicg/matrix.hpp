#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dicg {

// Dense row-major matrix of doubles. All tensor math in the project runs on
// this one storage type; shape checks throw std::invalid_argument.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {
    if (r < 0 || c < 0) throw std::invalid_argument("Matrix: negative shape");
  }
  Matrix(int r, int c, std::vector<double> data) : rows(r), cols(c), v(std::move(data)) {
    if (v.size() != static_cast<size_t>(r) * c)
      throw std::invalid_argument("Matrix: data length does not match shape");
  }

  static Matrix zeros(int r, int c) { return Matrix(r, c); }
  static Matrix full(int r, int c, double x) {
    Matrix m(r, c);
    std::fill(m.v.begin(), m.v.end(), x);
    return m;
  }
  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }
  // Row-major initializer for small literals in tests and fixtures.
  static Matrix from_rows(const std::vector<std::vector<double>>& rows_in) {
    const int r = static_cast<int>(rows_in.size());
    const int c = r > 0 ? static_cast<int>(rows_in[0].size()) : 0;
    Matrix m(r, c);
    for (int i = 0; i < r; ++i) {
      if (static_cast<int>(rows_in[i].size()) != c)
        throw std::invalid_argument("Matrix::from_rows: ragged rows");
      for (int j = 0; j < c; ++j) m.at(i, j) = rows_in[i][j];
    }
    return m;
  }

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
  double* row(int r) { return v.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const { return v.data() + static_cast<size_t>(r) * cols; }
  size_t size() const { return v.size(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

  bool operator==(const Matrix& o) const { return rows == o.rows && cols == o.cols && v == o.v; }

  std::string shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
  }
};

inline void require_shape(const Matrix& m, int r, int c, const char* what) {
  if (m.rows != r || m.cols != c)
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(r) + "x" +
                                std::to_string(c) + ", got " + m.shape_str());
}

}  // namespace dicg
