#include <cmath>
#include <limits>
#include <stdexcept>

#include "dicg/kernels.hpp"

namespace dicg::kernels::ref {

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  const int r = a.rows, k = a.cols, c = b.cols;
  for (int i = 0; i < r; ++i) {
    double* o = out.row(i);
    if (!accumulate)
      for (int j = 0; j < c; ++j) o[j] = 0.0;
    const double* ar = a.row(i);
    for (int t = 0; t < k; ++t) {
      const double av = ar[t];
      const double* br = b.row(t);
      for (int j = 0; j < c; ++j) o[j] += av * br[j];
    }
  }
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  const int r = a.rows, k = a.cols, c = b.rows;
  for (int i = 0; i < r; ++i) {
    const double* ar = a.row(i);
    double* o = out.row(i);
    for (int j = 0; j < c; ++j) {
      const double* br = b.row(j);
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += ar[t] * br[t];
      o[j] = accumulate ? o[j] + acc : acc;
    }
  }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  const int r = a.cols, k = a.rows, c = b.cols;
  for (int i = 0; i < r; ++i) {
    double* o = out.row(i);
    if (!accumulate)
      for (int j = 0; j < c; ++j) o[j] = 0.0;
    for (int t = 0; t < k; ++t) {
      const double av = a.at(t, i);
      const double* br = b.row(t);
      for (int j = 0; j < c; ++j) o[j] += av * br[j];
    }
  }
}

void block_matmul_nn(const Matrix& a, const Matrix& b, int block, Matrix& out, bool accumulate) {
  const int nblocks = a.rows / block;
  const int k = a.cols, c = b.cols;
  for (int bk = 0; bk < nblocks; ++bk) {
    const int base = bk * block;
    for (int i = 0; i < block; ++i) {
      double* o = out.row(base + i);
      if (!accumulate)
        for (int j = 0; j < c; ++j) o[j] = 0.0;
      const double* ar = a.row(base + i);
      for (int t = 0; t < k; ++t) {
        const double av = ar[t];
        const double* br = b.row(base + t);
        for (int j = 0; j < c; ++j) o[j] += av * br[j];
      }
    }
  }
}

void block_matmul_nt(const Matrix& a, const Matrix& b, int block, Matrix& out, bool accumulate) {
  const int nblocks = a.rows / block;
  const int k = a.cols;
  for (int bk = 0; bk < nblocks; ++bk) {
    const int base = bk * block;
    for (int i = 0; i < block; ++i) {
      const double* ar = a.row(base + i);
      double* o = out.row(base + i);
      for (int j = 0; j < block; ++j) {
        const double* br = b.row(base + j);
        double acc = 0.0;
        for (int t = 0; t < k; ++t) acc += ar[t] * br[t];
        o[j] = accumulate ? o[j] + acc : acc;
      }
    }
  }
}

void block_matmul_tn(const Matrix& a, const Matrix& b, int block, Matrix& out, bool accumulate) {
  const int nblocks = a.rows / block;
  const int c = b.cols;
  for (int bk = 0; bk < nblocks; ++bk) {
    const int base = bk * block;
    for (int i = 0; i < block; ++i) {
      double* o = out.row(base + i);
      if (!accumulate)
        for (int j = 0; j < c; ++j) o[j] = 0.0;
      for (int t = 0; t < block; ++t) {
        const double av = a.at(base + t, i);
        const double* br = b.row(base + t);
        for (int j = 0; j < c; ++j) o[j] += av * br[j];
      }
    }
  }
}

void ewise_add(const Matrix& a, const Matrix& b, Matrix& out) {
  const size_t n = a.size();
  for (size_t i = 0; i < n; ++i) out.v[i] = a.v[i] + b.v[i];
}

void ewise_sub(const Matrix& a, const Matrix& b, Matrix& out) {
  const size_t n = a.size();
  for (size_t i = 0; i < n; ++i) out.v[i] = a.v[i] - b.v[i];
}

void ewise_mul(const Matrix& a, const Matrix& b, Matrix& out) {
  const size_t n = a.size();
  for (size_t i = 0; i < n; ++i) out.v[i] = a.v[i] * b.v[i];
}

void scale(const Matrix& a, double c, Matrix& out) {
  const size_t n = a.size();
  for (size_t i = 0; i < n; ++i) out.v[i] = c * a.v[i];
}

void axpy(double c, const Matrix& a, Matrix& out) {
  const size_t n = a.size();
  for (size_t i = 0; i < n; ++i) out.v[i] += c * a.v[i];
}

void add_row_broadcast(const Matrix& a, const Matrix& row, Matrix& out) {
  const double* rr = row.row(0);
  for (int i = 0; i < a.rows; ++i) {
    const double* ar = a.row(i);
    double* o = out.row(i);
    for (int j = 0; j < a.cols; ++j) o[j] = ar[j] + rr[j];
  }
}

void tanh_forward(const Matrix& a, Matrix& out) {
  const size_t n = a.size();
  for (size_t i = 0; i < n; ++i) out.v[i] = std::tanh(a.v[i]);
}

void tanh_backward(const Matrix& g, const Matrix& out_value, Matrix& grad_in) {
  const size_t n = g.size();
  for (size_t i = 0; i < n; ++i) grad_in.v[i] += g.v[i] * (1.0 - out_value.v[i] * out_value.v[i]);
}

void exp_forward(const Matrix& a, Matrix& out) {
  const size_t n = a.size();
  for (size_t i = 0; i < n; ++i) out.v[i] = std::exp(a.v[i]);
}

namespace detail {
inline void softmax_one_row(const double* a, const double* m, double* o, int cols) {
  double mx = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < cols; ++j)
    if ((!m || m[j] != 0.0) && a[j] > mx) mx = a[j];
  if (mx == -std::numeric_limits<double>::infinity())
    throw std::invalid_argument("softmax_rows: fully masked row");
  double z = 0.0;
  for (int j = 0; j < cols; ++j) {
    if (!m || m[j] != 0.0) {
      o[j] = std::exp(a[j] - mx);
      z += o[j];
    } else {
      o[j] = 0.0;
    }
  }
  const double inv = 1.0 / z;
  for (int j = 0; j < cols; ++j) o[j] *= inv;
}
}  // namespace detail

void softmax_rows(const Matrix& a, const Matrix* mask, Matrix& out) {
  for (int i = 0; i < a.rows; ++i)
    detail::softmax_one_row(a.row(i), mask ? mask->row(i) : nullptr, out.row(i), a.cols);
}

}  // namespace dicg::kernels::ref
