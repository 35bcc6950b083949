#include <atomic>
#include <stdexcept>

#include "dicg/kernels.hpp"

namespace dicg::kernels {

namespace {
std::atomic<bool> g_parallel{true};

// Work threshold below which the OpenMP variant is not worth the fork/join.
constexpr long kMinWork = 1L << 15;

inline bool use_omp(long work) { return g_parallel.load(std::memory_order_relaxed) && work >= kMinWork; }

inline void check_blocks(const Matrix& a, const Matrix& b, int block, const char* what) {
  if (block <= 0 || a.rows % block != 0 || a.rows != b.rows)
    throw std::invalid_argument(std::string(what) + ": bad block structure " + a.shape_str() +
                                " vs " + b.shape_str() + " block " + std::to_string(block));
}
}  // namespace

void set_parallel(bool enabled) { g_parallel.store(enabled, std::memory_order_relaxed); }
bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  if (a.cols != b.rows)
    throw std::invalid_argument("matmul: inner dimensions disagree: " + a.shape_str() + " x " +
                                b.shape_str());
  require_shape(out, a.rows, b.cols, "matmul_nn out");
  const long work = static_cast<long>(a.rows) * a.cols * b.cols;
  use_omp(work) ? omp::matmul_nn(a, b, out, accumulate) : ref::matmul_nn(a, b, out, accumulate);
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  if (a.cols != b.cols)
    throw std::invalid_argument("matmul_nt: inner dimensions disagree: " + a.shape_str() + " x " +
                                b.shape_str() + "^T");
  require_shape(out, a.rows, b.rows, "matmul_nt out");
  const long work = static_cast<long>(a.rows) * a.cols * b.rows;
  use_omp(work) ? omp::matmul_nt(a, b, out, accumulate) : ref::matmul_nt(a, b, out, accumulate);
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  if (a.rows != b.rows)
    throw std::invalid_argument("matmul_tn: inner dimensions disagree: " + a.shape_str() + "^T x " +
                                b.shape_str());
  require_shape(out, a.cols, b.cols, "matmul_tn out");
  const long work = static_cast<long>(a.cols) * a.rows * b.cols;
  use_omp(work) ? omp::matmul_tn(a, b, out, accumulate) : ref::matmul_tn(a, b, out, accumulate);
}

void block_matmul_nn(const Matrix& a, const Matrix& b, int block, Matrix& out, bool accumulate) {
  check_blocks(a, b, block, "block_matmul_nn");
  if (a.cols != block) throw std::invalid_argument("block_matmul_nn: a blocks must be square");
  require_shape(out, a.rows, b.cols, "block_matmul_nn out");
  const long work = static_cast<long>(a.rows) * block * b.cols;
  use_omp(work) ? omp::block_matmul_nn(a, b, block, out, accumulate)
                : ref::block_matmul_nn(a, b, block, out, accumulate);
}

void block_matmul_nt(const Matrix& a, const Matrix& b, int block, Matrix& out, bool accumulate) {
  check_blocks(a, b, block, "block_matmul_nt");
  if (a.cols != b.cols) throw std::invalid_argument("block_matmul_nt: inner dimensions disagree");
  require_shape(out, a.rows, block, "block_matmul_nt out");
  const long work = static_cast<long>(a.rows) * a.cols * block;
  use_omp(work) ? omp::block_matmul_nt(a, b, block, out, accumulate)
                : ref::block_matmul_nt(a, b, block, out, accumulate);
}

void block_matmul_tn(const Matrix& a, const Matrix& b, int block, Matrix& out, bool accumulate) {
  check_blocks(a, b, block, "block_matmul_tn");
  if (a.cols != block) throw std::invalid_argument("block_matmul_tn: a blocks must be square");
  require_shape(out, a.rows, b.cols, "block_matmul_tn out");
  const long work = static_cast<long>(a.rows) * block * b.cols;
  use_omp(work) ? omp::block_matmul_tn(a, b, block, out, accumulate)
                : ref::block_matmul_tn(a, b, block, out, accumulate);
}

#define DICG_EWISE_DISPATCH(name)                                      \
  void name(const Matrix& a, const Matrix& b, Matrix& out) {          \
    if (!a.same_shape(b))                                              \
      throw std::invalid_argument(#name ": shape mismatch " +          \
                                  a.shape_str() + " vs " + b.shape_str()); \
    require_shape(out, a.rows, a.cols, #name " out");                  \
    use_omp(static_cast<long>(a.size())) ? omp::name(a, b, out) : ref::name(a, b, out); \
  }

DICG_EWISE_DISPATCH(ewise_add)
DICG_EWISE_DISPATCH(ewise_sub)
DICG_EWISE_DISPATCH(ewise_mul)
#undef DICG_EWISE_DISPATCH

void scale(const Matrix& a, double c, Matrix& out) {
  require_shape(out, a.rows, a.cols, "scale out");
  use_omp(static_cast<long>(a.size())) ? omp::scale(a, c, out) : ref::scale(a, c, out);
}

void axpy(double c, const Matrix& a, Matrix& out) {
  require_shape(out, a.rows, a.cols, "axpy out");
  use_omp(static_cast<long>(a.size())) ? omp::axpy(c, a, out) : ref::axpy(c, a, out);
}

void add_row_broadcast(const Matrix& a, const Matrix& row, Matrix& out) {
  if (row.rows != 1 || row.cols != a.cols)
    throw std::invalid_argument("add_row_broadcast: row must be 1x" + std::to_string(a.cols) +
                                ", got " + row.shape_str());
  require_shape(out, a.rows, a.cols, "add_row_broadcast out");
  use_omp(static_cast<long>(a.size())) ? omp::add_row_broadcast(a, row, out)
                                       : ref::add_row_broadcast(a, row, out);
}

void tanh_forward(const Matrix& a, Matrix& out) {
  require_shape(out, a.rows, a.cols, "tanh out");
  use_omp(static_cast<long>(a.size())) ? omp::tanh_forward(a, out) : ref::tanh_forward(a, out);
}

void tanh_backward(const Matrix& g, const Matrix& out_value, Matrix& grad_in) {
  use_omp(static_cast<long>(g.size())) ? omp::tanh_backward(g, out_value, grad_in)
                                       : ref::tanh_backward(g, out_value, grad_in);
}

void exp_forward(const Matrix& a, Matrix& out) {
  require_shape(out, a.rows, a.cols, "exp out");
  use_omp(static_cast<long>(a.size())) ? omp::exp_forward(a, out) : ref::exp_forward(a, out);
}

void softmax_rows(const Matrix& a, const Matrix* mask, Matrix& out) {
  if (mask && !mask->same_shape(a))
    throw std::invalid_argument("softmax_rows: mask shape mismatch");
  require_shape(out, a.rows, a.cols, "softmax out");
  use_omp(static_cast<long>(a.size()) * 4) ? omp::softmax_rows(a, mask, out)
                                           : ref::softmax_rows(a, mask, out);
}

double sum_all(const Matrix& a) {
  double s = 0.0;
  for (double x : a.v) s += x;
  return s;
}

void col_sums(const Matrix& a, Matrix& out) {
  require_shape(out, 1, a.cols, "col_sums out");
  double* o = out.row(0);
  for (int j = 0; j < a.cols; ++j) o[j] = 0.0;
  for (int i = 0; i < a.rows; ++i) {
    const double* ar = a.row(i);
    for (int j = 0; j < a.cols; ++j) o[j] += ar[j];
  }
}

}  // namespace dicg::kernels
