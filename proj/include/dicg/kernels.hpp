#pragma once

#include "dicg/matrix.hpp"

// Dense kernels behind the autodiff ops. Every hot kernel has two
// implementations with identical per-row arithmetic order:
//
//   kernels::ref  — plain serial loops, the reference used by tests
//   kernels::omp  — OpenMP row/block-parallel variants
//
// The unqualified functions dispatch to the OpenMP variant when parallel
// execution is enabled and the problem is large enough, otherwise to the
// reference. Because parallelism only partitions independent output rows
// (or blocks), results are bit-identical across thread counts.
//
// Block kernels operate on matrices made of T stacked blocks of `block`
// rows each; block b of A is rows [b*block, (b+1)*block). They implement
// the per-timestep products of the coordination stack without per-timestep
// tensor nodes.

namespace dicg::kernels {

// Global toggle for the OpenMP variants (default on). Serial fallback is
// used regardless for problems below the size threshold.
void set_parallel(bool enabled);
bool parallel_enabled();

namespace ref {
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate);
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate);
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate);
void block_matmul_nn(const Matrix& a, const Matrix& b, int block, Matrix& out, bool accumulate);
void block_matmul_nt(const Matrix& a, const Matrix& b, int block, Matrix& out, bool accumulate);
void block_matmul_tn(const Matrix& a, const Matrix& b, int block, Matrix& out, bool accumulate);
void ewise_add(const Matrix& a, const Matrix& b, Matrix& out);
void ewise_sub(const Matrix& a, const Matrix& b, Matrix& out);
void ewise_mul(const Matrix& a, const Matrix& b, Matrix& out);
void scale(const Matrix& a, double c, Matrix& out);
void axpy(double c, const Matrix& a, Matrix& out);  // out += c*a
void add_row_broadcast(const Matrix& a, const Matrix& row, Matrix& out);
void tanh_forward(const Matrix& a, Matrix& out);
void tanh_backward(const Matrix& g, const Matrix& out_value, Matrix& grad_in);  // += g*(1-y^2)
void exp_forward(const Matrix& a, Matrix& out);
// Row-wise stable softmax over entries with mask!=0; masked entries are 0 in
// the output. mask may be null (all entries active). Throws on a fully
// masked row.
void softmax_rows(const Matrix& a, const Matrix* mask, Matrix& out);
}  // namespace ref

namespace omp {
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate);
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate);
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate);
void block_matmul_nn(const Matrix& a, const Matrix& b, int block, Matrix& out, bool accumulate);
void block_matmul_nt(const Matrix& a, const Matrix& b, int block, Matrix& out, bool accumulate);
void block_matmul_tn(const Matrix& a, const Matrix& b, int block, Matrix& out, bool accumulate);
void ewise_add(const Matrix& a, const Matrix& b, Matrix& out);
void ewise_sub(const Matrix& a, const Matrix& b, Matrix& out);
void ewise_mul(const Matrix& a, const Matrix& b, Matrix& out);
void scale(const Matrix& a, double c, Matrix& out);
void axpy(double c, const Matrix& a, Matrix& out);
void add_row_broadcast(const Matrix& a, const Matrix& row, Matrix& out);
void tanh_forward(const Matrix& a, Matrix& out);
void tanh_backward(const Matrix& g, const Matrix& out_value, Matrix& grad_in);
void exp_forward(const Matrix& a, Matrix& out);
void softmax_rows(const Matrix& a, const Matrix* mask, Matrix& out);
}  // namespace omp

// Dispatching entry points used by the autodiff layer.
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate = false);
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate = false);
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate = false);
void block_matmul_nn(const Matrix& a, const Matrix& b, int block, Matrix& out, bool accumulate = false);
void block_matmul_nt(const Matrix& a, const Matrix& b, int block, Matrix& out, bool accumulate = false);
void block_matmul_tn(const Matrix& a, const Matrix& b, int block, Matrix& out, bool accumulate = false);
void ewise_add(const Matrix& a, const Matrix& b, Matrix& out);
void ewise_sub(const Matrix& a, const Matrix& b, Matrix& out);
void ewise_mul(const Matrix& a, const Matrix& b, Matrix& out);
void scale(const Matrix& a, double c, Matrix& out);
void axpy(double c, const Matrix& a, Matrix& out);
void add_row_broadcast(const Matrix& a, const Matrix& row, Matrix& out);
void tanh_forward(const Matrix& a, Matrix& out);
void tanh_backward(const Matrix& g, const Matrix& out_value, Matrix& grad_in);
void exp_forward(const Matrix& a, Matrix& out);
void softmax_rows(const Matrix& a, const Matrix* mask, Matrix& out);

// Serial helpers without a parallel variant (cheap or order-sensitive).
double sum_all(const Matrix& a);
void col_sums(const Matrix& a, Matrix& out);  // out: 1 x cols

}  // namespace dicg::kernels
