// Eigen threading stays off: parallelism is owned by the OpenMP loops here
// and by the per-sample loops in training and evaluation.
#define EIGEN_DONT_PARALLELIZE
#include "mmvlamp/kernels.hpp"

#include <Eigen/Dense>
#include <omp.h>

#include "mmvlamp/errors.hpp"

namespace mmv::kernels {
namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

std::size_t op_rows(const CMatrix& m, Op op) { return op == Op::none ? m.rows() : m.cols(); }
std::size_t op_cols(const CMatrix& m, Op op) { return op == Op::none ? m.cols() : m.rows(); }

cplx op_at(const CMatrix& m, Op op, std::size_t r, std::size_t c) {
  switch (op) {
    case Op::none:
      return m(r, c);
    case Op::transpose:
      return m(c, r);
    case Op::adjoint:
      return std::conj(m(c, r));
  }
  return {};
}

void prepare_output(const CMatrix& a, const CMatrix& b, CMatrix& c, Op op_a, Op op_b, bool accumulate,
                    std::size_t& n, std::size_t& k, std::size_t& m) {
  n = op_rows(a, op_a);
  k = op_cols(a, op_a);
  m = op_cols(b, op_b);
  if (op_rows(b, op_b) != k) {
    throw DimensionError("matmul", shape_str(a) + " * " + shape_str(b));
  }
  if (accumulate) {
    if (c.rows() != n || c.cols() != m) throw DimensionError("matmul", "accumulator " + shape_str(c));
  } else if (c.rows() != n || c.cols() != m) {
    c = CMatrix(n, m);
  }
}

template <class Lhs, class Rhs>
void product_rows(const Lhs& lhs, const Rhs& rhs, Map& out, std::size_t r0, std::size_t nr, bool accumulate) {
  auto block = out.middleRows(static_cast<Eigen::Index>(r0), static_cast<Eigen::Index>(nr));
  auto lblock = lhs.middleRows(static_cast<Eigen::Index>(r0), static_cast<Eigen::Index>(nr));
  if (accumulate)
    block.noalias() += lblock * rhs;
  else
    block.noalias() = lblock * rhs;
}

template <class Lhs, class Rhs>
void dispatch_rows(const Lhs& lhs, const Rhs& rhs, Map& out, std::size_t n, std::size_t work, bool accumulate) {
  const int threads = omp_in_parallel() ? 1 : omp_get_max_threads();
  if (threads <= 1 || work < kParallelWork || n < 2 * static_cast<std::size_t>(threads)) {
    product_rows(lhs, rhs, out, 0, n, accumulate);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
#pragma omp parallel for schedule(static) num_threads(threads)
  for (int t = 0; t < threads; ++t) {
    const std::size_t r0 = static_cast<std::size_t>(t) * chunk;
    if (r0 < n) product_rows(lhs, rhs, out, r0, std::min(chunk, n - r0), accumulate);
  }
}

template <class Lhs>
void dispatch_b(const Lhs& lhs, const CMatrix& b, Op op_b, Map& out, std::size_t n, std::size_t work,
                bool accumulate) {
  ConstMap mb(b.data().data(), static_cast<Eigen::Index>(b.rows()), static_cast<Eigen::Index>(b.cols()));
  switch (op_b) {
    case Op::none:
      dispatch_rows(lhs, mb, out, n, work, accumulate);
      break;
    case Op::transpose:
      dispatch_rows(lhs, mb.transpose(), out, n, work, accumulate);
      break;
    case Op::adjoint:
      dispatch_rows(lhs, mb.adjoint(), out, n, work, accumulate);
      break;
  }
}

}  // namespace

void gemm(const CMatrix& a, const CMatrix& b, CMatrix& c, Op op_a, Op op_b, bool accumulate) {
  std::size_t n = 0, k = 0, m = 0;
  prepare_output(a, b, c, op_a, op_b, accumulate, n, k, m);
  if (n == 0 || m == 0) return;
  Map out(c.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  if (k == 0) {
    if (!accumulate) c.set_zero();
    return;
  }
  const std::size_t work = n * k * m;
  ConstMap ma(a.data().data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
  switch (op_a) {
    case Op::none:
      dispatch_b(ma, b, op_b, out, n, work, accumulate);
      break;
    case Op::transpose: {
      // Materialize so that row blocks of op(a) are contiguous.
      const RowMat at = ma.transpose();
      dispatch_b(at, b, op_b, out, n, work, accumulate);
      break;
    }
    case Op::adjoint: {
      const RowMat ah = ma.adjoint();
      dispatch_b(ah, b, op_b, out, n, work, accumulate);
      break;
    }
  }
}

void gemm_reference(const CMatrix& a, const CMatrix& b, CMatrix& c, Op op_a, Op op_b, bool accumulate) {
  std::size_t n = 0, k = 0, m = 0;
  prepare_output(a, b, c, op_a, op_b, accumulate, n, k, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      cplx acc = accumulate ? c(i, j) : cplx{};
      for (std::size_t p = 0; p < k; ++p) acc += op_at(a, op_a, i, p) * op_at(b, op_b, p, j);
      c(i, j) = acc;
    }
  }
}

}  // namespace mmv::kernels
