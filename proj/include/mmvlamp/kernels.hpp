#pragma once

#include <cstddef>

#include "mmvlamp/cmatrix.hpp"

// Dense complex kernels. Every fast kernel has a serial reference twin that
// the tests compare against and the benchmark times side by side.
namespace mmv::kernels {

enum class Op { none, transpose, adjoint };

// c = op(a) * op(b), or c += ... when accumulate is set (c must then already
// have the product shape). Large products are split across OpenMP threads by
// output row blocks; each block runs Eigen's blocked product.
void gemm(const CMatrix& a, const CMatrix& b, CMatrix& c, Op op_a = Op::none, Op op_b = Op::none,
          bool accumulate = false);

// Plain triple loop, no threading.
void gemm_reference(const CMatrix& a, const CMatrix& b, CMatrix& c, Op op_a = Op::none, Op op_b = Op::none,
                    bool accumulate = false);

// Work (complex MACs) above which gemm splits into parallel row blocks.
inline constexpr std::size_t kParallelWork = std::size_t{1} << 21;

}  // namespace mmv::kernels
