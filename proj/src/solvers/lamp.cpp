#include <cmath>

#include "mmvlamp/errors.hpp"
#include "mmvlamp/kernels.hpp"
#include "mmvlamp/solvers.hpp"

namespace mmv {

LampParams LampParams::untrained(const CMatrix& a) { return {a.adjoint(), 1.0, 1.0}; }

LampTrace mmv_lamp_run(const CMatrix& y, const CMatrix& a, const LampParams& params, std::size_t layers,
                       const LampOptions& options) {
  const std::size_t m = y.rows();
  const std::size_t k = y.cols();
  const std::size_t n = params.b.rows();
  if (a.rows() != m || a.cols() != n) {
    throw DimensionError("mmv_lamp", "Y " + shape_str(y) + ", A " + shape_str(a) + ", B " + shape_str(params.b));
  }
  if (params.b.cols() != m) throw DimensionError("mmv_lamp", "B " + shape_str(params.b) + " vs Y " + shape_str(y));
  if (!(params.theta1 > 0.0)) throw ParameterError("mmv_lamp: theta1 must be positive");

  LampTrace trace;
  trace.x_hat.reserve(layers + 1);
  trace.x_hat.emplace_back(n, k);
  CMatrix v = y;
  CMatrix r;
  CMatrix ax;
  const double norm = 1.0 / std::sqrt(static_cast<double>(m * k));
  for (std::size_t t = 1; t <= layers; ++t) {
    r = trace.x_hat.back();
    kernels::gemm(params.b, v, r, kernels::Op::none, kernels::Op::none, true);
    const double sigma = v.frobenius() * norm;
    CMatrix x = shrinkage(r, params.theta1, params.theta2, sigma);
    const double b = options.zero_onsager ? 0.0 : shrinkage_divergence(r, params.theta1, params.theta2, sigma, m);
    kernels::gemm(a, x, ax);
    CMatrix next = y - ax;
    next.axpy(b, v);
    v = std::move(next);
    trace.sigma.push_back(sigma);
    trace.onsager.push_back(b);
    trace.x_hat.push_back(std::move(x));
  }
  return trace;
}

LampTrace mmv_amp_run(const CMatrix& y, const CMatrix& a, std::size_t layers) {
  return mmv_lamp_run(y, a, LampParams::untrained(a), layers);
}

}  // namespace mmv
