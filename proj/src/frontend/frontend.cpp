#include "mmvlamp/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmvlamp/errors.hpp"
#include "mmvlamp/kernels.hpp"

namespace mmv {

using kernels::Op;

CMatrix random_phases(std::size_t rows, std::size_t cols, Rng& rng) {
  CMatrix xi(rows, cols);
  for (auto& v : xi.data()) v = uniform(rng, 0.0, 2.0 * M_PI);
  return xi;
}

void wrap_phases(CMatrix& xi) {
  for (auto& v : xi.data()) {
    double p = std::fmod(v.real(), 2.0 * M_PI);
    if (p < 0.0) p += 2.0 * M_PI;
    if (p >= 2.0 * M_PI) p = 0.0;
    v = p;
  }
}

CMatrix phases_to_combiner(const CMatrix& xi) {
  CMatrix f(xi.rows(), xi.cols());
  const double amp = 1.0 / std::sqrt(static_cast<double>(xi.rows()));
  for (std::size_t i = 0; i < xi.size(); ++i) f[i] = std::polar(amp, xi[i].real());
  return f;
}

CMatrix project(const CMatrix& f, const CMatrix& h, LinkMode mode) {
  if (f.rows() != h.rows()) throw DimensionError("measure", "F " + shape_str(f) + " vs H " + shape_str(h));
  CMatrix y;
  kernels::gemm(f, h, y, mode == LinkMode::uplink ? Op::adjoint : Op::transpose, Op::none);
  return y;
}

CMatrix effective_matrix(const CMatrix& f, const Dictionary& dict, LinkMode mode) { return project(f, dict.dh, mode); }

double noise_variance_for(const CMatrix& projected, double snr_db) {
  const double energy = projected.frobenius_sq();
  if (!(energy > 0.0)) throw DegenerateInputError("measure: zero signal energy with a finite SNR");
  return energy / (static_cast<double>(projected.size()) * std::pow(10.0, snr_db / 10.0));
}

Measurement measure_with_noise_var(const CMatrix& f, const CMatrix& h, double noise_var, Rng& rng, LinkMode mode) {
  Measurement out{project(f, h, mode), noise_var};
  if (noise_var > 0.0)
    for (auto& v : out.y.data()) v += complex_normal(rng, noise_var);
  return out;
}

Measurement measure(const CMatrix& f, const CMatrix& h, std::optional<double> snr_db, Rng& rng, LinkMode mode) {
  Measurement out{project(f, h, mode), 0.0};
  if (!snr_db) return out;
  out.noise_var = noise_variance_for(out.y, *snr_db);
  for (auto& v : out.y.data()) v += complex_normal(rng, out.noise_var);
  return out;
}

CMatrix quantize_phases(const CMatrix& xi, int bits) {
  if (bits < 1 || bits > 30) throw ParameterError("quantize_phases: bits must be in [1, 30]");
  const double levels = std::ldexp(1.0, bits);
  const double step = 2.0 * M_PI / levels;
  CMatrix out(xi.rows(), xi.cols());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    double idx = std::fmod(std::round(xi[i].real() / step), levels);
    if (idx < 0.0) idx += levels;
    out[i] = idx * step;
  }
  return out;
}

double adc_quantize_scalar(double x, int bits, double eps) {
  const double top = std::ldexp(1.0, bits) - 1.0;
  const double idx = std::clamp(std::round(x / eps + top / 2.0), 0.0, top);
  return (idx - top / 2.0) * eps;
}

double adc_step(const CMatrix& y, int bits, const CMatrix& u) {
  if (bits < 1 || bits > 30) throw ParameterError("adc_quantize: bits must be in [1, 30]");
  const CMatrix t = matmul(y, u);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& v : t.data()) {
    lo = std::min({lo, v.real(), v.imag()});
    hi = std::max({hi, v.real(), v.imag()});
  }
  return t.empty() ? 0.0 : (hi - lo) / std::ldexp(1.0, bits);
}

CMatrix adc_quantize_with_step(const CMatrix& y, int bits, const CMatrix& u, double eps) {
  if (y.cols() != u.rows()) throw DimensionError("adc_quantize", shape_str(y) + " with U " + shape_str(u));
  if (!(eps > 0.0)) return y;
  CMatrix t = matmul(y, u);
  for (auto& v : t.data()) v = {adc_quantize_scalar(v.real(), bits, eps), adc_quantize_scalar(v.imag(), bits, eps)};
  CMatrix out;
  kernels::gemm(t, u, out, Op::none, Op::adjoint);
  return out;
}

CMatrix adc_quantize(const CMatrix& y, int bits, const CMatrix& u) {
  return adc_quantize_with_step(y, bits, u, adc_step(y, bits, u));
}

}  // namespace mmv
