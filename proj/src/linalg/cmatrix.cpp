#include "mmvlamp/cmatrix.hpp"

#include <algorithm>
#include <cmath>

#include "mmvlamp/errors.hpp"
#include "mmvlamp/kernels.hpp"

namespace mmv {

CMatrix::CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

CMatrix::CMatrix(std::size_t rows, std::size_t cols, cplx fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

CMatrix::CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("CMatrix", std::to_string(rows) + "x" + std::to_string(cols) + " from " +
                                        std::to_string(data_.size()) + " values");
  }
}

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::adjoint() const {
  CMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

CMatrix CMatrix::transpose() const {
  CMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

CMatrix CMatrix::conj() const {
  CMatrix out = *this;
  for (auto& v : out.data_) v = std::conj(v);
  return out;
}

CMatrix CMatrix::real_part() const {
  CMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i].real();
  return out;
}

double CMatrix::frobenius_sq() const {
  double acc = 0.0;
  for (const auto& v : data_) acc += std::norm(v);
  return acc;
}

double CMatrix::frobenius() const { return std::sqrt(frobenius_sq()); }

CMatrix CMatrix::row_norms() const {
  CMatrix out(rows_, 1);
  for (std::size_t r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (const auto& v : row(r)) acc += std::norm(v);
    out(r, 0) = std::sqrt(acc);
  }
  return out;
}

cplx CMatrix::sum() const {
  cplx acc = 0.0;
  for (const auto& v : data_) acc += v;
  return acc;
}

bool CMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

CMatrix CMatrix::select_rows(std::span<const std::size_t> idx) const {
  CMatrix out(idx.size(), cols_);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= rows_) throw ParameterError("select_rows: index " + std::to_string(idx[i]) + " out of range");
    std::copy_n(row(idx[i]).begin(), cols_, out.row(i).begin());
  }
  return out;
}

CMatrix CMatrix::select_cols(std::span<const std::size_t> idx) const {
  CMatrix out(rows_, idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    if (idx[j] >= cols_) throw ParameterError("select_cols: index " + std::to_string(idx[j]) + " out of range");
    for (std::size_t r = 0; r < rows_; ++r) out(r, j) = (*this)(r, idx[j]);
  }
  return out;
}

void CMatrix::set_zero() { std::fill(data_.begin(), data_.end(), cplx{}); }

CMatrix& CMatrix::operator+=(const CMatrix& o) {
  if (!same_shape(o)) throw DimensionError("add", shape_str(*this) + " vs " + shape_str(o));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
  if (!same_shape(o)) throw DimensionError("sub", shape_str(*this) + " vs " + shape_str(o));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

CMatrix& CMatrix::operator*=(cplx s) {
  for (auto& v : data_) v *= s;
  return *this;
}

void CMatrix::axpy(cplx s, const CMatrix& o) {
  if (!same_shape(o)) throw DimensionError("axpy", shape_str(*this) + " vs " + shape_str(o));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
CMatrix operator*(cplx s, CMatrix a) { return a *= s; }

CMatrix hadamard(const CMatrix& a, const CMatrix& b) {
  if (!a.same_shape(b)) throw DimensionError("hadamard", shape_str(a) + " vs " + shape_str(b));
  CMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

CMatrix matmul(const CMatrix& a, const CMatrix& b) {
  CMatrix c;
  kernels::gemm(a, b, c);
  return c;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  if (!a.same_shape(b)) throw DimensionError("max_abs_diff", shape_str(a) + " vs " + shape_str(b));
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double rel_error(const CMatrix& a, const CMatrix& b) {
  const double diff = (a - b).frobenius();
  const double ref = b.frobenius();
  return ref > 0.0 ? diff / ref : diff;
}

std::string shape_str(const CMatrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

}  // namespace mmv
