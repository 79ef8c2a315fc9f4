#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mmv {

using cplx = std::complex<double>;

// Dense row-major complex matrix. Real-valued quantities (phases, norms,
// scalar parameters) are carried with a zero imaginary part.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols);
  CMatrix(std::size_t rows, std::size_t cols, cplx fill);
  CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data);

  static CMatrix identity(std::size_t n);
  static CMatrix scalar(cplx value) { return CMatrix(1, 1, value); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool same_shape(const CMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  cplx& operator[](std::size_t i) { return data_[i]; }
  const cplx& operator[](std::size_t i) const { return data_[i]; }

  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }
  std::span<cplx> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const cplx> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  CMatrix adjoint() const;
  CMatrix transpose() const;
  CMatrix conj() const;
  CMatrix real_part() const;

  double frobenius_sq() const;
  double frobenius() const;
  // l2 norm of every row, as an N x 1 real column.
  CMatrix row_norms() const;
  cplx sum() const;
  bool all_finite() const;

  // Rows selected by index, in the given order.
  CMatrix select_rows(std::span<const std::size_t> idx) const;
  CMatrix select_cols(std::span<const std::size_t> idx) const;

  void set_zero();

  CMatrix& operator+=(const CMatrix& o);
  CMatrix& operator-=(const CMatrix& o);
  CMatrix& operator*=(cplx s);
  // this += s * o
  void axpy(cplx s, const CMatrix& o);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(cplx s, CMatrix a);
CMatrix hadamard(const CMatrix& a, const CMatrix& b);

// Matrix product through the fast kernel (see kernels.hpp).
CMatrix matmul(const CMatrix& a, const CMatrix& b);

double max_abs_diff(const CMatrix& a, const CMatrix& b);
// ||a - b||_F / ||b||_F (or ||a - b||_F if b == 0).
double rel_error(const CMatrix& a, const CMatrix& b);

std::string shape_str(const CMatrix& m);

}  // namespace mmv
