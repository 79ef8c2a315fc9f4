#define EIGEN_DONT_PARALLELIZE
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "mmvlamp/errors.hpp"
#include "mmvlamp/kernels.hpp"
#include "mmvlamp/solvers.hpp"

namespace mmv {
namespace {

using Mat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;

Mat to_eigen(const CMatrix& m) {
  Mat out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

}  // namespace

SompResult somp_run(const CMatrix& y, const CMatrix& a, std::size_t max_support, double residual_tol) {
  const std::size_t m = y.rows();
  const std::size_t k = y.cols();
  const std::size_t g = a.cols();
  if (a.rows() != m) throw DimensionError("somp", "Y " + shape_str(y) + " vs A " + shape_str(a));
  if (max_support > m) throw ParameterError("somp: max_support exceeds the measurement count");

  SompResult res;
  res.x_hat = CMatrix(g, k);
  const double y_norm = y.frobenius();
  if (y_norm == 0.0 || max_support == 0) return res;

  std::vector<double> col_norm(g, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < g; ++c) col_norm[c] += std::norm(a(r, c));
  for (auto& v : col_norm) v = std::sqrt(v);

  const Mat ea = to_eigen(a);
  const Mat ey = to_eigen(y);
  Mat residual = ey;
  Mat coef;
  std::vector<char> taken(g, 0);
  while (res.support.size() < max_support) {
    const Mat corr = ea.adjoint() * residual;
    std::size_t best = g;
    double best_score = 0.0;
    for (std::size_t c = 0; c < g; ++c) {
      if (taken[c] || col_norm[c] == 0.0) continue;
      double score = 0.0;
      for (std::size_t j = 0; j < k; ++j) score += std::abs(corr(c, j));
      score /= col_norm[c];
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    if (best == g) break;
    taken[best] = 1;
    res.support.push_back(best);
    ++res.iterations;

    Mat sub(m, res.support.size());
    for (std::size_t i = 0; i < res.support.size(); ++i) sub.col(i) = ea.col(res.support[i]);
    Eigen::JacobiSVD<Mat> svd(sub, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(kPinvTol);
    coef = svd.solve(ey);
    residual = ey - sub * coef;
    if (residual.norm() / y_norm <= residual_tol) break;
  }
  for (std::size_t i = 0; i < res.support.size(); ++i)
    for (std::size_t j = 0; j < k; ++j) res.x_hat(res.support[i], j) = coef(i, j);
  return res;
}

}  // namespace mmv
