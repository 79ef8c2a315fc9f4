#include "mmvlamp/shrink_math.hpp"
#include "mmvlamp/solvers.hpp"

namespace mmv {

CMatrix shrinkage(const CMatrix& r, double theta1, double theta2, double sigma) {
  CMatrix out(r.rows(), r.cols());
  const double k = static_cast<double>(r.cols());
  for (std::size_t j = 0; j < r.rows(); ++j) {
    auto src = r.row(j);
    double u = 0.0;
    for (const auto& v : src) u += std::norm(v);
    const double s = shrink::row_gain(u, sigma, theta1, theta2, k).s;
    auto dst = out.row(j);
    for (std::size_t c = 0; c < r.cols(); ++c) dst[c] = s * src[c];
  }
  return out;
}

double shrinkage_divergence(const CMatrix& r, double theta1, double theta2, double sigma, std::size_t m) {
  const double k = static_cast<double>(r.cols());
  double acc = 0.0;
  for (std::size_t j = 0; j < r.rows(); ++j) {
    double u = 0.0;
    for (const auto& v : r.row(j)) u += std::norm(v);
    acc += shrink::row_divergence(u, sigma, theta1, theta2, k);
  }
  return acc / static_cast<double>(m);
}

}  // namespace mmv
