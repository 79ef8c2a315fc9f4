#include "mmvlamp/feedback.hpp"

#include "mmvlamp/errors.hpp"

namespace mmv {

FeedbackBundle compress_feedback(const CMatrix& y_dl, std::span<const std::size_t> omega) {
  FeedbackBundle out;
  out.y_tilde = CMatrix(omega.size(), y_dl.rows());
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (omega[i] == 0 || omega[i] > y_dl.cols()) {
      throw ParameterError("compress_feedback: subcarrier index " + std::to_string(omega[i]) + " out of range");
    }
    for (std::size_t q = 0; q < y_dl.rows(); ++q) out.y_tilde(i, q) = y_dl(q, omega[i] - 1);
  }
  out.omega.assign(omega.begin(), omega.end());
  out.rho = y_dl.cols() == 0 ? 0.0 : static_cast<double>(omega.size()) / static_cast<double>(y_dl.cols());
  return out;
}

CMatrix frsn_run(const CMatrix& y_tilde, const CMatrix& u_tilde, const CMatrix& u, const LampParams& params,
                 std::size_t layers) {
  return matmul(u, mmv_lamp_run(y_tilde, u_tilde, params, layers).output());
}

CMatrix fcrn_pipeline(const CMatrix& y_tilde, const CMatrix& u_tilde, const CMatrix& u, const LampParams& frsn,
                      const LampParams& crn, const CMatrix& a_dl, const CMatrix& dh, std::size_t frsn_layers,
                      std::size_t crn_layers) {
  if (a_dl.rows() != y_tilde.cols()) {
    throw ParameterError("fcrn_pipeline: A_DL has " + std::to_string(a_dl.rows()) + " rows but Q = " +
                         std::to_string(y_tilde.cols()));
  }
  const CMatrix y_hat = frsn_run(y_tilde, u_tilde, u, frsn, frsn_layers).transpose();
  return matmul(dh, mmv_lamp_run(y_hat, a_dl, crn, crn_layers).output());
}

CMatrix somp_feedback(const CMatrix& y_tilde, const CMatrix& u_tilde, const CMatrix& u, const CMatrix& a_dl,
                      const CMatrix& dh, std::size_t delay_support, std::size_t angle_support) {
  if (a_dl.rows() != y_tilde.cols()) throw ParameterError("somp_feedback: A_DL rows differ from Q");
  const CMatrix h_freq = matmul(u, somp_run(y_tilde, u_tilde, delay_support).x_hat);
  return matmul(dh, somp_run(h_freq.transpose(), a_dl, angle_support).x_hat);
}

}  // namespace mmv
