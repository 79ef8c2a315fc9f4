#pragma once

#include <span>
#include <vector>

#include "mmvlamp/cmatrix.hpp"
#include "mmvlamp/solvers.hpp"

namespace mmv {

struct FeedbackBundle {
  CMatrix y_tilde;                 // K_c x Q
  std::vector<std::size_t> omega;  // 1-based, row i of y_tilde is subcarrier omega[i]
  double rho = 1.0;                // K_c / K
};

// Rows of Y_DL^T at the selected subcarriers.
FeedbackBundle compress_feedback(const CMatrix& y_dl, std::span<const std::size_t> omega);

// Delay-domain MMV-LAMP on the fed-back pilots; returns U X_T' (K x Q).
CMatrix frsn_run(const CMatrix& y_tilde, const CMatrix& u_tilde, const CMatrix& u, const LampParams& params,
                 std::size_t layers);

// FRSN followed by the CRN on (H_freq)^T; returns D^H X_T (N_BS x K).
CMatrix fcrn_pipeline(const CMatrix& y_tilde, const CMatrix& u_tilde, const CMatrix& u, const LampParams& frsn,
                      const LampParams& crn, const CMatrix& a_dl, const CMatrix& dh, std::size_t frsn_layers,
                      std::size_t crn_layers);

// Baseline: SOMP in the delay domain, then SOMP in the angle domain.
CMatrix somp_feedback(const CMatrix& y_tilde, const CMatrix& u_tilde, const CMatrix& u, const CMatrix& a_dl,
                      const CMatrix& dh, std::size_t delay_support, std::size_t angle_support);

}  // namespace mmv
