#pragma once

#include <cstddef>
#include <vector>

#include "mmvlamp/cmatrix.hpp"

namespace mmv {

// Tied decoder parameters shared by every layer.
struct LampParams {
  CMatrix b;  // N x M
  double theta1 = 1.0;
  double theta2 = 1.0;

  // B = A^H, theta = (1, 1).
  static LampParams untrained(const CMatrix& a);
};

// Row-wise MMV denoiser; sigma is floored internally.
CMatrix shrinkage(const CMatrix& r, double theta1, double theta2, double sigma);

// Onsager coefficient: (1 / (M K)) sum_j trace(J_j), with J_j the K x K
// Jacobian of the row denoiser at row j and M the measurement rows.
double shrinkage_divergence(const CMatrix& r, double theta1, double theta2, double sigma, std::size_t m);

struct LampOptions {
  bool zero_onsager = false;
};

struct LampTrace {
  std::vector<CMatrix> x_hat;   // x_hat[0] = 0, x_hat[t] = layer-t output
  std::vector<double> sigma;    // sigma_t, t = 1..T
  std::vector<double> onsager;  // b_t, t = 1..T

  const CMatrix& output() const { return x_hat.back(); }
};

LampTrace mmv_lamp_run(const CMatrix& y, const CMatrix& a, const LampParams& params, std::size_t layers,
                       const LampOptions& options = {});

// Untrained network: B = A^H, theta = (1, 1).
LampTrace mmv_amp_run(const CMatrix& y, const CMatrix& a, std::size_t layers);

struct SompResult {
  CMatrix x_hat;
  std::vector<std::size_t> support;  // selection order, zero-based
  std::size_t iterations = 0;
};

inline constexpr double kSompResidualTol = 1e-6;
inline constexpr double kPinvTol = 1e-10;

// Greedy MMV orthogonal matching pursuit. Atoms are scored by
// sum_k |a_g^H r_k| / ||a_g||.
SompResult somp_run(const CMatrix& y, const CMatrix& a, std::size_t max_support, double residual_tol = kSompResidualTol);

}  // namespace mmv
