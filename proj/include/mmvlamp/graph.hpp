#pragma once

#include <span>
#include <vector>

#include "mmvlamp/dictionary.hpp"
#include "mmvlamp/solvers.hpp"
#include "mmvlamp/system.hpp"
#include "mmvlamp/tape.hpp"

// Differentiable forward passes of the unrolled decoder, one tape per sample.
namespace mmv {

struct GraphOptions {
  // Back-propagate through b_t (via the divergence primitive). Off by
  // default: b_t then enters as a constant.
  bool differentiate_onsager = false;
  // If set, b_t takes these values instead of being computed (used to
  // replay a run exactly when checking gradients by finite differences).
  const std::vector<double>* frozen_onsager = nullptr;
};

struct LampNodes {
  NodeId y, a, b, theta1, theta2;
};

// Records `layers` tied layers and returns the X_T node. b_t values are
// appended to onsager_out when given.
NodeId build_lamp_graph(Tape& tape, const LampNodes& in, std::size_t layers, const GraphOptions& options,
                        std::vector<double>* onsager_out = nullptr);

struct SampleGradient {
  double loss = 0.0;
  CMatrix g_f;  // cogradient w.r.t. the combiner F (empty for FRSN)
  CMatrix g_a;  // cogradient w.r.t. the measurement matrix (empty for FRSN)
  CMatrix g_b;
  double g_theta1 = 0.0;
  double g_theta2 = 0.0;
  std::vector<double> onsager;
};

// ||D^H X_T - H||^2 / ||H||^2 with Y = F^T H + N (downlink) or F^H H + N.
SampleGradient crn_sample_gradient(const CMatrix& f, const CMatrix& a, const LampParams& params, const CMatrix& h,
                                   const CMatrix& noise, const CMatrix& dh, std::size_t layers, LinkMode link,
                                   const GraphOptions& options);

struct CrnBatchGradient {
  double loss = 0.0;  // sum over the batch
  CMatrix g_xi;       // real N_BS x M
  CMatrix g_b;
  double g_theta1 = 0.0;
  double g_theta2 = 0.0;
  std::vector<std::vector<double>> onsager;  // per sample
};

// Per-sample tapes (parallel over samples when `parallel`), reduced in
// sample order, then chained through the shared encoder Xi -> F -> A.
CrnBatchGradient crn_batch_gradient(const CMatrix& xi, const LampParams& params, std::span<const CMatrix> h,
                                    std::span<const CMatrix> noise, const Dictionary& dict, std::size_t layers,
                                    LinkMode link, const GraphOptions& options,
                                    const std::vector<std::vector<double>>* frozen_onsager = nullptr,
                                    bool parallel = true);

// ||U X_T - H_freq||^2 / ||H_freq||^2 with measurement Y~ = U~ X + noise.
SampleGradient frsn_sample_gradient(const CMatrix& y_tilde, const CMatrix& u_tilde, const CMatrix& u,
                                    const LampParams& params, const CMatrix& h_freq, std::size_t layers,
                                    const GraphOptions& options);

}  // namespace mmv
