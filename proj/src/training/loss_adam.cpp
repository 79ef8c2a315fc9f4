#include <cmath>

#include "mmvlamp/errors.hpp"
#include "mmvlamp/training.hpp"

namespace mmv {

double nmse_loss(std::span<const CMatrix> estimate, std::span<const CMatrix> truth) {
  if (estimate.size() != truth.size()) throw DimensionError("nmse_loss", "batch sizes differ");
  double total = 0.0;
  for (std::size_t n = 0; n < truth.size(); ++n) {
    const double energy = truth[n].frobenius_sq();
    if (!(energy > 0.0)) throw DegenerateInputError("nmse_loss: sample " + std::to_string(n) + " has zero energy");
    total += (estimate[n] - truth[n]).frobenius_sq() / energy;
  }
  return total;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& cfg) {
  if (params.size() != grads.size()) throw DimensionError("adam", "parameter and gradient sizes differ");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw DimensionError("adam", "state does not match parameters");
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

}  // namespace mmv
