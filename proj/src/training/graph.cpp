#include "mmvlamp/graph.hpp"

#include <cmath>

#include "mmvlamp/errors.hpp"

namespace mmv {
namespace {

double real_grad(const Tape& tape, NodeId id) { return tape.grad(id)[0].real(); }

NodeId relative_error(Tape& tape, NodeId estimate, NodeId truth, double truth_energy) {
  if (!(truth_energy > 0.0)) throw DegenerateInputError("loss: zero-energy target sample");
  return tape.scale(tape.sq_frobenius(tape.sub(estimate, truth)), 1.0 / truth_energy);
}

}  // namespace

NodeId build_lamp_graph(Tape& tape, const LampNodes& in, std::size_t layers, const GraphOptions& options,
                        std::vector<double>* onsager_out) {
  const CMatrix& y = tape.value(in.y);
  const double m = static_cast<double>(y.rows());
  const double norm = 1.0 / std::sqrt(m * static_cast<double>(y.cols()));
  if (options.frozen_onsager && options.frozen_onsager->size() < layers) {
    throw ContractError("lamp graph: frozen Onsager list shorter than the layer count");
  }

  NodeId v = in.y;
  NodeId x{};
  bool have_x = false;
  for (std::size_t t = 0; t < layers; ++t) {
    const NodeId bv = tape.matmul(in.b, v);
    const NodeId r = have_x ? tape.add(x, bv) : bv;
    const NodeId sigma = tape.scale(tape.frobenius(v), norm);
    x = tape.shrinkage(r, in.theta1, in.theta2, sigma);
    have_x = true;
    const NodeId residual = tape.sub(in.y, tape.matmul(in.a, x));

    NodeId onsager_term;
    double b_value = 0.0;
    if (options.frozen_onsager) {
      b_value = (*options.frozen_onsager)[t];
      onsager_term = tape.scale(v, b_value);
    } else if (options.differentiate_onsager) {
      const NodeId b = tape.divergence(r, in.theta1, in.theta2, sigma, m);
      b_value = tape.value(b)[0].real();
      onsager_term = tape.scalar_mul(b, v);
    } else {
      b_value = tape.value(tape.divergence(r, in.theta1, in.theta2, sigma, m))[0].real();
      onsager_term = tape.scale(v, b_value);
    }
    if (onsager_out) onsager_out->push_back(b_value);
    v = tape.add(residual, onsager_term);
  }
  if (!have_x) x = tape.constant(CMatrix(tape.value(in.b).rows(), y.cols()));
  return x;
}

SampleGradient crn_sample_gradient(const CMatrix& f, const CMatrix& a, const LampParams& params, const CMatrix& h,
                                   const CMatrix& noise, const CMatrix& dh, std::size_t layers, LinkMode link,
                                   const GraphOptions& options) {
  Tape tape;
  const NodeId nf = tape.parameter(f);
  const NodeId na = tape.parameter(a);
  const NodeId nb = tape.parameter(params.b);
  const NodeId t1 = tape.parameter(CMatrix::scalar(params.theta1));
  const NodeId t2 = tape.parameter(CMatrix::scalar(params.theta2));
  const NodeId nh = tape.constant(h);
  const NodeId ndh = tape.constant(dh);

  const NodeId ft = link == LinkMode::uplink ? tape.adjoint(nf) : tape.transpose(nf);
  const NodeId y = tape.add(tape.matmul(ft, nh), tape.constant(noise));

  SampleGradient out;
  const NodeId x = build_lamp_graph(tape, {y, na, nb, t1, t2}, layers, options, &out.onsager);
  const NodeId loss = relative_error(tape, tape.matmul(ndh, x), nh, h.frobenius_sq());
  tape.backprop(loss);

  out.loss = tape.value(loss)[0].real();
  out.g_f = tape.grad(nf);
  out.g_a = tape.grad(na);
  out.g_b = tape.grad(nb);
  out.g_theta1 = real_grad(tape, t1);
  out.g_theta2 = real_grad(tape, t2);
  return out;
}

CrnBatchGradient crn_batch_gradient(const CMatrix& xi, const LampParams& params, std::span<const CMatrix> h,
                                    std::span<const CMatrix> noise, const Dictionary& dict, std::size_t layers,
                                    LinkMode link, const GraphOptions& options,
                                    const std::vector<std::vector<double>>* frozen_onsager, bool parallel) {
  if (h.size() != noise.size()) throw DimensionError("crn_batch", "channel and noise counts differ");
  if (frozen_onsager && frozen_onsager->size() != h.size()) {
    throw ContractError("crn_batch: one frozen Onsager list per sample required");
  }

  Tape enc;
  const NodeId nxi = enc.parameter(xi);
  const NodeId nf = enc.phase_lift(nxi, 1.0 / std::sqrt(static_cast<double>(xi.rows())));
  const NodeId nft = link == LinkMode::uplink ? enc.adjoint(nf) : enc.transpose(nf);
  const NodeId na = enc.matmul(nft, enc.constant(dict.dh));
  const CMatrix& f = enc.value(nf);
  const CMatrix& a = enc.value(na);

  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(h.size());
  std::vector<SampleGradient> per(h.size());
#pragma omp parallel for schedule(dynamic, 1) if (parallel && count > 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    GraphOptions opt = options;
    if (frozen_onsager) opt.frozen_onsager = &(*frozen_onsager)[static_cast<std::size_t>(i)];
    per[static_cast<std::size_t>(i)] = crn_sample_gradient(f, a, params, h[static_cast<std::size_t>(i)],
                                                          noise[static_cast<std::size_t>(i)], dict.dh, layers, link, opt);
  }

  CrnBatchGradient out;
  CMatrix g_f(f.rows(), f.cols());
  CMatrix g_a(a.rows(), a.cols());
  out.g_b = CMatrix(params.b.rows(), params.b.cols());
  for (auto& s : per) {
    out.loss += s.loss;
    g_f += s.g_f;
    g_a += s.g_a;
    out.g_b += s.g_b;
    out.g_theta1 += s.g_theta1;
    out.g_theta2 += s.g_theta2;
    out.onsager.push_back(std::move(s.onsager));
  }
  const std::pair<NodeId, CMatrix> seeds[] = {{nf, std::move(g_f)}, {na, std::move(g_a)}};
  enc.backprop_seeded(seeds);
  out.g_xi = enc.grad(nxi);
  return out;
}

SampleGradient frsn_sample_gradient(const CMatrix& y_tilde, const CMatrix& u_tilde, const CMatrix& u,
                                    const LampParams& params, const CMatrix& h_freq, std::size_t layers,
                                    const GraphOptions& options) {
  Tape tape;
  const NodeId y = tape.constant(y_tilde);
  const NodeId a = tape.constant(u_tilde);
  const NodeId nb = tape.parameter(params.b);
  const NodeId t1 = tape.parameter(CMatrix::scalar(params.theta1));
  const NodeId t2 = tape.parameter(CMatrix::scalar(params.theta2));

  SampleGradient out;
  const NodeId x = build_lamp_graph(tape, {y, a, nb, t1, t2}, layers, options, &out.onsager);
  const NodeId loss = relative_error(tape, tape.matmul(tape.constant(u), x), tape.constant(h_freq), h_freq.frobenius_sq());
  tape.backprop(loss);
  out.loss = tape.value(loss)[0].real();
  out.g_b = tape.grad(nb);
  out.g_theta1 = real_grad(tape, t1);
  out.g_theta2 = real_grad(tape, t2);
  return out;
}

}  // namespace mmv
