#include "mmvlamp/tape.hpp"

#include <cmath>

#include "mmvlamp/errors.hpp"
#include "mmvlamp/kernels.hpp"
#include "mmvlamp/shrink_math.hpp"

namespace mmv {
namespace {

using kernels::Op;

void require_scalar(OpKind op, const CMatrix& m, const char* what) {
  if (m.rows() != 1 || m.cols() != 1) {
    throw DimensionError(op_name(op), std::string(what) + " must be 1x1, got " + shape_str(m));
  }
}

void require_same(OpKind op, const CMatrix& a, const CMatrix& b) {
  if (!a.same_shape(b)) throw DimensionError(op_name(op), shape_str(a) + " vs " + shape_str(b));
}

std::size_t arity(OpKind op) {
  switch (op) {
    case OpKind::parameter:
    case OpKind::constant:
      return 0;
    case OpKind::matmul:
    case OpKind::add:
    case OpKind::sub:
    case OpKind::scalar_mul:
      return 2;
    case OpKind::shrinkage:
    case OpKind::divergence:
      return 4;
    default:
      return 1;
  }
}

using Dual4 = shrink::Dual<4>;

}  // namespace

const char* op_name(OpKind op) {
  switch (op) {
    case OpKind::parameter: return "parameter";
    case OpKind::constant: return "constant";
    case OpKind::identity: return "identity";
    case OpKind::matmul: return "matmul";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::scale: return "scale";
    case OpKind::scalar_mul: return "scalar_mul";
    case OpKind::adjoint: return "adjoint";
    case OpKind::transpose: return "transpose";
    case OpKind::real_part: return "real_part";
    case OpKind::sum: return "sum";
    case OpKind::sq_frobenius: return "sq_frobenius";
    case OpKind::frobenius: return "frobenius";
    case OpKind::row_norms: return "row_norms";
    case OpKind::phase_lift: return "phase_lift";
    case OpKind::shrinkage: return "shrinkage";
    case OpKind::divergence: return "divergence";
  }
  return "unknown";
}

NodeId Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeId Tape::parameter(CMatrix value) {
  Node n;
  n.op = OpKind::parameter;
  n.needs_grad = true;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::constant(CMatrix value) {
  Node n;
  n.op = OpKind::constant;
  n.value = std::move(value);
  return push(std::move(n));
}

const CMatrix& Tape::value(NodeId id) const { return nodes_.at(id.index).value; }
OpKind Tape::kind(NodeId id) const { return nodes_.at(id.index).op; }
bool Tape::requires_grad(NodeId id) const { return nodes_.at(id.index).needs_grad; }

NodeId Tape::record(OpKind op, std::span<const NodeId> inputs, OpAttributes attrs) {
  if (op == OpKind::parameter || op == OpKind::constant) {
    throw ContractError("record: leaves are created with parameter() / constant()");
  }
  if (inputs.size() != arity(op)) {
    throw ContractError(std::string("record: ") + op_name(op) + " expects " + std::to_string(arity(op)) +
                        " inputs");
  }
  Node n;
  n.op = op;
  n.attrs = attrs;
  n.n_in = static_cast<std::uint8_t>(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].index >= nodes_.size()) throw ContractError("record: input node not on tape");
    n.in[i] = inputs[i];
    n.needs_grad = n.needs_grad || nodes_[inputs[i].index].needs_grad;
  }
  const auto in = [&](std::size_t i) -> const CMatrix& { return nodes_[n.in[i].index].value; };

  switch (op) {
    case OpKind::identity:
      n.value = in(0);
      break;
    case OpKind::matmul:
      if (in(0).cols() != in(1).rows()) throw DimensionError("matmul", shape_str(in(0)) + " * " + shape_str(in(1)));
      kernels::gemm(in(0), in(1), n.value);
      break;
    case OpKind::add:
      require_same(op, in(0), in(1));
      n.value = in(0) + in(1);
      break;
    case OpKind::sub:
      require_same(op, in(0), in(1));
      n.value = in(0) - in(1);
      break;
    case OpKind::scale:
      n.value = attrs.scalar * in(0);
      break;
    case OpKind::scalar_mul:
      require_scalar(op, in(0), "scalar operand");
      n.value = in(0)[0] * in(1);
      break;
    case OpKind::adjoint:
      n.value = in(0).adjoint();
      break;
    case OpKind::transpose:
      n.value = in(0).transpose();
      break;
    case OpKind::real_part:
      n.value = in(0).real_part();
      break;
    case OpKind::sum:
      n.value = CMatrix::scalar(in(0).sum());
      break;
    case OpKind::sq_frobenius:
      n.value = CMatrix::scalar(in(0).frobenius_sq());
      break;
    case OpKind::frobenius:
      n.value = CMatrix::scalar(in(0).frobenius());
      break;
    case OpKind::row_norms:
      n.value = in(0).row_norms();
      break;
    case OpKind::phase_lift: {
      const CMatrix& phases = in(0);
      n.value = CMatrix(phases.rows(), phases.cols());
      for (std::size_t i = 0; i < phases.size(); ++i) n.value[i] = std::polar(attrs.real, phases[i].real());
      break;
    }
    case OpKind::shrinkage:
    case OpKind::divergence: {
      require_scalar(op, in(1), "theta1");
      require_scalar(op, in(2), "theta2");
      require_scalar(op, in(3), "sigma");
      const CMatrix& r = in(0);
      const double th1 = in(1)[0].real();
      const double th2 = in(2)[0].real();
      const double sigma = in(3)[0].real();
      const double k = static_cast<double>(r.cols());
      if (op == OpKind::shrinkage) {
        n.value = CMatrix(r.rows(), r.cols());
        for (std::size_t j = 0; j < r.rows(); ++j) {
          double u = 0.0;
          for (const auto& v : r.row(j)) u += std::norm(v);
          const double s = shrink::row_gain(u, sigma, th1, th2, k).s;
          auto out = n.value.row(j);
          auto src = r.row(j);
          for (std::size_t c = 0; c < r.cols(); ++c) out[c] = s * src[c];
        }
      } else {
        if (!(attrs.real > 0.0)) throw ParameterError("divergence: measurement row count must be positive");
        double acc = 0.0;
        for (std::size_t j = 0; j < r.rows(); ++j) {
          double u = 0.0;
          for (const auto& v : r.row(j)) u += std::norm(v);
          acc += shrink::row_divergence(u, sigma, th1, th2, k);
        }
        n.value = CMatrix::scalar(acc / attrs.real);
      }
      break;
    }
    case OpKind::parameter:
    case OpKind::constant:
      break;
  }
  ++stats_.forward_primitives;
  return push(std::move(n));
}

CMatrix& Tape::grad_slot(NodeId id) {
  Node& n = nodes_[id.index];
  if (n.grad.empty() && !n.value.empty()) n.grad = CMatrix(n.value.rows(), n.value.cols());
  return n.grad;
}

CMatrix Tape::grad(NodeId id) const {
  const Node& n = nodes_.at(id.index);
  if (n.grad.empty()) return CMatrix(n.value.rows(), n.value.cols());
  return n.grad;
}

Gradient Tape::gradient(NodeId id) const {
  const CMatrix g = grad(id);
  Gradient out{g.rows(), g.cols(), std::vector<double>(g.size()), std::vector<double>(g.size())};
  for (std::size_t i = 0; i < g.size(); ++i) {
    out.re[i] = g[i].real();
    out.im[i] = g[i].imag();
  }
  return out;
}

GradientSet Tape::backprop(NodeId loss) {
  const CMatrix& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backprop: loss must be a 1x1 node, got " + shape_str(lv));
  }
  if (lv[0].imag() != 0.0) throw ContractError("backprop: loss must be real");
  const std::pair<NodeId, CMatrix> seed{loss, CMatrix::scalar(1.0)};
  backprop_seeded(std::span(&seed, 1));

  GradientSet out;
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].op == OpKind::parameter) out.emplace(NodeId{i}, gradient(NodeId{i}));
  }
  return out;
}

void Tape::backprop_seeded(std::span<const std::pair<NodeId, CMatrix>> seeds) {
  for (auto& n : nodes_) n.grad = CMatrix();
  stats_.backward_primitives = 0;
  stats_.backward_visits = 0;
  std::size_t start = 0;
  for (const auto& [id, g] : seeds) {
    if (id.index >= nodes_.size()) throw ContractError("backprop: seed node not on tape");
    require_same(nodes_[id.index].op, value(id), g);
    grad_slot(id) += g;
    start = std::max<std::size_t>(start, id.index + 1);
  }
  run_backward(start);
}

void Tape::run_backward(std::size_t start) {
  for (std::size_t i = start; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.empty()) continue;
    ++stats_.backward_visits;
    backward_node(n);
  }
}

void Tape::backward_node(Node& n) {
  const CMatrix& g = n.grad;
  const auto needs = [&](std::size_t i) { return nodes_[n.in[i].index].needs_grad; };
  const auto in = [&](std::size_t i) -> const CMatrix& { return nodes_[n.in[i].index].value; };
  const auto slot = [&](std::size_t i) -> CMatrix& { return grad_slot(n.in[i]); };

  switch (n.op) {
    case OpKind::parameter:
    case OpKind::constant:
      return;
    case OpKind::identity:
      slot(0) += g;
      break;
    case OpKind::matmul:
      if (needs(0)) {
        kernels::gemm(g, in(1), slot(0), Op::none, Op::adjoint, true);
        ++stats_.backward_primitives;
      }
      if (needs(1)) {
        kernels::gemm(in(0), g, slot(1), Op::adjoint, Op::none, true);
        ++stats_.backward_primitives;
      }
      return;
    case OpKind::add:
      if (needs(0)) slot(0) += g;
      if (needs(1)) slot(1) += g;
      break;
    case OpKind::sub:
      if (needs(0)) slot(0) += g;
      if (needs(1)) slot(1) -= g;
      break;
    case OpKind::scale:
      slot(0).axpy(std::conj(n.attrs.scalar), g);
      break;
    case OpKind::scalar_mul: {
      const CMatrix& a = in(1);
      if (needs(0)) {
        cplx acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += g[i] * std::conj(a[i]);
        slot(0)[0] += acc;
      }
      if (needs(1)) slot(1).axpy(std::conj(in(0)[0]), g);
      break;
    }
    case OpKind::adjoint:
      slot(0) += g.adjoint();
      break;
    case OpKind::transpose:
      slot(0) += g.transpose();
      break;
    case OpKind::real_part: {
      CMatrix& s = slot(0);
      for (std::size_t i = 0; i < g.size(); ++i) s[i] += g[i].real();
      break;
    }
    case OpKind::sum: {
      CMatrix& s = slot(0);
      for (std::size_t i = 0; i < s.size(); ++i) s[i] += g[0];
      break;
    }
    case OpKind::sq_frobenius:
      slot(0).axpy(2.0 * g[0].real(), in(0));
      break;
    case OpKind::frobenius: {
      const double norm = n.value[0].real();
      if (norm > 0.0) slot(0).axpy(g[0].real() / norm, in(0));
      break;
    }
    case OpKind::row_norms: {
      const CMatrix& a = in(0);
      CMatrix& s = slot(0);
      for (std::size_t j = 0; j < a.rows(); ++j) {
        const double norm = n.value[j].real();
        if (norm <= 0.0) continue;
        const double w = g[j].real() / norm;
        auto dst = s.row(j);
        auto src = a.row(j);
        for (std::size_t c = 0; c < a.cols(); ++c) dst[c] += w * src[c];
      }
      break;
    }
    case OpKind::phase_lift: {
      CMatrix& s = slot(0);
      const cplx j{0.0, 1.0};
      for (std::size_t i = 0; i < g.size(); ++i) s[i] += (std::conj(g[i]) * j * n.value[i]).real();
      break;
    }
    case OpKind::shrinkage:
    case OpKind::divergence: {
      const CMatrix& r = in(0);
      const double th1 = in(1)[0].real();
      const double th2 = in(2)[0].real();
      const double sigma = in(3)[0].real();
      const double k = static_cast<double>(r.cols());
      const Dual4 d_th1 = Dual4::seed(th1, 1);
      const Dual4 d_th2 = Dual4::seed(th2, 2);
      const Dual4 d_sigma = Dual4::seed(sigma, 3);
      double g_th1 = 0.0, g_th2 = 0.0, g_sigma = 0.0;
      CMatrix* g_r = needs(0) ? &slot(0) : nullptr;
      for (std::size_t row = 0; row < r.rows(); ++row) {
        auto src = r.row(row);
        double u = 0.0;
        for (const auto& v : src) u += std::norm(v);
        const Dual4 d_u = Dual4::seed(u, 0);
        Dual4 q;
        double weight = 0.0;  // dL/dq for this row
        if (n.op == OpKind::shrinkage) {
          q = shrink::row_gain(d_u, d_sigma, d_th1, d_th2, k).s;
          auto grow = g.row(row);
          double c = 0.0;  // Re <G_row, r_row>
          for (std::size_t col = 0; col < r.cols(); ++col) c += (std::conj(grow[col]) * src[col]).real();
          weight = c;
          if (g_r) {
            auto dst = g_r->row(row);
            for (std::size_t col = 0; col < r.cols(); ++col) dst[col] += q.v * grow[col];
          }
        } else {
          q = shrink::row_divergence(d_u, d_sigma, d_th1, d_th2, k);
          weight = g[0].real() / n.attrs.real;
        }
        if (g_r) {
          const double coef = 2.0 * weight * q.d[0];
          auto dst = g_r->row(row);
          for (std::size_t col = 0; col < r.cols(); ++col) dst[col] += coef * src[col];
        }
        g_th1 += weight * q.d[1];
        g_th2 += weight * q.d[2];
        g_sigma += weight * q.d[3];
      }
      if (needs(1)) slot(1)[0] += g_th1;
      if (needs(2)) slot(2)[0] += g_th2;
      if (needs(3)) slot(3)[0] += g_sigma;
      break;
    }
  }
  ++stats_.backward_primitives;
}

}  // namespace mmv
