#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "mmvlamp/cmatrix.hpp"

namespace mmv {

struct NodeId {
  std::uint32_t index = 0;
  friend bool operator==(NodeId, NodeId) = default;
  friend auto operator<=>(NodeId, NodeId) = default;
};

enum class OpKind {
  parameter,     // trainable leaf
  constant,      // leaf without gradient
  identity,
  matmul,
  add,
  sub,
  scale,         // attribute scalar * a
  scalar_mul,    // (1x1 node) * a
  adjoint,
  transpose,
  real_part,
  sum,           // 1x1 sum of all entries
  sq_frobenius,  // 1x1 ||a||_F^2
  frobenius,     // 1x1 ||a||_F
  row_norms,     // N x 1 row l2 norms
  phase_lift,    // attribute amplitude * exp(j * phases)
  shrinkage,     // fused MMV denoiser: (R, theta1, theta2, sigma)
  divergence,    // fused Onsager divergence: (R, theta1, theta2, sigma), attribute = measurement rows
};

const char* op_name(OpKind op);

struct OpAttributes {
  cplx scalar{1.0, 0.0};
  double real = 1.0;
};

// Gradient of a real loss with respect to one parameter, split into the
// derivative along the real part and along the imaginary part. Real-valued
// parameters carry an all-zero `im`.
struct Gradient {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> re;
  std::vector<double> im;
};

using GradientSet = std::map<NodeId, Gradient>;

struct TapeStats {
  std::size_t forward_primitives = 0;   // non-leaf nodes recorded
  std::size_t backward_primitives = 0;  // kernel evaluations in the last backward pass
  std::size_t backward_visits = 0;      // nodes visited in the last backward pass
};

// Records one forward evaluation of a fixed computation graph and runs
// reverse-mode differentiation over it.
//
// Internally every node keeps the cogradient dL/dRe(x) + j dL/dIm(x). With
// that convention C = A B back-propagates as G_A = G_C B^H, G_B = A^H G_C,
// and a real input simply reads the real part of its cogradient.
//
// A tape is single-threaded. Build one per sample and per forward pass.
class Tape {
 public:
  NodeId parameter(CMatrix value);
  NodeId constant(CMatrix value);

  // Generic entry point; the typed helpers below forward to it.
  NodeId record(OpKind op, std::span<const NodeId> inputs, OpAttributes attrs = {});

  NodeId identity(NodeId a) { return record(OpKind::identity, std::array{a}); }
  NodeId matmul(NodeId a, NodeId b) { return record(OpKind::matmul, std::array{a, b}); }
  NodeId add(NodeId a, NodeId b) { return record(OpKind::add, std::array{a, b}); }
  NodeId sub(NodeId a, NodeId b) { return record(OpKind::sub, std::array{a, b}); }
  NodeId scale(NodeId a, cplx s) { return record(OpKind::scale, std::array{a}, {.scalar = s}); }
  NodeId scalar_mul(NodeId s, NodeId a) { return record(OpKind::scalar_mul, std::array{s, a}); }
  NodeId adjoint(NodeId a) { return record(OpKind::adjoint, std::array{a}); }
  NodeId transpose(NodeId a) { return record(OpKind::transpose, std::array{a}); }
  NodeId real_part(NodeId a) { return record(OpKind::real_part, std::array{a}); }
  NodeId sum(NodeId a) { return record(OpKind::sum, std::array{a}); }
  NodeId sq_frobenius(NodeId a) { return record(OpKind::sq_frobenius, std::array{a}); }
  NodeId frobenius(NodeId a) { return record(OpKind::frobenius, std::array{a}); }
  NodeId row_norms(NodeId a) { return record(OpKind::row_norms, std::array{a}); }
  NodeId phase_lift(NodeId phases, double amplitude) {
    return record(OpKind::phase_lift, std::array{phases}, {.real = amplitude});
  }
  NodeId shrinkage(NodeId r, NodeId theta1, NodeId theta2, NodeId sigma) {
    return record(OpKind::shrinkage, std::array{r, theta1, theta2, sigma});
  }
  NodeId divergence(NodeId r, NodeId theta1, NodeId theta2, NodeId sigma, double measurement_rows) {
    return record(OpKind::divergence, std::array{r, theta1, theta2, sigma}, {.real = measurement_rows});
  }

  const CMatrix& value(NodeId id) const;
  OpKind kind(NodeId id) const;
  bool requires_grad(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }

  // Seeds dL/dloss = 1 and returns gradients for every parameter node.
  // The loss must be a 1x1 node with zero imaginary part.
  GradientSet backprop(NodeId loss);

  // Reverse pass from externally supplied cogradients (used to chain a batch
  // of per-sample tapes into a shared upstream tape).
  void backprop_seeded(std::span<const std::pair<NodeId, CMatrix>> seeds);

  // Cogradient of any node after a backward pass (zero if unreached).
  CMatrix grad(NodeId id) const;
  Gradient gradient(NodeId id) const;

  TapeStats stats() const { return stats_; }

 private:
  struct Node {
    OpKind op = OpKind::constant;
    std::array<NodeId, 4> in{};
    std::uint8_t n_in = 0;
    OpAttributes attrs;
    bool needs_grad = false;
    CMatrix value;
    CMatrix grad;
  };

  NodeId push(Node node);
  void run_backward(std::size_t start);
  void backward_node(Node& node);
  CMatrix& grad_slot(NodeId id);

  std::vector<Node> nodes_;
  TapeStats stats_;
};

}  // namespace mmv
