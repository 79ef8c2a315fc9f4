#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "mmvlamp/cmatrix.hpp"
#include "mmvlamp/rng.hpp"
#include "mmvlamp/tape.hpp"

namespace mmv::test {

inline CMatrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  return complex_normal_matrix(rng, r, c, scale * scale);
}

inline CMatrix random_real(Rng& rng, std::size_t r, std::size_t c, double lo, double hi) {
  CMatrix m(r, c);
  for (auto& v : m.data()) v = uniform(rng, lo, hi);
  return m;
}

struct Leaf {
  CMatrix value;
  bool real = false;  // real leaves are perturbed along the real axis only
};

// Records a loss on a fresh tape from parameter leaves.
using LossBuilder = std::function<NodeId(Tape&, const std::vector<NodeId>&)>;

inline double eval_loss(const std::vector<Leaf>& leaves, const LossBuilder& build) {
  Tape tape;
  std::vector<NodeId> ids;
  for (const auto& l : leaves) ids.push_back(tape.parameter(l.value));
  return tape.value(build(tape, ids))[0].real();
}

// Relative error ||g_ad - g_fd|| / ||g_fd|| over every real coordinate of
// every leaf, with central differences of step h.
inline double gradient_rel_error(std::vector<Leaf> leaves, const LossBuilder& build, double h = 1e-6) {
  Tape tape;
  std::vector<NodeId> ids;
  for (const auto& l : leaves) ids.push_back(tape.parameter(l.value));
  const GradientSet grads = tape.backprop(build(tape, ids));

  double num = 0.0;
  double den = 0.0;
  for (std::size_t p = 0; p < leaves.size(); ++p) {
    const Gradient& g = grads.at(ids[p]);
    for (std::size_t i = 0; i < leaves[p].value.size(); ++i) {
      for (int part = 0; part < (leaves[p].real ? 1 : 2); ++part) {
        const cplx step = part == 0 ? cplx{h, 0.0} : cplx{0.0, h};
        const cplx orig = leaves[p].value[i];
        leaves[p].value[i] = orig + step;
        const double up = eval_loss(leaves, build);
        leaves[p].value[i] = orig - step;
        const double down = eval_loss(leaves, build);
        leaves[p].value[i] = orig;
        const double fd = (up - down) / (2.0 * h);
        const double ad = part == 0 ? g.re[i] : g.im[i];
        num += (ad - fd) * (ad - fd);
        den += fd * fd;
      }
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace mmv::test
