#pragma once

// Reference implementations and finite-difference checks shared by the unit
// suite and the acceptance binary. None of these call the code they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "mmvlamp/channel.hpp"
#include "mmvlamp/dictionary.hpp"
#include "mmvlamp/frontend.hpp"
#include "mmvlamp/graph.hpp"
#include "mmvlamp/solvers.hpp"
#include "mmvlamp/training.hpp"
#include "support.hpp"

namespace mmv::test {

// Row denoiser written out entry by entry, independent of shrink_math.
inline CMatrix loop_shrink(const CMatrix& r, double theta1, double theta2, double sigma) {
  CMatrix out(r.rows(), r.cols());
  const double k = static_cast<double>(r.cols());
  for (std::size_t j = 0; j < r.rows(); ++j) {
    double u = 0.0;
    for (std::size_t c = 0; c < r.cols(); ++c) u += r(j, c).real() * r(j, c).real() + r(j, c).imag() * r(j, c).imag();
    const double pi = 1.0 + sigma * sigma / theta1;
    const double psi = k * std::log(1.0 + theta1 / (sigma * sigma)) + theta2;
    const double denom = pi * (1.0 + std::exp(psi - u / (2.0 * sigma * sigma * pi)));
    for (std::size_t c = 0; c < r.cols(); ++c) out(j, c) = r(j, c) / denom;
  }
  return out;
}

// Direct (path, subcarrier, antenna) evaluation of the channel sum.
inline CMatrix loop_channel(const PathSet& paths, const SystemConfig& s) {
  CMatrix h(s.n_bs, s.k);
  const double n = static_cast<double>(s.n_bs);
  for (const Path& p : paths)
    for (std::size_t k = 1; k <= s.k; ++k)
      for (std::size_t m = 0; m < s.n_bs; ++m) {
        const double ph = -2.0 * M_PI * k * s.fs * p.delay / s.k - M_PI * m * p.sin_angle;
        h(m, k - 1) += std::sqrt(n / paths.size()) * p.gain * std::polar(1.0 / std::sqrt(n), ph);
      }
  return h;
}

struct Instance {
  CMatrix a;
  CMatrix x;
  CMatrix y;
  std::vector<std::size_t> support;
};

// On-grid noiseless instance with a random combiner.
inline Instance on_grid_instance(std::uint64_t seed, std::size_t n, std::size_t m, std::size_t k, std::size_t l,
                                 std::size_t grid) {
  SystemConfig s;
  s.n_bs = n;
  s.g = grid;
  s.k = k;
  s.q = m;
  s.l = l;
  Rng rng = make_rng(seed, {9});
  const Dictionary dict = build_redundant_dictionary(n, grid);
  const PathSet paths = sample_paths(s, rng, GridMode::on_grid);
  Instance inst;
  inst.a = effective_matrix(phases_to_combiner(random_phases(n, m, rng)), dict, LinkMode::downlink);
  inst.x = angle_frequency_image(paths, s);
  inst.y = matmul(inst.a, inst.x);
  for (std::size_t g = 0; g < grid; ++g)
    if (std::abs(inst.x(g, 0)) > 0.0) inst.support.push_back(g);
  return inst;
}

// argmax_g sum_k |a_g^H y_k| / ||a_g|| by explicit loops.
inline std::size_t brute_force_atom(const CMatrix& a, const CMatrix& y) {
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t g = 0; g < a.cols(); ++g) {
    double score = 0.0, norm = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) norm += std::norm(a(r, g));
    for (std::size_t k = 0; k < y.cols(); ++k) {
      cplx c = 0.0;
      for (std::size_t r = 0; r < a.rows(); ++r) c += std::conj(a(r, g)) * y(r, k);
      score += std::abs(c);
    }
    score /= std::sqrt(norm);
    if (score > best_score) {
      best_score = score;
      best = g;
    }
  }
  return best;
}

// One seeded 1-sparse instance: SOMP must pick the brute-force atom, which
// must be the true one, and reconstruct exactly.
inline bool somp_one_sparse_agrees(std::uint64_t seed) {
  const Instance inst = on_grid_instance(seed, 16, 8, 4, 1, 64);
  const std::size_t best = brute_force_atom(inst.a, inst.y);
  const SompResult res = somp_run(inst.y, inst.a, 1);
  const double nmse = (res.x_hat - inst.x).frobenius_sq() / inst.x.frobenius_sq();
  return res.support.size() == 1 && res.support[0] == best && best == inst.support[0] &&
         10.0 * std::log10(std::max(nmse, 1e-300)) < -100.0;
}

struct DivergenceCheck {
  double rel_error = 0.0;
  double imag_trace = 0.0;  // imaginary part of the FD trace, should vanish
};

// Onsager coefficient against the FD trace of the row Jacobians, using
// d eta_c / d r_c = (d/dx - j d/dy) eta_c / 2 for every entry.
inline DivergenceCheck divergence_fd(std::uint64_t seed) {
  const double h = 1e-6;
  Rng rng = make_rng(seed, {3});
  const std::size_t m = 5;
  const CMatrix r = random_matrix(rng, 6, 3, 1.2);
  const double theta1 = uniform(rng, 0.5, 2.0);
  const double theta2 = uniform(rng, -1.0, 1.0);
  const double sigma = uniform(rng, 0.5, 1.5);
  cplx trace = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    CMatrix p = r, q = r;
    p[i] += h;
    q[i] -= h;
    const cplx dx = (shrinkage(p, theta1, theta2, sigma)[i] - shrinkage(q, theta1, theta2, sigma)[i]) / (2.0 * h);
    p = r;
    q = r;
    p[i] += cplx{0.0, h};
    q[i] -= cplx{0.0, h};
    const cplx dy = (shrinkage(p, theta1, theta2, sigma)[i] - shrinkage(q, theta1, theta2, sigma)[i]) / (2.0 * h);
    trace += 0.5 * (dx - cplx{0.0, 1.0} * dy);
  }
  const double fd = trace.real() / static_cast<double>(m * r.cols());
  const double b = shrinkage_divergence(r, theta1, theta2, sigma, m);
  return {std::abs(b - fd) / std::abs(fd), trace.imag()};
}

// Shrinkage vs the loop oracle on one seeded instance (max abs difference).
inline double shrink_oracle_diff(std::uint64_t seed) {
  Rng rng = make_rng(seed, {1});
  const CMatrix r = random_matrix(rng, 12, 4, 1.5);
  const double theta1 = uniform(rng, 0.5, 2.0);
  const double theta2 = uniform(rng, -1.0, 1.0);
  const double sigma = uniform(rng, 0.5, 1.5);
  return max_abs_diff(shrinkage(r, theta1, theta2, sigma), loop_shrink(r, theta1, theta2, sigma));
}

struct PrimitiveCase {
  const char* name;
  std::function<std::vector<Leaf>(Rng&)> leaves;
  LossBuilder op;  // returns the primitive's output node
};

// Loss = ||op(leaves) - C||_F^2 with a random constant C, so every output
// entry contributes a distinct cogradient.
inline double primitive_error(const PrimitiveCase& pc, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<Leaf> leaves = pc.leaves(rng);
  Tape probe;
  std::vector<NodeId> ids;
  for (const auto& l : leaves) ids.push_back(probe.parameter(l.value));
  const CMatrix& shape = probe.value(pc.op(probe, ids));
  const CMatrix target = random_matrix(rng, shape.rows(), shape.cols());
  return gradient_rel_error(leaves, [&](Tape& t, const std::vector<NodeId>& p) {
    return t.sq_frobenius(t.sub(pc.op(t, p), t.constant(target)));
  });
}

inline std::vector<Leaf> shrink_leaves(Rng& rng) {
  return {{random_matrix(rng, 5, 3)},
          {CMatrix::scalar(uniform(rng, 0.5, 2.0)), true},
          {CMatrix::scalar(uniform(rng, -1.0, 1.0)), true},
          {CMatrix::scalar(uniform(rng, 0.5, 1.5)), true}};
}

// One case per non-leaf primitive of the tape.
inline std::vector<PrimitiveCase> primitive_cases() {
  using P = const std::vector<NodeId>&;
  const auto two = [](std::size_t r0, std::size_t c0, std::size_t r1, std::size_t c1) {
    return [=](Rng& r) { return std::vector<Leaf>{{random_matrix(r, r0, c0)}, {random_matrix(r, r1, c1)}}; };
  };
  const auto one = [](std::size_t rows, std::size_t cols) {
    return [=](Rng& r) { return std::vector<Leaf>{{random_matrix(r, rows, cols)}}; };
  };
  return {
      {"identity", one(3, 2), [](Tape& t, P p) { return t.identity(p[0]); }},
      {"matmul", two(3, 4, 4, 2), [](Tape& t, P p) { return t.matmul(p[0], p[1]); }},
      {"add", two(3, 2, 3, 2), [](Tape& t, P p) { return t.add(p[0], p[1]); }},
      {"sub", two(3, 2, 3, 2), [](Tape& t, P p) { return t.sub(p[0], p[1]); }},
      {"scale", one(3, 2), [](Tape& t, P p) { return t.scale(p[0], cplx{0.7, -1.3}); }},
      {"scalar_mul", two(1, 1, 3, 2), [](Tape& t, P p) { return t.scalar_mul(p[0], p[1]); }},
      {"adjoint", one(3, 2), [](Tape& t, P p) { return t.adjoint(p[0]); }},
      {"transpose", one(3, 2), [](Tape& t, P p) { return t.transpose(p[0]); }},
      {"real_part", one(3, 2), [](Tape& t, P p) { return t.real_part(p[0]); }},
      {"sum", one(3, 2), [](Tape& t, P p) { return t.sum(p[0]); }},
      {"sq_frobenius", one(3, 2), [](Tape& t, P p) { return t.sq_frobenius(p[0]); }},
      {"frobenius", one(3, 2), [](Tape& t, P p) { return t.frobenius(p[0]); }},
      {"row_norms", one(4, 3), [](Tape& t, P p) { return t.row_norms(p[0]); }},
      {"phase_lift", [](Rng& r) { return std::vector<Leaf>{{random_real(r, 3, 2, 0.0, 2.0 * M_PI), true}}; },
       [](Tape& t, P p) { return t.phase_lift(p[0], 0.5); }},
      {"shrinkage", shrink_leaves, [](Tape& t, P p) { return t.shrinkage(p[0], p[1], p[2], p[3]); }},
      {"divergence", shrink_leaves, [](Tape& t, P p) { return t.divergence(p[0], p[1], p[2], p[3], 4.0); }},
  };
}

inline SystemConfig tiny_system() {
  SystemConfig s;
  s.n_bs = 8;
  s.g = 16;
  s.k = 4;
  s.q = 4;
  s.l = 2;
  s.layers = 2;
  s.frsn_layers = 2;
  s.k_c = 2;
  return s;
}

inline ChannelSet seeded_channels(const SystemConfig& s, std::size_t count, std::uint64_t seed,
                                  GridMode mode = GridMode::off_grid) {
  ChannelSet out;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = make_rng(seed, {i});
    out.push_back(random_channel(s, rng, mode));
  }
  return out;
}

// Tiny end-to-end instance with a perturbed (non-initial) parameter point.
struct Tiny {
  SystemConfig sys = tiny_system();
  Dictionary dict = build_redundant_dictionary(8, 16);
  CMatrix xi;
  LampParams params;
  ChannelSet h;
  ChannelSet noise;

  explicit Tiny(std::uint64_t seed) {
    Rng rng = make_rng(seed, {77});
    xi = random_phases(8, 4, rng);
    params = LampParams::untrained(effective_matrix(phases_to_combiner(xi), dict, LinkMode::downlink));
    params.b += random_matrix(rng, 16, 4, 0.05);
    params.theta1 = 0.7;
    params.theta2 = -0.3;
    h = seeded_channels(sys, 3, seed);
    for (std::size_t i = 0; i < 3; ++i) noise.push_back(random_matrix(rng, 4, 4, 0.3));
  }

  double loss(const CMatrix& x, const LampParams& p, const GraphOptions& opt,
              const std::vector<std::vector<double>>* frozen) const {
    return crn_batch_gradient(x, p, h, noise, dict, sys.layers, LinkMode::downlink, opt, frozen, false).loss;
  }
};

// Relative error of the analytic gradient against central differences over
// theta, 20 phase coordinates and 20 coordinates each of Re B and Im B.
inline double end_to_end_error(const Tiny& t, bool differentiate) {
  const GraphOptions opt{.differentiate_onsager = differentiate};
  const CrnBatchGradient g =
      crn_batch_gradient(t.xi, t.params, t.h, t.noise, t.dict, t.sys.layers, LinkMode::downlink, opt, nullptr, false);
  // Without differentiation b_t is a constant, so the reference must replay
  // the same b_t values; with it, b_t moves with the parameters.
  const auto* frozen = differentiate ? nullptr : &g.onsager;
  const double h = 1e-6;
  std::vector<double> ad, fd;
  const auto central = [&](auto&& perturb) {
    Tiny up = t, down = t;
    perturb(up, h);
    perturb(down, -h);
    return (up.loss(up.xi, up.params, opt, frozen) - down.loss(down.xi, down.params, opt, frozen)) / (2.0 * h);
  };
  ad.push_back(g.g_theta1);
  fd.push_back(central([](Tiny& x, double d) { x.params.theta1 += d; }));
  ad.push_back(g.g_theta2);
  fd.push_back(central([](Tiny& x, double d) { x.params.theta2 += d; }));
  Rng pick(5);
  for (int i = 0; i < 20; ++i) {
    const std::size_t c = uniform_index(pick, t.xi.size());
    ad.push_back(g.g_xi[c].real());
    fd.push_back(central([c](Tiny& x, double d) { x.xi[c] += d; }));
  }
  for (int i = 0; i < 20; ++i) {
    const std::size_t c = uniform_index(pick, t.params.b.size());
    ad.push_back(g.g_b[c].real());
    fd.push_back(central([c](Tiny& x, double d) { x.params.b[c] += d; }));
    ad.push_back(g.g_b[c].imag());
    fd.push_back(central([c](Tiny& x, double d) { x.params.b[c] += cplx{0.0, d}; }));
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ad.size(); ++i) {
    num += (ad[i] - fd[i]) * (ad[i] - fd[i]);
    den += fd[i] * fd[i];
  }
  return std::sqrt(num / den);
}

}  // namespace mmv::test
