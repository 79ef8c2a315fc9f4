#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "mmvlamp/cmatrix.hpp"

namespace mmv {

using Rng = std::mt19937_64;

// Stream seed for a position in the experiment tree, e.g.
// derive_seed(master, {stage, epoch, batch, sample}). Pure function of its
// arguments, so every sample owns an independent, order-free stream.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);
Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path);

double uniform(Rng& rng, double lo, double hi);
// Unbiased integer in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);
double standard_normal(Rng& rng);
// Circularly-symmetric complex normal with E|z|^2 = variance.
cplx complex_normal(Rng& rng, double variance = 1.0);
CMatrix complex_normal_matrix(Rng& rng, std::size_t rows, std::size_t cols, double variance = 1.0);

}  // namespace mmv
