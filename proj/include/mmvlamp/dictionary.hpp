#pragma once

#include <span>
#include <vector>

#include "mmvlamp/cmatrix.hpp"
#include "mmvlamp/rng.hpp"

namespace mmv {

struct Dictionary {
  CMatrix d;                  // G x N_BS, row g = a(phi_g)^T
  CMatrix dh;                 // D^H, cached
  std::vector<double> grid;   // sin(phi_g)
};

Dictionary build_redundant_dictionary(std::size_t n_bs, std::size_t g);

// Unitary K-point DFT, entry (k, n) = exp(-j 2 pi k n / K) / sqrt(K).
CMatrix build_dft(std::size_t k);

// K_c distinct 1-based subcarrier indices, sorted ascending.
std::vector<std::size_t> select_subcarriers(std::size_t k, std::size_t k_c, Rng& rng);

// Rows of U at the 1-based indices in omega.
CMatrix partial_dft(const CMatrix& u, std::span<const std::size_t> omega);

}  // namespace mmv
