#include "mmvlamp/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmvlamp/channel.hpp"
#include "mmvlamp/errors.hpp"

namespace mmv {

Dictionary build_redundant_dictionary(std::size_t n_bs, std::size_t g) {
  if (n_bs == 0) throw ParameterError("dictionary: N_BS must be positive");
  if (g < n_bs) throw ParameterError("dictionary: G (" + std::to_string(g) + ") below N_BS (" + std::to_string(n_bs) + ")");
  Dictionary dict;
  dict.d = CMatrix(g, n_bs);
  dict.grid.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    dict.grid[i] = grid_point(i, g);
    const CMatrix a = steering_vector_sin(dict.grid[i], n_bs);
    std::copy(a.data().begin(), a.data().end(), dict.d.row(i).begin());
  }
  dict.dh = dict.d.adjoint();
  return dict;
}

CMatrix build_dft(std::size_t k) {
  if (k == 0) throw ParameterError("dft: K must be positive");
  CMatrix u(k, k);
  const double amp = 1.0 / std::sqrt(static_cast<double>(k));
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t n = 0; n < k; ++n) {
      // Reduce k*n mod K first so large K keeps full phase accuracy.
      const double e = static_cast<double>((r * n) % k) / static_cast<double>(k);
      u(r, n) = std::polar(amp, -2.0 * M_PI * e);
    }
  return u;
}

std::vector<std::size_t> select_subcarriers(std::size_t k, std::size_t k_c, Rng& rng) {
  if (k_c == 0 || k_c > k) {
    throw ParameterError("select_subcarriers: need 1 <= K_c <= K, got K_c=" + std::to_string(k_c) + " K=" + std::to_string(k));
  }
  std::vector<std::size_t> pool(k);
  std::iota(pool.begin(), pool.end(), std::size_t{1});
  for (std::size_t i = 0; i < k_c; ++i) std::swap(pool[i], pool[i + uniform_index(rng, k - i)]);
  pool.resize(k_c);
  std::sort(pool.begin(), pool.end());
  return pool;
}

CMatrix partial_dft(const CMatrix& u, std::span<const std::size_t> omega) {
  std::vector<std::size_t> zero_based(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (omega[i] == 0 || omega[i] > u.rows()) throw ParameterError("partial_dft: subcarrier index out of range");
    zero_based[i] = omega[i] - 1;
  }
  return u.select_rows(zero_based);
}

}  // namespace mmv
