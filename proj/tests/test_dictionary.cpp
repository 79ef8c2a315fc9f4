#include <doctest.h>

#include "mmvlamp/dictionary.hpp"
#include "mmvlamp/errors.hpp"
#include "support.hpp"

using namespace mmv;
using namespace mmv::test;

TEST_CASE("critically sampled dictionary is unitary") {
  const Dictionary d = build_redundant_dictionary(16, 16);
  CHECK(max_abs_diff(matmul(d.d, d.dh), CMatrix::identity(16)) < 1e-10);
}

TEST_CASE("dictionary rows have unit norm and Dirichlet-kernel coherence") {
  const std::size_t n = 32;
  const Dictionary d = build_redundant_dictionary(n, 4 * n);
  const CMatrix norms = d.d.row_norms();
  for (auto v : norms.data()) CHECK(std::abs(v.real() - 1.0) < 1e-12);
  Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    const std::size_t g1 = uniform_index(rng, 4 * n);
    const std::size_t g2 = uniform_index(rng, 4 * n);
    cplx inner = 0.0;
    for (std::size_t m = 0; m < n; ++m) inner += d.d(g1, m) * std::conj(d.d(g2, m));
    const double delta = d.grid[g1] - d.grid[g2];
    const double kernel = g1 == g2 ? 1.0
                                   : std::abs(std::sin(M_PI * n * delta / 2.0) /
                                              (static_cast<double>(n) * std::sin(M_PI * delta / 2.0)));
    CHECK(std::abs(std::abs(inner) - kernel) < 1e-12);
  }
  CHECK_THROWS_AS(build_redundant_dictionary(16, 8), ParameterError);
}

TEST_CASE("coherence falls with the array size at a fixed oversampling ratio") {
  double previous = 2.0;
  for (std::size_t n : {16, 32, 64}) {
    const Dictionary d = build_redundant_dictionary(n, 4 * n);
    const CMatrix gram = matmul(d.d, d.dh);
    double worst = 0.0;
    for (std::size_t i = 0; i < gram.rows(); ++i) {
      CHECK(std::abs(gram(i, i) - 1.0) < 1e-12);
      for (std::size_t j = 0; j < gram.cols(); ++j)
        if (i != j) worst = std::max(worst, std::abs(gram(i, j)));
    }
    CHECK(worst <= previous);
    previous = worst;
  }
}

TEST_CASE("DFT matrix") {
  const CMatrix u2 = build_dft(2);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(u2(0, 0) - r) < 1e-15);
  CHECK(std::abs(u2(0, 1) - r) < 1e-15);
  CHECK(std::abs(u2(1, 0) - r) < 1e-15);
  CHECK(std::abs(u2(1, 1) + r) < 1e-15);
  const CMatrix u = build_dft(64);
  CHECK(max_abs_diff(matmul(u.adjoint(), u), CMatrix::identity(64)) < 1e-12);

  // A single integer delay is one nonzero delay bin.
  const std::size_t k = 16;
  const CMatrix uk = build_dft(k);
  for (std::size_t tau = 0; tau < 4; ++tau) {
    CMatrix col(k, 1);
    for (std::size_t i = 0; i < k; ++i) col[i] = std::polar(1.0, -2.0 * M_PI * static_cast<double>(i * tau) / k);
    const CMatrix delay = matmul(uk.adjoint(), col);
    for (std::size_t n = 0; n < k; ++n) CHECK(std::abs(delay[n]) == doctest::Approx(n == tau ? 4.0 : 0.0).epsilon(1e-12));
  }
}

TEST_CASE("subcarrier selection") {
  Rng rng(31);
  const auto all = select_subcarriers(8, 8, rng);
  for (std::size_t i = 0; i < 8; ++i) CHECK(all[i] == i + 1);
  Rng a(5), b(5);
  CHECK(select_subcarriers(64, 10, a) == select_subcarriers(64, 10, b));
  CHECK_THROWS_AS(select_subcarriers(8, 9, rng), ParameterError);
  CHECK_THROWS_AS(select_subcarriers(8, 0, rng), ParameterError);

  std::vector<int> hits(8, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto om = select_subcarriers(8, 2, rng);
    CHECK(om[0] < om[1]);
    for (auto v : om) ++hits[v - 1];
  }
  for (int h : hits) CHECK(std::abs(h / static_cast<double>(draws) - 0.25) < 0.05 * 0.25);

  const CMatrix u = build_dft(16);
  Rng r2(9);
  const auto om = select_subcarriers(16, 6, r2);
  const CMatrix ut = partial_dft(u, om);
  CHECK(max_abs_diff(matmul(ut, ut.adjoint()), CMatrix::identity(6)) < 1e-12);
}
