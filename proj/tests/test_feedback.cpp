#include <doctest.h>

#include <algorithm>

#include "mmvlamp/channel.hpp"
#include "mmvlamp/dictionary.hpp"
#include "mmvlamp/errors.hpp"
#include "mmvlamp/feedback.hpp"
#include "mmvlamp/frontend.hpp"
#include "support.hpp"

using namespace mmv;
using namespace mmv::test;

TEST_CASE("feedback compression") {
  CMatrix y(3, 4);
  for (std::size_t q = 0; q < 3; ++q)
    for (std::size_t k = 0; k < 4; ++k) y(q, k) = cplx{10.0 * q, static_cast<double>(k + 1)};

  const std::vector<std::size_t> all{1, 2, 3, 4};
  const FeedbackBundle full = compress_feedback(y, all);
  CHECK(max_abs_diff(full.y_tilde, y.transpose()) == 0.0);
  CHECK(full.rho == 1.0);

  const std::vector<std::size_t> half{2, 4};
  const FeedbackBundle fb = compress_feedback(y, half);
  CHECK(fb.rho == 0.5);
  REQUIRE(fb.y_tilde.rows() == 2);
  for (std::size_t q = 0; q < 3; ++q) {
    CHECK(fb.y_tilde(0, q) == cplx{10.0 * q, 2.0});
    CHECK(fb.y_tilde(1, q) == cplx{10.0 * q, 4.0});
  }

  Rng rng(1);
  const CMatrix yr = random_matrix(rng, 5, 8);
  const std::vector<std::size_t> om{1, 3, 6, 7};
  const FeedbackBundle r = compress_feedback(yr, om);
  for (std::size_t i = 0; i < om.size(); ++i)
    for (std::size_t q = 0; q < 5; ++q) CHECK(r.y_tilde(i, q) == yr(q, om[i] - 1));

  CHECK_THROWS_AS(compress_feedback(y, std::vector<std::size_t>{0}), ParameterError);
  CHECK_THROWS_AS(compress_feedback(y, std::vector<std::size_t>{5}), ParameterError);
}

TEST_CASE("delay-domain sparsity of CP-bounded channels") {
  SystemConfig s;
  s.n_bs = 16;
  s.k = 32;
  s.l = 4;
  const CMatrix u = build_dft(s.k);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = make_rng(seed, {5});
    PathSet paths = sample_paths(s, rng, GridMode::off_grid);
    for (auto& p : paths) p.delay = std::floor(p.delay * s.fs) / s.fs;
    const CMatrix delay = matmul(u.adjoint(), frequency_channel(paths, s).transpose());
    const CMatrix rows = delay.row_norms();
    double head = 0.0, total = 0.0;
    for (std::size_t n = 0; n < s.k; ++n) {
      const double e = std::norm(rows[n]);
      total += e;
      if (n < s.n_cp()) head += e;
    }
    CHECK(head >= 0.99 * total);
  }
}

TEST_CASE("FRSN") {
  const std::size_t k = 16, q = 4;
  const CMatrix u = build_dft(k);
  Rng rng(2);
  const std::vector<std::size_t> om = select_subcarriers(k, 8, rng);
  const CMatrix ut = partial_dft(u, om);
  const LampParams p = LampParams::untrained(ut);

  const CMatrix y = random_matrix(rng, 8, q);
  CHECK(frsn_run(y, ut, u, p, 0).frobenius() == 0.0);
  CHECK(max_abs_diff(frsn_run(y, ut, u, p, 3), matmul(u, mmv_lamp_run(y, ut, p, 3).output())) == 0.0);

  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng r = make_rng(seed, {6});
    const std::size_t bin = uniform_index(r, k / 4);
    CMatrix h_freq(k, q);
    for (std::size_t c = 0; c < q; ++c) {
      const cplx g = complex_normal(r);
      for (std::size_t i = 0; i < k; ++i)
        h_freq(i, c) = g * std::polar(1.0, -2.0 * M_PI * static_cast<double>((i + 1) * bin) / static_cast<double>(k));
    }
    const FeedbackBundle fb = compress_feedback(h_freq.transpose(), om);
    const CMatrix delay = mmv_lamp_run(fb.y_tilde, ut, p, 2).output();
    const CMatrix e = delay.row_norms();
    std::size_t best = 0;
    for (std::size_t n = 1; n < k; ++n)
      if (e[n].real() > e[best].real()) best = n;
    hits += best == bin;
  }
  CHECK(hits == 20);
}

TEST_CASE("FCRN pipeline") {
  const std::size_t n = 16, g = 32, k = 8, q = 4;
  const Dictionary dict = build_redundant_dictionary(n, g);
  const CMatrix u = build_dft(k);
  Rng rng(3);
  const std::vector<std::size_t> om = select_subcarriers(k, 4, rng);
  const CMatrix ut = partial_dft(u, om);
  const CMatrix a = effective_matrix(phases_to_combiner(random_phases(n, q, rng)), dict, LinkMode::downlink);
  const LampParams fp = LampParams::untrained(ut);
  const LampParams cp = LampParams::untrained(a);

  const CMatrix zero = fcrn_pipeline(CMatrix(4, q), ut, u, fp, cp, a, dict.dh, 2, 3);
  CHECK(zero.rows() == n);
  CHECK(zero.cols() == k);
  CHECK(zero.frobenius() == 0.0);

  const CMatrix y = random_matrix(rng, 4, q);
  const CMatrix manual = matmul(dict.dh, mmv_lamp_run(frsn_run(y, ut, u, fp, 2).transpose(), a, cp, 3).output());
  CHECK(max_abs_diff(fcrn_pipeline(y, ut, u, fp, cp, a, dict.dh, 2, 3), manual) == 0.0);

  const CMatrix a_bad = random_matrix(rng, q + 1, g);
  CHECK_THROWS_AS(fcrn_pipeline(y, ut, u, fp, LampParams::untrained(a_bad), a_bad, dict.dh, 2, 3), ParameterError);

  const CMatrix sf = somp_feedback(y, ut, u, a, dict.dh, 2, 2);
  CHECK(sf.rows() == n);
  CHECK(sf.all_finite());
}
