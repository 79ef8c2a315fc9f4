#include <doctest.h>

#include "mmvlamp/channel.hpp"
#include "mmvlamp/errors.hpp"
#include "mmvlamp/frontend.hpp"
#include "mmvlamp/kernels.hpp"
#include "support.hpp"

using namespace mmv;
using namespace mmv::test;

TEST_CASE("phases to combiner") {
  const CMatrix f0 = phases_to_combiner(CMatrix(4, 2));
  for (auto v : f0.data()) CHECK(std::abs(v - 0.5) < 1e-15);
  const CMatrix fpi = phases_to_combiner(CMatrix(4, 2, M_PI));
  for (auto v : fpi.data()) CHECK(std::abs(v + 0.5) < 1e-15);
  Rng rng(1);
  const CMatrix f = phases_to_combiner(random_phases(9, 5, rng));
  for (auto v : f.data()) CHECK(std::abs(std::abs(v) - 1.0 / 3.0) < 1e-12);
}

TEST_CASE("noiseless measurement and linearity") {
  Rng rng(2);
  const CMatrix f = phases_to_combiner(random_phases(8, 3, rng));
  const CMatrix h1 = random_matrix(rng, 8, 4);
  const CMatrix h2 = random_matrix(rng, 8, 4);
  for (LinkMode mode : {LinkMode::uplink, LinkMode::downlink}) {
    const CMatrix y = measure(f, h1, std::nullopt, rng, mode).y;
    const CMatrix fx = mode == LinkMode::uplink ? f.adjoint() : f.transpose();
    CMatrix ref;
    kernels::gemm_reference(fx, h1, ref);
    CHECK(max_abs_diff(y, ref) < 1e-12);
    const CMatrix ysum = measure(f, h1 + h2, std::nullopt, rng, mode).y;
    CHECK(max_abs_diff(ysum, y + measure(f, h2, std::nullopt, rng, mode).y) < 1e-12);
  }
  CHECK_THROWS_AS(measure(f, random_matrix(rng, 7, 4), std::nullopt, rng), DimensionError);
  CHECK_THROWS_AS(measure(f, CMatrix(8, 4), 10.0, rng), DegenerateInputError);
}

TEST_CASE("pure noise has the forced variance") {
  Rng rng(3);
  const CMatrix f = phases_to_combiner(random_phases(8, 100, rng));
  const CMatrix y = measure_with_noise_var(f, CMatrix(8, 1000), 1.0, rng).y;
  double acc = 0.0;
  for (auto v : y.data()) acc += std::norm(v);
  CHECK(std::abs(acc / y.size() - 1.0) < 0.03);
}

TEST_CASE("realized SNR is calibrated") {
  double acc_db = 0.0;
  SystemConfig s;
  s.n_bs = 32;
  s.k = 16;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng = make_rng(seed, {7});
    const CMatrix f = phases_to_combiner(random_phases(32, 8, rng));
    const CMatrix h = random_channel(s, rng, GridMode::off_grid);
    const CMatrix clean = project(f, h, LinkMode::downlink);
    const CMatrix noise = measure(f, h, 10.0, rng).y - clean;
    acc_db += 10.0 * std::log10(clean.frobenius_sq() / noise.frobenius_sq());
  }
  CHECK(std::abs(acc_db / 100.0 - 10.0) < 0.5);
}

TEST_CASE("phase quantization") {
  const double q = M_PI / 2;
  CMatrix xi(1, 5);
  xi[0] = 0.9 * q;
  xi[1] = 2.0 * M_PI - 0.01;
  xi[2] = 0.0;
  xi[3] = 3.1 * q;
  xi[4] = 1.4 * q;
  const CMatrix out = quantize_phases(xi, 2);
  CHECK(out[0].real() == doctest::Approx(q));
  CHECK(out[1].real() == 0.0);
  CHECK(out[2].real() == 0.0);
  CHECK(out[3].real() == doctest::Approx(3 * q));
  CHECK(out[4].real() == doctest::Approx(q));

  Rng rng(4);
  const CMatrix r = random_phases(6, 4, rng);
  for (int bits = 1; bits <= 4; ++bits) {
    const CMatrix once = quantize_phases(r, bits);
    CHECK(max_abs_diff(quantize_phases(once, bits), once) == 0.0);
    const CMatrix f = phases_to_combiner(once);
    for (auto v : f.data()) CHECK(std::abs(std::abs(v) - 1.0 / std::sqrt(6.0)) < 1e-15);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double step = 2.0 * M_PI / (1 << bits);
      double best = 1e9;
      for (int j = 0; j < (1 << bits); ++j) best = std::min(best, std::abs(std::polar(1.0, r[i].real()) - std::polar(1.0, j * step)));
      CHECK(std::abs(std::polar(1.0, r[i].real()) - std::polar(1.0, once[i].real())) == doctest::Approx(best));
    }
  }
  CHECK_THROWS_AS(quantize_phases(r, 0), ParameterError);
}

TEST_CASE("ADC quantization") {
  CHECK(adc_quantize_scalar(0.3, 1, 1.0) == 0.5);
  CHECK(adc_quantize_scalar(-0.9, 1, 1.0) == -0.5);
  CHECK(adc_quantize_scalar(7.0, 1, 1.0) == 0.5);

  Rng rng(5);
  const CMatrix u = build_dft(16);
  const CMatrix y = random_matrix(rng, 4, 16);

  for (int bits = 1; bits <= 6; ++bits) {
    const double eps = adc_step(y, bits, u);
    const CMatrix once = adc_quantize_with_step(y, bits, u, eps);
    CHECK(max_abs_diff(adc_quantize_with_step(once, bits, u, eps), once) < 1e-12);
  }
  double previous = 1e9;
  for (int bits = 1; bits <= 12; ++bits) {
    const double err = (adc_quantize(y, bits, u) - y).frobenius_sq();
    CHECK(err < previous);
    previous = err;
  }
  // The codebook is centred on zero with the full span of Y U, so beyond
  // granular error only the clipped excess of an off-centre range remains.
  const CMatrix t = matmul(y, u);
  const double eps = adc_step(y, 8, u);
  const double half = 128.0 * eps;
  for (auto v : t.data())
    for (double x : {v.real(), v.imag()})
      CHECK(std::abs(adc_quantize_scalar(x, 8, eps) - std::clamp(x, -half, half)) <= eps / 2 + 1e-12);
  const CMatrix flat(4, 16, cplx{0.0, 0.0});
  CHECK(max_abs_diff(adc_quantize(flat, 3, u), flat) == 0.0);
}
