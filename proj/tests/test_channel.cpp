#include <doctest.h>
#include <set>

#include "mmvlamp/channel.hpp"
#include "mmvlamp/dictionary.hpp"
#include "mmvlamp/errors.hpp"
#include "mmvlamp/fse.hpp"
#include "oracles.hpp"

using namespace mmv;
using namespace mmv::test;

namespace {

SystemConfig small_system() {
  SystemConfig s;
  s.n_bs = 16;
  s.g = 64;
  s.k = 8;
  s.q = 4;
  s.l = 3;
  return s;
}

}  // namespace

TEST_CASE("steering vector") {
  const CMatrix a0 = steering_vector(0.0, 4);
  for (std::size_t m = 0; m < 4; ++m) CHECK(std::abs(a0[m] - cplx{0.5, 0.0}) < 1e-15);
  const CMatrix a1 = steering_vector(M_PI / 2, 2);
  CHECK(std::abs(a1[0] - cplx{1.0 / std::sqrt(2.0), 0.0}) < 1e-15);
  CHECK(std::abs(a1[1] - cplx{-1.0 / std::sqrt(2.0), 0.0}) < 1e-15);
  const CMatrix a2 = steering_vector(0.37, 9);
  for (auto v : a2.data()) CHECK(std::abs(v) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(steering_vector(0.0, 0), ParameterError);
}

TEST_CASE("path sampling") {
  SystemConfig s = small_system();
  s.l = 1;
  Rng rng(11);
  const PathSet on = sample_paths(s, rng, GridMode::on_grid);
  bool on_point = false;
  for (std::size_t g = 0; g < s.g; ++g) on_point = on_point || on[0].sin_angle == grid_point(g, s.g);
  CHECK(on_point);

  s.l = 8;
  const PathSet off = sample_paths(s, rng, GridMode::off_grid);
  double min_dist = 1.0;
  for (const Path& p : off) {
    for (std::size_t g = 0; g < s.g; ++g) min_dist = std::min(min_dist, std::abs(p.sin_angle - grid_point(g, s.g)));
    CHECK(p.delay >= 0.0);
    CHECK(p.delay < s.n_cp() / s.fs);
  }
  CHECK(min_dist > 0.0);

  s.l = s.g;
  const PathSet all = sample_paths(s, rng, GridMode::on_grid);
  std::set<double> distinct;
  for (const Path& p : all) distinct.insert(p.sin_angle);
  CHECK(distinct.size() == s.g);
  s.l = s.g + 1;
  CHECK_THROWS_AS(sample_paths(s, rng, GridMode::on_grid), ParameterError);
}

TEST_CASE("path gains have the declared variance") {
  SystemConfig s = small_system();
  s.l = 1;
  Rng rng(12);
  double acc = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) acc += std::pow(sample_paths(s, rng, GridMode::off_grid)[0].gain.real(), 2);
  CHECK(std::abs(acc / n - 0.5) < 0.05 * 0.5);
}

TEST_CASE("frequency channel") {
  SystemConfig s = small_system();
  const double phi = 0.3;
  PathSet one{{cplx{1.0, 0.0}, 0.0, std::sin(phi)}};
  const CMatrix h = frequency_channel(one, s);
  const CMatrix a = steering_vector(phi, s.n_bs);
  for (std::size_t k = 0; k < s.k; ++k)
    for (std::size_t m = 0; m < s.n_bs; ++m) CHECK(std::abs(h(m, k) - std::sqrt(16.0) * a[m]) < 1e-12);

  Rng rng(13);
  PathSet paths = sample_paths(s, rng, GridMode::off_grid);
  PathSet wrapped = paths;
  for (auto& p : paths) p.delay = 0.0;
  for (auto& p : wrapped) p.delay = s.k / s.fs;
  CHECK(max_abs_diff(frequency_channel(paths, s), frequency_channel(wrapped, s)) < 1e-12);

  for (int seed = 0; seed < 5; ++seed) {
    Rng r(200 + seed);
    const PathSet ps = sample_paths(s, r, GridMode::off_grid);
    CHECK(max_abs_diff(frequency_channel(ps, s), loop_channel(ps, s)) < 1e-12);
  }
}

TEST_CASE("channel is linear in the path gains") {
  SystemConfig s = small_system();
  Rng rng(14);
  PathSet p1 = sample_paths(s, rng, GridMode::off_grid);
  PathSet p2 = p1;
  PathSet sum = p1;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    p2[i].gain = complex_normal(rng);
    sum[i].gain = p1[i].gain + p2[i].gain;
  }
  CHECK(max_abs_diff(frequency_channel(sum, s), frequency_channel(p1, s) + frequency_channel(p2, s)) < 1e-12);
}

TEST_CASE("mean channel energy is N_BS K") {
  SystemConfig s = small_system();
  double acc = 0.0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng = make_rng(seed, {1});
    acc += random_channel(s, rng, GridMode::off_grid).frobenius_sq();
  }
  const double expected = static_cast<double>(s.n_bs * s.k);
  CHECK(std::abs(acc / 500.0 - expected) < 0.05 * expected);
}

TEST_CASE("on-grid angle-frequency image reproduces the channel with L common rows") {
  SystemConfig s = small_system();
  const Dictionary dict = build_redundant_dictionary(s.n_bs, s.g);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_rng(seed, {2});
    const PathSet paths = sample_paths(s, rng, GridMode::on_grid);
    const CMatrix h = frequency_channel(paths, s);
    const CMatrix x = angle_frequency_image(paths, s);
    CHECK(rel_error(matmul(dict.dh, x), h) < 1e-10);
    std::size_t nonzero_rows = 0;
    for (std::size_t g = 0; g < s.g; ++g) {
      std::size_t nz = 0;
      for (std::size_t k = 0; k < s.k; ++k) nz += std::abs(x(g, k)) > 0.0;
      CHECK((nz == 0 || nz == s.k));
      nonzero_rows += nz > 0;
    }
    CHECK(nonzero_rows == s.l);
  }
  Rng rng(3);
  CHECK_THROWS_AS(angle_frequency_image(sample_paths(s, rng, GridMode::off_grid), s), ParameterError);
}

TEST_CASE("fixed scattering environment geometry") {
  SystemConfig s;
  const double lambda = s.wavelength();
  FseScene scene;
  scene.bs = {0.0, 0.0};
  scene.gs_db = 0.0;
  const double d = lambda * 10.0 / (4.0 * M_PI);
  scene.user = {2.0 * d, 0.0};
  const Point2 scat{d, 0.0};
  CHECK(fse_bounce_loss_db(scene, scat, lambda) == doctest::Approx(40.0).epsilon(1e-12));

  FseScene far = scene;
  far.user = {4.0 * d, 0.0};
  const Point2 scat2{2.0 * d, 0.0};
  CHECK(std::abs(fse_bounce_loss_db(far, scat2, lambda) - fse_bounce_loss_db(scene, scat, lambda) - 12.04) < 0.01);

  FseScene east;
  east.bs = {0.0, 0.0};
  east.bs_normal = 0.0;
  east.user = {50.0, 0.0};
  CHECK(arrival_angle(east, east.user) == 0.0);
  Rng rng(5);
  const PathSet los_only = fse_channel(east, s, rng);
  REQUIRE(los_only.size() == 1);
  CHECK(los_only[0].sin_angle == 0.0);
  CHECK(std::abs(los_only[0].gain) == doctest::Approx(1.0));

  FseScene bad = east;
  bad.scatterers = {bad.bs};
  CHECK_THROWS_AS(fse_channel(bad, s, rng), GeometryError);
  bad.scatterers.clear();
  bad.user = bad.bs;
  CHECK_THROWS_AS(fse_channel(bad, s, rng), GeometryError);

  const FseScene def = default_fse_scene();
  FseScene placed = def;
  placed.user = sample_user(UserRegion{}, rng);
  const PathSet ps = fse_channel(placed, s, rng);
  CHECK(ps.size() == 1 + def.scatterers.size());
  for (std::size_t i = 1; i < ps.size(); ++i) {
    CHECK(std::abs(ps[i].gain) < 1.0);
    CHECK(ps[i].delay >= 0.0);
    CHECK(ps[i].delay < s.k / s.fs);
  }
}
