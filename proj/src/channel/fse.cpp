#include "mmvlamp/fse.hpp"

#include <cmath>

#include "mmvlamp/errors.hpp"

namespace mmv {
namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kMinDistance = 1e-6;

double distance(const Point2& a, const Point2& b) {
  const double d = std::hypot(a.x - b.x, a.y - b.y);
  if (!std::isfinite(d)) throw GeometryError("fse: non-finite position");
  if (d < kMinDistance) throw GeometryError("fse: coincident positions");
  return d;
}

double wrap_delay(double tau, double period) {
  double w = std::fmod(tau, period);
  if (w < 0.0) w += period;
  return w >= period ? 0.0 : w;
}

}  // namespace

double friis_loss_db(double d, double wavelength) { return 20.0 * std::log10(4.0 * M_PI * d / wavelength); }

double fse_bounce_loss_db(const FseScene& scene, const Point2& s, double wavelength) {
  return friis_loss_db(distance(scene.bs, s), wavelength) + friis_loss_db(distance(s, scene.user), wavelength) +
         scene.gs_db;
}

double arrival_angle(const FseScene& scene, const Point2& from) {
  distance(scene.bs, from);
  const double dir = std::atan2(from.y - scene.bs.y, from.x - scene.bs.x);
  return std::remainder(dir - scene.bs_normal, 2.0 * M_PI);
}

PathSet fse_channel(const FseScene& scene, const SystemConfig& cfg, Rng& rng) {
  const double lambda = cfg.wavelength();
  const double period = static_cast<double>(cfg.k) / cfg.fs;
  const double d_los = distance(scene.bs, scene.user);
  const double los_db = friis_loss_db(d_los, lambda);

  PathSet paths;
  paths.reserve(1 + scene.scatterers.size());
  paths.push_back({std::polar(1.0, uniform(rng, 0.0, 2.0 * M_PI)), 0.0, std::sin(arrival_angle(scene, scene.user))});
  for (const Point2& s : scene.scatterers) {
    const double len = distance(scene.bs, s) + distance(s, scene.user);
    const double rel_db = fse_bounce_loss_db(scene, s, lambda) - los_db;
    const double amp = std::pow(10.0, -rel_db / 20.0);
    const double tau = wrap_delay((len - d_los) / kSpeedOfLight, period);
    paths.push_back({std::polar(amp, uniform(rng, 0.0, 2.0 * M_PI)), tau, std::sin(arrival_angle(scene, s))});
  }
  return paths;
}

FseScene default_fse_scene() {
  FseScene scene;
  scene.bs = {0.0, 0.0};
  scene.bs_normal = 0.0;
  scene.scatterers = {{30.0, 25.0}, {55.0, -40.0}, {20.0, -15.0}, {70.0, 45.0}, {95.0, 5.0}};
  scene.user = {60.0, 0.0};
  scene.gs_db = -70.0;
  return scene;
}

Point2 sample_user(const UserRegion& region, Rng& rng) {
  return {uniform(rng, region.lo.x, region.hi.x), uniform(rng, region.lo.y, region.hi.y)};
}

}  // namespace mmv
