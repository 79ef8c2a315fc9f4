#pragma once

#include <vector>

#include "mmvlamp/channel.hpp"

namespace mmv {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct FseScene {
  Point2 bs;
  double bs_normal = 0.0;    // broadside direction of the BS array, radians from +x
  Point2 user;
  double user_normal = 0.0;  // kept for completeness; the user has one antenna
  std::vector<Point2> scatterers;
  double gs_db = -70.0;      // per-scatterer excess loss added to the two Friis terms
};

// Region users are dropped into when building an FSE dataset.
struct UserRegion {
  Point2 lo{40.0, -30.0};
  Point2 hi{80.0, 30.0};
};

double friis_loss_db(double distance, double wavelength);

// LoS path plus one single-bounce path per scatterer. Delays are excess
// delays relative to the LoS arrival, wrapped into [0, K/f_s). Amplitudes
// are relative to the LoS path (LoS amplitude 1), each with a uniform phase.
PathSet fse_channel(const FseScene& scene, const SystemConfig& cfg, Rng& rng);

// Total loss in dB of the bounce via `scatterer`.
double fse_bounce_loss_db(const FseScene& scene, const Point2& scatterer, double wavelength);

// Arrival angle at the BS of a ray coming from `from`, relative to broadside.
double arrival_angle(const FseScene& scene, const Point2& from);

// The fixed scene used by the CLI and the tests, and a user drawn from the
// region.
FseScene default_fse_scene();
Point2 sample_user(const UserRegion& region, Rng& rng);

}  // namespace mmv
