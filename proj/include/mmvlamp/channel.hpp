#pragma once

#include <cstdint>
#include <vector>

#include "mmvlamp/cmatrix.hpp"
#include "mmvlamp/rng.hpp"
#include "mmvlamp/system.hpp"

namespace mmv {

enum class GridMode : std::uint32_t { on_grid = 0, off_grid = 1, fse = 2 };

struct Path {
  cplx gain;
  double delay = 0.0;      // seconds
  double sin_angle = 0.0;  // sin of the angle seen by the BS array
};

using PathSet = std::vector<Path>;

// (1/sqrt(N)) exp(-j pi m sin(theta)), m = 0..N-1, as an N x 1 column.
CMatrix steering_vector(double theta, std::size_t n);
CMatrix steering_vector_sin(double sin_theta, std::size_t n);

// Grid value -1 + 2 g / G for zero-based g.
double grid_point(std::size_t g, std::size_t grid_size);

PathSet sample_paths(const SystemConfig& cfg, Rng& rng, GridMode mode);

// N_BS x K spatial-frequency channel.
CMatrix frequency_channel(const PathSet& paths, const SystemConfig& cfg);

// G x K angle-frequency image X with D^H X equal to the channel, for paths
// whose angles sit on the dictionary grid. Throws ParameterError otherwise.
CMatrix angle_frequency_image(const PathSet& paths, const SystemConfig& cfg);

// Convenience: sample paths and build the channel in one step.
CMatrix random_channel(const SystemConfig& cfg, Rng& rng, GridMode mode);

}  // namespace mmv
