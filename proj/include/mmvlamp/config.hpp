#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mmvlamp/channel.hpp"
#include "mmvlamp/fse.hpp"
#include "mmvlamp/system.hpp"
#include "mmvlamp/training.hpp"

namespace mmv {

struct DatasetConfig {
  std::size_t count = 2000;
  GridMode grid = GridMode::off_grid;
  std::string path;                  // train: load channels from here instead of generating
  double validation_fraction = 0.2;  // train: tail of the dataset held out for validation
};

struct EvalConfig {
  std::vector<std::string> schemes{"somp", "mmv-amp"};
  std::string sweep_axis = "snr";
  std::vector<double> sweep_values{0.0, 5.0, 10.0, 20.0};
  std::vector<std::uint64_t> seeds{1};
  std::size_t test_count = 100;
  double snr_db = 10.0;  // used when the sweep axis is not snr
  GridMode grid = GridMode::off_grid;
  std::size_t somp_support = 0;  // 0 -> L
};

struct FseConfig {
  double gs_db = -70.0;
  UserRegion region;
};

struct FeedbackConfig {
  std::size_t delay_support = 0;  // SOMP baseline, 0 -> K_c / 2
  std::uint64_t omega_seed = 1;
};

struct ExperimentConfig {
  SystemConfig system;
  TrainConfig train;
  DatasetConfig dataset;
  EvalConfig eval;
  FseConfig fse;
  FeedbackConfig feedback;
};

// Flat text: one `section.key = value` per line, '#' starts a comment,
// lists are comma separated. Unknown keys and malformed values throw
// ConfigError naming the line.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

GridMode parse_grid_mode(const std::string& s);
const char* grid_mode_name(GridMode mode);

}  // namespace mmv
