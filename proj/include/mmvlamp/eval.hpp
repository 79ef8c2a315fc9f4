#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mmvlamp/config.hpp"
#include "mmvlamp/io.hpp"

namespace mmv {

inline constexpr double kNmseFloorDb = -100.0;

// Mean of ||H - H^||^2 / ||H||^2 over the set (linear).
double nmse_ratio(std::span<const CMatrix> estimate, std::span<const CMatrix> truth);
// 10 log10 of nmse_ratio, clamped below at -100 dB.
double nmse_db(std::span<const CMatrix> estimate, std::span<const CMatrix> truth);
double ratio_to_db(double ratio);

// Dataset (training) channels and evaluation channels come from disjoint
// streams, so a test set never repeats a training sample of the same seed.
inline constexpr std::uint64_t kDatasetStream = 0;
inline constexpr std::uint64_t kTestStream = 1;

// Channel i is drawn from the stream (seed, stream, i), so sets with the
// same seed share realizations regardless of their size.
ChannelSet generate_channels(const SystemConfig& sys, std::size_t count, std::uint64_t seed, GridMode mode,
                             const FseConfig& fse = {}, std::uint64_t stream = kDatasetStream);

struct CsvRow {
  std::string sweep_axis;
  double sweep_value = 0.0;
  std::string scheme;
  std::string seed;  // decimal seed, or "mean" for the aggregate row
  double nmse_db = 0.0;
};

// Channel estimation sweep. Axes: snr, paths, subcarriers, phase-bits,
// adc-bits (0 bits = unquantized). Schemes: somp, mmv-amp,
// mmv-lamp-trained, mmv-lamp-untrained (the last two need a checkpoint).
std::vector<CsvRow> run_eval(const ExperimentConfig& cfg, const Checkpoint* checkpoint);

// Feedback sweep over the ratio K_c / K. Schemes: fcrn (needs a checkpoint
// with a trained FRSN of matching K_c), fcrn-untrained, somp-feedback,
// crn-direct (no compression).
std::vector<CsvRow> run_feedback_eval(const ExperimentConfig& cfg, const Checkpoint* checkpoint);

// Sorted, with header `sweep_axis,sweep_value,scheme,seed,nmse_db`.
std::string to_csv(std::vector<CsvRow> rows);

}  // namespace mmv
