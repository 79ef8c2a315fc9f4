#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mmvlamp/dictionary.hpp"
#include "mmvlamp/solvers.hpp"
#include "mmvlamp/system.hpp"

namespace mmv {

using ChannelSet = std::vector<CMatrix>;

// sum_n ||est_n - truth_n||^2 / ||truth_n||^2
double nmse_loss(std::span<const CMatrix> estimate, std::span<const CMatrix> truth);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
};

// One bias-corrected Adam update on a flat real parameter array.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& cfg);

struct TrainConfig {
  double lr = 1e-3;
  std::size_t batch = 20;
  std::size_t epochs = 30;       // per stage
  std::size_t patience = 5;      // stagnant validation checks before stopping a stage
  std::uint64_t seed = 1;
  std::vector<double> snr_db{10.0};
  bool differentiate_onsager = false;
  bool parallel = true;
  // Optional per-stage epoch override (stage t uses stage_epochs[t-1]).
  std::vector<std::size_t> stage_epochs;
  std::function<void(const std::string&)> log;

  void validate() const;
};

// Encoder phases plus tied decoder parameters.
struct CrnModel {
  CMatrix xi;  // real N_BS x M, entries in [0, 2 pi)
  LampParams lamp;
  LinkMode link = LinkMode::downlink;
};

// Random phases from `seed`, B = A^H, theta = (1, 1).
CrnModel initial_crn(const SystemConfig& sys, const Dictionary& dict, std::uint64_t seed);

struct FrsnModel {
  std::vector<std::size_t> omega;  // 1-based, sorted
  LampParams lamp;
};

// B' = U~^H, theta' = (1, 1).
FrsnModel initial_frsn(std::vector<std::size_t> omega, const CMatrix& u);

struct StageReport {
  std::size_t stage = 0;
  std::size_t epochs_run = 0;
  double initial_validation = 0.0;  // mean NMSE (linear) before the stage
  double final_validation = 0.0;    // mean NMSE (linear) of the kept parameters
};

struct TrainReport {
  std::vector<StageReport> stages;
};

// Layer-by-layer training of (Xi, B, theta). Stage t trains the t-layer
// network starting from the stage t-1 parameters, keeps the parameters with
// the best validation NMSE, and hands them to stage t+1.
TrainReport train_layerwise(CrnModel& model, const ChannelSet& train, const ChannelSet& validation,
                            const SystemConfig& sys, const TrainConfig& cfg, const Dictionary& dict);

// Mean linear NMSE of the `layers`-layer CRN on a validation set with noise
// fixed by (seed, sample index).
double crn_validation_nmse(const CrnModel& model, const ChannelSet& validation, const Dictionary& dict,
                           std::size_t layers, std::span<const double> snr_db, std::uint64_t seed, bool parallel = true);

// Feedback stage: the encoder F is fixed, only (B', theta') are trained.
TrainReport train_frsn(FrsnModel& model, const ChannelSet& train, const ChannelSet& validation,
                       const SystemConfig& sys, const TrainConfig& cfg, const CMatrix& f, const CMatrix& u);

double frsn_validation_nmse(const FrsnModel& model, const ChannelSet& validation, const CMatrix& f, const CMatrix& u,
                            std::size_t layers, std::span<const double> snr_db, std::uint64_t seed, bool parallel = true);

// Smallest theta1 the optimizer may reach.
inline constexpr double kTheta1Floor = 1e-6;

}  // namespace mmv
