#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmvlamp/channel.hpp"
#include "mmvlamp/training.hpp"

namespace mmv {

inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct DatasetHeader {
  std::uint32_t version = kDatasetVersion;
  std::uint32_t count = 0;
  std::uint32_t n_bs = 0;
  std::uint32_t k = 0;
  std::uint32_t l = 0;
  GridMode grid_mode = GridMode::off_grid;
  std::uint64_t seed = 0;
};

struct Dataset {
  DatasetHeader header;
  ChannelSet samples;  // N_BS x K each
};

// Layout: "MMVL", version, count, N_BS, K, L, grid_mode (u32 each), seed
// (u64), then float32 (re, im) pairs ordered [sample][antenna][subcarrier].
// Everything little-endian.
std::vector<std::uint8_t> encode_dataset(const Dataset& ds);
Dataset decode_dataset(std::span<const std::uint8_t> bytes);
void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

struct Checkpoint {
  std::uint32_t n_bs = 0;
  std::uint32_t m = 0;
  std::uint32_t g = 0;
  std::uint32_t k = 0;
  std::uint32_t layers = 0;
  std::uint32_t frsn_layers = 0;
  CrnModel crn;
  std::optional<FrsnModel> frsn;
};

// Layout: "MMVC", version, N_BS, M, G, K, T, T', link, tensor count (u32
// each), then per tensor: name length, name bytes, rows, cols (u32) and
// rows*cols float32 values. Complex matrices are split into *_re / *_im.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// Rounds every entry to float32, the storage precision of both formats.
CMatrix round_to_storage(const CMatrix& m);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace mmv
