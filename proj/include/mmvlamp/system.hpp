#pragma once

#include <cstddef>
#include <string>

namespace mmv {

enum class LinkMode { uplink, downlink };

struct SystemConfig {
  std::size_t n_bs = 64;
  std::size_t n_rf = 1;  // RF chains; only the uplink stacks N_RF rows per slot
  std::size_t k = 16;    // subcarriers
  std::size_t q = 16;    // pilot slots
  std::size_t g = 256;   // dictionary grid points
  std::size_t l = 4;     // paths
  double fs = 100e6;        // Hz
  double carrier = 28e9;    // Hz
  std::size_t layers = 5;        // CRN layers T
  std::size_t frsn_layers = 2;   // FRSN layers T'
  std::size_t k_c = 4;           // fed-back subcarriers
  LinkMode link = LinkMode::downlink;

  std::size_t m() const { return link == LinkMode::uplink ? q * n_rf : q; }
  std::size_t n_cp() const { return k >= 4 ? k / 4 : 1; }
  double wavelength() const { return 299792458.0 / carrier; }

  // Throws ParameterError on a violated invariant. Returns a warning text
  // (empty if none) for legal but unusual settings.
  std::string validate() const;
};

const char* link_name(LinkMode mode);

}  // namespace mmv
