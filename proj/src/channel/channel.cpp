#include "mmvlamp/channel.hpp"

#include <cmath>
#include <numeric>

#include "mmvlamp/errors.hpp"

namespace mmv {

std::string SystemConfig::validate() const {
  if (n_bs == 0 || k == 0 || q == 0 || g == 0) throw ParameterError("system: N_BS, K, Q and G must be positive");
  if (n_rf == 0 || n_rf > n_bs) throw ParameterError("system: need 1 <= N_RF <= N_BS");
  if (g < n_bs) throw ParameterError("system: G must be at least N_BS");
  if (l == 0) throw ParameterError("system: L must be at least 1");
  if (k_c == 0 || k_c > k) throw ParameterError("system: need 1 <= K_c <= K");
  if (!(fs > 0.0) || !(carrier > 0.0)) throw ParameterError("system: f_s and carrier must be positive");
  if (m() > n_bs) return "measurement count exceeds N_BS; the problem is not compressive";
  return {};
}

const char* link_name(LinkMode mode) { return mode == LinkMode::uplink ? "uplink" : "downlink"; }

CMatrix steering_vector_sin(double sin_theta, std::size_t n) {
  if (n == 0) throw ParameterError("steering_vector: N must be positive");
  CMatrix a(n, 1);
  const double amp = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t m = 0; m < n; ++m) a[m] = std::polar(amp, -M_PI * static_cast<double>(m) * sin_theta);
  return a;
}

CMatrix steering_vector(double theta, std::size_t n) { return steering_vector_sin(std::sin(theta), n); }

double grid_point(std::size_t g, std::size_t grid_size) {
  return -1.0 + 2.0 * static_cast<double>(g) / static_cast<double>(grid_size);
}

PathSet sample_paths(const SystemConfig& cfg, Rng& rng, GridMode mode) {
  if (mode == GridMode::fse) throw ParameterError("sample_paths: FSE paths come from fse_channel");
  if (mode == GridMode::on_grid && cfg.l > cfg.g) {
    throw ParameterError("sample_paths: on-grid sampling needs L <= G");
  }
  const double max_delay = static_cast<double>(cfg.n_cp()) / cfg.fs;
  std::vector<std::size_t> pool;
  if (mode == GridMode::on_grid) {
    pool.resize(cfg.g);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
  }
  PathSet paths(cfg.l);
  for (std::size_t i = 0; i < cfg.l; ++i) {
    Path& p = paths[i];
    p.gain = complex_normal(rng, 1.0);
    p.delay = uniform(rng, 0.0, max_delay);
    if (mode == GridMode::on_grid) {
      const std::size_t pick = i + uniform_index(rng, cfg.g - i);
      std::swap(pool[i], pool[pick]);
      p.sin_angle = grid_point(pool[i], cfg.g);
    } else {
      p.sin_angle = uniform(rng, -1.0, 1.0);
    }
  }
  return paths;
}

CMatrix frequency_channel(const PathSet& paths, const SystemConfig& cfg) {
  CMatrix h(cfg.n_bs, cfg.k);
  if (paths.empty()) return h;
  const double scale = std::sqrt(static_cast<double>(cfg.n_bs) / static_cast<double>(paths.size()));
  const double kk = static_cast<double>(cfg.k);
  for (const Path& p : paths) {
    const CMatrix a = steering_vector_sin(p.sin_angle, cfg.n_bs);
    for (std::size_t k = 0; k < cfg.k; ++k) {
      const double phase = -2.0 * M_PI * static_cast<double>(k + 1) * cfg.fs * p.delay / kk;
      const cplx w = scale * p.gain * std::polar(1.0, phase);
      for (std::size_t n = 0; n < cfg.n_bs; ++n) h(n, k) += w * a[n];
    }
  }
  return h;
}

CMatrix angle_frequency_image(const PathSet& paths, const SystemConfig& cfg) {
  CMatrix x(cfg.g, cfg.k);
  if (paths.empty()) return x;
  const double scale = std::sqrt(static_cast<double>(cfg.n_bs) / static_cast<double>(paths.size()));
  const double gg = static_cast<double>(cfg.g);
  for (const Path& p : paths) {
    const double pos = (p.sin_angle + 1.0) * gg / 2.0;
    const double idx = std::round(pos);
    if (std::abs(pos - idx) > 1e-9) throw ParameterError("angle_frequency_image: path is off the grid");
    // Column c of D^H is conj(a(phi_c)) = a(-phi_c), so the path lands on the
    // grid point at -sin(phi); +1 and -1 are the same point.
    const std::size_t g = static_cast<std::size_t>(idx) % cfg.g;
    const std::size_t row = (cfg.g - g) % cfg.g;
    for (std::size_t k = 0; k < cfg.k; ++k) {
      const double phase = -2.0 * M_PI * static_cast<double>(k + 1) * cfg.fs * p.delay / static_cast<double>(cfg.k);
      x(row, k) += scale * p.gain * std::polar(1.0, phase);
    }
  }
  return x;
}

CMatrix random_channel(const SystemConfig& cfg, Rng& rng, GridMode mode) {
  return frequency_channel(sample_paths(cfg, rng, mode), cfg);
}

}  // namespace mmv
