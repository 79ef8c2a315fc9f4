#pragma once

#include <optional>

#include "mmvlamp/cmatrix.hpp"
#include "mmvlamp/dictionary.hpp"
#include "mmvlamp/rng.hpp"
#include "mmvlamp/system.hpp"

namespace mmv {

// Phases are carried as real-valued CMatrix entries (zero imaginary part).
CMatrix random_phases(std::size_t rows, std::size_t cols, Rng& rng);
// Wraps every phase into [0, 2 pi).
void wrap_phases(CMatrix& xi);

// F = exp(j Xi) / sqrt(N_BS), N_BS = rows of Xi.
CMatrix phases_to_combiner(const CMatrix& xi);

// F^H H (uplink) or F^T H (downlink).
CMatrix project(const CMatrix& f, const CMatrix& h, LinkMode mode);

// Effective measurement matrix F^H D^H or F^T D^H.
CMatrix effective_matrix(const CMatrix& f, const Dictionary& dict, LinkMode mode);

struct Measurement {
  CMatrix y;
  double noise_var = 0.0;  // per complex entry
};

// Realized-energy SNR: sigma_n^2 = ||proj||_F^2 / (M K 10^(snr/10)).
double noise_variance_for(const CMatrix& projected, double snr_db);

// snr_db = nullopt means noiseless.
Measurement measure(const CMatrix& f, const CMatrix& h, std::optional<double> snr_db, Rng& rng,
                    LinkMode mode = LinkMode::downlink);
Measurement measure_with_noise_var(const CMatrix& f, const CMatrix& h, double noise_var, Rng& rng,
                                   LinkMode mode = LinkMode::downlink);

// Circular-nearest member of {2 pi i / 2^B}.
CMatrix quantize_phases(const CMatrix& xi, int bits);

// Uniform mid-rise quantizer with codebook {(i - (2^B - 1)/2) eps}.
double adc_quantize_scalar(double x, int bits, double eps);
// eps = (y_max - y_min) / 2^B over the real and imaginary parts of Y U.
double adc_step(const CMatrix& y, int bits, const CMatrix& u);
// Y^quan = Q(Y U) U^H. A zero step (constant signal) passes Y through.
CMatrix adc_quantize(const CMatrix& y, int bits, const CMatrix& u);
CMatrix adc_quantize_with_step(const CMatrix& y, int bits, const CMatrix& u, double eps);

}  // namespace mmv
