#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ncbc/image.hpp"

namespace ncbc {

// Gaussian-decay gain b(s) = gain_min + (gain_max - gain_min) * exp(-|s - c|^2 / 2 sigma^2).
struct BiasParams {
  double center_x = 0.0;
  double center_y = 0.0;
  double sigma = 1.0;
  double gain_max = 1.0;
  double gain_min = 0.3;

  void validate() const;
};

// Bottom-center coil position, sigma = H / 2, gains [0.3, 1.0].
BiasParams default_bias_params(const LatticeDims& dims);

struct NoiseParams {
  double sigma = 0.0;  // std of each quadrature channel, intensity units
  std::uint64_t seed = 0;

  void validate() const;
};

BiasField gaussian_bias_field(const LatticeDims& dims, const BiasParams& p);

// Magnitude of a complex signal with independent Gaussian noise per channel:
// out = sqrt((x + g1)^2 + g2^2). Draws come from a per-pixel counter stream
// keyed on (seed, pixel), so the output is order independent.
Image apply_rician_noise(const Image& img, const NoiseParams& n);

struct Phantom {
  ObservedImage observed;
  LatentImage truth;
  BiasField true_bias;  // mean exactly 1
};

// The Gaussian bias is rescaled to mean 1 before it is applied, so
// truth = clean and observed = rician(clean * true_bias).
Phantom make_synthetic_phantom(const Image& clean, const BiasParams& bp, const NoiseParams& np);

// Procedural prostate-like cross-section: nested ellipses on a dim background.
Image make_test_card(const LatticeDims& dims);

struct Roi;
// ROIs on the test card: "foreground" (homogeneous bright gland zone),
// "background", and "homogeneous" (outer gland band nearest the coil).
std::vector<Roi> test_card_rois(const LatticeDims& dims);

}  // namespace ncbc
