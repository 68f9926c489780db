#pragma once

#include "ncbc/image.hpp"

namespace ncbc {

// Separable Gaussian blur. The kernel is truncated at 4 sigma (or the image
// extent) and renormalized over in-bounds taps, so constants map to constants.
Image gaussian_smooth(const Image& img, double sigma);

}  // namespace ncbc
