#include "ncbc/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ncbc/error.hpp"

namespace ncbc {
namespace {

std::vector<double> kernel(double sigma, std::size_t radius) {
  std::vector<double> k(radius + 1);
  for (std::size_t i = 0; i <= radius; ++i) {
    const double x = static_cast<double>(i);
    k[i] = std::exp(-(x * x) / (2.0 * sigma * sigma));
  }
  return k;
}

// One 1D pass along a strided line of `n` samples.
void blur_line(const double* in, double* out, std::size_t n, std::size_t stride,
               const std::vector<double>& k) {
  const long radius = static_cast<long>(k.size()) - 1;
  for (long i = 0; i < static_cast<long>(n); ++i) {
    double acc = 0.0;
    double norm = 0.0;
    const long lo = std::max(0L, i - radius);
    const long hi = std::min(static_cast<long>(n) - 1, i + radius);
    for (long j = lo; j <= hi; ++j) {
      const double w = k[static_cast<std::size_t>(std::labs(j - i))];
      acc += w * in[static_cast<std::size_t>(j) * stride];
      norm += w;
    }
    out[static_cast<std::size_t>(i) * stride] = acc / norm;
  }
}

}  // namespace

Image gaussian_smooth(const Image& img, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("smoothing sigma must be a positive finite number");
  }
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  const std::size_t extent = std::max(w, h);
  const auto radius = std::min<std::size_t>(
      extent > 0 ? extent - 1 : 0, static_cast<std::size_t>(std::ceil(4.0 * sigma)));
  const auto k = kernel(sigma, radius);

  Image tmp(img.dims());
  Image out(img.dims());
  const double* src = img.values().data();
  for (std::size_t y = 0; y < h; ++y) {
    blur_line(src + y * w, tmp.values().data() + y * w, w, 1, k);
  }
  for (std::size_t x = 0; x < w; ++x) {
    blur_line(tmp.values().data() + x, out.values().data() + x, h, w, k);
  }
  return out;
}

}  // namespace ncbc
