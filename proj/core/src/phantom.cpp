#include "ncbc/phantom.hpp"

#include <cmath>
#include <numbers>

#include "ncbc/error.hpp"
#include "ncbc/metrics.hpp"
#include "ncbc/random.hpp"

namespace ncbc {

void BiasParams::validate() const {
  if (!std::isfinite(center_x) || !std::isfinite(center_y)) {
    throw ConfigError("bias center must be finite");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("bias sigma must be > 0");
  if (!(gain_max > 0.0) || !std::isfinite(gain_max)) throw ConfigError("gain_max must be > 0");
  if (!(gain_min > 0.0 && gain_min <= gain_max)) {
    throw ConfigError("gain_min must lie in (0, gain_max]");
  }
}

BiasParams default_bias_params(const LatticeDims& dims) {
  BiasParams p;
  p.center_x = (static_cast<double>(dims.width) - 1.0) / 2.0;
  p.center_y = static_cast<double>(dims.height) - 1.0;
  p.sigma = static_cast<double>(dims.height) / 2.0;
  return p;
}

void NoiseParams::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("noise sigma must be >= 0");
}

BiasField gaussian_bias_field(const LatticeDims& dims, const BiasParams& p) {
  dims.validate();
  p.validate();
  BiasField b(dims);
  const double span = p.gain_max - p.gain_min;
  for (std::size_t y = 0; y < dims.height; ++y) {
    for (std::size_t x = 0; x < dims.width; ++x) {
      const double dx = static_cast<double>(x) - p.center_x;
      const double dy = static_cast<double>(y) - p.center_y;
      b.at(x, y) = p.gain_min + span * std::exp(-(dx * dx + dy * dy) / (2.0 * p.sigma * p.sigma));
    }
  }
  return b;
}

Image apply_rician_noise(const Image& img, const NoiseParams& n) {
  n.validate();
  if (!img.all_finite()) throw DataError("rician noise input has non-finite values");
  if (n.sigma == 0.0) return img;
  Image out(img.dims());
  for (std::size_t s = 0; s < img.size(); ++s) {
    // Box-Muller on two counter-derived uniforms yields both quadrature channels.
    const double u1 = to_unit_open_low(hash_key(n.seed, s, 1));
    const double u2 = to_unit(hash_key(n.seed, s, 2));
    const double radius = n.sigma * std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    const double re = img[s] + radius * std::cos(angle);
    const double im = radius * std::sin(angle);
    out[s] = std::sqrt(re * re + im * im);
  }
  return out;
}

Phantom make_synthetic_phantom(const Image& clean, const BiasParams& bp, const NoiseParams& np) {
  clean.dims().validate();
  if (!clean.all_finite()) throw DataError("clean image has non-finite values");
  if (clean.min() < 0.0) throw DataError("clean image must be nonnegative");
  np.validate();

  BiasField raw = gaussian_bias_field(clean.dims(), bp);
  const double mean = raw.mean();
  BiasField bias(clean.dims());
  for (std::size_t s = 0; s < raw.size(); ++s) bias[s] = raw[s] / mean;

  Image corrupted(clean.dims());
  for (std::size_t s = 0; s < clean.size(); ++s) corrupted[s] = clean[s] * bias[s];

  Phantom ph;
  ph.observed = apply_rician_noise(corrupted, np);
  ph.truth = clean;
  ph.true_bias = std::move(bias);
  return ph;
}

Image make_test_card(const LatticeDims& dims) {
  dims.validate();
  const double w = static_cast<double>(dims.width);
  const double h = static_cast<double>(dims.height);
  const double cx = w / 2.0;
  const double cy = h * 0.45;
  auto inside = [&](double px, double py, double ax, double ay, double ox, double oy) {
    const double u = (px - cx - ox) / ax;
    const double v = (py - cy - oy) / ay;
    return u * u + v * v <= 1.0;
  };

  Image img(dims, 0.15);
  for (std::size_t y = 0; y < dims.height; ++y) {
    for (std::size_t x = 0; x < dims.width; ++x) {
      const double px = static_cast<double>(x) + 0.5;
      const double py = static_cast<double>(y) + 0.5;
      double value = 0.15;
      if (inside(px, py, 0.36 * w, 0.30 * h, 0.0, 0.0)) value = 0.55;          // peripheral zone
      if (inside(px, py, 0.22 * w, 0.17 * h, 0.0, -0.04 * h)) value = 0.85;    // central gland
      if (inside(px, py, 0.07 * w, 0.06 * h, 0.12 * w, 0.12 * h)) value = 0.35;  // lesion
      img.at(x, y) = value;
    }
  }
  return img;
}

std::vector<Roi> test_card_rois(const LatticeDims& dims) {
  auto span = [](std::size_t extent, double lo, double hi) {
    const auto a = static_cast<std::size_t>(std::lround(lo * static_cast<double>(extent)));
    const auto b = static_cast<std::size_t>(std::lround(hi * static_cast<double>(extent)));
    return std::pair{a, std::max<std::size_t>(b, a + 1) - a};
  };
  auto make = [&](const char* name, double x0, double x1, double y0, double y1) {
    const auto [x, w] = span(dims.width, x0, x1);
    const auto [y, h] = span(dims.height, y0, y1);
    return Roi{name, x, y, w, h};
  };
  return {
      make("foreground", 26.0 / 64, 38.0 / 64, 20.0 / 64, 30.0 / 64),
      make("background", 2.0 / 64, 12.0 / 64, 2.0 / 64, 10.0 / 64),
      make("homogeneous", 24.0 / 64, 40.0 / 64, 40.0 / 64, 46.0 / 64),
  };
}

}  // namespace ncbc
