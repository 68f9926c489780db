#include "ncbc/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "ncbc/error.hpp"

namespace ncbc {

void LatticeDims::validate() const {
  if (!valid()) {
    throw ConfigError("lattice dimensions must be at least 1x1, got " + to_string(*this));
  }
  if (width > std::numeric_limits<std::size_t>::max() / height ||
      width * height > std::numeric_limits<std::uint32_t>::max()) {
    throw ConfigError("lattice " + to_string(*this) + " has too many nodes");
  }
}

std::string to_string(const LatticeDims& dims) {
  return std::to_string(dims.width) + "x" + std::to_string(dims.height);
}

Image::Image(LatticeDims dims, double fill) : dims_(dims), values_(dims.size(), fill) {}

Image::Image(LatticeDims dims, std::vector<double> values) : dims_(dims), values_(std::move(values)) {
  if (values_.size() != dims_.size()) {
    throw ShapeError("image of " + to_string(dims_) + " needs " + std::to_string(dims_.size()) +
                     " values, got " + std::to_string(values_.size()));
  }
}

double Image::min() const {
  if (values_.empty()) throw DataError("min of empty image");
  return *std::min_element(values_.begin(), values_.end());
}

double Image::max() const {
  if (values_.empty()) throw DataError("max of empty image");
  return *std::max_element(values_.begin(), values_.end());
}

double Image::mean() const {
  if (values_.empty()) throw DataError("mean of empty image");
  double sum = 0.0;
  for (double v : values_) sum += v;
  return sum / static_cast<double>(values_.size());
}

bool Image::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_dims(const Image& a, const Image& b, const char* what) {
  if (a.dims() != b.dims()) {
    throw ShapeError(std::string(what) + ": lattice mismatch " + to_string(a.dims()) + " vs " +
                     to_string(b.dims()));
  }
}

}  // namespace ncbc
