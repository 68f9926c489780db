#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ncbc {

// Extents of the 2D pixel lattice. Node s = y * width + x.
struct LatticeDims {
  std::size_t width = 0;
  std::size_t height = 0;

  std::size_t size() const noexcept { return width * height; }
  std::size_t index(std::size_t x, std::size_t y) const noexcept { return y * width + x; }
  bool valid() const noexcept { return width >= 1 && height >= 1; }

  // Throws ConfigError when either extent is zero or the node count overflows.
  void validate() const;

  friend bool operator==(const LatticeDims&, const LatticeDims&) = default;
};

std::string to_string(const LatticeDims& dims);

// Row-major real-valued field over a lattice. Used for observations, latent
// estimates and bias fields alike.
class Image {
 public:
  Image() = default;
  explicit Image(LatticeDims dims, double fill = 0.0);
  Image(LatticeDims dims, std::vector<double> values);

  const LatticeDims& dims() const noexcept { return dims_; }
  std::size_t width() const noexcept { return dims_.width; }
  std::size_t height() const noexcept { return dims_.height; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator[](std::size_t s) noexcept { return values_[s]; }
  double operator[](std::size_t s) const noexcept { return values_[s]; }
  double& at(std::size_t x, std::size_t y) noexcept { return values_[dims_.index(x, y)]; }
  double at(std::size_t x, std::size_t y) const noexcept { return values_[dims_.index(x, y)]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> row(std::size_t y) const noexcept {
    return std::span<const double>(values_).subspan(y * dims_.width, dims_.width);
  }

  double min() const;
  double max() const;
  double mean() const;
  bool all_finite() const noexcept;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  LatticeDims dims_{};
  std::vector<double> values_;
};

// Domain aliases; all share the Image representation.
using ObservedImage = Image;
using LatentImage = Image;
using BiasField = Image;

// Throws ShapeError naming `what` when the lattices differ.
void require_same_dims(const Image& a, const Image& b, const char* what);

}  // namespace ncbc
