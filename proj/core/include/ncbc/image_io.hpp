#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "ncbc/image.hpp"

namespace ncbc {

enum class PixelType { float32, uint8, uint16 };

std::string_view to_string(PixelType t);
PixelType parse_pixel_type(std::string_view name);
std::size_t pixel_size(PixelType t);

// Supported layouts (see docs/formats.md):
//   *.raw  row-major little-endian payload; header in "<path>.json"
//          {"width", "height", "dtype", "endianness": "little"}
//   *.pgm  binary P5, 16-bit big-endian; "[min, max] -> [0, 65535]", with
//          min/max recorded in "<path>.json" so load() can undo the scaling.
//
// float32 .raw round-trips bit-exactly for values representable in float.
Image load_image(const std::filesystem::path& path);
void save_image(const Image& img, const std::filesystem::path& path,
                PixelType dtype = PixelType::float32);

std::filesystem::path sidecar_path(const std::filesystem::path& image_path);

// Writes to a sibling temporary file then renames over `path`, so readers
// never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace ncbc
