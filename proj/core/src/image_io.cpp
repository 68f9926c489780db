#include "ncbc/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <nlohmann/json.hpp>
#include <vector>

#include "ncbc/error.hpp"

namespace ncbc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::size_t kMaxPixels = std::size_t{1} << 31;

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json parse_sidecar(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError("sidecar '" + path.string() + "': " + e.what(), e.byte);
  }
}

std::size_t checked_dim(const json& header, const char* key, const fs::path& path) {
  if (!header.contains(key) || !header[key].is_number_unsigned()) {
    throw FormatError("sidecar '" + path.string() + "': '" + key + "' must be a positive integer");
  }
  const auto v = header[key].get<std::uint64_t>();
  if (v == 0 || v > kMaxPixels) {
    throw FormatError("sidecar '" + path.string() + "': '" + key + "' out of range");
  }
  return static_cast<std::size_t>(v);
}

LatticeDims checked_dims(std::size_t width, std::size_t height, const fs::path& path) {
  if (width == 0 || height == 0 || width > kMaxPixels / height) {
    throw FormatError("'" + path.string() + "': image dimensions overflow");
  }
  return {width, height};
}

Image load_raw(const fs::path& path) {
  const fs::path side = sidecar_path(path);
  const json header = parse_sidecar(side);
  if (!header.is_object()) throw FormatError("sidecar '" + side.string() + "' is not an object", 0);
  for (const auto& [key, _] : header.items()) {
    if (key != "width" && key != "height" && key != "dtype" && key != "endianness") {
      throw FormatError("sidecar '" + side.string() + "': unknown key '" + key + "'");
    }
  }
  const std::size_t width = checked_dim(header, "width", side);
  const std::size_t height = checked_dim(header, "height", side);
  const LatticeDims dims = checked_dims(width, height, side);
  if (!header.contains("dtype") || !header["dtype"].is_string()) {
    throw FormatError("sidecar '" + side.string() + "': 'dtype' must be a string");
  }
  PixelType dtype;
  try {
    dtype = parse_pixel_type(header["dtype"].get<std::string>());
  } catch (const Error& e) {
    throw FormatError("sidecar '" + side.string() + "': " + e.what());
  }
  if (!header.contains("endianness") || header["endianness"] != "little") {
    throw FormatError("sidecar '" + side.string() + "': 'endianness' must be \"little\"");
  }

  const auto bytes = read_bytes(path);
  const std::size_t expected = dims.size() * pixel_size(dtype);
  if (bytes.size() < expected) {
    throw FormatError("'" + path.string() + "': truncated payload, expected " +
                          std::to_string(expected) + " bytes",
                      bytes.size());
  }
  if (bytes.size() > expected) {
    throw FormatError("'" + path.string() + "': trailing bytes after payload", expected);
  }

  Image img(dims);
  for (std::size_t s = 0; s < dims.size(); ++s) {
    const std::uint8_t* p = bytes.data() + s * pixel_size(dtype);
    switch (dtype) {
      case PixelType::float32: {
        const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
                                   (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
        img[s] = static_cast<double>(std::bit_cast<float>(bits));
        break;
      }
      case PixelType::uint8:
        img[s] = p[0];
        break;
      case PixelType::uint16:
        img[s] = static_cast<double>(std::uint16_t(p[0] | (p[1] << 8)));
        break;
    }
  }
  return img;
}

void save_raw(const Image& img, const fs::path& path, PixelType dtype) {
  const std::size_t size = pixel_size(dtype);
  std::vector<std::uint8_t> bytes(img.size() * size);
  for (std::size_t s = 0; s < img.size(); ++s) {
    std::uint8_t* p = bytes.data() + s * size;
    const double v = img[s];
    switch (dtype) {
      case PixelType::float32: {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        for (int k = 0; k < 4; ++k) p[k] = static_cast<std::uint8_t>(bits >> (8 * k));
        break;
      }
      case PixelType::uint8:
      case PixelType::uint16: {
        const double hi = dtype == PixelType::uint8 ? 255.0 : 65535.0;
        if (!(v >= 0.0 && v <= hi) || v != std::floor(v)) {
          throw DataError("value " + std::to_string(v) + " at node " + std::to_string(s) +
                          " is not representable as " + std::string(to_string(dtype)));
        }
        const auto q = static_cast<std::uint16_t>(v);
        p[0] = static_cast<std::uint8_t>(q & 0xff);
        if (dtype == PixelType::uint16) p[1] = static_cast<std::uint8_t>(q >> 8);
        break;
      }
    }
  }
  const json header = {{"width", img.width()},
                       {"height", img.height()},
                       {"dtype", std::string(to_string(dtype))},
                       {"endianness", "little"}};
  write_file_atomic(path, bytes);
  write_file_atomic(sidecar_path(path), header.dump(2) + "\n");
}

// Netpbm header tokens are separated by whitespace; '#' starts a comment.
class PgmHeaderReader {
 public:
  PgmHeaderReader(const std::vector<std::uint8_t>& bytes, const fs::path& path)
      : bytes_(bytes), path_(path) {}

  std::size_t number() {
    skip_space();
    const std::size_t start = pos_;
    std::size_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > kMaxPixels) throw FormatError("'" + path_.string() + "': header value overflows", start);
      ++pos_;
    }
    if (pos_ == start) throw FormatError("'" + path_.string() + "': malformed PGM header", pos_);
    return value;
  }

  void magic() {
    if (bytes_.size() < 2 || bytes_[0] != 'P' || bytes_[1] != '5') {
      throw FormatError("'" + path_.string() + "': not a binary PGM (P5) file", 0);
    }
    pos_ = 2;
  }

  // Exactly one whitespace byte separates maxval from the payload.
  std::size_t payload_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError("'" + path_.string() + "': malformed PGM header", pos_);
    }
    return pos_ + 1;
  }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  const fs::path& path_;
  std::size_t pos_ = 0;
};

Image load_pgm(const fs::path& path) {
  const auto bytes = read_bytes(path);
  PgmHeaderReader reader(bytes, path);
  reader.magic();
  const std::size_t width = reader.number();
  const std::size_t height = reader.number();
  const std::size_t maxval = reader.number();
  const LatticeDims dims = checked_dims(width, height, path);
  if (maxval == 0 || maxval > 65535) {
    throw FormatError("'" + path.string() + "': PGM maxval must lie in [1, 65535]");
  }
  const std::size_t start = reader.payload_start();
  const std::size_t size = maxval < 256 ? 1 : 2;
  const std::size_t expected = dims.size() * size;
  if (bytes.size() - start < expected) {
    throw FormatError("'" + path.string() + "': truncated PGM payload", bytes.size());
  }

  Image img(dims);
  for (std::size_t s = 0; s < dims.size(); ++s) {
    const std::uint8_t* p = bytes.data() + start + s * size;
    img[s] = size == 1 ? p[0] : static_cast<double>((p[0] << 8) | p[1]);
  }

  const fs::path side = sidecar_path(path);
  if (fs::exists(side)) {
    const json scale = parse_sidecar(side);
    if (!scale.is_object() || !scale.contains("min") || !scale.contains("max") ||
        !scale["min"].is_number() || !scale["max"].is_number()) {
      throw FormatError("sidecar '" + side.string() + "': expected numeric 'min' and 'max'");
    }
    const double lo = scale["min"].get<double>();
    const double hi = scale["max"].get<double>();
    for (double& v : img.values()) v = lo + (v / static_cast<double>(maxval)) * (hi - lo);
  }
  return img;
}

void save_pgm(const Image& img, const fs::path& path) {
  const double lo = img.min();
  const double hi = img.max();
  const double range = hi - lo;
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n65535\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.reserve(header.size() + 2 * img.size());
  for (double v : img.values()) {
    // Degenerate range maps everything to 0.
    const double t = range > 0.0 ? (v - lo) / range : 0.0;
    const auto q = static_cast<std::uint16_t>(std::lround(std::clamp(t, 0.0, 1.0) * 65535.0));
    bytes.push_back(static_cast<std::uint8_t>(q >> 8));
    bytes.push_back(static_cast<std::uint8_t>(q & 0xff));
  }
  const json scale = {{"format", "pgm"}, {"min", lo}, {"max", hi}, {"maxval", 65535}};
  write_file_atomic(path, bytes);
  write_file_atomic(sidecar_path(path), scale.dump(2) + "\n");
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace

std::string_view to_string(PixelType t) {
  switch (t) {
    case PixelType::float32:
      return "float32";
    case PixelType::uint8:
      return "uint8";
    case PixelType::uint16:
      return "uint16";
  }
  return "unknown";
}

PixelType parse_pixel_type(std::string_view name) {
  if (name == "float32") return PixelType::float32;
  if (name == "uint8") return PixelType::uint8;
  if (name == "uint16") return PixelType::uint16;
  throw ValidationError("unknown dtype '" + std::string(name) + "'");
}

std::size_t pixel_size(PixelType t) {
  switch (t) {
    case PixelType::float32:
      return 4;
    case PixelType::uint8:
      return 1;
    case PixelType::uint16:
      return 2;
  }
  return 0;
}

fs::path sidecar_path(const fs::path& image_path) {
  fs::path p = image_path;
  p += ".json";
  return p;
}

Image load_image(const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".raw") return load_raw(path);
  if (ext == ".pgm") return load_pgm(path);
  throw ValidationError("unrecognized image extension '" + path.extension().string() +
                        "' (expected .raw or .pgm)");
}

void save_image(const Image& img, const fs::path& path, PixelType dtype) {
  if (img.size() == 0) throw DataError("cannot save an empty image");
  const std::string ext = lower_extension(path);
  if (ext == ".raw") {
    save_raw(img, path, dtype);
  } else if (ext == ".pgm") {
    save_pgm(img, path);
  } else {
    throw ValidationError("unrecognized image extension '" + path.extension().string() +
                          "' (expected .raw or .pgm)");
  }
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw DataError("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DataError("cannot move output into place at '" + path.string() + "'");
  }
}

void write_file_atomic(const fs::path& path, std::string_view text) {
  write_file_atomic(path, std::span<const std::uint8_t>(
                              reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace ncbc
