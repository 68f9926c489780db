#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "ncbc/error.hpp"
#include "ncbc/image_io.hpp"
#include "test_support.hpp"

namespace ncbc {
namespace {

using testing::TempDir;
using testing::write_text;

TEST(ImageIo, Float32RoundTripIsBitExact) {
  TempDir dir("io");
  Image img = testing::random_image({3, 3}, 1);
  for (double& v : img.values()) v = static_cast<float>(v);
  save_image(img, dir / "a.raw");
  EXPECT_TRUE(std::filesystem::exists(dir / "a.raw.json"));
  const Image back = load_image(dir / "a.raw");
  ASSERT_EQ(back.dims(), img.dims());
  for (std::size_t s = 0; s < img.size(); ++s) {
    EXPECT_EQ(std::memcmp(&back.values()[s], &img.values()[s], sizeof(double)), 0);
  }
}

TEST(ImageIo, RawLayoutIsLittleEndianRowMajor) {
  TempDir dir("io");
  const Image img({2, 1}, {1.0, -2.5});
  save_image(img, dir / "b.raw");
  const auto bytes = testing::read_bytes(dir / "b.raw");
  ASSERT_EQ(bytes.size(), 8u);
  const unsigned char one[4] = {0x00, 0x00, 0x80, 0x3f};  // 1.0f
  const unsigned char neg[4] = {0x00, 0x00, 0x20, 0xc0};  // -2.5f
  EXPECT_EQ(std::memcmp(bytes.data(), one, 4), 0);
  EXPECT_EQ(std::memcmp(bytes.data() + 4, neg, 4), 0);
  const auto side = nlohmann::json::parse(testing::read_bytes(dir / "b.raw.json"));
  EXPECT_EQ(side["width"], 2);
  EXPECT_EQ(side["height"], 1);
  EXPECT_EQ(side["dtype"], "float32");
  EXPECT_EQ(side["endianness"], "little");
}

TEST(ImageIo, IntegerDtypes) {
  TempDir dir("io");
  const Image img({3, 1}, {0.0, 7.0, 255.0});
  save_image(img, dir / "u8.raw", PixelType::uint8);
  EXPECT_EQ(load_image(dir / "u8.raw"), img);
  EXPECT_EQ(testing::read_bytes(dir / "u8.raw").size(), 3u);
  const Image wide({2, 1}, {300.0, 65535.0});
  save_image(wide, dir / "u16.raw", PixelType::uint16);
  EXPECT_EQ(load_image(dir / "u16.raw"), wide);
}

TEST(ImageIo, PgmConstantImage) {
  TempDir dir("io");
  save_image(Image({4, 4}, 3.25), dir / "c.pgm");
  const Image back = load_image(dir / "c.pgm");
  for (double v : back.values()) EXPECT_EQ(v, 3.25);
}

TEST(ImageIo, PgmRoundTripWithinQuantization) {
  TempDir dir("io");
  const Image img = testing::random_image({64, 64}, 9, -3.0, 5.0);
  save_image(img, dir / "r.pgm");
  const auto bytes = testing::read_bytes(dir / "r.pgm");
  ASSERT_EQ(std::string(bytes.begin(), bytes.begin() + 2), "P5");
  const Image back = load_image(dir / "r.pgm");
  const double range = img.max() - img.min();
  for (std::size_t s = 0; s < img.size(); ++s) EXPECT_LE(std::abs(back[s] - img[s]), range / 65535.0);
}

TEST(ImageIo, TruncatedPayloadReportsOffset) {
  TempDir dir("io");
  save_image(Image({4, 4}, 1.0), dir / "t.raw");
  std::filesystem::resize_file(dir / "t.raw", 10);
  try {
    load_image(dir / "t.raw");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 10u);
  }
}

TEST(ImageIo, MalformedPgmHeader) {
  TempDir dir("io");
  write_text(dir / "bad.pgm", "P2\n2 2\n255\n");
  EXPECT_THROW(load_image(dir / "bad.pgm"), FormatError);
  write_text(dir / "bad2.pgm", "P5\nx 2\n255\n");
  try {
    load_image(dir / "bad2.pgm");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 3u);
  }
  write_text(dir / "short.pgm", std::string("P5\n2 2\n255\n") + "ab");
  EXPECT_THROW(load_image(dir / "short.pgm"), FormatError);
}

TEST(ImageIo, SidecarErrors) {
  TempDir dir("io");
  write_text(dir / "a.raw", std::string(16, '\0'));
  write_text(dir / "a.raw.json", R"({"width": 2, "height": 2, "dtype": "float32", "endianness": "big"})");
  EXPECT_THROW(load_image(dir / "a.raw"), FormatError);
  write_text(dir / "a.raw.json", R"({"width": 2, "height": 2, "dtype": "float32", "colour": 1})");
  EXPECT_THROW(load_image(dir / "a.raw"), FormatError);
  write_text(dir / "a.raw.json", R"({"width": 4294967295, "height": 4294967295, "dtype": "float32"})");
  EXPECT_THROW(load_image(dir / "a.raw"), FormatError);
  write_text(dir / "a.raw.json", "{not json");
  EXPECT_THROW(load_image(dir / "a.raw"), FormatError);
  EXPECT_THROW(load_image(dir / "missing.raw"), DataError);
}

TEST(ImageIo, UnknownExtensionRejected) {
  TempDir dir("io");
  EXPECT_THROW(save_image(Image({2, 2}, 1.0), dir / "x.tiff"), Error);
}

TEST(ImageIo, AtomicWriteLeavesNoTemporary) {
  TempDir dir("io");
  write_file_atomic(dir / "f.txt", std::string_view("hello"));
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++files;
  EXPECT_EQ(files, 1u);
}

}  // namespace
}  // namespace ncbc
