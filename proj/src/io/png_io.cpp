#include "synthpipe/io/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

#include "synthpipe/core/errors.hpp"

namespace synthpipe {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Mat<std::uint8_t> read_png_gray8(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open PNG: " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError("malformed PNG: " + path.string());
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_uint_32 width = png_get_image_width(png, info);
  png_uint_32 height = png_get_image_height(png, info);
  int bit_depth = png_get_bit_depth(png, info);
  int color_type = png_get_color_type(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color_type == PNG_COLOR_TYPE_RGB || color_type == PNG_COLOR_TYPE_RGB_ALPHA ||
      color_type == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);

  Mat<std::uint8_t> img(static_cast<int>(height), static_cast<int>(width));
  std::vector<png_bytep> row_ptrs(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    row_ptrs[y] = reinterpret_cast<png_bytep>(img.data() + static_cast<Eigen::Index>(y) * width);
  }
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

namespace {

void write_png_impl(const std::filesystem::path& path, int height, int width,
                    int color_type, const std::uint8_t* data, std::size_t row_bytes) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot create PNG: " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed: " + path.string());
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(data + static_cast<std::size_t>(y) * row_bytes));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png_gray8(const std::filesystem::path& path, const Mat<std::uint8_t>& img) {
  write_png_impl(path, static_cast<int>(img.rows()), static_cast<int>(img.cols()),
                 PNG_COLOR_TYPE_GRAY, img.data(), static_cast<std::size_t>(img.cols()));
}

void write_png_rgb8(const std::filesystem::path& path, int height, int width,
                    const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != static_cast<std::size_t>(height) * width * 3) {
    throw ShapeError("write_png_rgb8: buffer size mismatch");
  }
  write_png_impl(path, height, width, PNG_COLOR_TYPE_RGB, rgb.data(),
                 static_cast<std::size_t>(width) * 3);
}

MatF read_png_gray_f32(const std::filesystem::path& path) {
  Mat<std::uint8_t> raw = read_png_gray8(path);
  return raw.cast<float>() / 255.0f;
}

void write_png_gray_f32(const std::filesystem::path& path, const MatF& img) {
  Mat<std::uint8_t> out(img.rows(), img.cols());
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    float v = std::min(1.0f, std::max(0.0f, img.data()[i]));
    out.data()[i] = static_cast<std::uint8_t>(v * 255.0f + 0.5f);
  }
  write_png_gray8(path, out);
}

}  // namespace synthpipe
