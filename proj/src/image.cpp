#include "kdec/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace kdec {
namespace {

int next_multiple_of_8(int v) { return (v + 7) / 8 * 8; }

// Skips whitespace and '#' comment lines in a PNM header.
int read_pnm_int(std::istream& is, const std::string& path) {
  int c = is.get();
  while (is) {
    if (c == '#') {
      while (is && c != '\n') c = is.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = is.get();
  }
  if (!is || !std::isdigit(c)) throw std::runtime_error("read_pgm: malformed header in " + path);
  int value = 0;
  while (is && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = is.get();
  }
  return value;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

GrayImage pad_to_block_multiple(const GrayImage& img) {
  const int w = next_multiple_of_8(img.width);
  const int h = next_multiple_of_8(img.height);
  if (w == img.width && h == img.height) return img;
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    const int sy = std::min(y, img.height - 1);
    for (int x = 0; x < w; ++x) {
      out.at(y, x) = img.at(sy, std::min(x, img.width - 1));
    }
  }
  return out;
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_pgm: cannot open " + path);
  char m0 = 0, m1 = 0;
  f.get(m0).get(m1);
  if (!f || m0 != 'P' || m1 != '5') throw std::runtime_error("read_pgm: not a P5 file: " + path);
  const int width = read_pnm_int(f, path);
  const int height = read_pnm_int(f, path);
  const int maxval = read_pnm_int(f, path);
  if (maxval != 255) {
    throw std::runtime_error("read_pgm: unsupported maxval " + std::to_string(maxval) + " in " +
                             path + " (only 255)");
  }
  if (width <= 0 || height <= 0) throw std::runtime_error("read_pgm: bad dimensions in " + path);
  GrayImage img(width, height);
  f.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (f.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw std::runtime_error("read_pgm: truncated payload in " + path);
  }
  return img;
}

void write_pgm(const GrayImage& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_pgm: cannot open " + path);
  f << "P5\n" << img.width << " " << img.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (!f) throw std::runtime_error("write_pgm: write failed for " + path);
}

GrayImage read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("read_png: cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("read_png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("read_png: out of memory");
  }
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("read_png: failed to decode " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (depth == 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("read_png: unsupported bit depth 16 in " + path);
  }
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const png_size_t rowbytes = png_get_rowbytes(png, info);
  const int channels = png_get_channels(png, info);
  std::vector<png_byte> raw(rowbytes * height);
  row_ptrs.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) row_ptrs[y] = raw.data() + y * rowbytes;
  png_read_image(png, row_ptrs.data());
  png_destroy_read_struct(&png, &info, nullptr);

  GrayImage img(static_cast<int>(width), static_cast<int>(height));
  for (png_uint_32 y = 0; y < height; ++y) {
    const png_byte* row = raw.data() + y * rowbytes;
    for (png_uint_32 x = 0; x < width; ++x) {
      uint8_t v = 0;
      switch (channels) {
        case 1: v = row[x]; break;                  // gray
        case 2: v = row[x * 2]; break;              // gray + alpha
        case 3: v = row[x * 3 + 1]; break;          // RGB: green channel
        case 4: v = row[x * 4 + 1]; break;          // RGBA: green channel
        default:
          throw std::runtime_error("read_png: unsupported channel count in " + path);
      }
      img.at(static_cast<int>(y), static_cast<int>(x)) = v;
    }
  }
  return img;
}

void write_png(const GrayImage& img, const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("write_png: cannot open " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("write_png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("write_png: out of memory");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("write_png: failed to encode " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
               8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(img.pixels.data() + static_cast<size_t>(y) * img.width));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_png_rgb(int width, int height, const std::vector<uint8_t>& r,
                   const std::vector<uint8_t>& g, const std::vector<uint8_t>& b,
                   const std::string& path) {
  const size_t n = static_cast<size_t>(width) * height;
  if (r.size() != n || g.size() != n || b.size() != n) {
    throw std::invalid_argument("write_png_rgb: channel plane size mismatch");
  }
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("write_png_rgb: cannot open " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("write_png_rgb: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("write_png_rgb: out of memory");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("write_png_rgb: failed to encode " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(static_cast<size_t>(width) * 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const size_t i = static_cast<size_t>(y) * width + x;
      row[static_cast<size_t>(x) * 3 + 0] = r[i];
      row[static_cast<size_t>(x) * 3 + 1] = g[i];
      row[static_cast<size_t>(x) * 3 + 2] = b[i];
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

GrayImage read_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw std::runtime_error("read_image: cannot open " + path);
  unsigned char sig[2] = {0, 0};
  probe.read(reinterpret_cast<char*>(sig), 2);
  probe.close();
  GrayImage img;
  if (sig[0] == 'P' && sig[1] == '5') {
    img = read_pgm(path);
  } else if (sig[0] == 0x89 && sig[1] == 'P') {
    img = read_png(path);
  } else {
    throw std::runtime_error("read_image: unrecognized format in " + path);
  }
  return pad_to_block_multiple(img);
}

void write_image(const GrayImage& img, const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".png") == 0) {
    write_png(img, path);
  } else {
    write_pgm(img, path);
  }
}

}  // namespace kdec
