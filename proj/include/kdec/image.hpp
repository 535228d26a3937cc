#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kdec {

/// 8-bit grayscale image, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h) : width(w), height(h), pixels(static_cast<size_t>(w) * h, 0) {}

  uint8_t& at(int y, int x) { return pixels[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int y, int x) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

/// Edge-replicates to the next multiple of 8 in each extent. Identity when
/// already aligned.
GrayImage pad_to_block_multiple(const GrayImage& img);

/// Reads a PGM (P5, maxval 255) or PNG file, detected by content. RGB inputs
/// contribute their green channel. The result is padded to block-multiple
/// extents. Throws on unreadable files or unsupported bit depths.
GrayImage read_image(const std::string& path);

GrayImage read_pgm(const std::string& path);
GrayImage read_png(const std::string& path);

void write_pgm(const GrayImage& img, const std::string& path);
void write_png(const GrayImage& img, const std::string& path);

/// Dispatches on extension: ".png" -> PNG, anything else -> PGM.
void write_image(const GrayImage& img, const std::string& path);

/// Writes an RGB PNG from separate channel planes (test and tooling aid).
void write_png_rgb(int width, int height, const std::vector<uint8_t>& r,
                   const std::vector<uint8_t>& g, const std::vector<uint8_t>& b,
                   const std::string& path);

}  // namespace kdec
