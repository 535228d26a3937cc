#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kdec/image.hpp"
#include "kdec/tensor.hpp"

namespace kdec {

/// Quantized DCT coefficients of an image, stored in place: coefficient
/// (i, j) of block (bx, by) lives at position (8*by + i, 8*bx + j).
struct KSpaceImage {
  int width = 0;   // multiple of 8
  int height = 0;  // multiple of 8
  int quality = 50;
  std::vector<int16_t> coeffs;

  KSpaceImage() = default;
  KSpaceImage(int w, int h, int q)
      : width(w), height(h), quality(q), coeffs(static_cast<size_t>(w) * h, 0) {}

  int16_t& at(int y, int x) { return coeffs[static_cast<size_t>(y) * width + x]; }
  int16_t at(int y, int x) const { return coeffs[static_cast<size_t>(y) * width + x]; }
};

/// Per 8x8 block: level-shift by -128, DCT, divide by the quality-scaled
/// quantization table, round half away from zero. Dimensions must be
/// multiples of 8.
KSpaceImage encode(const GrayImage& image, int quality);

/// Standard decode: dequantize, inverse DCT, +128, round, clamp to [0, 255].
GrayImage decode_baseline(const KSpaceImage& code);

/// Binary k-space format: "KSP1" | width u32 LE | height u32 LE |
/// quality u32 LE | width*height coefficients i16 LE, row-major.
void write_kspace(const KSpaceImage& code, const std::string& path);
KSpaceImage read_kspace(const std::string& path);

/// [1,H,W] tensor of raw coefficient values.
Tensor kspace_to_tensor(const KSpaceImage& code);
/// [1,H,W] tensor of pixel intensities in [0, 255].
Tensor image_to_tensor(const GrayImage& img);
/// Rounds and clamps a [1,H,W] tensor to 8-bit pixels.
GrayImage tensor_to_image(const Tensor& t);

}  // namespace kdec
