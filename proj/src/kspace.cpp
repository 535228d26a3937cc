#include "kdec/kspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "kdec/dct.hpp"
#include "kdec/io_util.hpp"

namespace kdec {
namespace {

void require_block_aligned(int width, int height, const char* op) {
  if (width % kBlockSize != 0 || height % kBlockSize != 0) {
    throw std::invalid_argument(std::string(op) + ": dimensions " + std::to_string(width) + "x" +
                                std::to_string(height) + " are not multiples of 8");
  }
}

}  // namespace

KSpaceImage encode(const GrayImage& image, int quality) {
  require_block_aligned(image.width, image.height, "encode");
  const QuantTable table = quant_table_for_quality(quality);
  KSpaceImage code(image.width, image.height, quality);
  const int bw = image.width / kBlockSize;
  const int bh = image.height / kBlockSize;
#pragma omp parallel for collapse(2) schedule(static)
  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      Block block;
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
          block[static_cast<size_t>(i) * 8 + j] =
              static_cast<double>(image.at(by * 8 + i, bx * 8 + j)) - 128.0;
        }
      }
      const Block coeffs = dct8x8(block);
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
          const double q = coeffs[static_cast<size_t>(i) * 8 + j] / table.at(i, j);
          const long v = std::lround(q);  // half away from zero
          if (v < std::numeric_limits<int16_t>::min() || v > std::numeric_limits<int16_t>::max()) {
            throw std::runtime_error("encode: coefficient " + std::to_string(v) +
                                     " is not representable in 16 bits");
          }
          code.at(by * 8 + i, bx * 8 + j) = static_cast<int16_t>(v);
        }
      }
    }
  }
  return code;
}

GrayImage decode_baseline(const KSpaceImage& code) {
  require_block_aligned(code.width, code.height, "decode_baseline");
  const QuantTable table = quant_table_for_quality(code.quality);
  GrayImage img(code.width, code.height);
  const int bw = code.width / kBlockSize;
  const int bh = code.height / kBlockSize;
#pragma omp parallel for collapse(2) schedule(static)
  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      Block coeffs;
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
          coeffs[static_cast<size_t>(i) * 8 + j] =
              static_cast<double>(code.at(by * 8 + i, bx * 8 + j)) * table.at(i, j);
        }
      }
      const Block block = idct8x8(coeffs);
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
          const long v = std::lround(block[static_cast<size_t>(i) * 8 + j] + 128.0);
          img.at(by * 8 + i, bx * 8 + j) = static_cast<uint8_t>(std::clamp(v, 0L, 255L));
        }
      }
    }
  }
  return img;
}

void write_kspace(const KSpaceImage& code, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_kspace: cannot open " + path);
  f.write("KSP1", 4);
  io::write_u32(f, static_cast<uint32_t>(code.width));
  io::write_u32(f, static_cast<uint32_t>(code.height));
  io::write_u32(f, static_cast<uint32_t>(code.quality));
  for (int16_t c : code.coeffs) io::write_i16(f, c);
  if (!f) throw std::runtime_error("write_kspace: write failed for " + path);
}

KSpaceImage read_kspace(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_kspace: cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::string(magic, 4) != "KSP1") {
    throw std::runtime_error("read_kspace: bad magic in " + path);
  }
  const uint32_t w = io::read_u32(f, path);
  const uint32_t h = io::read_u32(f, path);
  const uint32_t q = io::read_u32(f, path);
  if (w == 0 || h == 0 || w % 8 != 0 || h % 8 != 0) {
    throw std::runtime_error("read_kspace: dimensions " + std::to_string(w) + "x" +
                             std::to_string(h) + " are not multiples of 8 in " + path);
  }
  if (q < 1 || q > 100) {
    throw std::runtime_error("read_kspace: quality " + std::to_string(q) + " out of range in " +
                             path);
  }
  KSpaceImage code(static_cast<int>(w), static_cast<int>(h), static_cast<int>(q));
  for (auto& c : code.coeffs) c = io::read_i16(f, path);
  return code;
}

Tensor kspace_to_tensor(const KSpaceImage& code) {
  Tensor t({1, code.height, code.width});
  for (size_t i = 0; i < code.coeffs.size(); ++i) t.data[i] = static_cast<double>(code.coeffs[i]);
  return t;
}

Tensor image_to_tensor(const GrayImage& img) {
  Tensor t({1, img.height, img.width});
  for (size_t i = 0; i < img.pixels.size(); ++i) t.data[i] = static_cast<double>(img.pixels[i]);
  return t;
}

GrayImage tensor_to_image(const Tensor& t) {
  if (t.rank() != 3 || t.dim(0) != 1) {
    throw std::invalid_argument("tensor_to_image: expected [1,H,W], got " + t.shape_str());
  }
  GrayImage img(t.dim(2), t.dim(1));
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    img.pixels[i] = static_cast<uint8_t>(std::clamp(std::lround(t.data[i]), 0L, 255L));
  }
  return img;
}

}  // namespace kdec
