#include "kdec/dct.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace kdec {
namespace {

struct DctBasis {
  // c[u][y] = alpha(u) * cos((2y+1) u pi / 16)
  double c[8][8];
  DctBasis() {
    const double pi = std::acos(-1.0);
    for (int u = 0; u < 8; ++u) {
      const double alpha = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int y = 0; y < 8; ++y) {
        c[u][y] = alpha * std::cos((2 * y + 1) * u * pi / 16.0);
      }
    }
  }
};

const DctBasis& basis() {
  static const DctBasis b;
  return b;
}

}  // namespace

const std::array<int, 64> kBaseQuantTable = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99,
};

double dct_basis(int freq, int pos) { return basis().c[freq][pos]; }

Block dct8x8(const Block& block) {
  const auto& b = basis();
  // rows: t[u][x] = sum_y c[u][y] * block[y][x]
  double t[8][8];
  for (int u = 0; u < 8; ++u) {
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) acc += b.c[u][y] * block[static_cast<size_t>(y) * 8 + x];
      t[u][x] = acc;
    }
  }
  Block out{};
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int x = 0; x < 8; ++x) acc += t[u][x] * b.c[v][x];
      out[static_cast<size_t>(u) * 8 + v] = acc;
    }
  }
  return out;
}

Block idct8x8(const Block& coeffs) {
  const auto& b = basis();
  // t[y][v] = sum_u c[u][y] * coeffs[u][v]
  double t[8][8];
  for (int y = 0; y < 8; ++y) {
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += b.c[u][y] * coeffs[static_cast<size_t>(u) * 8 + v];
      t[y][v] = acc;
    }
  }
  Block out{};
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int v = 0; v < 8; ++v) acc += t[y][v] * b.c[v][x];
      out[static_cast<size_t>(y) * 8 + x] = acc;
    }
  }
  return out;
}

QuantTable quant_table_for_quality(int quality) {
  if (quality < 1 || quality > 100) {
    throw std::invalid_argument("quality must be in [1, 100], got " + std::to_string(quality));
  }
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  QuantTable t;
  for (int i = 0; i < 64; ++i) {
    const int v = (scale * kBaseQuantTable[static_cast<size_t>(i)] + 50) / 100;
    t.q[static_cast<size_t>(i)] = std::clamp(v, 1, 255);
  }
  return t;
}

}  // namespace kdec
