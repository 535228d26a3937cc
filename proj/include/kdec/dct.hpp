#pragma once

#include <array>

namespace kdec {

inline constexpr int kBlockSize = 8;

/// Row-major 8x8 block.
using Block = std::array<double, 64>;

/// Orthonormal 2-D DCT-II of an 8x8 block and its inverse. Coefficient
/// [u][v] carries vertical frequency u and horizontal frequency v.
Block dct8x8(const Block& block);
Block idct8x8(const Block& coeffs);

/// 8x8 quantization divisors, entries in [1, 255].
struct QuantTable {
  std::array<int, 64> q{};
  int at(int i, int j) const { return q[static_cast<size_t>(i) * 8 + j]; }
};

/// ITU-T T.81 Annex K luminance base table.
extern const std::array<int, 64> kBaseQuantTable;

/// Entry (freq, pos) of the orthonormal 8-point DCT-II matrix:
/// alpha(freq) * cos((2*pos + 1) * freq * pi / 16).
double dct_basis(int freq, int pos);

/// Base table scaled by S = (Q < 50 ? 5000/Q : 200 - 2Q),
/// entry = clamp(floor((S*base + 50)/100), 1, 255). Throws unless 1 <= Q <= 100.
QuantTable quant_table_for_quality(int quality);

}  // namespace kdec
