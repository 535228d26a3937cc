#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "kdec/conv_ops.hpp"
#include "kdec/tensor.hpp"

namespace kdec {

inline constexpr int kNumChannels = 64;
inline constexpr int kNumLayers = 16;
inline constexpr int kFirstTrainableLayer = 2;

enum class LayerKind : uint32_t { coded_mask = 0, conv_transpose = 1, conv = 2 };

struct LayerSpec {
  int index = 0;
  LayerKind kind = LayerKind::conv;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;
  int pad = 0;

  ConvSpec conv_spec() const {
    return ConvSpec{out_channels, in_channels, kernel, kernel, stride, stride, pad, pad};
  }
};

/// The fixed 16-layer table. Layer 1 is the mask bank; layers 2-16 carry
/// trainable weights and biases. Residual merges happen after layers 7, 10,
/// 13 and 16; ReLU after layer 4 and after the final merge.
const std::array<LayerSpec, kNumLayers>& architecture();

/// 64 binary 8x8 masks; mask ch has its single 1-entry at
/// (mod(ch, 8), floor(ch / 8)).
struct MaskBank {
  std::array<std::array<uint8_t, 64>, kNumChannels> masks{};
};

MaskBank build_masks();

/// Splits a [1,H,W] coefficient tensor into 64 per-channel snapshots
/// [64,H/8,W/8]: out[ch][by][bx] = in[0][8*by + mod(ch,8)][8*bx + floor(ch/8)].
Tensor channel_extract(const Tensor& kspace);

/// Adjoint of channel_extract: routes each snapshot gradient back to the
/// coefficient position its mask selects.
Tensor channel_extract_backward(const Tensor& grad_out);

struct LayerParams {
  Tensor weights;
  Tensor bias;
};

/// Weights and biases for layers 2-16; layers[i] holds layer i+2. The mask
/// bank is constant and carries no parameters.
struct ModelParams {
  int quality = 50;
  std::array<LayerParams, kNumLayers - 1> layers;

  LayerParams& layer(int index) { return layers[static_cast<size_t>(index - 2)]; }
  const LayerParams& layer(int index) const { return layers[static_cast<size_t>(index - 2)]; }
};

/// Throws if any layer's shapes disagree with the architecture table,
/// naming the failing layer.
void validate_params(const ModelParams& params);

enum class InitScheme { uniform_fanin, idct_seeded };

InitScheme parse_init_scheme(const std::string& name);
std::string init_scheme_name(InitScheme s);

/// Deterministic for a fixed seed. uniform_fanin draws weights from
/// U(-a, a), a = sqrt(6/fan_in), zero biases. idct_seeded additionally wires
/// layers 2-4 to reproduce the standard dequantize-and-inverse-DCT decoder at
/// the given quality and zero-initializes each residual block's closing 1x1
/// convolution, so an untrained forward pass matches the baseline decoder.
ModelParams init_params(InitScheme scheme, uint64_t seed, int quality);

/// Captured intermediate activations for the inspect workflow.
struct ActivationTaps {
  Tensor channel_split;             // layer 1 output [64,H/8,W/8]
  Tensor spectral_recon;            // layer 2 output [64,H,W]
  Tensor decoded;                   // layer 4 output after ReLU [1,H,W]
  std::array<Tensor, 4> block_out;  // merged residual-block outputs [1,H,W]
  Tensor final_out;                 // network output [1,H,W]
};

/// Activations retained for the backward pass.
struct ForwardCache {
  Tensor input;        // [1,H,W]
  Tensor split;        // layer 1 output
  Tensor recon;        // layer 2 output
  Tensor l3_out;       // layer 3 output
  Tensor decoded_pre;  // layer 4 pre-ReLU
  Tensor decoded;      // layer 4 post-ReLU
  struct BlockCache {
    Tensor block_in;  // merged output feeding the block
    Tensor c1, c2;    // intermediate convolution outputs
  };
  std::array<BlockCache, 4> blocks;
  Tensor merged_pre;  // layer 16 merge, pre final ReLU
};

/// Runs the 16-layer network. Output is [1,H,W], elementwise >= 0. Parameter
/// shapes are validated up front. Either out-parameter may be null.
Tensor forward(const Tensor& kspace, const ModelParams& params, ActivationTaps* taps = nullptr,
               ForwardCache* cache = nullptr);

struct ParamGrads {
  std::array<LayerParams, kNumLayers - 1> layers;
  Tensor input;  // gradient w.r.t. the k-space input

  LayerParams& layer(int index) { return layers[static_cast<size_t>(index - 2)]; }
  const LayerParams& layer(int index) const { return layers[static_cast<size_t>(index - 2)]; }
};

/// Exact gradients for layers 2-16 given d(loss)/d(output). Requires the
/// cache produced by forward(). No gradient is produced for the mask bank.
ParamGrads backward(const Tensor& grad_out, const ModelParams& params, const ForwardCache& cache);

struct ParamCount {
  int64_t decoding = 0;     // layers 2-4
  int64_t enhancement = 0;  // layers 5-16
  int64_t total = 0;
};

ParamCount param_count(const ModelParams& params);

/// Checkpoint format: "HRC1" | version u32 LE | quality u32 LE |
/// layer count u32 LE | per layer: index u32, kind u32, 4x u32 weight dims,
/// weight payload f64 LE row-major, bias payload f64 LE.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

/// Tap file format: "TAP1" | width u32 LE | height u32 LE | channels u32 LE |
/// payload f64 LE, [channel][row][col] order.
void write_tap(const Tensor& tap, const std::string& path);
Tensor read_tap(const std::string& path);

}  // namespace kdec
