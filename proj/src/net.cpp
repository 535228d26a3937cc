#include "kdec/net.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "kdec/dct.hpp"
#include "kdec/io_util.hpp"

namespace kdec {
namespace {

std::array<LayerSpec, kNumLayers> make_architecture() {
  std::array<LayerSpec, kNumLayers> a{};
  a[0] = {1, LayerKind::coded_mask, 1, 64, 8, 8, 0};
  a[1] = {2, LayerKind::conv_transpose, 64, 64, 8, 8, 0};
  a[2] = {3, LayerKind::conv, 64, 8, 5, 1, 2};
  a[3] = {4, LayerKind::conv, 8, 1, 3, 1, 1};
  for (int b = 0; b < 4; ++b) {
    a[static_cast<size_t>(4 + 3 * b)] = {5 + 3 * b, LayerKind::conv, 1, 64, 11, 1, 5};
    a[static_cast<size_t>(5 + 3 * b)] = {6 + 3 * b, LayerKind::conv, 64, 16, 7, 1, 3};
    a[static_cast<size_t>(6 + 3 * b)] = {7 + 3 * b, LayerKind::conv, 16, 1, 1, 1, 0};
  }
  return a;
}

// 53-bit uniform in [0, 1).
double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void fill_uniform_fanin(Tensor& w, std::mt19937_64& rng) {
  // fan_in = input channels * kernel area; weights dim 1 is the input
  // channel axis for both layouts used here.
  const double fan_in = static_cast<double>(w.dim(1)) * w.dim(2) * w.dim(3);
  const double a = std::sqrt(6.0 / fan_in);
  for (double& v : w.data) v = a * (2.0 * unit_double(rng) - 1.0);
}

void expect(bool ok, const std::string& msg) {
  if (!ok) throw std::runtime_error(msg);
}

std::vector<int> weight_shape(const LayerSpec& s) {
  if (s.kind == LayerKind::conv_transpose) {
    return {s.in_channels, s.out_channels, s.kernel, s.kernel};
  }
  return {s.out_channels, s.in_channels, s.kernel, s.kernel};
}

}  // namespace

const std::array<LayerSpec, kNumLayers>& architecture() {
  static const std::array<LayerSpec, kNumLayers> table = make_architecture();
  return table;
}

MaskBank build_masks() {
  MaskBank bank;
  for (int ch = 0; ch < kNumChannels; ++ch) {
    const int i = ch % 8;
    const int j = ch / 8;
    bank.masks[static_cast<size_t>(ch)][static_cast<size_t>(i) * 8 + j] = 1;
  }
  return bank;
}

Tensor channel_extract(const Tensor& kspace) {
  if (kspace.rank() != 3 || kspace.dim(0) != 1) {
    throw std::invalid_argument("channel_extract: expected [1,H,W], got " + kspace.shape_str());
  }
  const int h = kspace.dim(1);
  const int w = kspace.dim(2);
  if (h % 8 != 0 || w % 8 != 0) {
    throw std::invalid_argument("channel_extract: dimensions " + std::to_string(w) + "x" +
                                std::to_string(h) + " are not multiples of 8");
  }
  const int bh = h / 8;
  const int bw = w / 8;
  Tensor out({kNumChannels, bh, bw});
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < kNumChannels; ++ch) {
    const int i = ch % 8;
    const int j = ch / 8;
    for (int by = 0; by < bh; ++by) {
      for (int bx = 0; bx < bw; ++bx) {
        out(ch, by, bx) = kspace(0, 8 * by + i, 8 * bx + j);
      }
    }
  }
  return out;
}

Tensor channel_extract_backward(const Tensor& grad_out) {
  if (grad_out.rank() != 3 || grad_out.dim(0) != kNumChannels) {
    throw std::invalid_argument("channel_extract_backward: expected [64,bh,bw], got " +
                                grad_out.shape_str());
  }
  const int bh = grad_out.dim(1);
  const int bw = grad_out.dim(2);
  Tensor g({1, bh * 8, bw * 8});
  // Each coefficient position is selected by exactly one mask.
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < kNumChannels; ++ch) {
    const int i = ch % 8;
    const int j = ch / 8;
    for (int by = 0; by < bh; ++by) {
      for (int bx = 0; bx < bw; ++bx) {
        g(0, 8 * by + i, 8 * bx + j) = grad_out(ch, by, bx);
      }
    }
  }
  return g;
}

void validate_params(const ModelParams& params) {
  if (params.quality < 1 || params.quality > 100) {
    throw std::runtime_error("model params: quality " + std::to_string(params.quality) +
                             " out of range [1, 100]");
  }
  for (int index = kFirstTrainableLayer; index <= kNumLayers; ++index) {
    const LayerSpec& s = architecture()[static_cast<size_t>(index - 1)];
    const LayerParams& p = params.layer(index);
    const std::vector<int> want = weight_shape(s);
    if (p.weights.shape != want) {
      throw std::runtime_error("layer " + std::to_string(index) + ": weight shape " +
                               p.weights.shape_str() + " does not match architecture " +
                               Tensor::shape_string(want));
    }
    if (p.bias.rank() != 1 || p.bias.dim(0) != s.out_channels) {
      throw std::runtime_error("layer " + std::to_string(index) + ": bias length " +
                               std::to_string(p.bias.numel()) + " does not match out channels " +
                               std::to_string(s.out_channels));
    }
  }
}

InitScheme parse_init_scheme(const std::string& name) {
  if (name == "uniform_fanin") return InitScheme::uniform_fanin;
  if (name == "idct_seeded") return InitScheme::idct_seeded;
  throw std::invalid_argument("unknown init scheme: " + name);
}

std::string init_scheme_name(InitScheme s) {
  return s == InitScheme::uniform_fanin ? "uniform_fanin" : "idct_seeded";
}

ModelParams init_params(InitScheme scheme, uint64_t seed, int quality) {
  const QuantTable table = quant_table_for_quality(quality);
  ModelParams params;
  params.quality = quality;
  std::mt19937_64 rng(seed);
  for (int index = kFirstTrainableLayer; index <= kNumLayers; ++index) {
    const LayerSpec& s = architecture()[static_cast<size_t>(index - 1)];
    LayerParams& p = params.layer(index);
    p.weights = Tensor(weight_shape(s));
    p.bias = Tensor({s.out_channels});
    fill_uniform_fanin(p.weights, rng);
  }
  if (scheme == InitScheme::idct_seeded) {
    // Layers 2-4 reproduce the baseline decoder: layer 2 spreads each
    // channel's dequantized basis function over its block, layer 3 sums
    // channels in groups of eight, layer 4 sums the groups and re-applies
    // the +128 level shift.
    LayerParams& l2 = params.layer(2);
    std::fill(l2.weights.data.begin(), l2.weights.data.end(), 0.0);
    for (int ch = 0; ch < kNumChannels; ++ch) {
      const int i = ch % 8;
      const int j = ch / 8;
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          l2.weights(ch, ch, y, x) = table.at(i, j) * dct_basis(i, y) * dct_basis(j, x);
        }
      }
    }
    LayerParams& l3 = params.layer(3);
    std::fill(l3.weights.data.begin(), l3.weights.data.end(), 0.0);
    for (int g = 0; g < 8; ++g) {
      for (int c = 8 * g; c < 8 * g + 8; ++c) l3.weights(g, c, 2, 2) = 1.0;
    }
    LayerParams& l4 = params.layer(4);
    std::fill(l4.weights.data.begin(), l4.weights.data.end(), 0.0);
    for (int g = 0; g < 8; ++g) l4.weights(0, g, 1, 1) = 1.0;
    l4.bias.data[0] = 128.0;
    // Closing 1x1 of each residual block starts at zero so every block is an
    // exact pass-through while its gradient stays live.
    for (int b = 0; b < 4; ++b) {
      LayerParams& close = params.layer(7 + 3 * b);
      std::fill(close.weights.data.begin(), close.weights.data.end(), 0.0);
    }
  }
  return params;
}

Tensor forward(const Tensor& kspace, const ModelParams& params, ActivationTaps* taps,
               ForwardCache* cache) {
  validate_params(params);
  const auto& arch = architecture();

  Tensor split = channel_extract(kspace);
  Tensor recon = conv_transpose2d(split, params.layer(2).weights, params.layer(2).bias,
                                  arch[1].conv_spec());
  Tensor l3_out = conv2d(recon, params.layer(3).weights, params.layer(3).bias, arch[2].conv_spec());
  Tensor decoded_pre =
      conv2d(l3_out, params.layer(4).weights, params.layer(4).bias, arch[3].conv_spec());
  Tensor decoded = relu(decoded_pre);

  if (taps) {
    taps->channel_split = split;
    taps->spectral_recon = recon;
    taps->decoded = decoded;
  }
  if (cache) {
    cache->input = kspace;
    cache->split = std::move(split);
    cache->recon = std::move(recon);
    cache->l3_out = std::move(l3_out);
    cache->decoded_pre = decoded_pre;
    cache->decoded = decoded;
  }

  Tensor merged = std::move(decoded);
  for (int b = 0; b < 4; ++b) {
    const LayerSpec& sa = arch[static_cast<size_t>(4 + 3 * b)];
    const LayerSpec& sb = arch[static_cast<size_t>(5 + 3 * b)];
    const LayerSpec& sc = arch[static_cast<size_t>(6 + 3 * b)];
    Tensor c1 = conv2d(merged, params.layer(sa.index).weights, params.layer(sa.index).bias,
                       sa.conv_spec());
    Tensor c2 =
        conv2d(c1, params.layer(sb.index).weights, params.layer(sb.index).bias, sb.conv_spec());
    Tensor c3 =
        conv2d(c2, params.layer(sc.index).weights, params.layer(sc.index).bias, sc.conv_spec());
    Tensor next = add(c3, merged);
    if (cache) {
      auto& bc = cache->blocks[static_cast<size_t>(b)];
      bc.block_in = std::move(merged);
      bc.c1 = std::move(c1);
      bc.c2 = std::move(c2);
    }
    if (taps) taps->block_out[static_cast<size_t>(b)] = next;
    merged = std::move(next);
  }

  if (cache) cache->merged_pre = merged;
  Tensor out = relu(merged);
  if (taps) taps->final_out = out;
  return out;
}

ParamGrads backward(const Tensor& grad_out, const ModelParams& params, const ForwardCache& cache) {
  if (cache.merged_pre.numel() == 0) {
    throw std::runtime_error("backward: forward cache is empty; run forward with caching first");
  }
  const auto& arch = architecture();
  ParamGrads grads;

  Tensor g = relu_backward(cache.merged_pre, grad_out);
  for (int b = 3; b >= 0; --b) {
    const auto& bc = cache.blocks[static_cast<size_t>(b)];
    const LayerSpec& sa = arch[static_cast<size_t>(4 + 3 * b)];
    const LayerSpec& sb = arch[static_cast<size_t>(5 + 3 * b)];
    const LayerSpec& sc = arch[static_cast<size_t>(6 + 3 * b)];
    ConvGrads gc3 = conv2d_backward(bc.c2, params.layer(sc.index).weights, sc.conv_spec(), g);
    grads.layer(sc.index) = {std::move(gc3.weights), std::move(gc3.bias)};
    ConvGrads gc2 =
        conv2d_backward(bc.c1, params.layer(sb.index).weights, sb.conv_spec(), gc3.input);
    grads.layer(sb.index) = {std::move(gc2.weights), std::move(gc2.bias)};
    ConvGrads gc1 =
        conv2d_backward(bc.block_in, params.layer(sa.index).weights, sa.conv_spec(), gc2.input);
    grads.layer(sa.index) = {std::move(gc1.weights), std::move(gc1.bias)};
    // The skip routes the merge gradient to both branches.
    g = add(gc1.input, g);
  }

  Tensor g4 = relu_backward(cache.decoded_pre, g);
  ConvGrads gl4 = conv2d_backward(cache.l3_out, params.layer(4).weights, arch[3].conv_spec(), g4);
  grads.layer(4) = {std::move(gl4.weights), std::move(gl4.bias)};
  ConvGrads gl3 = conv2d_backward(cache.recon, params.layer(3).weights, arch[2].conv_spec(),
                                  gl4.input);
  grads.layer(3) = {std::move(gl3.weights), std::move(gl3.bias)};
  ConvGrads gl2 = conv_transpose2d_backward(cache.split, params.layer(2).weights,
                                            arch[1].conv_spec(), gl3.input);
  grads.layer(2) = {std::move(gl2.weights), std::move(gl2.bias)};
  grads.input = channel_extract_backward(gl2.input);
  return grads;
}

ParamCount param_count(const ModelParams& params) {
  ParamCount c;
  for (int index = kFirstTrainableLayer; index <= kNumLayers; ++index) {
    const LayerParams& p = params.layer(index);
    const int64_t n = p.weights.numel() + p.bias.numel();
    if (index <= 4) {
      c.decoding += n;
    } else {
      c.enhancement += n;
    }
  }
  c.total = c.decoding + c.enhancement;
  return c;
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
  validate_params(params);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f.write("HRC1", 4);
  io::write_u32(f, 1);  // format version
  io::write_u32(f, static_cast<uint32_t>(params.quality));
  io::write_u32(f, kNumLayers - 1);
  for (int index = kFirstTrainableLayer; index <= kNumLayers; ++index) {
    const LayerSpec& s = architecture()[static_cast<size_t>(index - 1)];
    const LayerParams& p = params.layer(index);
    io::write_u32(f, static_cast<uint32_t>(index));
    io::write_u32(f, static_cast<uint32_t>(s.kind));
    for (int d = 0; d < 4; ++d) io::write_u32(f, static_cast<uint32_t>(p.weights.dim(d)));
    for (double v : p.weights.data) io::write_f64(f, v);
    for (double v : p.bias.data) io::write_f64(f, v);
  }
  if (!f) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::string(magic, 4) != "HRC1") {
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  }
  const uint32_t version = io::read_u32(f, path);
  expect(version == 1, "load_checkpoint: unsupported format version " + std::to_string(version) +
                           " in " + path);
  ModelParams params;
  params.quality = static_cast<int>(io::read_u32(f, path));
  const uint32_t layer_count = io::read_u32(f, path);
  expect(layer_count == kNumLayers - 1,
         "load_checkpoint: layer count " + std::to_string(layer_count) + " in " + path +
             ", expected " + std::to_string(kNumLayers - 1));
  for (int index = kFirstTrainableLayer; index <= kNumLayers; ++index) {
    const LayerSpec& s = architecture()[static_cast<size_t>(index - 1)];
    const uint32_t file_index = io::read_u32(f, path);
    expect(file_index == static_cast<uint32_t>(index),
           "load_checkpoint: layer " + std::to_string(index) + ": found index " +
               std::to_string(file_index));
    const uint32_t kind = io::read_u32(f, path);
    expect(kind == static_cast<uint32_t>(s.kind), "load_checkpoint: layer " +
                                                      std::to_string(index) + ": kind " +
                                                      std::to_string(kind) + " does not match");
    std::vector<int> dims(4);
    for (int d = 0; d < 4; ++d) dims[static_cast<size_t>(d)] = static_cast<int>(io::read_u32(f, path));
    const std::vector<int> want = weight_shape(s);
    if (dims != want) {
      throw std::runtime_error("load_checkpoint: layer " + std::to_string(index) +
                               ": weight shape " + Tensor::shape_string(dims) + ", expected " +
                               Tensor::shape_string(want));
    }
    LayerParams& p = params.layer(index);
    p.weights = Tensor(dims);
    for (double& v : p.weights.data) v = io::read_f64(f, path);
    p.bias = Tensor({s.out_channels});
    for (double& v : p.bias.data) v = io::read_f64(f, path);
  }
  validate_params(params);
  return params;
}

void write_tap(const Tensor& tap, const std::string& path) {
  if (tap.rank() != 3) {
    throw std::invalid_argument("write_tap: expected rank-3 tensor, got " + tap.shape_str());
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_tap: cannot open " + path);
  f.write("TAP1", 4);
  io::write_u32(f, static_cast<uint32_t>(tap.dim(2)));
  io::write_u32(f, static_cast<uint32_t>(tap.dim(1)));
  io::write_u32(f, static_cast<uint32_t>(tap.dim(0)));
  for (double v : tap.data) io::write_f64(f, v);
  if (!f) throw std::runtime_error("write_tap: write failed for " + path);
}

Tensor read_tap(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_tap: cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::string(magic, 4) != "TAP1") {
    throw std::runtime_error("read_tap: bad magic in " + path);
  }
  const int w = static_cast<int>(io::read_u32(f, path));
  const int h = static_cast<int>(io::read_u32(f, path));
  const int c = static_cast<int>(io::read_u32(f, path));
  Tensor t({c, h, w});
  for (double& v : t.data) v = io::read_f64(f, path);
  return t;
}

}  // namespace kdec
