#pragma once

#include "kdec/tensor.hpp"

namespace kdec {

/// Geometry of a 2-D convolution. Output extents must divide evenly:
/// out_h = (in_h + 2*pad_h - kernel_h) / stride_h + 1, and likewise for width.
struct ConvSpec {
  int out_channels = 0;
  int in_channels = 0;
  int kernel_h = 0, kernel_w = 0;
  int stride_h = 1, stride_w = 1;
  int pad_h = 0, pad_w = 0;

  int out_h(int in_h) const;
  int out_w(int in_w) const;
  /// Spatial extents produced by the transposed operation on an [in_h, in_w] input.
  int transpose_out_h(int in_h) const { return (in_h - 1) * stride_h + kernel_h - 2 * pad_h; }
  int transpose_out_w(int in_w) const { return (in_w - 1) * stride_w + kernel_w - 2 * pad_w; }
};

struct ConvGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

/// Cross-correlation with zero padding. input [Cin,H,W], weights
/// [Cout,Cin,kh,kw], bias [Cout]. Shape mismatches throw with the offending
/// dimension named.
Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, const ConvSpec& spec);

/// Exact gradients of conv2d. grad_out must have the forward output shape;
/// grad_bias is the per-channel sum of grad_out.
ConvGrads conv2d_backward(const Tensor& input, const Tensor& weights, const ConvSpec& spec,
                          const Tensor& grad_out);

/// Multiplication by the transpose of the convolution matrix. input
/// [Cin,H,W], weights [Cin,Cout,kh,kw], bias [Cout]. Output extents per
/// ConvSpec::transpose_out_*.
Tensor conv_transpose2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
                        const ConvSpec& spec);

ConvGrads conv_transpose2d_backward(const Tensor& input, const Tensor& weights,
                                    const ConvSpec& spec, const Tensor& grad_out);

/// max(0, x) elementwise.
Tensor relu(const Tensor& input);
/// Passes grad where input > 0, zero elsewhere (subgradient 0 at exactly 0).
Tensor relu_backward(const Tensor& input, const Tensor& grad_out);

/// Elementwise sum; shapes must match exactly.
Tensor add(const Tensor& a, const Tensor& b);

struct MseResult {
  double loss = 0.0;
  Tensor grad_pred;
};

/// loss = mean((pred - target)^2); grad_pred = 2*(pred - target)/N.
MseResult mse_loss(const Tensor& pred, const Tensor& target);

}  // namespace kdec
