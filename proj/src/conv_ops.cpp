#include "kdec/conv_ops.hpp"

#include <algorithm>
#include <cmath>

namespace kdec {
namespace {

int ceil_div(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }
int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_conv_shapes(const char* op, const Tensor& input, const Tensor& weights,
                       const Tensor* bias, const ConvSpec& s, bool transposed) {
  require(input.rank() == 3, std::string(op) + ": input must be rank 3 [C,H,W], got " + input.shape_str());
  const int w_first = transposed ? s.in_channels : s.out_channels;
  const int w_second = transposed ? s.out_channels : s.in_channels;
  require(weights.rank() == 4, std::string(op) + ": weights must be rank 4, got " + weights.shape_str());
  require(weights.dim(0) == w_first,
          std::string(op) + ": weights dim 0 is " + std::to_string(weights.dim(0)) +
              ", expected " + std::to_string(w_first));
  require(weights.dim(1) == w_second,
          std::string(op) + ": weights dim 1 is " + std::to_string(weights.dim(1)) +
              ", expected " + std::to_string(w_second));
  require(weights.dim(2) == s.kernel_h && weights.dim(3) == s.kernel_w,
          std::string(op) + ": kernel extents " + std::to_string(weights.dim(2)) + "x" +
              std::to_string(weights.dim(3)) + " do not match spec " + std::to_string(s.kernel_h) +
              "x" + std::to_string(s.kernel_w));
  require(input.dim(0) == s.in_channels,
          std::string(op) + ": input channel count " + std::to_string(input.dim(0)) +
              " does not match in_channels " + std::to_string(s.in_channels));
  if (bias) {
    require(bias->rank() == 1 && bias->dim(0) == s.out_channels,
            std::string(op) + ": bias length " + std::to_string(bias->numel()) +
                " does not match out_channels " + std::to_string(s.out_channels));
  }
  require(s.stride_h > 0 && s.stride_w > 0, std::string(op) + ": strides must be positive");
  require(s.pad_h >= 0 && s.pad_w >= 0, std::string(op) + ": padding must be non-negative");
}

// out[oc][oh][ow] = bias[oc] + sum_{ic,kh,kw} W[oc][ic][kh][kw] * in[ic][oh*sh+kh-ph][ow*sw+kw-pw]
void corr_forward(const double* in, int cin, int hin, int win, const double* w, int cout, int kh,
                  int kw, int sh, int sw, int ph, int pw, const double* bias, double* out,
                  int hout, int wout) {
  const int64_t in_ch_stride = static_cast<int64_t>(hin) * win;
  const int64_t out_ch_stride = static_cast<int64_t>(hout) * wout;
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < cout; ++oc) {
    double* oplane = out + oc * out_ch_stride;
    const double b = bias ? bias[oc] : 0.0;
    std::fill(oplane, oplane + out_ch_stride, b);
    for (int ic = 0; ic < cin; ++ic) {
      const double* iplane = in + ic * in_ch_stride;
      const double* wk = w + ((static_cast<int64_t>(oc) * cin + ic) * kh) * kw;
      for (int ki = 0; ki < kh; ++ki) {
        for (int kj = 0; kj < kw; ++kj) {
          const double wv = wk[ki * kw + kj];
          if (wv == 0.0) continue;
          const int ow_lo = std::max(0, ceil_div(pw - kj, sw));
          const int ow_hi = std::min(wout - 1, floor_div(win - 1 + pw - kj, sw));
          for (int oh = 0; oh < hout; ++oh) {
            const int iy = oh * sh + ki - ph;
            if (iy < 0 || iy >= hin) continue;
            const double* irow = iplane + static_cast<int64_t>(iy) * win + (kj - pw);
            double* orow = oplane + static_cast<int64_t>(oh) * wout;
            if (sw == 1) {
              for (int ow = ow_lo; ow <= ow_hi; ++ow) orow[ow] += wv * irow[ow];
            } else {
              for (int ow = ow_lo; ow <= ow_hi; ++ow) orow[ow] += wv * irow[ow * sw];
            }
          }
        }
      }
    }
  }
}

// gin[ic][iy][ix] = sum_{oc,kh,kw : oh,ow valid} W[oc][ic][kh][kw] * gout[oc][oh][ow]
// where iy = oh*sh + kh - ph, ix = ow*sw + kw - pw. Adjoint of corr_forward.
void corr_input_grad(const double* gout, int cout, int hout, int wout, const double* w, int cin,
                     int kh, int kw, int sh, int sw, int ph, int pw, double* gin, int hin,
                     int win) {
  const int64_t gout_ch_stride = static_cast<int64_t>(hout) * wout;
  const int64_t gin_ch_stride = static_cast<int64_t>(hin) * win;
#pragma omp parallel for schedule(static)
  for (int ic = 0; ic < cin; ++ic) {
    double* gplane = gin + ic * gin_ch_stride;
    std::fill(gplane, gplane + gin_ch_stride, 0.0);
    for (int oc = 0; oc < cout; ++oc) {
      const double* oplane = gout + oc * gout_ch_stride;
      const double* wk = w + ((static_cast<int64_t>(oc) * cin + ic) * kh) * kw;
      for (int ki = 0; ki < kh; ++ki) {
        for (int kj = 0; kj < kw; ++kj) {
          const double wv = wk[ki * kw + kj];
          if (wv == 0.0) continue;
          for (int iy = 0; iy < hin; ++iy) {
            const int ty = iy + ph - ki;
            if (ty < 0 || ty % sh != 0) continue;
            const int oh = ty / sh;
            if (oh >= hout) continue;
            const double* grow = oplane + static_cast<int64_t>(oh) * wout;
            double* grin = gplane + static_cast<int64_t>(iy) * win;
            if (sw == 1) {
              const int ix_lo = std::max(0, kj - pw);
              const int ix_hi = std::min(win - 1, wout - 1 + kj - pw);
              const double* gsh = grow + (pw - kj);
              for (int ix = ix_lo; ix <= ix_hi; ++ix) grin[ix] += wv * gsh[ix];
            } else {
              const int ow_lo = std::max(0, ceil_div(pw - kj, sw));
              const int ow_hi = std::min(wout - 1, floor_div(win - 1 + pw - kj, sw));
              for (int ow = ow_lo; ow <= ow_hi; ++ow) grin[ow * sw + kj - pw] += wv * grow[ow];
            }
          }
        }
      }
    }
  }
}

// gw[oc][ic][kh][kw] = sum_{oh,ow} gout[oc][oh][ow] * in[ic][oh*sh+kh-ph][ow*sw+kw-pw]
void corr_weight_grad(const double* gout, int cout, int hout, int wout, const double* in, int cin,
                      int hin, int win, int kh, int kw, int sh, int sw, int ph, int pw,
                      double* gw) {
  const int64_t gout_ch_stride = static_cast<int64_t>(hout) * wout;
  const int64_t in_ch_stride = static_cast<int64_t>(hin) * win;
#pragma omp parallel for collapse(2) schedule(static)
  for (int oc = 0; oc < cout; ++oc) {
    for (int ic = 0; ic < cin; ++ic) {
      const double* oplane = gout + oc * gout_ch_stride;
      const double* iplane = in + ic * in_ch_stride;
      double* wk = gw + ((static_cast<int64_t>(oc) * cin + ic) * kh) * kw;
      for (int ki = 0; ki < kh; ++ki) {
        for (int kj = 0; kj < kw; ++kj) {
          const int ow_lo = std::max(0, ceil_div(pw - kj, sw));
          const int ow_hi = std::min(wout - 1, floor_div(win - 1 + pw - kj, sw));
          double acc = 0.0;
          for (int oh = 0; oh < hout; ++oh) {
            const int iy = oh * sh + ki - ph;
            if (iy < 0 || iy >= hin) continue;
            const double* grow = oplane + static_cast<int64_t>(oh) * wout;
            const double* irow = iplane + static_cast<int64_t>(iy) * win + (kj - pw);
            if (sw == 1) {
              for (int ow = ow_lo; ow <= ow_hi; ++ow) acc += grow[ow] * irow[ow];
            } else {
              for (int ow = ow_lo; ow <= ow_hi; ++ow) acc += grow[ow] * irow[ow * sw];
            }
          }
          wk[ki * kw + kj] = acc;
        }
      }
    }
  }
}

Tensor channel_sums(const Tensor& grad_out) {
  const int c = grad_out.dim(0);
  const int64_t plane = static_cast<int64_t>(grad_out.dim(1)) * grad_out.dim(2);
  Tensor g({c});
  for (int oc = 0; oc < c; ++oc) {
    const double* p = grad_out.channel(oc);
    double acc = 0.0;
    for (int64_t i = 0; i < plane; ++i) acc += p[i];
    g.data[oc] = acc;
  }
  return g;
}

}  // namespace

int ConvSpec::out_h(int in_h) const {
  const int span = in_h + 2 * pad_h - kernel_h;
  if (span < 0 || span % stride_h != 0) {
    throw std::invalid_argument("conv: height " + std::to_string(in_h) + " with pad " +
                                std::to_string(pad_h) + ", kernel " + std::to_string(kernel_h) +
                                ", stride " + std::to_string(stride_h) +
                                " does not divide evenly");
  }
  return span / stride_h + 1;
}

int ConvSpec::out_w(int in_w) const {
  const int span = in_w + 2 * pad_w - kernel_w;
  if (span < 0 || span % stride_w != 0) {
    throw std::invalid_argument("conv: width " + std::to_string(in_w) + " with pad " +
                                std::to_string(pad_w) + ", kernel " + std::to_string(kernel_w) +
                                ", stride " + std::to_string(stride_w) +
                                " does not divide evenly");
  }
  return span / stride_w + 1;
}

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              const ConvSpec& spec) {
  check_conv_shapes("conv2d", input, weights, &bias, spec, false);
  const int hout = spec.out_h(input.dim(1));
  const int wout = spec.out_w(input.dim(2));
  Tensor out({spec.out_channels, hout, wout});
  corr_forward(input.data.data(), spec.in_channels, input.dim(1), input.dim(2),
               weights.data.data(), spec.out_channels, spec.kernel_h, spec.kernel_w, spec.stride_h,
               spec.stride_w, spec.pad_h, spec.pad_w, bias.data.data(), out.data.data(), hout,
               wout);
  return out;
}

ConvGrads conv2d_backward(const Tensor& input, const Tensor& weights, const ConvSpec& spec,
                          const Tensor& grad_out) {
  check_conv_shapes("conv2d_backward", input, weights, nullptr, spec, false);
  const int hout = spec.out_h(input.dim(1));
  const int wout = spec.out_w(input.dim(2));
  require(grad_out.rank() == 3 && grad_out.dim(0) == spec.out_channels &&
              grad_out.dim(1) == hout && grad_out.dim(2) == wout,
          "conv2d_backward: grad_out shape " + grad_out.shape_str() + " does not match output [" +
              std::to_string(spec.out_channels) + "," + std::to_string(hout) + "," +
              std::to_string(wout) + "]");
  ConvGrads g;
  g.input = zeros_like(input);
  g.weights = zeros_like(weights);
  corr_input_grad(grad_out.data.data(), spec.out_channels, hout, wout, weights.data.data(),
                  spec.in_channels, spec.kernel_h, spec.kernel_w, spec.stride_h, spec.stride_w,
                  spec.pad_h, spec.pad_w, g.input.data.data(), input.dim(1), input.dim(2));
  corr_weight_grad(grad_out.data.data(), spec.out_channels, hout, wout, input.data.data(),
                   spec.in_channels, input.dim(1), input.dim(2), spec.kernel_h, spec.kernel_w,
                   spec.stride_h, spec.stride_w, spec.pad_h, spec.pad_w, g.weights.data.data());
  g.bias = channel_sums(grad_out);
  return g;
}

Tensor conv_transpose2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
                        const ConvSpec& spec) {
  check_conv_shapes("conv_transpose2d", input, weights, &bias, spec, true);
  const int hout = spec.transpose_out_h(input.dim(1));
  const int wout = spec.transpose_out_w(input.dim(2));
  require(hout > 0 && wout > 0, "conv_transpose2d: output extents must be positive");
  Tensor out({spec.out_channels, hout, wout});
  // The transposed map is the adjoint of corr_forward; weights laid out
  // [in,out,kh,kw] line up with corr_input_grad's [cout,cin,kh,kw].
  corr_input_grad(input.data.data(), spec.in_channels, input.dim(1), input.dim(2),
                  weights.data.data(), spec.out_channels, spec.kernel_h, spec.kernel_w,
                  spec.stride_h, spec.stride_w, spec.pad_h, spec.pad_w, out.data.data(), hout,
                  wout);
  const int64_t plane = static_cast<int64_t>(hout) * wout;
  for (int oc = 0; oc < spec.out_channels; ++oc) {
    double* p = out.channel(oc);
    const double b = bias.data[oc];
    for (int64_t i = 0; i < plane; ++i) p[i] += b;
  }
  return out;
}

ConvGrads conv_transpose2d_backward(const Tensor& input, const Tensor& weights,
                                    const ConvSpec& spec, const Tensor& grad_out) {
  check_conv_shapes("conv_transpose2d_backward", input, weights, nullptr, spec, true);
  const int hout = spec.transpose_out_h(input.dim(1));
  const int wout = spec.transpose_out_w(input.dim(2));
  require(grad_out.rank() == 3 && grad_out.dim(0) == spec.out_channels &&
              grad_out.dim(1) == hout && grad_out.dim(2) == wout,
          "conv_transpose2d_backward: grad_out shape " + grad_out.shape_str() +
              " does not match output [" + std::to_string(spec.out_channels) + "," +
              std::to_string(hout) + "," + std::to_string(wout) + "]");
  ConvGrads g;
  g.input = zeros_like(input);
  g.weights = zeros_like(weights);
  // Gradient of the transpose w.r.t. its input is a forward convolution with
  // the same weights.
  corr_forward(grad_out.data.data(), spec.out_channels, hout, wout, weights.data.data(),
               spec.in_channels, spec.kernel_h, spec.kernel_w, spec.stride_h, spec.stride_w,
               spec.pad_h, spec.pad_w, nullptr, g.input.data.data(), input.dim(1), input.dim(2));
  corr_weight_grad(input.data.data(), spec.in_channels, input.dim(1), input.dim(2),
                   grad_out.data.data(), spec.out_channels, hout, wout, spec.kernel_h,
                   spec.kernel_w, spec.stride_h, spec.stride_w, spec.pad_h, spec.pad_w,
                   g.weights.data.data());
  g.bias = channel_sums(grad_out);
  return g;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& grad_out) {
  require(input.same_shape(grad_out), "relu_backward: grad_out shape " + grad_out.shape_str() +
                                          " does not match input " + input.shape_str());
  Tensor g = zeros_like(input);
  for (int64_t i = 0; i < input.numel(); ++i) {
    g.data[i] = input.data[i] > 0.0 ? grad_out.data[i] : 0.0;
  }
  return g;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require(a.same_shape(b),
          "add: shapes " + a.shape_str() + " and " + b.shape_str() + " do not match");
  Tensor out = a;
  for (int64_t i = 0; i < out.numel(); ++i) out.data[i] += b.data[i];
  return out;
}

MseResult mse_loss(const Tensor& pred, const Tensor& target) {
  require(pred.same_shape(target), "mse_loss: shapes " + pred.shape_str() + " and " +
                                       target.shape_str() + " do not match");
  MseResult r;
  r.grad_pred = zeros_like(pred);
  const double n = static_cast<double>(pred.numel());
  double acc = 0.0;
  for (int64_t i = 0; i < pred.numel(); ++i) {
    const double d = pred.data[i] - target.data[i];
    acc += d * d;
    r.grad_pred.data[i] = 2.0 * d / n;
  }
  r.loss = acc / n;
  return r;
}

}  // namespace kdec
