#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kdec {

/// Dense row-major tensor of doubles. Network data is [channels, height,
/// width]; convolution weights are rank 4. All extents must be positive.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;

  explicit Tensor(std::vector<int> s)
      : shape(std::move(s)), data(static_cast<size_t>(checked_numel(shape)), 0.0) {}

  Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<int64_t>(data.size()) != checked_numel(shape)) {
      throw std::invalid_argument("tensor: data length " + std::to_string(data.size()) +
                                  " does not match shape " + shape_string(shape));
    }
  }

  static int64_t checked_numel(const std::vector<int>& s) {
    if (s.empty()) throw std::invalid_argument("tensor: shape must not be empty");
    int64_t n = 1;
    for (int e : s) {
      if (e <= 0) throw std::invalid_argument("tensor: extent must be positive, got " + std::to_string(e));
      n *= e;
    }
    return n;
  }

  static std::string shape_string(const std::vector<int>& s) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ']';
    return os.str();
  }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  std::string shape_str() const { return shape_string(shape); }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  // rank-3 [C,H,W]
  double& operator()(int c, int y, int x) {
    return data[(static_cast<int64_t>(c) * shape[1] + y) * shape[2] + x];
  }
  double operator()(int c, int y, int x) const {
    return data[(static_cast<int64_t>(c) * shape[1] + y) * shape[2] + x];
  }

  // rank-4 [A,B,H,W]
  double& operator()(int a, int b, int y, int x) {
    return data[((static_cast<int64_t>(a) * shape[1] + b) * shape[2] + y) * shape[3] + x];
  }
  double operator()(int a, int b, int y, int x) const {
    return data[((static_cast<int64_t>(a) * shape[1] + b) * shape[2] + y) * shape[3] + x];
  }

  /// Pointer to the start of channel c of a rank-3 tensor.
  double* channel(int c) { return data.data() + static_cast<int64_t>(c) * shape[1] * shape[2]; }
  const double* channel(int c) const {
    return data.data() + static_cast<int64_t>(c) * shape[1] * shape[2];
  }
};

inline Tensor zeros_like(const Tensor& t) { return Tensor(t.shape); }

}  // namespace kdec
