#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace mapfast {

// Channel-major activations: v[(channel * h + y) * w + x].
struct Tensor3 {
  int w = 0;
  int h = 0;
  int c = 0;
  std::vector<double> v;

  Tensor3() = default;
  Tensor3(int width, int height, int channels)
      : w(width), h(height), c(channels), v(static_cast<std::size_t>(width) * height * channels, 0.0) {}

  std::size_t size() const { return v.size(); }
  double& at(int x, int y, int ch) { return v[(static_cast<std::size_t>(ch) * h + y) * w + x]; }
  double at(int x, int y, int ch) const { return v[(static_cast<std::size_t>(ch) * h + y) * w + x]; }
};

// Square convolution with stride 1 and zero "same" padding (k odd).
// Weights are [out][in][ky][kx]; bias is [out].
struct ConvShape {
  int in = 0;
  int out = 0;
  int k = 1;

  std::size_t weight_count() const { return static_cast<std::size_t>(out) * in * k * k; }
  std::size_t param_count() const { return weight_count() + static_cast<std::size_t>(out); }
};

Tensor3 conv_forward(const Tensor3& in, const ConvShape& shape, std::span<const double> params);
// Accumulates into grad (same layout as params) and returns d(in).
Tensor3 conv_backward(const Tensor3& in, const Tensor3& dout, const ConvShape& shape, std::span<const double> params,
                      std::span<double> grad);

// Max pool with -inf padding. `argmax` records the flat input index chosen
// for each output so the backward pass can route gradients.
struct PoolShape {
  int k = 3;
  int stride = 3;
  int pad = 0;
};

int pool_output_size(int in, const PoolShape& shape);
Tensor3 maxpool_forward(const Tensor3& in, const PoolShape& shape, std::vector<std::uint32_t>& argmax);
Tensor3 maxpool_backward(const Tensor3& in, const Tensor3& dout, const std::vector<std::uint32_t>& argmax);

void relu_inplace(std::span<double> x);
// d(in) given the forward output (zero where the output was clamped).
void relu_backward_inplace(std::span<const double> out, std::span<double> dout);

// Fully connected layer: weights [out][in], bias [out].
struct DenseShape {
  int in = 0;
  int out = 0;

  std::size_t param_count() const { return static_cast<std::size_t>(out) * in + static_cast<std::size_t>(out); }
};

std::vector<double> dense_forward(std::span<const double> in, const DenseShape& shape, std::span<const double> params);
std::vector<double> dense_backward(std::span<const double> in, std::span<const double> dout, const DenseShape& shape,
                                   std::span<const double> params, std::span<double> grad);

// Four branches concatenated channel-wise: 1x1 conv, 3x3 conv, 5x5 conv and
// 3x3 max pool (stride 1) followed by 1x1 conv. Spatial size is preserved.
struct InceptionShape {
  int in = 0;
  int branch = 0;

  int out_channels() const { return 4 * branch; }
  std::array<ConvShape, 4> convs() const {
    return {ConvShape{in, branch, 1}, ConvShape{in, branch, 3}, ConvShape{in, branch, 5}, ConvShape{in, branch, 1}};
  }
  std::size_t param_count() const;
};

struct InceptionCache {
  Tensor3 pooled;
  std::vector<std::uint32_t> pool_argmax;
};

Tensor3 inception_forward(const Tensor3& in, const InceptionShape& shape, std::span<const double> params,
                          InceptionCache& cache);
Tensor3 inception_backward(const Tensor3& in, const Tensor3& dout, const InceptionShape& shape,
                           std::span<const double> params, const InceptionCache& cache, std::span<double> grad);

}  // namespace mapfast
