#include "mapfast/net_layers.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace mapfast {

namespace {

void check_params(std::size_t have, std::size_t need, const char* what) {
  if (have != need) {
    throw std::invalid_argument(std::string(what) + " expects " + std::to_string(need) + " parameters, got " +
                                std::to_string(have));
  }
}

// Slice of channels [first, first + count) as its own tensor.
Tensor3 channel_slice(const Tensor3& t, int first, int count) {
  Tensor3 out(t.w, t.h, count);
  const std::size_t plane = static_cast<std::size_t>(t.w) * t.h;
  std::copy_n(t.v.begin() + static_cast<std::ptrdiff_t>(first * plane), count * plane, out.v.begin());
  return out;
}

void add_into(Tensor3& dst, const Tensor3& src) {
  for (std::size_t i = 0; i < dst.v.size(); ++i) dst.v[i] += src.v[i];
}

}  // namespace

Tensor3 conv_forward(const Tensor3& in, const ConvShape& shape, std::span<const double> params) {
  check_params(params.size(), shape.param_count(), "convolution");
  if (in.c != shape.in) throw std::invalid_argument("convolution input channel mismatch");
  const int p = shape.k / 2;
  const int w = in.w, h = in.h;
  Tensor3 out(w, h, shape.out);
  const double* bias = params.data() + shape.weight_count();
  for (int co = 0; co < shape.out; ++co) {
    double* oplane = out.v.data() + static_cast<std::size_t>(co) * w * h;
    std::fill_n(oplane, static_cast<std::size_t>(w) * h, bias[co]);
    for (int ci = 0; ci < shape.in; ++ci) {
      const double* iplane = in.v.data() + static_cast<std::size_t>(ci) * w * h;
      const double* kernel = params.data() + (static_cast<std::size_t>(co) * shape.in + ci) * shape.k * shape.k;
      for (int ky = 0; ky < shape.k; ++ky) {
        const int dy = ky - p;
        const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
        for (int kx = 0; kx < shape.k; ++kx) {
          const int dx = kx - p;
          const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
          const double wv = kernel[ky * shape.k + kx];
          for (int y = y0; y < y1; ++y) {
            double* orow = oplane + static_cast<std::size_t>(y) * w;
            const double* irow = iplane + static_cast<std::size_t>(y + dy) * w + dx;
            for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
          }
        }
      }
    }
  }
  return out;
}

Tensor3 conv_backward(const Tensor3& in, const Tensor3& dout, const ConvShape& shape, std::span<const double> params,
                      std::span<double> grad) {
  check_params(params.size(), shape.param_count(), "convolution");
  check_params(grad.size(), shape.param_count(), "convolution gradient");
  const int p = shape.k / 2;
  const int w = in.w, h = in.h;
  Tensor3 din(w, h, in.c);
  double* gbias = grad.data() + shape.weight_count();
  for (int co = 0; co < shape.out; ++co) {
    const double* dplane = dout.v.data() + static_cast<std::size_t>(co) * w * h;
    double sum = 0.0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) sum += dplane[i];
    gbias[co] += sum;
    for (int ci = 0; ci < shape.in; ++ci) {
      const double* iplane = in.v.data() + static_cast<std::size_t>(ci) * w * h;
      double* diplane = din.v.data() + static_cast<std::size_t>(ci) * w * h;
      const std::size_t kbase = (static_cast<std::size_t>(co) * shape.in + ci) * shape.k * shape.k;
      for (int ky = 0; ky < shape.k; ++ky) {
        const int dy = ky - p;
        const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
        for (int kx = 0; kx < shape.k; ++kx) {
          const int dx = kx - p;
          const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
          const double wv = params[kbase + ky * shape.k + kx];
          double acc = 0.0;
          for (int y = y0; y < y1; ++y) {
            const double* drow = dplane + static_cast<std::size_t>(y) * w;
            const double* irow = iplane + static_cast<std::size_t>(y + dy) * w + dx;
            double* dirow = diplane + static_cast<std::size_t>(y + dy) * w + dx;
            for (int x = x0; x < x1; ++x) {
              acc += drow[x] * irow[x];
              dirow[x] += wv * drow[x];
            }
          }
          grad[kbase + ky * shape.k + kx] += acc;
        }
      }
    }
  }
  return din;
}

int pool_output_size(int in, const PoolShape& shape) {
  const int span = in + 2 * shape.pad - shape.k;
  if (span < 0) {
    throw std::invalid_argument("pool window " + std::to_string(shape.k) + " exceeds input size " + std::to_string(in));
  }
  return span / shape.stride + 1;
}

Tensor3 maxpool_forward(const Tensor3& in, const PoolShape& shape, std::vector<std::uint32_t>& argmax) {
  const int ow = pool_output_size(in.w, shape);
  const int oh = pool_output_size(in.h, shape);
  Tensor3 out(ow, oh, in.c);
  argmax.assign(out.size(), 0);
  std::size_t o = 0;
  for (int ch = 0; ch < in.c; ++ch) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox, ++o) {
        double best = -std::numeric_limits<double>::infinity();
        std::uint32_t best_i = 0;
        for (int ky = 0; ky < shape.k; ++ky) {
          const int y = oy * shape.stride - shape.pad + ky;
          if (y < 0 || y >= in.h) continue;
          for (int kx = 0; kx < shape.k; ++kx) {
            const int x = ox * shape.stride - shape.pad + kx;
            if (x < 0 || x >= in.w) continue;
            const std::size_t i = (static_cast<std::size_t>(ch) * in.h + y) * in.w + x;
            if (in.v[i] > best) {
              best = in.v[i];
              best_i = static_cast<std::uint32_t>(i);
            }
          }
        }
        out.v[o] = best;
        argmax[o] = best_i;
      }
    }
  }
  return out;
}

Tensor3 maxpool_backward(const Tensor3& in, const Tensor3& dout, const std::vector<std::uint32_t>& argmax) {
  Tensor3 din(in.w, in.h, in.c);
  for (std::size_t o = 0; o < dout.v.size(); ++o) din.v[argmax[o]] += dout.v[o];
  return din;
}

void relu_inplace(std::span<double> x) {
  for (double& v : x) v = v > 0.0 ? v : 0.0;
}

void relu_backward_inplace(std::span<const double> out, std::span<double> dout) {
  for (std::size_t i = 0; i < dout.size(); ++i) {
    if (out[i] <= 0.0) dout[i] = 0.0;
  }
}

std::vector<double> dense_forward(std::span<const double> in, const DenseShape& shape, std::span<const double> params) {
  check_params(params.size(), shape.param_count(), "dense layer");
  if (static_cast<int>(in.size()) != shape.in) throw std::invalid_argument("dense input size mismatch");
  std::vector<double> out(shape.out);
  const double* bias = params.data() + static_cast<std::size_t>(shape.out) * shape.in;
  for (int o = 0; o < shape.out; ++o) {
    const double* row = params.data() + static_cast<std::size_t>(o) * shape.in;
    double acc = bias[o];
    for (int i = 0; i < shape.in; ++i) acc += row[i] * in[i];
    out[o] = acc;
  }
  return out;
}

std::vector<double> dense_backward(std::span<const double> in, std::span<const double> dout, const DenseShape& shape,
                                   std::span<const double> params, std::span<double> grad) {
  check_params(grad.size(), shape.param_count(), "dense gradient");
  std::vector<double> din(shape.in, 0.0);
  double* gbias = grad.data() + static_cast<std::size_t>(shape.out) * shape.in;
  for (int o = 0; o < shape.out; ++o) {
    const double d = dout[o];
    if (d == 0.0) continue;
    const double* row = params.data() + static_cast<std::size_t>(o) * shape.in;
    double* grow = grad.data() + static_cast<std::size_t>(o) * shape.in;
    for (int i = 0; i < shape.in; ++i) {
      grow[i] += d * in[i];
      din[i] += d * row[i];
    }
    gbias[o] += d;
  }
  return din;
}

std::size_t InceptionShape::param_count() const {
  std::size_t n = 0;
  for (const auto& c : convs()) n += c.param_count();
  return n;
}

Tensor3 inception_forward(const Tensor3& in, const InceptionShape& shape, std::span<const double> params,
                          InceptionCache& cache) {
  check_params(params.size(), shape.param_count(), "inception module");
  const auto convs = shape.convs();
  Tensor3 out(in.w, in.h, shape.out_channels());
  const std::size_t plane = static_cast<std::size_t>(in.w) * in.h;
  cache.pooled = maxpool_forward(in, PoolShape{3, 1, 1}, cache.pool_argmax);
  std::size_t offset = 0;
  for (int b = 0; b < 4; ++b) {
    const auto sub = params.subspan(offset, convs[b].param_count());
    offset += convs[b].param_count();
    const Tensor3 branch = conv_forward(b == 3 ? cache.pooled : in, convs[b], sub);
    std::copy(branch.v.begin(), branch.v.end(), out.v.begin() + static_cast<std::ptrdiff_t>(b * shape.branch * plane));
  }
  return out;
}

Tensor3 inception_backward(const Tensor3& in, const Tensor3& dout, const InceptionShape& shape,
                           std::span<const double> params, const InceptionCache& cache, std::span<double> grad) {
  const auto convs = shape.convs();
  Tensor3 din(in.w, in.h, in.c);
  std::size_t offset = 0;
  for (int b = 0; b < 4; ++b) {
    const std::size_t n = convs[b].param_count();
    const Tensor3 slice = channel_slice(dout, b * shape.branch, shape.branch);
    if (b < 3) {
      add_into(din, conv_backward(in, slice, convs[b], params.subspan(offset, n), grad.subspan(offset, n)));
    } else {
      const Tensor3 dpooled = conv_backward(cache.pooled, slice, convs[b], params.subspan(offset, n),
                                            grad.subspan(offset, n));
      add_into(din, maxpool_backward(in, dpooled, cache.pool_argmax));
    }
    offset += n;
  }
  return din;
}

}  // namespace mapfast
