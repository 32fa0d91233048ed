#include "mapfast/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "mapfast/errors.hpp"
#include "mapfast/rng.hpp"

namespace mapfast {

namespace {

constexpr char kMagic[8] = {'M', 'A', 'P', 'F', 'N', 'E', 'T', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr PoolShape kStagePool{3, 3, 0};

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<double> softmax(const std::vector<double>& z) {
  const double top = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) sum += p[i] = std::exp(z[i] - top);
  for (double& v : p) v /= sum;
  return p;
}

double clamped_log(double p) { return std::log(std::max(p, kProbabilityClamp)); }

// Binary cross-entropy of s against bit y, and its derivative with respect
// to the logit (zero where the clamp is active).
double bce(double s, bool y) { return y ? -clamped_log(s) : -clamped_log(1.0 - s); }
double bce_grad(double s, bool y) {
  if (y) return s < kProbabilityClamp ? 0.0 : s - 1.0;
  return 1.0 - s < kProbabilityClamp ? 0.0 : s;
}

void check_label(const TrainingLabel& label, int k) {
  const auto p = static_cast<std::size_t>(pair_count(k));
  if (label.fastest_class < 0 || label.fastest_class >= k || label.completion.size() != static_cast<std::size_t>(k) ||
      label.pairwise.size() != p || label.pairwise_valid.size() != p) {
    throw std::invalid_argument("label does not match a portfolio of size " + std::to_string(k));
  }
}

void put_bytes(std::ostream& out, std::uint64_t v, int n) {
  for (int i = 0; i < n; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_bytes(std::istream& in, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw ParseError("truncated checkpoint");
    v |= static_cast<std::uint64_t>(c & 0xff) << (8 * i);
  }
  return v;
}

}  // namespace

LossBreakdown loss(const Prediction& prediction, const TrainingLabel& label, const LossMask& mask) {
  const int k = static_cast<int>(prediction.class_probs.size());
  check_label(label, k);
  LossBreakdown out;
  if (mask.class_loss) out.l_class = -clamped_log(prediction.class_probs[label.fastest_class]);
  if (mask.completion_loss) {
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += bce(prediction.completion_probs[i], label.completion[i]);
    out.l_comp = sum / k;
  }
  if (mask.pairwise_loss) {
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < label.pairwise.size(); ++i) {
      if (!label.pairwise_valid[i]) continue;
      sum += bce(prediction.pairwise_probs[i], label.pairwise[i]);
      ++n;
    }
    out.l_pair = n > 0 ? sum / n : 0.0;
  }
  out.l_tot = out.l_class + out.l_comp + out.l_pair;
  return out;
}

int select_algorithm(const Prediction& prediction, SelectionMode mode) {
  const int k = static_cast<int>(prediction.class_probs.size());
  if (mode == SelectionMode::ClassArgmax) {
    int best = 0;
    for (int i = 1; i < k; ++i) {
      if (prediction.class_probs[i] > prediction.class_probs[best]) best = i;
    }
    return best;
  }
  std::vector<double> score(k, 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const double p = prediction.pairwise_probs[pair_index(i, j, k)];
      if (p > 0.5) {
        score[i] += 1.0;
      } else if (p < 0.5) {
        score[j] += 1.0;
      } else {
        score[i] += 0.5;
        score[j] += 0.5;
      }
    }
  }
  return static_cast<int>(std::max_element(score.begin(), score.end()) - score.begin());
}

Tensor3 to_network_input(const InstanceTensor& tensor) {
  Tensor3 out(tensor.width, tensor.height, InstanceTensor::kChannels);
  for (int y = 0; y < tensor.height; ++y) {
    for (int x = 0; x < tensor.width; ++x) {
      for (int ch = 0; ch < InstanceTensor::kChannels; ++ch) {
        out.at(x, y, ch) = tensor.values[(static_cast<std::size_t>(y) * tensor.width + x) * InstanceTensor::kChannels + ch];
      }
    }
  }
  return out;
}

struct Network::Cache {
  std::vector<Tensor3> stage_in;
  std::vector<InceptionCache> inception;
  std::vector<Tensor3> inception_out;
  std::vector<std::vector<std::uint32_t>> pool_argmax;
  std::vector<Tensor3> stage_out;
  std::vector<double> trunk_out;
};

Network::Network(const NetConfig& config) : config_(config) {
  if (config.batch_norm) throw std::invalid_argument("batch normalization is not supported");
  if (config.side <= 0 || config.modules < 0 || config.branch_channels <= 0 || config.features <= 0 ||
      config.classes < 2) {
    throw std::invalid_argument("network sizes must be positive with at least two classes");
  }
  std::size_t offset = 0;
  int channels = InstanceTensor::kChannels;
  int side = config.side;
  for (int m = 0; m < config.modules; ++m) {
    const InceptionShape shape{channels, config.branch_channels};
    layout_.modules.push_back(shape);
    layout_.module_offset.push_back(offset);
    offset += shape.param_count();
    channels = shape.out_channels();
    side = pool_output_size(side, kStagePool);
  }
  flat_size_ = side * side * channels;
  layout_.trunk = {flat_size_, config.features};
  layout_.trunk_offset = offset;
  offset += layout_.trunk.param_count();
  const int outs[3] = {config.classes, config.classes, pair_count(config.classes)};
  for (int h = 0; h < 3; ++h) {
    layout_.heads[h] = {config.features, outs[h]};
    layout_.head_offset[h] = offset;
    offset += layout_.heads[h].param_count();
  }
  params_.assign(offset, 0.0);
}

Network::Network(const NetConfig& config, std::uint64_t seed) : Network(config) {
  Rng rng(seed);
  auto fill = [&](std::size_t at, std::size_t count, double stddev) {
    for (std::size_t i = 0; i < count; ++i) params_[at + i] = stddev * rng.normal();
  };
  for (std::size_t m = 0; m < layout_.modules.size(); ++m) {
    std::size_t at = layout_.module_offset[m];
    for (const auto& conv : layout_.modules[m].convs()) {
      fill(at, conv.weight_count(), std::sqrt(2.0 / (conv.in * conv.k * conv.k)));
      at += conv.param_count();
    }
  }
  fill(layout_.trunk_offset, static_cast<std::size_t>(layout_.trunk.in) * layout_.trunk.out,
       std::sqrt(2.0 / layout_.trunk.in));
  for (int h = 0; h < 3; ++h) {
    fill(layout_.head_offset[h], static_cast<std::size_t>(layout_.heads[h].in) * layout_.heads[h].out,
         std::sqrt(1.0 / layout_.heads[h].in));
  }
}

Prediction Network::run(const Tensor3& input, Cache* cache) const {
  if (input.w != config_.side || input.h != config_.side || input.c != InstanceTensor::kChannels) {
    throw std::invalid_argument("network expects a " + std::to_string(config_.side) + "x" +
                                std::to_string(config_.side) + "x3 input, got " + std::to_string(input.w) + "x" +
                                std::to_string(input.h) + "x" + std::to_string(input.c));
  }
  const std::span<const double> all(params_);
  Tensor3 x = input;
  for (std::size_t m = 0; m < layout_.modules.size(); ++m) {
    InceptionCache ic;
    Tensor3 y = inception_forward(x, layout_.modules[m], all.subspan(layout_.module_offset[m], layout_.modules[m].param_count()), ic);
    std::vector<std::uint32_t> argmax;
    Tensor3 pooled = maxpool_forward(y, kStagePool, argmax);
    relu_inplace(pooled.v);
    if (cache) {
      cache->stage_in.push_back(std::move(x));
      cache->inception.push_back(std::move(ic));
      cache->inception_out.push_back(std::move(y));
      cache->pool_argmax.push_back(std::move(argmax));
      cache->stage_out.push_back(pooled);
    }
    x = std::move(pooled);
  }
  std::vector<double> trunk = dense_forward(x.v, layout_.trunk, all.subspan(layout_.trunk_offset, layout_.trunk.param_count()));
  relu_inplace(trunk);
  std::vector<double> logits[3];
  for (int h = 0; h < 3; ++h) {
    logits[h] = dense_forward(trunk, layout_.heads[h], all.subspan(layout_.head_offset[h], layout_.heads[h].param_count()));
  }
  if (cache) {
    if (layout_.modules.empty()) cache->stage_in.push_back(std::move(x));
    cache->trunk_out = trunk;
  }
  Prediction p;
  p.class_probs = softmax(logits[0]);
  for (double z : logits[1]) p.completion_probs.push_back(sigmoid(z));
  for (double z : logits[2]) p.pairwise_probs.push_back(sigmoid(z));
  return p;
}

Prediction Network::forward(const Tensor3& input) const { return run(input, nullptr); }

LossBreakdown Network::accumulate_gradient(const Tensor3& input, const TrainingLabel& label, const LossMask& mask,
                                           double scale, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw std::invalid_argument("gradient buffer size mismatch");
  Cache cache;
  const Prediction p = run(input, &cache);
  const LossBreakdown l = loss(p, label, mask);
  const int k = config_.classes;

  std::vector<double> dlogits[3] = {std::vector<double>(k, 0.0), std::vector<double>(k, 0.0),
                                    std::vector<double>(pair_count(k), 0.0)};
  if (mask.class_loss && p.class_probs[label.fastest_class] >= kProbabilityClamp) {
    for (int i = 0; i < k; ++i) dlogits[0][i] = scale * (p.class_probs[i] - (i == label.fastest_class ? 1.0 : 0.0));
  }
  if (mask.completion_loss) {
    for (int i = 0; i < k; ++i) dlogits[1][i] = scale * bce_grad(p.completion_probs[i], label.completion[i]) / k;
  }
  if (mask.pairwise_loss) {
    int valid = 0;
    for (bool v : label.pairwise_valid) valid += v;
    for (std::size_t i = 0; i < dlogits[2].size() && valid > 0; ++i) {
      if (label.pairwise_valid[i]) dlogits[2][i] = scale * bce_grad(p.pairwise_probs[i], label.pairwise[i]) / valid;
    }
  }

  const std::span<const double> all(params_);
  std::vector<double> dtrunk(config_.features, 0.0);
  for (int h = 0; h < 3; ++h) {
    const auto n = layout_.heads[h].param_count();
    const auto d = dense_backward(cache.trunk_out, dlogits[h], layout_.heads[h], all.subspan(layout_.head_offset[h], n),
                                  grad.subspan(layout_.head_offset[h], n));
    for (int i = 0; i < config_.features; ++i) dtrunk[i] += d[i];
  }
  relu_backward_inplace(cache.trunk_out, dtrunk);
  const Tensor3& flat = layout_.modules.empty() ? cache.stage_in.front() : cache.stage_out.back();
  const auto tn = layout_.trunk.param_count();
  Tensor3 d = flat;
  d.v = dense_backward(flat.v, dtrunk, layout_.trunk, all.subspan(layout_.trunk_offset, tn),
                       grad.subspan(layout_.trunk_offset, tn));
  for (std::size_t m = layout_.modules.size(); m-- > 0;) {
    relu_backward_inplace(cache.stage_out[m].v, d.v);
    const Tensor3 dy = maxpool_backward(cache.inception_out[m], d, cache.pool_argmax[m]);
    const auto n = layout_.modules[m].param_count();
    d = inception_backward(cache.stage_in[m], dy, layout_.modules[m], all.subspan(layout_.module_offset[m], n),
                           cache.inception[m], grad.subspan(layout_.module_offset[m], n));
  }
  return l;
}

void Network::write(std::ostream& out) const {
  out.write(kMagic, sizeof kMagic);
  put_bytes(out, kVersion, 4);
  for (int v : {config_.side, config_.modules, config_.branch_channels, config_.features, config_.classes,
                config_.batch_norm ? 1 : 0}) {
    put_bytes(out, static_cast<std::uint32_t>(v), 4);
  }
  put_bytes(out, params_.size(), 8);
  for (double v : params_) put_bytes(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
  if (!out) throw IoError("failed writing checkpoint");
}

Network Network::read(std::istream& in) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + sizeof magic, kMagic)) {
    throw ParseError("not a network checkpoint");
  }
  const auto version = get_bytes(in, 4);
  if (version != kVersion) throw ParseError("unsupported checkpoint version " + std::to_string(version));
  NetConfig config;
  config.side = static_cast<int>(get_bytes(in, 4));
  config.modules = static_cast<int>(get_bytes(in, 4));
  config.branch_channels = static_cast<int>(get_bytes(in, 4));
  config.features = static_cast<int>(get_bytes(in, 4));
  config.classes = static_cast<int>(get_bytes(in, 4));
  config.batch_norm = get_bytes(in, 4) != 0;
  Network net(config);
  const auto count = get_bytes(in, 8);
  if (count != net.param_count()) throw ParseError("checkpoint parameter count does not match its config");
  for (double& v : net.params_) v = std::bit_cast<float>(static_cast<std::uint32_t>(get_bytes(in, 4)));
  return net;
}

void Network::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write(out);
}

Network Network::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  return read(in);
}

BatchGradient backward(const Network& net, std::span<const LabeledSample* const> batch, const LossMask& mask) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  BatchGradient out;
  out.grad.assign(net.param_count(), 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const LabeledSample* s : batch) {
    const LossBreakdown l = net.accumulate_gradient(s->input, s->label, mask, scale, out.grad);
    out.loss.l_class += l.l_class * scale;
    out.loss.l_comp += l.l_comp * scale;
    out.loss.l_pair += l.l_pair * scale;
  }
  out.loss.l_tot = out.loss.l_class + out.loss.l_comp + out.loss.l_pair;
  return out;
}

BatchGradient backward(const Network& net, std::span<const LabeledSample> batch, const LossMask& mask) {
  std::vector<const LabeledSample*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s);
  return backward(net, std::span<const LabeledSample* const>(ptrs), mask);
}

}  // namespace mapfast
