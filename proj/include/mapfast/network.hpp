#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mapfast/encoding.hpp"
#include "mapfast/label.hpp"
#include "mapfast/net_layers.hpp"

namespace mapfast {

struct NetConfig {
  int side = 64;
  int modules = 2;
  int branch_channels = 4;
  int features = 32;
  int classes = 3;
  // Accepted in configs for completeness; enabling it is rejected.
  bool batch_norm = false;

  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

struct Prediction {
  std::vector<double> class_probs;
  std::vector<double> completion_probs;
  std::vector<double> pairwise_probs;
};

struct LossMask {
  bool class_loss = true;
  bool completion_loss = true;
  bool pairwise_loss = true;

  bool any() const { return class_loss || completion_loss || pairwise_loss; }
};

struct LossBreakdown {
  double l_class = 0.0;
  double l_comp = 0.0;
  double l_pair = 0.0;
  double l_tot = 0.0;
};

inline constexpr double kProbabilityClamp = 1e-12;

// Cross-entropies with each logged probability clamped below at 1e-12. Pairwise
// bits flagged invalid are left out of the mean; masked terms are 0.
LossBreakdown loss(const Prediction& prediction, const TrainingLabel& label, const LossMask& mask = {});

enum class SelectionMode { ClassArgmax, PairwiseRank };

// Argmax of class_probs, or the Copeland winner over pairwise_probs
// thresholded at 0.5. Ties go to the lower index.
int select_algorithm(const Prediction& prediction, SelectionMode mode);

struct LabeledSample {
  Tensor3 input;
  TrainingLabel label;
};

// Channel-last float tensor to the network's channel-major layout.
Tensor3 to_network_input(const InstanceTensor& tensor);

class Network {
 public:
  // Throws std::invalid_argument for unsupported or inconsistent sizes.
  explicit Network(const NetConfig& config);
  // He-initialized weights, zero biases.
  Network(const NetConfig& config, std::uint64_t seed);

  const NetConfig& config() const { return config_; }
  std::size_t param_count() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // Number of features after the last inception stage.
  int flat_size() const { return flat_size_; }

  Prediction forward(const Tensor3& input) const;
  Prediction forward(const InstanceTensor& tensor) const { return forward(to_network_input(tensor)); }

  // Adds scale * d(loss)/d(params) for one sample to grad and returns the
  // sample's loss.
  LossBreakdown accumulate_gradient(const Tensor3& input, const TrainingLabel& label, const LossMask& mask,
                                    double scale, std::span<double> grad) const;

  // Binary checkpoint: magic, version, config echo, parameter count, then
  // little-endian float32 parameters.
  void write(std::ostream& out) const;
  static Network read(std::istream& in);
  void save(const std::string& path) const;
  static Network load(const std::string& path);

 private:
  struct Layout {
    std::vector<InceptionShape> modules;
    std::vector<std::size_t> module_offset;
    DenseShape trunk;
    std::size_t trunk_offset = 0;
    DenseShape heads[3];
    std::size_t head_offset[3] = {0, 0, 0};
  };

  struct Cache;
  Prediction run(const Tensor3& input, Cache* cache) const;

  NetConfig config_;
  Layout layout_;
  int flat_size_ = 0;
  std::vector<double> params_;
};

// Mean loss and mean gradient over a batch.
struct BatchGradient {
  std::vector<double> grad;
  LossBreakdown loss;
};
BatchGradient backward(const Network& net, std::span<const LabeledSample> batch, const LossMask& mask = {});
BatchGradient backward(const Network& net, std::span<const LabeledSample* const> batch, const LossMask& mask = {});

}  // namespace mapfast
