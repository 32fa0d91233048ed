#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mapfast/network.hpp"

namespace mapfast {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
};

// Bias-corrected Adam update. Throws std::domain_error on a non-finite
// gradient, leaving params and state untouched.
void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& state, const AdamConfig& config);

struct TrainingConfig {
  int epochs = 5;
  double learning_rate = 0.001;
  std::uint64_t seed = 0;
  int batch_size = 16;
  LossMask mask;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  // Throws std::invalid_argument: no loss enabled, or neither the class nor
  // the pairwise head left to select with.
  void validate() const;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

struct EpochLoss {
  int epoch = 0;
  LossBreakdown mean;
};

struct TrainResult {
  Network network;
  std::vector<EpochLoss> trace;
};

// Deterministic in config.seed: initial weights and the per-epoch shuffle
// both derive from it.
TrainResult train(std::span<const LabeledSample> dataset, const NetConfig& net_config, const TrainingConfig& config);

// Continues training an existing network; returns the per-epoch trace.
std::vector<EpochLoss> train_network(Network& net, std::span<const LabeledSample> dataset,
                                     const TrainingConfig& config);

// Columns: epoch, l_class, l_comp, l_pair, l_tot.
void write_loss_trace_csv(std::ostream& out, const std::vector<EpochLoss>& trace);

// Selection mode implied by the mask: class argmax unless the class head
// is disabled.
SelectionMode selection_mode_for(const LossMask& mask);

}  // namespace mapfast
