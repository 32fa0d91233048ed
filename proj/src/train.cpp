#include "mapfast/train.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "mapfast/rng.hpp"

namespace mapfast {

void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& state, const AdamConfig& config) {
  if (grads.size() != params.size()) throw std::invalid_argument("gradient size does not match parameters");
  for (double g : grads) {
    if (!std::isfinite(g)) throw std::domain_error("non-finite gradient; training diverged");
  }
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument("optimizer state size does not match parameters");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grads[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
  }
}

void TrainingConfig::validate() const {
  if (!mask.any()) throw std::invalid_argument("at least one loss must be enabled");
  if (!mask.class_loss && !mask.pairwise_loss) {
    throw std::invalid_argument("with the class loss disabled the pairwise loss is required for selection");
  }
  if (epochs < 0 || batch_size <= 0 || !(learning_rate > 0.0)) {
    throw std::invalid_argument("epochs must be >= 0, batch size and learning rate positive");
  }
}

std::vector<EpochLoss> train_network(Network& net, std::span<const LabeledSample> dataset,
                                     const TrainingConfig& config) {
  config.validate();
  if (dataset.empty()) throw std::invalid_argument("training set is empty");
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  AdamState state;
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpochLoss> trace;
  std::vector<const LabeledSample*> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    EpochLoss record{epoch, {}};
    for (std::size_t first = 0; first < order.size(); first += config.batch_size) {
      const std::size_t last = std::min(order.size(), first + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = first; i < last; ++i) batch.push_back(&dataset[order[i]]);
      BatchGradient g = backward(net, std::span<const LabeledSample* const>(batch), config.mask);
      if (!std::isfinite(g.loss.l_tot)) throw std::domain_error("non-finite loss; training diverged");
      adam_step(net.params(), g.grad, state, config.adam());
      const double share = static_cast<double>(last - first) / static_cast<double>(order.size());
      record.mean.l_class += g.loss.l_class * share;
      record.mean.l_comp += g.loss.l_comp * share;
      record.mean.l_pair += g.loss.l_pair * share;
    }
    record.mean.l_tot = record.mean.l_class + record.mean.l_comp + record.mean.l_pair;
    trace.push_back(record);
  }
  return trace;
}

TrainResult train(std::span<const LabeledSample> dataset, const NetConfig& net_config, const TrainingConfig& config) {
  config.validate();
  TrainResult result{Network(net_config, config.seed), {}};
  result.trace = train_network(result.network, dataset, config);
  return result;
}

void write_loss_trace_csv(std::ostream& out, const std::vector<EpochLoss>& trace) {
  out << "epoch,l_class,l_comp,l_pair,l_tot\n";
  out << std::setprecision(17);
  for (const auto& e : trace) {
    out << e.epoch << ',' << e.mean.l_class << ',' << e.mean.l_comp << ',' << e.mean.l_pair << ',' << e.mean.l_tot
        << '\n';
  }
}

SelectionMode selection_mode_for(const LossMask& mask) {
  return mask.class_loss ? SelectionMode::ClassArgmax : SelectionMode::PairwiseRank;
}

}  // namespace mapfast
