#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gradcheck.hpp"
#include "mapfast/network.hpp"
#include "mapfast/train.hpp"

using namespace mapfast;
using namespace mapfast::testing;

namespace {

Prediction make_prediction(std::vector<double> c, std::vector<double> comp, std::vector<double> pair) {
  return {std::move(c), std::move(comp), std::move(pair)};
}

Tensor3 binary_input(Rng& rng, int side) {
  Tensor3 t(side, side, 3);
  for (double& v : t.v) v = rng.below(2) ? 1.0 : 0.0;
  return t;
}

LabeledSample random_sample(Rng& rng, int side) {
  LabeledSample s{binary_input(rng, side), {}};
  s.label.fastest_class = static_cast<int>(rng.below(3));
  s.label.completion = {false, false, false};
  s.label.completion[s.label.fastest_class] = true;
  s.label.pairwise = {rng.below(2) == 1, rng.below(2) == 1, rng.below(2) == 1};
  s.label.pairwise_valid = {true, rng.below(2) == 1, true};
  return s;
}

}  // namespace

TEST_CASE("every layer's backward matches central differences") {
  for (const auto& c : check_all_layers(11)) {
    INFO(c.layer);
    CHECK(c.params_error <= kFdTolerance);
    CHECK(c.input_error <= kFdTolerance);
  }
}

TEST_CASE("inception keeps spatial size and concatenates branches") {
  Rng rng(1);
  const InceptionShape shape{3, 4};
  InceptionCache cache;
  Tensor3 in = random_tensor(rng, 7, 5, 3);
  std::vector<double> params(shape.param_count(), 0.1);
  Tensor3 out = inception_forward(in, shape, params, cache);
  CHECK(out.w == 7);
  CHECK(out.h == 5);
  CHECK(out.c == 16);
}

TEST_CASE("pool output sizes") {
  CHECK(pool_output_size(64, {3, 3, 0}) == 21);
  CHECK(pool_output_size(21, {3, 3, 0}) == 7);
  CHECK(pool_output_size(9, {3, 1, 1}) == 9);
  CHECK_THROWS_AS(pool_output_size(2, {3, 3, 0}), std::invalid_argument);
}

TEST_CASE("forward examples") {
  Rng rng(5);
  Network net(tiny_net_config(), 3);
  const Tensor3 input = binary_input(rng, 9);
  const Prediction p = net.forward(input);
  double sum = 0.0;
  for (double v : p.class_probs) sum += v;
  CHECK(std::abs(sum - 1.0) <= 1e-9);
  for (double v : p.completion_probs) CHECK((v >= 0.0 && v <= 1.0));
  CHECK(p.pairwise_probs.size() == 3);

  const Prediction again = net.forward(input);
  CHECK(again.class_probs == p.class_probs);
  CHECK(again.pairwise_probs == p.pairwise_probs);

  Network zero(tiny_net_config());
  const Prediction u = zero.forward(input);
  for (double v : u.class_probs) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  CHECK_THROWS_AS(net.forward(Tensor3(8, 8, 3)), std::invalid_argument);
  NetConfig bn = tiny_net_config();
  bn.batch_norm = true;
  CHECK_THROWS_AS(Network{bn}, std::invalid_argument);
}

TEST_CASE("default network shape") {
  Network net(NetConfig{}, 1);
  CHECK(net.flat_size() == 7 * 7 * 16);
}

TEST_CASE("class head is invariant to a shared logit shift") {
  Rng rng(9);
  Network net(tiny_net_config(), 4);
  const Tensor3 input = binary_input(rng, 9);
  const Prediction before = net.forward(input);
  // Class head biases are the three parameters right before the completion head.
  const std::size_t k = 3, f = 5;
  const std::size_t class_bias = net.param_count() - (k * f + k) - (3 * f + 3) - k;
  for (std::size_t i = 0; i < k; ++i) net.params()[class_bias + i] += 7.5;
  const Prediction after = net.forward(input);
  for (std::size_t i = 0; i < k; ++i) CHECK(after.class_probs[i] == doctest::Approx(before.class_probs[i]).epsilon(1e-12));
  CHECK(select_algorithm(after, SelectionMode::ClassArgmax) == select_algorithm(before, SelectionMode::ClassArgmax));
  CHECK(after.completion_probs == before.completion_probs);
}

TEST_CASE("loss examples") {
  const TrainingLabel label = sample_label();
  const Prediction uniform = make_prediction({1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.5, 0.5, 0.5}, {0.5, 0.5, 0.5});
  const LossBreakdown l = loss(uniform, label);
  CHECK(l.l_class == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(l.l_comp == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(l.l_pair == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(l.l_tot == l.l_class + l.l_comp + l.l_pair);

  const Prediction perfect = make_prediction({0, 1, 0}, {1, 1, 0}, {0, 1, 1});
  CHECK(loss(perfect, label).l_tot == 0.0);

  // Probability zero on the truth is clamped, not infinite.
  const Prediction wrong = make_prediction({1, 0, 0}, {1, 1, 0}, {0, 1, 1});
  CHECK(loss(wrong, label).l_class == doctest::Approx(-std::log(1e-12)));

  TrainingLabel partial = label;
  partial.pairwise_valid = {false, false, false};
  CHECK(loss(uniform, partial).l_pair == 0.0);
  partial.pairwise_valid = {true, false, false};
  const Prediction skewed = make_prediction({1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.5, 0.5, 0.5}, {0.2, 0.9, 0.9});
  CHECK(loss(skewed, partial).l_pair == doctest::Approx(-std::log(0.8)));

  const LossBreakdown masked = loss(uniform, label, LossMask{true, false, false});
  CHECK(masked.l_comp == 0.0);
  CHECK(masked.l_pair == 0.0);
  CHECK(masked.l_tot == masked.l_class);
}

TEST_CASE("loss additivity on random predictions") {
  Rng rng(21);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> c = {rng.uniform(), rng.uniform(), rng.uniform()};
    const double s = c[0] + c[1] + c[2];
    for (double& v : c) v /= s;
    const Prediction p = make_prediction(c, {rng.uniform(), rng.uniform(), rng.uniform()},
                                         {rng.uniform(), rng.uniform(), rng.uniform()});
    TrainingLabel label = sample_label();
    label.fastest_class = static_cast<int>(rng.below(3));
    const LossBreakdown l = loss(p, label);
    CHECK(l.l_tot == l.l_class + l.l_comp + l.l_pair);
    CHECK(l.l_class >= 0.0);
    CHECK(l.l_comp >= 0.0);
    CHECK(l.l_pair >= 0.0);
  }
}

TEST_CASE("masked heads get zero gradient") {
  Rng rng(2);
  Network net(tiny_net_config(), 8);
  const Tensor3 input = binary_input(rng, 9);
  std::vector<double> grad(net.param_count(), 0.0);
  net.accumulate_gradient(input, sample_label(), LossMask{true, false, false}, 1.0, grad);
  // Completion and pairwise heads are the last 18 + 18 parameters.
  const std::size_t heads = 2 * (3 * 5 + 3);
  for (std::size_t i = net.param_count() - heads; i < net.param_count(); ++i) CHECK(grad[i] == 0.0);
  double class_head = 0.0;
  for (std::size_t i = net.param_count() - heads - 18; i < net.param_count() - heads; ++i) class_head += std::abs(grad[i]);
  CHECK(class_head > 0.0);
}

TEST_CASE("gradient vanishes at the loss optimum") {
  Network net(tiny_net_config());
  auto& p = net.params();
  const std::size_t k = 3, f = 5;
  const std::size_t heads = 3 * (k * f + k);
  const std::size_t trunk_bias = net.param_count() - heads - f;
  for (std::size_t i = 0; i < f; ++i) p[trunk_bias + i] = 1.0;
  const TrainingLabel label = sample_label();
  const std::size_t class_bias = net.param_count() - heads + k * f;
  const std::size_t comp_bias = class_bias + k + k * f;
  const std::size_t pair_bias = comp_bias + k + k * f;
  for (std::size_t i = 0; i < k; ++i) {
    p[class_bias + i] = static_cast<int>(i) == label.fastest_class ? 40.0 : -40.0;
    p[comp_bias + i] = label.completion[i] ? 40.0 : -40.0;
    p[pair_bias + i] = label.pairwise[i] ? 40.0 : -40.0;
  }
  Rng rng(4);
  std::vector<double> grad(net.param_count(), 0.0);
  const LossBreakdown l = net.accumulate_gradient(binary_input(rng, 9), label, LossMask{}, 1.0, grad);
  CHECK(l.l_tot < 1e-9);
  double worst = 0.0;
  for (double g : grad) worst = std::max(worst, std::abs(g));
  CHECK(worst <= 1e-6);
}

TEST_CASE("adam_step examples") {
  AdamConfig config{0.1, 0.9, 0.999, 1e-8};
  std::vector<double> x = {1.0};
  AdamState state;
  adam_step(x, std::vector<double>{2.0 * x[0]}, state, config);
  CHECK(x[0] < 1.0);
  CHECK(x[0] == doctest::Approx(0.9));  // first step moves by lr
  CHECK(state.step == 1);

  std::vector<double> y = {0.3, -0.2};
  AdamState s2;
  adam_step(y, std::vector<double>{0.0, 0.0}, s2, config);
  CHECK(y == std::vector<double>{0.3, -0.2});
  CHECK(s2.step == 1);

  std::vector<double> z = {1.0};
  AdamState s3;
  CHECK_THROWS_AS(adam_step(z, std::vector<double>{NAN}, s3, config), std::domain_error);
  CHECK(z[0] == 1.0);
  CHECK(s3.step == 0);
}

TEST_CASE("training config validation") {
  TrainingConfig c;
  c.mask = {false, false, false};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.mask = {false, true, false};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.mask = {false, false, true};
  CHECK_NOTHROW(c.validate());
  CHECK(selection_mode_for(c.mask) == SelectionMode::PairwiseRank);
  CHECK(selection_mode_for(LossMask{}) == SelectionMode::ClassArgmax);
}

TEST_CASE("training memorizes a small set and is deterministic") {
  Rng rng(17);
  std::vector<LabeledSample> data;
  for (int i = 0; i < 10; ++i) data.push_back(random_sample(rng, 9));
  TrainingConfig config;
  config.epochs = 60;
  config.learning_rate = 0.01;
  config.batch_size = 5;
  config.seed = 3;
  const TrainResult a = train(data, tiny_net_config(), config);
  REQUIRE(a.trace.size() == 60);
  CHECK(a.trace.back().mean.l_tot < a.trace.front().mean.l_tot);
  int correct = 0;
  for (const auto& s : data) {
    correct += select_algorithm(a.network.forward(s.input), SelectionMode::ClassArgmax) == s.label.fastest_class;
  }
  CHECK(correct == 10);

  const TrainResult b = train(data, tiny_net_config(), config);
  CHECK(a.network.params() == b.network.params());
  CHECK_THROWS_AS(train(std::span<const LabeledSample>(), tiny_net_config(), config), std::invalid_argument);
}

TEST_CASE("class-only training leaves other heads untouched") {
  Rng rng(23);
  std::vector<LabeledSample> data;
  for (int i = 0; i < 6; ++i) data.push_back(random_sample(rng, 9));
  TrainingConfig config;
  config.epochs = 3;
  config.mask = {true, false, false};
  const TrainResult r = train(data, tiny_net_config(), config);
  const Network init(tiny_net_config(), config.seed);
  const std::size_t heads = 2 * (3 * 5 + 3);
  for (std::size_t i = init.param_count() - heads; i < init.param_count(); ++i) {
    CHECK(r.network.params()[i] == init.params()[i]);
  }
  CHECK(r.trace.back().mean.l_comp == 0.0);
}

TEST_CASE("select_algorithm examples") {
  CHECK(select_algorithm(make_prediction({0.2, 0.7, 0.1}, {0, 0, 0}, {0.5, 0.5, 0.5}), SelectionMode::ClassArgmax) == 1);
  CHECK(select_algorithm(make_prediction({0.4, 0.4, 0.2}, {0, 0, 0}, {0.5, 0.5, 0.5}), SelectionMode::ClassArgmax) == 0);
  CHECK(select_algorithm(make_prediction({1, 0, 0}, {0, 0, 0}, {0.5, 0.5, 0.5}), SelectionMode::PairwiseRank) == 0);
  // Pair order (0,1), (0,2), (1,2): 2 beats 0 and 1.
  CHECK(select_algorithm(make_prediction({1, 0, 0}, {0, 0, 0}, {0.9, 0.1, 0.2}), SelectionMode::PairwiseRank) == 2);
  CHECK(select_algorithm(make_prediction({1, 0, 0}, {0, 0, 0}, {0.3, 0.6, 0.8}), SelectionMode::PairwiseRank) == 1);
}

TEST_CASE("checkpoint round trip") {
  Network net(tiny_net_config(), 12);
  std::stringstream buf;
  net.write(buf);
  Network back = Network::read(buf);
  CHECK(back.config() == net.config());
  REQUIRE(back.param_count() == net.param_count());
  for (std::size_t i = 0; i < net.param_count(); ++i) {
    CHECK(back.params()[i] == static_cast<double>(static_cast<float>(net.params()[i])));
  }
  std::stringstream again;
  back.write(again);
  std::stringstream first;
  net.write(first);
  CHECK(again.str() == first.str());

  std::stringstream junk("not a checkpoint");
  CHECK_THROWS_AS(Network::read(junk), ParseError);
  std::stringstream truncated(first.str().substr(0, 60));
  CHECK_THROWS_AS(Network::read(truncated), ParseError);
}

TEST_CASE("loss trace CSV") {
  std::ostringstream out;
  write_loss_trace_csv(out, {{1, {1.0, 0.5, 0.25, 1.75}}});
  CHECK(out.str() == "epoch,l_class,l_comp,l_pair,l_tot\n1,1,0.5,0.25,1.75\n");
}
