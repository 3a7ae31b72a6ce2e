// Copyright 2026 The NSNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>

#include "nsnn/errors.h"
#include "nsnn/fixtures.h"
#include "nsnn/network.h"

using namespace nsnn;

namespace {

double phi(double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); }

// n inputs -> n neurons with weight w on the diagonal -> identity readout.
Network diagonal_net(std::size_t n, double w, const NoiseModel& noise) {
  Network net;
  LayerSpec layer;
  layer.weights = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) layer.weights(i, i) = w;
  layer.bias.assign(n, 0.0);
  layer.noise = noise;
  net.layers.push_back(layer);
  net.readout.weights = Matrix::identity(n);
  net.readout.bias.assign(n, 0.0);
  return net;
}

Matrix ones(std::size_t steps, std::size_t dim) { return Matrix(steps, dim, 1.0); }

}  // namespace

TEST_CASE("a dead network emits no spikes and returns the readout bias") {
  Network net = diagonal_net(3, 0.0, NoiseModel::none());
  net.readout.bias = Vector{0.1, -0.2, 0.3};
  RngStream rng(0, 0);
  const Trace tr = forward(net, ones(5, 3), Mode::kDeterministic, rng);
  CHECK(tr.output_counts() == Vector{0, 0, 0});
  for (std::size_t t = 0; t < 5; ++t) {
    CHECK(tr.logits(t, 0) == 0.1);
    CHECK(tr.logits(t, 2) == 0.3);
  }
  CHECK(rng.counter() == 0);
}

TEST_CASE("weight 2 with unit input spikes at every step") {
  const Network net = diagonal_net(1, 2.0, NoiseModel::none());
  RngStream rng(0, 0);
  const Trace tr = forward(net, ones(6, 1), Mode::kDeterministic, rng);
  CHECK(tr.output_counts()[0] == 6.0);
  for (std::size_t t = 0; t < 6; ++t) {
    CHECK(tr.at(t, 0).u_pre[0] == 2.0);
    CHECK(tr.at(t, 0).carried[0] == 0.0);
  }
}

TEST_CASE("membrane integrates below threshold then fires") {
  // Drive 0.6: u_pre = 0.6, 0.9, 1.05 -> spike, reset, 0.6 ...
  const Network net = diagonal_net(1, 0.6, NoiseModel::none());
  RngStream rng(0, 0);
  const Trace tr = forward(net, ones(4, 1), Mode::kDeterministic, rng);
  CHECK(tr.at(0, 0).u_pre[0] == doctest::Approx(0.6));
  CHECK(tr.at(1, 0).u_pre[0] == doctest::Approx(0.9));
  CHECK(tr.at(2, 0).u_pre[0] == doctest::Approx(1.05));
  CHECK(tr.at(2, 0).spikes[0] == 1);
  CHECK(tr.at(3, 0).u_pre[0] == doctest::Approx(0.6));
  CHECK(tr.at(3, 0).spikes[0] == 0);
}

TEST_CASE("sample mode fires at the noise cdf rate") {
  const Network net = diagonal_net(1, 2.0, NoiseModel::gaussian(0.3));
  const Matrix x = ones(1, 1);
  RngStream rng(17, 0);
  const int n = 100000;
  int fired = 0;
  for (int i = 0; i < n; ++i) fired += forward(net, x, Mode::kSample, rng).at(0, 0).spikes[0];
  const double p = phi(1.0 / 0.3);
  CHECK(std::abs(static_cast<double>(fired) / n - p) < 4.0 * std::sqrt(p * (1 - p) / n) + 1e-5);
}

TEST_CASE("enumerate_joint for a single neuron at threshold") {
  const Network net = diagonal_net(1, 1.0, NoiseModel::gaussian(0.3));
  const JointDistribution d = enumerate_joint(net, ones(1, 1));
  REQUIRE(d.entries.size() == 2);
  CHECK(d.entries[0].probability == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d.entries[1].probability == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("two independent neurons give a product distribution") {
  const Network net = diagonal_net(2, 1.0, NoiseModel::gaussian(0.3));
  const JointDistribution d = enumerate_joint(net, ones(1, 2));
  REQUIRE(d.entries.size() == 4);
  for (const auto& e : d.entries) CHECK(e.probability == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("one neuron over two steps matches the analytic chain") {
  // t=0: u_pre = 0.8, P1 = Phi(-0.2/s). No spike carries 0.8 -> u_pre = 1.2.
  const double s = 0.3;
  const Network net = diagonal_net(1, 0.8, NoiseModel::gaussian(s));
  const JointDistribution d = enumerate_joint(net, ones(2, 1));
  const double p0 = phi(-0.2 / s);
  const double p_after_spike = phi(-0.2 / s);
  const double p_after_silence = phi(0.2 / s);
  REQUIRE(d.entries.size() == 4);
  for (const auto& e : d.entries) {
    const double a = e.config[0] ? p0 : 1 - p0;
    const double q = e.config[0] ? p_after_spike : p_after_silence;
    const double b = e.config[1] ? q : 1 - q;
    CHECK(e.probability == doctest::Approx(a * b).epsilon(1e-13));
  }

  RngStream rng(3, 0);
  const int n = 200000;
  int both = 0;
  for (int i = 0; i < n; ++i) {
    const Trace tr = forward(net, ones(2, 1), Mode::kSample, rng);
    both += tr.at(0, 0).spikes[0] && tr.at(1, 0).spikes[0];
  }
  const double p = p0 * p_after_spike;
  CHECK(std::abs(static_cast<double>(both) / n - p) < 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("tiny net joint sums to one and its marginals match sampling") {
  const Network net = tiny_222();
  const Matrix x = tiny_222_inputs(4);
  const JointDistribution d = enumerate_joint(net, x);
  CHECK(d.num_variables == 8);
  CHECK(d.entries.size() == 256);
  CHECK(std::abs(d.total_probability() - 1.0) < 1e-12);

  const Vector m = d.marginals();
  RngStream rng(4, 0);
  const int n = 50000;
  Vector counts(8, 0.0);
  for (int i = 0; i < n; ++i) {
    const Trace tr = forward(net, x, Mode::kSample, rng);
    for (std::size_t t = 0; t < 4; ++t) {
      for (std::size_t k = 0; k < 2; ++k) {
        counts[joint_variable_index(net, t, 0, k)] += tr.at(t, 0).spikes[k];
      }
    }
  }
  for (std::size_t v = 0; v < 8; ++v) {
    const double se = std::sqrt(m[v] * (1 - m[v]) / n) + 1e-9;
    CHECK(std::abs(counts[v] / n - m[v]) < 4.5 * se);
  }
}

TEST_CASE("enumeration guard") {
  const Network net = tiny_222();
  CHECK_NOTHROW(enumerate_joint(net, tiny_222_inputs(12)));
  CHECK_THROWS_AS(enumerate_joint(net, tiny_222_inputs(13)), CapacityError);
  CHECK_THROWS_AS(expected_loss(net, tiny_222_inputs(13), Objective::cross_entropy(0)),
                  CapacityError);
}

TEST_CASE("expected_loss of a deterministic net equals one forward") {
  const Network net = tiny_222(NoiseModel::none());
  const Matrix x = tiny_222_inputs(5);
  RngStream rng(0, 0);
  const Objective obj = Objective::cross_entropy(1);
  const Trace tr = forward(net, x, Mode::kDeterministic, rng, obj);
  CHECK(expected_loss(net, x, obj) == doctest::Approx(tr.loss).epsilon(1e-14));
}

TEST_CASE("expected spike output of a neuron at threshold is one half") {
  const Network net = diagonal_net(1, 1.0, NoiseModel::gaussian(0.3));
  CHECK(expected_loss(net, ones(1, 1), Objective::linear(Vector{1.0})) ==
        doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("expected_loss of the tiny net agrees with Monte Carlo") {
  const Network net = tiny_222();
  const Matrix x = tiny_222_inputs(3);
  const Objective obj = Objective::cross_entropy(0);
  const double exact = expected_loss(net, x, obj);
  RngStream rng(21, 0);
  const int n = 100000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double l = forward(net, x, Mode::kSample, rng, obj).loss;
    s += l;
    s2 += l * l;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - exact) < 4.0 * se);
}

TEST_CASE("forward replays from the same stream and via its tape") {
  const Network net = tiny_222();
  const Matrix x = tiny_222_inputs(8);
  RngStream a(5, 1), b(5, 1), c(5, 1);
  const Trace ta = forward(net, x, Mode::kSample, a, Objective::cross_entropy(0), 0.1);
  const Trace tb = forward(net, x, Mode::kSample, b, Objective::cross_entropy(0), 0.1);
  const NoiseTape tape = draw_noise_tape(net, 8, Mode::kSample, c, 0.1);
  const Trace tc = forward_with_tape(net, x, tape, Objective::cross_entropy(0));
  CHECK(ta.logits == tb.logits);
  CHECK(ta.logits == tc.logits);
  CHECK(ta.loss == tc.loss);
  for (std::size_t t = 0; t < 8; ++t) CHECK(ta.at(t, 0).spikes == tc.at(t, 0).spikes);
}

TEST_CASE("a spike override flips exactly the targeted state") {
  const Network net = tiny_222();
  const Matrix x = tiny_222_inputs(3);
  RngStream rng(6, 0);
  const NoiseTape tape = draw_noise_tape(net, 3, Mode::kSample, rng);
  const Trace base = forward_with_tape(net, x, tape);
  const SpikeOverride ov{2, 0, 1};
  const Trace flipped = forward_with_tape(net, x, tape, Objective::none(), &ov);
  CHECK(flipped.at(2, 0).spikes[1] != base.at(2, 0).spikes[1]);
  CHECK(flipped.at(2, 0).spikes[0] == base.at(2, 0).spikes[0]);
  for (std::size_t t = 0; t < 2; ++t) CHECK(flipped.at(t, 0).spikes == base.at(t, 0).spikes);
}

TEST_CASE("flip probability one complements every state") {
  const Network net = diagonal_net(2, 0.0, NoiseModel::none());
  RngStream rng(7, 0);
  const Trace tr = forward(net, ones(4, 2), Mode::kDeterministic, rng, Objective::none(), 1.0);
  CHECK(tr.output_counts() == Vector{4, 4});
  CHECK_THROWS_AS(forward(net, ones(4, 2), Mode::kDeterministic, rng, Objective::none(), 1.5),
                  ParameterError);
}

TEST_CASE("mean-logits loss equals per-step loss at T = 1") {
  Network net = tiny_222();
  const Matrix x = tiny_222_inputs(1);
  const Objective obj = Objective::cross_entropy(1);
  const double a = expected_loss(net, x, obj);
  net.loss_mode = LossMode::kMeanLogits;
  CHECK(expected_loss(net, x, obj) == doctest::Approx(a).epsilon(1e-15));
}

TEST_CASE("sequence_loss gradients") {
  const Matrix logits = Matrix::from_rows({{0.2, -0.1}, {1.0, 0.5}, {0.0, 0.0}});
  const Objective lin = Objective::linear(Vector{2.0, -1.0}, 0.5);
  const SequenceLoss per = sequence_loss(LossMode::kPerStepMean, logits, lin);
  CHECK(per.loss == doctest::Approx((1.0 + 2.0 + 0.5) / 3.0 + 0.0));
  CHECK(per.d_logits(1, 0) == doctest::Approx(2.0 / 3.0));
  const SequenceLoss mean = sequence_loss(LossMode::kMeanLogits, logits, lin);
  CHECK(mean.loss == doctest::Approx(per.loss));
  CHECK(mean.d_logits(0, 1) == doctest::Approx(-1.0 / 3.0));
}

TEST_CASE("shape validation") {
  Network net = tiny_222();
  CHECK_THROWS_AS(enumerate_joint(net, Matrix(2, 3)), ShapeError);
  net.readout.weights = Matrix(2, 3);
  CHECK_THROWS_AS(net.validate(), ShapeError);
  const std::size_t bad[] = {3, 4};
  RngStream rng(0, 0);
  CHECK_THROWS_AS(make_network(bad, NoiseModel::gaussian(0.3), rng), ShapeError);
}

TEST_CASE("make_network scales weights by fan-in") {
  const std::size_t dims[] = {400, 300, 10};
  RngStream rng(9, 0);
  const Network net = make_network(dims, NoiseModel::gaussian(0.3), rng, 2.0);
  double s2 = 0;
  for (double v : net.layers[0].weights.data()) s2 += v * v;
  CHECK(std::sqrt(s2 / net.layers[0].weights.size()) == doctest::Approx(0.1).epsilon(0.01));
  CHECK(net.spiking_units() == 300);
}
