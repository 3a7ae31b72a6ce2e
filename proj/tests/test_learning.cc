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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nsnn/errors.h"
#include "nsnn/fixtures.h"
#include "nsnn/learning.h"

using namespace nsnn;

namespace {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double phi(double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); }

// One input, one neuron, one output.
Network scalar_net(double w, double b, double w_out, const NoiseModel& noise) {
  Network net;
  LayerSpec layer;
  layer.weights = Matrix(1, 1, w);
  layer.bias = Vector{b};
  layer.noise = noise;
  net.layers.push_back(layer);
  net.readout.weights = Matrix(1, 1, w_out);
  net.readout.bias = Vector{0.0};
  return net;
}

// max |mean - exact| / se over components; components with se == 0 must
// agree to `abs_tol`.
double max_bias_ratio(const GradientEstimate& est, const GradientSet& exact,
                      double abs_tol, bool& zero_se_ok) {
  const Vector m = est.mean.flatten();
  const Vector s = est.standard_error.flatten();
  const Vector e = exact.flatten();
  double worst = 0.0;
  zero_se_ok = true;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (s[i] > 0.0) {
      worst = std::max(worst, std::abs(m[i] - e[i]) / s[i]);
    } else if (std::abs(m[i] - e[i]) > abs_tol) {
      zero_se_ok = false;
    }
  }
  return worst;
}

SyntheticTask small_task() {
  SyntheticTaskSpec spec;
  spec.n_classes = 2;
  spec.input_dim = 16;
  spec.steps = 5;
  spec.n_train = 64;
  spec.n_test = 32;
  return generate_task(spec, RngStream(1, 1));
}

}  // namespace

TEST_CASE("NDL chain rule for a single neuron and step") {
  const double sigma = 0.3, w = 0.9, b = 0.05, w_out = 2.0, c = 1.5;
  const Network net = scalar_net(w, b, w_out, NoiseModel::gaussian(sigma));
  const Matrix x(1, 1, 1.0);
  const Objective obj = Objective::linear(Vector{c});
  RngStream rng(2, 0);
  const Trace tr = forward(net, x, Mode::kSample, rng, obj);
  const GradientSet g = ndl_backward(net, tr, obj);
  const double pdf = normal_pdf((w + b - 1.0) / sigma) / sigma;
  const Vector flat = g.flatten();
  REQUIRE(flat.size() == 4);
  CHECK(flat[0] == doctest::Approx(c * w_out * pdf).epsilon(1e-13));
  CHECK(flat[1] == doctest::Approx(c * w_out * pdf).epsilon(1e-13));
  CHECK(flat[2] == c * tr.at(0, 0).spikes[0]);
  CHECK(flat[3] == c);
}

TEST_CASE("NDL gradient vanishes far from threshold") {
  const Network net = scalar_net(5.0, 0.0, 1.0, NoiseModel::gaussian(0.05));
  const Objective obj = Objective::linear(Vector{1.0});
  RngStream rng(3, 0);
  const Trace tr = forward(net, Matrix(3, 1, 1.0), Mode::kSample, rng, obj);
  const Vector flat = ndl_backward(net, tr, obj).flatten();
  CHECK(std::abs(flat[0]) < 1e-12);
  CHECK(std::abs(flat[1]) < 1e-12);
}

TEST_CASE("NDL with sigma 1/sqrt(2) coincides with the erf surrogate") {
  const Network net = tiny_222(NoiseModel::gaussian(1.0 / std::sqrt(2.0)));
  const Matrix x = tiny_222_inputs(6);
  const Objective obj = Objective::cross_entropy(1);
  RngStream rng(4, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const Trace tr = forward(net, x, Mode::kSample, rng, obj);
    const Vector a = ndl_backward(net, tr, obj).flatten();
    const Vector b = sgl_backward(net, tr, obj).flatten();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
  }
}

TEST_CASE("zero upstream gradient gives a zero gradient") {
  const Network net = tiny_222();
  const Matrix x = tiny_222_inputs(4);
  RngStream rng(5, 0);
  const Trace tr = forward(net, x, Mode::kSample, rng);
  const GradientSet g = backward_from_spike_grads(net, tr, Matrix(4, 2), LearningRule::kNdl);
  for (double v : g.flatten()) CHECK(v == 0.0);
  const Objective zero = Objective::linear(Vector{0.0, 0.0}, 3.0);
  for (double v : ndl_backward(net, tr, zero).flatten()) CHECK(v == 0.0);
}

TEST_CASE("input gradient has the input shape") {
  const Network net = tiny_222();
  RngStream rng(5, 1);
  const Objective obj = Objective::cross_entropy(0);
  const Trace tr = forward(net, tiny_222_inputs(3), Mode::kSample, rng, obj);
  Matrix dx;
  BackwardOptions opt;
  opt.input_grad = &dx;
  ndl_backward(net, tr, obj, opt);
  CHECK(dx.rows() == 3);
  CHECK(dx.cols() == 2);
  CHECK(dx.all_finite());
}

TEST_CASE("exact_gradient matches the closed form for one neuron") {
  const double sigma = 0.3, w = 0.8, b = 0.1, w_out = -1.3;
  const Network net = scalar_net(w, b, w_out, NoiseModel::gaussian(sigma));
  const Matrix x(1, 1, 1.0);
  const Objective obj = Objective::linear(Vector{1.0});
  const Vector g = exact_gradient(net, x, obj).flatten();
  const double z = (w + b - 1.0) / sigma;
  CHECK(std::abs(g[0] - w_out * normal_pdf(z) / sigma) < 1e-6);
  CHECK(std::abs(g[1] - w_out * normal_pdf(z) / sigma) < 1e-6);
  CHECK(std::abs(g[2] - phi(z)) < 1e-6);
  CHECK(std::abs(g[3] - 1.0) < 1e-6);
}

TEST_CASE("exact_gradient is insensitive to the step size") {
  const Network net = tiny_222();
  const Matrix x = tiny_222_inputs(3);
  const Objective obj = Objective::cross_entropy(0);
  const Vector a = exact_gradient(net, x, obj, 1e-4).flatten();
  const Vector b = exact_gradient(net, x, obj, 1e-5).flatten();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-4);
}

TEST_CASE("local marginalization of a constant loss is zero") {
  const Network net = tiny_222();
  RngStream rng(6, 0);
  const GradientEstimate est = local_marg_gradient(
      net, tiny_222_inputs(3), Objective::linear(Vector{0.0, 0.0}, 2.0), rng, 200);
  for (double v : est.mean.flatten()) CHECK(v == 0.0);
  CHECK(est.samples == 200);
}

TEST_CASE("local marginalization is exact for a single neuron and step") {
  const Network net = scalar_net(0.95, 0.0, 2.0, NoiseModel::gaussian(0.3));
  const Matrix x(1, 1, 1.0);
  const Objective obj = Objective::linear(Vector{1.0});
  RngStream rng(7, 0);
  const GradientEstimate est = local_marg_gradient(net, x, obj, rng, 500);
  const Vector exact = exact_gradient(net, x, obj).flatten();
  const Vector m = est.mean.flatten();
  CHECK(std::abs(m[0] - exact[0]) < 1e-6);
  CHECK(std::abs(m[1] - exact[1]) < 1e-6);
}

TEST_CASE("local marginalization is unbiased on the tiny net") {
  const Network net = tiny_222();
  const Matrix x = tiny_222_inputs(3);
  const Objective obj = Objective::cross_entropy(0);
  RngStream rng(8, 0);
  const GradientEstimate est = local_marg_gradient(net, x, obj, rng, 20000);
  bool zero_ok = false;
  const double worst = max_bias_ratio(est, exact_gradient(net, x, obj), 1e-6, zero_ok);
  CHECK(zero_ok);
  CHECK(worst < 4.5);
}

TEST_CASE("local marginalization guards its flip count") {
  const std::size_t dims[] = {2, 100, 2};
  RngStream init(1, 0);
  const Network net = make_network(dims, NoiseModel::gaussian(0.3), init);
  RngStream rng(9, 0);
  CHECK_THROWS_AS(local_marg_gradient(net, Matrix(41, 2), Objective::cross_entropy(0), rng, 1),
                  CapacityError);
}

TEST_CASE("NDL is unbiased for an affine loss at T = 1") {
  const Network net = tiny_222();
  const Matrix x = tiny_222_inputs(1);
  const Objective obj = Objective::linear(Vector{0.7, -0.4});
  RngStream rng(10, 0);
  const GradientEstimate est = ndl_gradient_estimate(net, x, obj, rng, 20000);
  bool zero_ok = false;
  const double worst = max_bias_ratio(est, exact_gradient(net, x, obj), 1e-6, zero_ok);
  CHECK(zero_ok);
  CHECK(worst < 4.5);
}

TEST_CASE("NDL gradients stay finite over random networks") {
  RngStream rng(11, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t dims[] = {3, 4, 3, 2};
    const double gain = 0.5 + 3.0 * rng.uniform();
    const double sigma = 0.01 + rng.uniform();
    const Network net = make_network(dims, NoiseModel::gaussian(sigma), rng, gain);
    Matrix x(4, 3);
    for (double& v : x.data()) v = rng.uniform() < 0.5 ? 1.0 : 0.0;
    const Objective obj = Objective::cross_entropy(rep % 2);
    const Trace tr = forward(net, x, Mode::kSample, rng, obj);
    REQUIRE(ndl_backward(net, tr, obj).all_finite());
  }
}

TEST_CASE("parameter flatten and assign round trip") {
  Network net = tiny_222();
  const Vector p = flatten_parameters(net);
  CHECK(p.size() == GradientSet::zeros_like(net).size());
  CHECK(p.size() == 12);
  CHECK(p[0] == 0.8);
  CHECK(p[4] == 0.1);
  Vector q = p;
  for (double& v : q) v += 1.0;
  assign_parameters(net, q);
  CHECK(flatten_parameters(net) == q);
  const GradientSet g = GradientSet::unflatten(net, q);
  CHECK(g.flatten() == q);
  CHECK_THROWS_AS(assign_parameters(net, Vector(3)), ShapeError);
}

TEST_CASE("sgd, cosine and adam updates") {
  Vector p{1.0, 2.0};
  sgd_step(p, Vector{0.5, -1.0}, 0.1);
  CHECK(p[0] == doctest::Approx(0.95));
  CHECK(p[1] == doctest::Approx(2.1));

  const CosineSchedule sched{0.1, 10};
  CHECK(sched.rate(0) == doctest::Approx(0.1));
  CHECK(sched.rate(5) == doctest::Approx(0.05));
  CHECK(sched.rate(10) == doctest::Approx(0.0));
  CHECK(sched.rate(15) == doctest::Approx(0.0));

  AdamState st;
  Vector q{0.0, 0.0};
  adam_step(q, Vector{3.0, -0.01}, st, 0.01);
  // The first bias-corrected step has magnitude lr in every coordinate.
  CHECK(q[0] == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(q[1] == doctest::Approx(0.01).epsilon(1e-4));
  AdamState zs;
  Vector r{1.0};
  adam_step(r, Vector{0.0}, zs, 0.5);
  CHECK(r[0] == 1.0);
}

TEST_CASE("training with zero epochs or zero rate leaves parameters unchanged") {
  const SyntheticTask task = small_task();
  const std::size_t dims[] = {16, 8, 2};
  RngStream init(2, 0);
  const Network net = make_network(dims, NoiseModel::gaussian(0.3), init);
  TrainOptions opt;
  opt.epochs = 0;
  TrainResult r = train(net, task.train, task.test, opt, RngStream(3, 0));
  CHECK(flatten_parameters(r.net) == flatten_parameters(net));
  CHECK(r.metrics.empty());

  opt.epochs = 2;
  opt.optimizer.method = OptimizerMethod::kSgd;
  opt.optimizer.learning_rate = 0.0;
  r = train(net, task.train, task.test, opt, RngStream(3, 0));
  CHECK(flatten_parameters(r.net) == flatten_parameters(net));
  CHECK(r.metrics.size() == 4);
}

TEST_CASE("training is reproducible and improves a small task") {
  const SyntheticTask task = small_task();
  const std::size_t dims[] = {16, 16, 2};
  RngStream init(4, 0);
  const Network net = make_network(dims, NoiseModel::gaussian(0.3), init);
  TrainOptions opt;
  opt.epochs = 8;
  opt.batch_size = 16;
  opt.optimizer.learning_rate = 0.01;
  const TrainResult a = train(net, task.train, task.test, opt, RngStream(5, 0));
  const TrainResult b = train(net, task.train, task.test, opt, RngStream(5, 0));
  CHECK(flatten_parameters(a.net) == flatten_parameters(b.net));
  CHECK(a.metrics.back().accuracy >= 0.9);
  CHECK(a.metrics.back().split == "test");
}

TEST_CASE("NDL needs a noisy network") {
  const SyntheticTask task = small_task();
  const std::size_t dims[] = {16, 4, 2};
  RngStream init(6, 0);
  const Network net = make_network(dims, NoiseModel::none(), init);
  TrainOptions opt;
  opt.epochs = 1;
  CHECK_THROWS_AS(train(net, task.train, task.test, opt, RngStream(0, 0)), ParameterError);
  opt.rule = LearningRule::kSgl;
  CHECK_NOTHROW(train(net, task.train, task.test, opt, RngStream(0, 0)));
}

TEST_CASE("evaluate of a deterministic net ignores the stream") {
  const SyntheticTask task = small_task();
  const std::size_t dims[] = {16, 8, 2};
  RngStream init(7, 0);
  const Network net = make_network(dims, NoiseModel::none(), init);
  const EvalResult a = evaluate(net, task.test, Mode::kDeterministic, RngStream(1, 0));
  const EvalResult b = evaluate(net, task.test, Mode::kDeterministic, RngStream(2, 0));
  CHECK(a.loss == b.loss);
  CHECK(a.accuracy == b.accuracy);
  CHECK(learning_rule_from_string("sgl") == LearningRule::kSgl);
  CHECK_THROWS(learning_rule_from_string("bptt"));
}

TEST_CASE("NDL bias is visible once the membrane recursion is involved") {
  // Two steps make the loss a non-multilinear function of the spike states.
  const Network net = tiny_222();
  const Matrix x = tiny_222_inputs(2);
  const Objective obj = Objective::linear(Vector{1.0, -0.6});
  RngStream rng(12, 0);
  const GradientEstimate est = ndl_gradient_estimate(net, x, obj, rng, 20000);
  bool zero_ok = false;
  CHECK(max_bias_ratio(est, exact_gradient(net, x, obj), 1e-6, zero_ok) > 10.0);
}
