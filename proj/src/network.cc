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

#include "nsnn/network.h"

#include <algorithm>
#include <cmath>
#include <functional>

#include "nsnn/errors.h"

namespace nsnn {

Vector LayerSpec::drive(std::span<const double> x) const {
  if (x.size() != in_dim()) {
    throw ShapeError("layer expects input of " + std::to_string(in_dim()) +
                     ", got " + std::to_string(x.size()));
  }
  Vector out = bias;
  if (input_scale == 1.0 && input_shift == 0.0) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += dot(weights.row(i), x);
    return out;
  }
  Vector xs(x.begin(), x.end());
  for (double& v : xs) v = input_scale * v + input_shift;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += dot(weights.row(i), xs);
  return out;
}

void LayerSpec::validate() const {
  if (bias.size() != out_dim()) {
    throw ShapeError("layer bias length " + std::to_string(bias.size()) +
                     " != out_dim " + std::to_string(out_dim()));
  }
  if (out_dim() == 0 || in_dim() == 0) throw ShapeError("empty layer");
  if (!weights.all_finite()) throw ParameterError("non-finite layer weights");
  lif.validate();
  noise.validate();
}

Vector Readout::logits(std::span<const double> spikes) const {
  Vector z = matvec(weights, spikes);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += bias[i];
  return z;
}

std::string to_string(LossMode mode) {
  return mode == LossMode::kMeanLogits ? "mean_logits" : "per_step_mean";
}

LossMode loss_mode_from_string(const std::string& name) {
  if (name == "per_step_mean") return LossMode::kPerStepMean;
  if (name == "mean_logits") return LossMode::kMeanLogits;
  throw ParameterError("unknown loss_mode '" + name + "'");
}

std::size_t Network::spiking_units() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.out_dim();
  return n;
}

void Network::validate() const {
  if (layers.empty()) throw ShapeError("network has no spiking layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].validate();
    if (i > 0 && layers[i].in_dim() != layers[i - 1].out_dim()) {
      throw ShapeError("layer " + std::to_string(i) + " in_dim " +
                       std::to_string(layers[i].in_dim()) +
                       " != previous out_dim " +
                       std::to_string(layers[i - 1].out_dim()));
    }
  }
  if (readout.weights.cols() != layers.back().out_dim()) {
    throw ShapeError("readout in_dim does not match last spiking layer");
  }
  if (readout.bias.size() != readout.weights.rows()) {
    throw ShapeError("readout bias length mismatch");
  }
}

void Network::set_noise(const NoiseModel& noise) {
  for (auto& l : layers) l.noise = noise;
}

Network make_network(std::span<const std::size_t> dims, const NoiseModel& noise,
                     RngStream& rng, double gain, const LifParams& lif) {
  if (dims.size() < 3) {
    throw ShapeError("make_network needs input, >= 1 hidden and class dims");
  }
  Network net;
  auto init = [&](std::size_t out, std::size_t in) {
    Matrix w(out, in);
    const double s = gain / std::sqrt(static_cast<double>(in));
    for (double& v : w.data()) v = rng.gaussian(s);
    return w;
  };
  for (std::size_t i = 0; i + 2 < dims.size(); ++i) {
    LayerSpec layer;
    layer.weights = init(dims[i + 1], dims[i]);
    layer.bias.assign(dims[i + 1], 0.0);
    layer.lif = lif;
    layer.noise = noise;
    net.layers.push_back(std::move(layer));
  }
  net.readout.weights = init(dims.back(), dims[dims.size() - 2]);
  net.readout.bias.assign(dims.back(), 0.0);
  net.validate();
  return net;
}

Objective Objective::cross_entropy(std::size_t label) {
  Objective o;
  o.kind_ = Kind::kCrossEntropy;
  o.label_ = label;
  return o;
}

Objective Objective::linear(Vector coefficients, double offset) {
  Objective o;
  o.kind_ = Kind::kLinear;
  o.coefficients_ = std::move(coefficients);
  o.offset_ = offset;
  return o;
}

LossGrad Objective::evaluate(std::span<const double> logits) const {
  switch (kind_) {
    case Kind::kNone:
      return {0.0, Vector(logits.size(), 0.0)};
    case Kind::kCrossEntropy:
      return softmax_cross_entropy(logits, label_);
    case Kind::kLinear:
      if (coefficients_.size() != logits.size()) {
        throw ShapeError("linear objective has " +
                         std::to_string(coefficients_.size()) +
                         " coefficients for " + std::to_string(logits.size()) +
                         " logits");
      }
      return {dot(coefficients_, logits) + offset_, coefficients_};
  }
  return {};
}

SequenceLoss sequence_loss(LossMode mode, const Matrix& logits,
                           const Objective& objective) {
  const std::size_t steps = logits.rows();
  if (steps == 0) throw ShapeError("sequence_loss: no timesteps");
  const double inv_t = 1.0 / static_cast<double>(steps);
  SequenceLoss out;
  out.step_losses.resize(steps);
  out.d_logits = Matrix(steps, logits.cols());
  if (mode == LossMode::kPerStepMean) {
    for (std::size_t t = 0; t < steps; ++t) {
      LossGrad lg = objective.evaluate(logits.row(t));
      out.step_losses[t] = lg.loss;
      out.loss += lg.loss * inv_t;
      auto row = out.d_logits.row(t);
      for (std::size_t k = 0; k < row.size(); ++k) row[k] = lg.grad[k] * inv_t;
    }
    return out;
  }
  Vector mean(logits.cols(), 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    axpy(inv_t, logits.row(t), mean);
    out.step_losses[t] = objective.evaluate(logits.row(t)).loss;
  }
  LossGrad lg = objective.evaluate(mean);
  out.loss = lg.loss;
  for (std::size_t t = 0; t < steps; ++t) {
    auto row = out.d_logits.row(t);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = lg.grad[k] * inv_t;
  }
  return out;
}

Vector Trace::output_counts() const {
  if (records.empty()) return {};
  Vector counts(records.front().back().spikes.size(), 0.0);
  for (const auto& step : records) {
    const auto& s = step.back().spikes;
    for (std::size_t i = 0; i < s.size(); ++i) counts[i] += s[i];
  }
  return counts;
}

Vector Trace::mean_logits() const {
  Vector mean(logits.cols(), 0.0);
  if (logits.rows() == 0) return mean;
  for (std::size_t t = 0; t < logits.rows(); ++t) {
    axpy(1.0 / static_cast<double>(logits.rows()), logits.row(t), mean);
  }
  return mean;
}

namespace {

void check_inputs(const Network& net, const Matrix& inputs) {
  net.validate();
  if (inputs.rows() == 0) throw ShapeError("input sequence must have T >= 1");
  if (inputs.cols() != net.input_dim()) {
    throw ShapeError("input dim " + std::to_string(inputs.cols()) +
                     " != network input dim " + std::to_string(net.input_dim()));
  }
}

Vector as_real(const std::vector<std::uint8_t>& spikes) {
  return Vector(spikes.begin(), spikes.end());
}

}  // namespace

NoiseTape draw_noise_tape(const Network& net, std::size_t steps, Mode mode,
                          RngStream& rng, double flip_beta) {
  if (!(flip_beta >= 0.0 && flip_beta <= 1.0)) {
    throw ParameterError("flip probability must lie in [0, 1]");
  }
  NoiseTape tape;
  tape.eps.resize(steps);
  if (flip_beta > 0.0) tape.flips.resize(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    tape.eps[t].resize(net.layers.size());
    if (flip_beta > 0.0) tape.flips[t].resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const auto& layer = net.layers[l];
      Vector& eps = tape.eps[t][l];
      eps.assign(layer.out_dim(), 0.0);
      if (mode == Mode::kSample) {
        for (double& e : eps) e = sample_noise(layer.noise, rng);
      }
      if (flip_beta > 0.0) {
        auto& flips = tape.flips[t][l];
        flips.resize(layer.out_dim());
        for (auto& f : flips) f = rng.uniform() < flip_beta ? 1 : 0;
      }
    }
  }
  return tape;
}

Trace forward_with_tape(const Network& net, const Matrix& inputs,
                        const NoiseTape& tape, const Objective& objective,
                        const SpikeOverride* override_spike, Mode mode) {
  check_inputs(net, inputs);
  const std::size_t steps = inputs.rows();
  if (tape.eps.size() != steps) throw ShapeError("noise tape length != T");
  const bool flipping = !tape.flips.empty();

  Trace trace;
  trace.mode = mode;
  trace.records.resize(steps);
  trace.logits = Matrix(steps, net.output_dim());

  std::vector<Vector> carried(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    carried[l].assign(net.layers[l].out_dim(), net.layers[l].lif.u_reset);
  }

  for (std::size_t t = 0; t < steps; ++t) {
    auto& step_records = trace.records[t];
    step_records.resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const LayerSpec& layer = net.layers[l];
      LayerRecord& rec = step_records[l];
      if (l == 0) {
        rec.input.assign(inputs.row(t).begin(), inputs.row(t).end());
      } else {
        rec.input = as_real(step_records[l - 1].spikes);
      }
      rec.carried = carried[l];
      const Vector drive = layer.drive(rec.input);
      StepResult r = step_with_noise(NeuronState{carried[l]}, drive, layer.lif,
                                     layer.noise, tape.eps[t][l]);
      bool modified = false;
      if (override_spike && override_spike->t == t && override_spike->layer == l) {
        r.spikes.at(override_spike->neuron) ^= 1;
        modified = true;
      }
      if (flipping) {
        const auto& flips = tape.flips[t][l];
        for (std::size_t m = 0; m < flips.size(); ++m) {
          if (flips[m]) {
            r.spikes[m] ^= 1;
            modified = true;
          }
        }
      }
      if (modified) {
        for (std::size_t m = 0; m < r.spikes.size(); ++m) {
          r.state.u[m] = r.spikes[m] ? layer.lif.u_reset : r.u_pre[m];
        }
      }
      carried[l] = std::move(r.state.u);
      rec.u_pre = std::move(r.u_pre);
      rec.fire_prob = std::move(r.fire_prob);
      rec.noise = std::move(r.noise);
      rec.spikes = std::move(r.spikes);
    }
    const Vector z = net.readout.logits(as_real(step_records.back().spikes));
    std::copy(z.begin(), z.end(), trace.logits.row(t).begin());
  }

  SequenceLoss sl = sequence_loss(net.loss_mode, trace.logits, objective);
  trace.loss = sl.loss;
  trace.step_losses = std::move(sl.step_losses);
  return trace;
}

Trace forward(const Network& net, const Matrix& inputs, Mode mode,
              RngStream& rng, const Objective& objective, double flip_beta) {
  check_inputs(net, inputs);
  const NoiseTape tape =
      draw_noise_tape(net, inputs.rows(), mode, rng, flip_beta);
  return forward_with_tape(net, inputs, tape, objective, nullptr, mode);
}

double JointDistribution::total_probability() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.probability;
  return s;
}

Vector JointDistribution::marginals() const {
  Vector m(num_variables, 0.0);
  for (const auto& e : entries) {
    for (std::size_t i = 0; i < num_variables; ++i) {
      if (e.config[i]) m[i] += e.probability;
    }
  }
  return m;
}

std::size_t joint_variable_index(const Network& net, std::size_t t,
                                 std::size_t layer, std::size_t neuron) {
  std::size_t idx = t * net.spiking_units();
  for (std::size_t l = 0; l < layer; ++l) idx += net.layers[l].out_dim();
  return idx + neuron;
}

namespace {

// Depth-first walk over every spike assignment in (t, layer, neuron) order.
// Each variable's Bernoulli factor is evaluated from the membrane implied by
// the spikes already assigned upstream and in the past.
class JointWalker {
 public:
  using Leaf = std::function<void(const std::vector<std::uint8_t>& config,
                                  double probability, const Matrix& logits)>;

  JointWalker(const Network& net, const Matrix& inputs, bool skip_zero, Leaf leaf)
      : net_(net), inputs_(inputs), skip_zero_(skip_zero), leaf_(std::move(leaf)) {
    check_inputs(net, inputs);
    const std::size_t vars = inputs.rows() * net.spiking_units();
    if (vars > kMaxEnumerationVariables) {
      throw CapacityError("enumeration needs " + std::to_string(vars) +
                          " spiking neuron-steps, guard is " +
                          std::to_string(kMaxEnumerationVariables));
    }
    config_.reserve(vars);
    logits_ = Matrix(inputs.rows(), net.output_dim());
    spikes_.assign(inputs.rows(), std::vector<Vector>(net.layers.size()));
    carried_.resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      carried_[l].assign(net.layers[l].out_dim(), net.layers[l].lif.u_reset);
    }
  }

  void run() { visit_layer(0, 0, 1.0); }

 private:
  void visit_layer(std::size_t t, std::size_t l, double prob) {
    if (t == inputs_.rows()) {
      leaf_(config_, prob, logits_);
      return;
    }
    if (l == net_.layers.size()) {
      const Vector z = net_.readout.logits(spikes_[t].back());
      std::copy(z.begin(), z.end(), logits_.row(t).begin());
      visit_layer(t + 1, 0, prob);
      return;
    }
    const LayerSpec& layer = net_.layers[l];
    const Vector drive = l == 0 ? layer.drive(inputs_.row(t))
                                : layer.drive(spikes_[t][l - 1]);
    Vector u(layer.out_dim());
    Vector p(layer.out_dim());
    for (std::size_t m = 0; m < u.size(); ++m) {
      u[m] = layer.lif.tau * carried_[l][m] + drive[m];
      p[m] = noise_cdf(layer.noise, u[m] - layer.lif.v_th);
    }
    spikes_[t][l].assign(layer.out_dim(), 0.0);
    assign_neuron(t, l, 0, u, p, prob);
  }

  void assign_neuron(std::size_t t, std::size_t l, std::size_t m,
                     const Vector& u, const Vector& p, double prob) {
    const LayerSpec& layer = net_.layers[l];
    if (m == u.size()) {
      const Vector saved = carried_[l];
      for (std::size_t k = 0; k < u.size(); ++k) {
        carried_[l][k] = spikes_[t][l][k] != 0.0 ? layer.lif.u_reset : u[k];
      }
      visit_layer(t, l + 1, prob);
      carried_[l] = saved;
      return;
    }
    for (std::uint8_t bit : {std::uint8_t{0}, std::uint8_t{1}}) {
      const double q = bit ? p[m] : 1.0 - p[m];
      if (skip_zero_ && q == 0.0) continue;
      spikes_[t][l][m] = bit;
      config_.push_back(bit);
      assign_neuron(t, l, m + 1, u, p, prob * q);
      config_.pop_back();
    }
    spikes_[t][l][m] = 0.0;
  }

  const Network& net_;
  const Matrix& inputs_;
  bool skip_zero_;
  Leaf leaf_;
  std::vector<std::uint8_t> config_;
  Matrix logits_;
  std::vector<std::vector<Vector>> spikes_;  // [t][l] as reals
  std::vector<Vector> carried_;
};

}  // namespace

JointDistribution enumerate_joint(const Network& net, const Matrix& inputs) {
  JointDistribution dist;
  dist.num_variables = inputs.rows() * net.spiking_units();
  JointWalker walker(net, inputs, /*skip_zero=*/false,
                     [&](const std::vector<std::uint8_t>& config, double p,
                         const Matrix&) { dist.entries.push_back({config, p}); });
  walker.run();
  return dist;
}

double expected_loss(const Network& net, const Matrix& inputs,
                     const Objective& objective) {
  double total = 0.0;
  JointWalker walker(net, inputs, /*skip_zero=*/true,
                     [&](const std::vector<std::uint8_t>&, double p,
                         const Matrix& logits) {
                       total += p * sequence_loss(net.loss_mode, logits, objective).loss;
                     });
  walker.run();
  return total;
}

}  // namespace nsnn
