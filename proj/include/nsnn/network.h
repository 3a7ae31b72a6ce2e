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

#ifndef NSNN_NETWORK_H_
#define NSNN_NETWORK_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nsnn/neuron.h"
#include "nsnn/numerics.h"

namespace nsnn {

// One fully connected Noisy-LIF layer. The synaptic map is affine:
//   drive(x) = W (input_scale * x + input_shift) + b
// input_scale/input_shift default to the identity.
struct LayerSpec {
  Matrix weights;  // out_dim x in_dim
  Vector bias;     // out_dim
  LifParams lif;
  NoiseModel noise;
  double input_scale = 1.0;
  double input_shift = 0.0;

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }
  Vector drive(std::span<const double> x) const;
  void validate() const;
};

// Non-spiking, noise-free predictive head applied to the last spiking layer.
struct Readout {
  Matrix weights;  // classes x dim(L)
  Vector bias;

  Vector logits(std::span<const double> spikes) const;
};

enum class LossMode {
  kPerStepMean,  // mean over t of f(logits_t)
  kMeanLogits,   // f(mean over t of logits_t)
};

std::string to_string(LossMode mode);
LossMode loss_mode_from_string(const std::string& name);

struct Network {
  std::vector<LayerSpec> layers;
  Readout readout;
  LossMode loss_mode = LossMode::kPerStepMean;

  std::size_t input_dim() const { return layers.front().in_dim(); }
  std::size_t output_dim() const { return readout.weights.rows(); }
  std::size_t spiking_units() const;
  // Throws ShapeError if adjacent dimensions do not chain.
  void validate() const;
  void set_noise(const NoiseModel& noise);
};

// Random fully connected network. dims = {input, hidden_1, ..., hidden_L,
// classes}. Weights ~ N(0, (gain / sqrt(fan_in))^2), biases zero.
Network make_network(std::span<const std::size_t> dims, const NoiseModel& noise,
                     RngStream& rng, double gain = 1.0,
                     const LifParams& lif = {});

// The per-step loss f applied to readout logits.
class Objective {
 public:
  enum class Kind { kNone, kCrossEntropy, kLinear };

  static Objective none() { return Objective(); }
  static Objective cross_entropy(std::size_t label);
  // f(z) = coefficients . z + offset
  static Objective linear(Vector coefficients, double offset = 0.0);

  Kind kind() const { return kind_; }
  std::size_t label() const { return label_; }
  LossGrad evaluate(std::span<const double> logits) const;

 private:
  Kind kind_ = Kind::kNone;
  std::size_t label_ = 0;
  Vector coefficients_;
  double offset_ = 0.0;
};

struct SequenceLoss {
  double loss = 0.0;
  Vector step_losses;  // f(logits_t) for every t
  Matrix d_logits;     // dLoss / dlogits_t, T x classes
};

SequenceLoss sequence_loss(LossMode mode, const Matrix& logits,
                           const Objective& objective);

struct LayerRecord {
  Vector input;      // x^t_l as seen by the layer (before input_scale)
  Vector carried;    // membrane carried in from t-1 (post reset)
  Vector u_pre;      // tau * carried + drive(input), noise free
  Vector fire_prob;  // F_eps(u_pre - v_th)
  Vector noise;      // eps used at the threshold
  std::vector<std::uint8_t> spikes;
};

struct Trace {
  Mode mode = Mode::kSample;
  std::vector<std::vector<LayerRecord>> records;  // [t][layer]
  Matrix logits;                                  // T x classes
  Vector step_losses;
  double loss = 0.0;

  std::size_t steps() const { return records.size(); }
  const LayerRecord& at(std::size_t t, std::size_t layer) const {
    return records[t][layer];
  }
  // Sum over t of the last spiking layer's spikes.
  Vector output_counts() const;
  // Mean over t of the readout logits.
  Vector mean_logits() const;
};

// All randomness of one forward pass: threshold noise per neuron-step and
// optional spike-state flip decisions.
struct NoiseTape {
  std::vector<std::vector<Vector>> eps;                              // [t][l][m]
  std::vector<std::vector<std::vector<std::uint8_t>>> flips;  // empty if none
};

NoiseTape draw_noise_tape(const Network& net, std::size_t steps, Mode mode,
                          RngStream& rng, double flip_beta = 0.0);

// Forces the (t, layer, neuron) spike to the complement of the value the
// threshold test produces.
struct SpikeOverride {
  std::size_t t = 0;
  std::size_t layer = 0;
  std::size_t neuron = 0;
};

// Simulates `inputs` (T x input_dim, row t = x^t_1). Membranes start at
// u_reset. If flip_beta > 0 every spiking-layer state is flipped with
// probability flip_beta after sampling and before propagation.
Trace forward(const Network& net, const Matrix& inputs, Mode mode,
              RngStream& rng, const Objective& objective = Objective::none(),
              double flip_beta = 0.0);

Trace forward_with_tape(const Network& net, const Matrix& inputs,
                        const NoiseTape& tape,
                        const Objective& objective = Objective::none(),
                        const SpikeOverride* override_spike = nullptr,
                        Mode mode = Mode::kSample);

inline constexpr std::size_t kMaxEnumerationVariables = 24;

struct JointEntry {
  // Spike assignment ordered timestep-major, then layer, then neuron.
  std::vector<std::uint8_t> config;
  double probability = 0.0;
};

struct JointDistribution {
  std::size_t num_variables = 0;
  std::vector<JointEntry> entries;

  double total_probability() const;
  // Marginal P[spike] of every variable, in config order.
  Vector marginals() const;
};

// Exact joint distribution of all spike states by exhaustive enumeration.
// Throws CapacityError above kMaxEnumerationVariables neuron-steps.
JointDistribution enumerate_joint(const Network& net, const Matrix& inputs);

// Sum over configurations of p(config) * loss(config).
double expected_loss(const Network& net, const Matrix& inputs,
                     const Objective& objective);

// Index of variable (t, layer, neuron) inside JointEntry::config.
std::size_t joint_variable_index(const Network& net, std::size_t t,
                                 std::size_t layer, std::size_t neuron);

}  // namespace nsnn

#endif  // NSNN_NETWORK_H_
