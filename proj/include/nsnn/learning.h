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

#ifndef NSNN_LEARNING_H_
#define NSNN_LEARNING_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nsnn/dataset.h"
#include "nsnn/network.h"
#include "nsnn/numerics.h"
#include "nsnn/optimizer.h"

namespace nsnn {

struct LayerGradient {
  Matrix weights;
  Vector bias;
};

// Gradients mirroring the parameters of a Network.
struct GradientSet {
  std::vector<LayerGradient> layers;
  LayerGradient readout;

  static GradientSet zeros_like(const Network& net);

  std::size_t size() const;
  // Flat view in parameter order: per layer weights (row-major) then bias,
  // then readout weights and bias.
  Vector flatten() const;
  static GradientSet unflatten(const Network& like, std::span<const double> flat);
  bool all_finite() const;

  GradientSet& operator+=(const GradientSet& other);
  GradientSet& operator*=(double s);
};

// Flat parameter vector in GradientSet::flatten order.
Vector flatten_parameters(const Network& net);
void assign_parameters(Network& net, std::span<const double> flat);

struct BackwardOptions {
  // Treat the spike in the hard reset as a constant (no gradient through
  // u * (1 - o) + u_reset * o with respect to o).
  bool detach_reset = true;
  // If non-null, receives dLoss/dx^t_1 (T x input_dim).
  Matrix* input_grad = nullptr;
};

// Noise-driven learning: reverse sweep through the unrolled (layer, time)
// graph, using the noise density F'_eps(u - v_th) wherever the chain rule
// needs d o / d u.
GradientSet ndl_backward(const Network& net, const Trace& trace,
                         const Objective& objective,
                         const BackwardOptions& options = {});

enum class Surrogate { kErf };

// Surrogate-gradient learning for deterministic networks; same sweep with
// the surrogate pseudo-derivative.
GradientSet sgl_backward(const Network& net, const Trace& trace,
                         const Objective& objective,
                         Surrogate surrogate = Surrogate::kErf,
                         const BackwardOptions& options = {});

enum class LearningRule { kNdl, kSgl };

std::string to_string(LearningRule rule);
LearningRule learning_rule_from_string(const std::string& name);

// Backward sweep driven by an external loss gradient on the last spiking
// layer's spikes (T x dim(L)) instead of the readout. Readout gradients are
// zero. Used for spike-train fitting.
GradientSet backward_from_spike_grads(const Network& net, const Trace& trace,
                                      const Matrix& d_output_spikes,
                                      LearningRule rule,
                                      const BackwardOptions& options = {});

struct GradientEstimate {
  GradientSet mean;
  GradientSet standard_error;
  std::size_t samples = 0;
};

inline constexpr std::size_t kMaxFlipVariables = 4096;

// Unbiased local-marginalization estimator. For each sampled forward and each
// spiking neuron-step v, the exact loss difference of flipping o_v is
// obtained by re-simulating with all noise draws held fixed, and weighted by
// d p(o_v | parents) / d theta.
GradientEstimate local_marg_gradient(const Network& net, const Matrix& inputs,
                                     const Objective& objective, RngStream& rng,
                                     std::size_t n_samples);

// Monte Carlo mean (and standard error) of ndl_backward over sampled forwards.
GradientEstimate ndl_gradient_estimate(const Network& net, const Matrix& inputs,
                                       const Objective& objective,
                                       RngStream& rng, std::size_t n_samples);

// Central finite difference of expected_loss with respect to every parameter.
GradientSet exact_gradient(const Network& net, const Matrix& inputs,
                           const Objective& objective, double h = 1e-5);

struct EpochMetrics {
  std::size_t epoch = 0;
  std::string split;
  double loss = 0.0;
  double accuracy = 0.0;
  double lr = 0.0;
  double wall_ms = 0.0;
};

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Accuracy of argmax(mean logits). In sample mode logits are averaged over
// `passes` independent forwards.
EvalResult evaluate(const Network& net, const SpikeDataset& data, Mode mode,
                    RngStream rng, double flip_beta = 0.0,
                    std::size_t passes = 1);

struct TrainOptions {
  LearningRule rule = LearningRule::kNdl;
  std::size_t epochs = 60;
  std::size_t batch_size = 64;
  OptimizerConfig optimizer;
  bool record_wall_time = false;
};

struct TrainResult {
  Network net;
  std::vector<EpochMetrics> metrics;
};

// Minibatch training; NDL uses sample-mode forwards, SGL deterministic ones.
// Throws TrainingError if a minibatch loss is non-finite.
TrainResult train(Network net, const SpikeDataset& train_set,
                  const SpikeDataset& test_set, const TrainOptions& options,
                  RngStream rng);

}  // namespace nsnn

#endif  // NSNN_LEARNING_H_
