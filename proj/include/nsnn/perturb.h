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

#ifndef NSNN_PERTURB_H_
#define NSNN_PERTURB_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nsnn/dataset.h"
#include "nsnn/network.h"
#include "nsnn/numerics.h"

namespace nsnn {

enum class AttackMethod { kFgsm, kDirectOpt, kEventDrop, kSpikeFlip };

std::string to_string(AttackMethod method);
AttackMethod attack_method_from_string(const std::string& name);

struct AttackConfig {
  AttackMethod method = AttackMethod::kFgsm;
  double gamma = 0.0;  // FGSM step or DO L2 radius
  double rho = 0.0;    // EventDrop probability
  double beta = 0.0;   // spike flip probability
  std::size_t do_iters = 30;
  double do_lr = 0.002;
  // Forwards averaged for the input gradient of a noisy network.
  std::size_t grad_samples = 8;

  // Throws ParameterError for out-of-range fields.
  void validate() const;
};

// Loss and its gradient with respect to a flat input.
using InputObjective = std::function<LossGrad(std::span<const double>)>;

// x + gamma * sign(grad), with sign(0) = 0.
Vector fgsm_step(std::span<const double> x, std::span<const double> grad, double gamma);
Vector fgsm(const InputObjective& objective, std::span<const double> x, double gamma);

struct DirectOptResult {
  Vector x_adv;
  Vector losses;  // loss after every iteration
};

// Maximizes the objective over the sphere |dx|_2 = gamma. The first iterate
// is the normalized gradient direction from dx = 0 (a fixed all-ones
// direction if the gradient vanishes or iters = 0); later iterates take Adam
// ascent steps on the tangential gradient and are projected back to the
// sphere. Throws AttackError on a non-finite loss.
DirectOptResult direct_opt(const InputObjective& objective, std::span<const double> x,
                           double gamma, std::size_t iters, double lr);

// Cross-entropy loss of `label` and its input gradient. Deterministic
// networks use one deterministic forward with the ERF surrogate; noisy
// networks average NDL input gradients over `samples` sampled forwards.
LossGrad network_input_gradient(const Network& net, const Matrix& x, std::size_t label,
                                RngStream& rng, std::size_t samples);

// Network attacks on an analog input sequence. `clamp` bounds x_adv
// elementwise for FGSM.
Matrix fgsm(const Network& net, const Matrix& x, std::size_t label, double gamma,
            RngStream& rng, std::size_t samples = 8,
            std::optional<std::pair<double, double>> clamp = std::nullopt);
Matrix direct_opt(const Network& net, const Matrix& x, std::size_t label,
                  double gamma, std::size_t iters, double lr, RngStream& rng,
                  std::size_t samples = 8);

// Zeroes every nonzero entry independently with probability rho.
Matrix event_drop(const Matrix& events, double rho, RngStream& rng);

// Independent flip decisions with probability beta.
std::vector<std::uint8_t> spike_flip_mask(std::size_t n, double beta, RngStream& rng);
std::vector<std::uint8_t> apply_flip_mask(std::span<const std::uint8_t> spikes,
                                          std::span<const std::uint8_t> mask);
// Flips each state with probability beta.
std::vector<std::uint8_t> spike_flip(std::span<const std::uint8_t> spikes, double beta,
                                     RngStream& rng);

struct RobustnessRow {
  std::string attack;
  double intensity = 0.0;
  std::string model_kind;
  std::uint64_t seed = 0;
  double loss = 0.0;
  double accuracy = 0.0;
};

// Test loss and accuracy for every intensity of `method`. Input attacks
// perturb each sample with its own stream; spike_flip perturbs the hidden
// states during the forward. Throws ConfigError for FGSM/DO on event data.
std::vector<RobustnessRow> robustness_sweep(const Network& net,
                                            const std::string& model_kind,
                                            const SpikeDataset& data,
                                            InputCoding coding,
                                            const AttackConfig& base,
                                            std::span<const double> intensities,
                                            std::uint64_t seed, RngStream rng,
                                            std::size_t passes = 1);

}  // namespace nsnn

#endif  // NSNN_PERTURB_H_
