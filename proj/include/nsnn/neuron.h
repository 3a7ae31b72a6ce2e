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

#ifndef NSNN_NEURON_H_
#define NSNN_NEURON_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nsnn/numerics.h"

namespace nsnn {

enum class NoiseFamily { kGaussian, kLogistic, kNone };

std::string to_string(NoiseFamily family);
NoiseFamily noise_family_from_string(const std::string& name);

// Symmetric zero-mean membrane noise. `scale` is the standard deviation for
// the gaussian family and the logistic scale parameter s (variance
// s^2 pi^2 / 3) for the logistic family; it is ignored for kNone.
struct NoiseModel {
  NoiseFamily family = NoiseFamily::kGaussian;
  double scale = 0.3;

  static NoiseModel gaussian(double sigma) { return {NoiseFamily::kGaussian, sigma}; }
  static NoiseModel logistic(double s) { return {NoiseFamily::kLogistic, s}; }
  static NoiseModel none() { return {NoiseFamily::kNone, 0.0}; }

  bool is_deterministic() const { return family == NoiseFamily::kNone; }
  // Throws ParameterError unless scale > 0 for the stochastic families.
  void validate() const;

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

struct LifParams {
  double tau = 0.5;
  double v_th = 1.0;
  double u_reset = 0.0;

  void validate() const;
  friend bool operator==(const LifParams&, const LifParams&) = default;
};

struct NeuronState {
  Vector u;
};

enum class Mode { kSample, kDeterministic };

// P[eps < x]. For kNone this is the Heaviside step with H(0) = 1.
double noise_cdf(const NoiseModel& model, double x);

// Density of eps at x; the post-synaptic factor of the learning rule.
// Values below 1e-300 are flushed to zero. Throws UnsupportedError for kNone.
double noise_pdf(const NoiseModel& model, double x);

// One draw of eps. Always 0 for kNone.
double sample_noise(const NoiseModel& model, RngStream& rng);

// ERF surrogate pseudo-derivative (1/sqrt(pi)) exp(-x^2).
double sg_erf(double x);

struct StepResult {
  NeuronState state;            // post-reset membrane carried to t+1
  std::vector<std::uint8_t> spikes;
  Vector fire_prob;             // F_eps(u_pre - v_th)
  Vector u_pre;                 // noise-free membrane before threshold/reset
  Vector noise;                 // eps used for the threshold test
};

// Leaky integration of `drive`, threshold comparison of u_pre + eps against
// v_th, then hard reset. Sample mode draws eps per neuron from `rng`;
// deterministic mode uses eps = 0 and consumes no randomness.
StepResult step(const NeuronState& state, std::span<const double> drive,
                const LifParams& params, const NoiseModel& noise, Mode mode,
                RngStream& rng);

// Same transition with caller-supplied noise values (one per neuron).
StepResult step_with_noise(const NeuronState& state,
                           std::span<const double> drive,
                           const LifParams& params, const NoiseModel& noise,
                           std::span<const double> eps);

}  // namespace nsnn

#endif  // NSNN_NEURON_H_
