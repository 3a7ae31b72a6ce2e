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

#include "nsnn/neuron.h"

#include <cmath>
#include <numbers>

#include "nsnn/errors.h"

namespace nsnn {
namespace {

constexpr double kPdfFlush = 1e-300;

void check_lengths(const NeuronState& state, std::span<const double> drive) {
  if (state.u.size() != drive.size()) {
    throw ShapeError("neuron step: state has " + std::to_string(state.u.size()) +
                     " neurons, drive has " + std::to_string(drive.size()));
  }
}

}  // namespace

std::string to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::kGaussian:
      return "gaussian";
    case NoiseFamily::kLogistic:
      return "logistic";
    case NoiseFamily::kNone:
      return "none";
  }
  return "none";
}

NoiseFamily noise_family_from_string(const std::string& name) {
  if (name == "gaussian") return NoiseFamily::kGaussian;
  if (name == "logistic") return NoiseFamily::kLogistic;
  if (name == "none") return NoiseFamily::kNone;
  throw ParameterError("unknown noise family '" + name + "'");
}

void NoiseModel::validate() const {
  if (family == NoiseFamily::kNone) return;
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ParameterError("noise scale must be positive and finite, got " +
                         std::to_string(scale));
  }
}

void LifParams::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ParameterError("LIF tau must lie in (0, 1), got " + std::to_string(tau));
  }
  if (!std::isfinite(v_th) || !std::isfinite(u_reset)) {
    throw ParameterError("LIF threshold and reset must be finite");
  }
}

double noise_cdf(const NoiseModel& model, double x) {
  if (!std::isfinite(x)) throw ParameterError("noise_cdf: non-finite argument");
  switch (model.family) {
    case NoiseFamily::kNone:
      return x >= 0.0 ? 1.0 : 0.0;
    case NoiseFamily::kGaussian:
      model.validate();
      return 0.5 * std::erfc(-x / (model.scale * std::numbers::sqrt2));
    case NoiseFamily::kLogistic:
      model.validate();
      return 1.0 / (1.0 + std::exp(-x / model.scale));
  }
  return 0.0;
}

double noise_pdf(const NoiseModel& model, double x) {
  if (!std::isfinite(x)) throw ParameterError("noise_pdf: non-finite argument");
  double p = 0.0;
  switch (model.family) {
    case NoiseFamily::kNone:
      throw UnsupportedError(
          "noise_pdf: deterministic neurons have no noise density");
    case NoiseFamily::kGaussian: {
      model.validate();
      const double z = x / model.scale;
      p = std::exp(-0.5 * z * z) /
          (model.scale * std::sqrt(2.0 * std::numbers::pi));
      break;
    }
    case NoiseFamily::kLogistic: {
      model.validate();
      const double e = std::exp(-std::abs(x) / model.scale);
      p = e / (model.scale * (1.0 + e) * (1.0 + e));
      break;
    }
  }
  return p < kPdfFlush ? 0.0 : p;
}

double sample_noise(const NoiseModel& model, RngStream& rng) {
  switch (model.family) {
    case NoiseFamily::kNone:
      return 0.0;
    case NoiseFamily::kGaussian:
      return rng.gaussian(model.scale);
    case NoiseFamily::kLogistic: {
      double u = rng.uniform();
      while (u == 0.0) u = rng.uniform();
      return model.scale * std::log(u / (1.0 - u));
    }
  }
  return 0.0;
}

double sg_erf(double x) {
  return std::exp(-x * x) * std::numbers::inv_sqrtpi;
}

StepResult step_with_noise(const NeuronState& state,
                           std::span<const double> drive,
                           const LifParams& params, const NoiseModel& noise,
                           std::span<const double> eps) {
  check_lengths(state, drive);
  if (eps.size() != drive.size()) throw ShapeError("neuron step: noise length");
  const std::size_t n = drive.size();
  StepResult out;
  out.state.u.resize(n);
  out.spikes.resize(n);
  out.fire_prob.resize(n);
  out.u_pre.resize(n);
  out.noise.assign(eps.begin(), eps.end());
  for (std::size_t i = 0; i < n; ++i) {
    const double u = params.tau * state.u[i] + drive[i];
    out.u_pre[i] = u;
    out.fire_prob[i] = noise_cdf(noise, u - params.v_th);
    const bool fire = u + eps[i] - params.v_th >= 0.0;
    out.spikes[i] = fire ? 1 : 0;
    out.state.u[i] = fire ? params.u_reset : u;
  }
  return out;
}

StepResult step(const NeuronState& state, std::span<const double> drive,
                const LifParams& params, const NoiseModel& noise, Mode mode,
                RngStream& rng) {
  check_lengths(state, drive);
  Vector eps(drive.size(), 0.0);
  if (mode == Mode::kSample) {
    noise.validate();
    for (double& e : eps) e = sample_noise(noise, rng);
  }
  return step_with_noise(state, drive, params, noise, eps);
}

}  // namespace nsnn
