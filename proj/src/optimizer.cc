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

#include "nsnn/optimizer.h"

#include <cmath>
#include <numbers>

#include "nsnn/errors.h"

namespace nsnn {

std::string to_string(OptimizerMethod method) {
  return method == OptimizerMethod::kSgd ? "sgd" : "adam";
}

OptimizerMethod optimizer_method_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerMethod::kSgd;
  if (name == "adam") return OptimizerMethod::kAdam;
  throw ParameterError("unknown optimizer '" + name + "'");
}

double CosineSchedule::multiplier(std::size_t step) const {
  if (total_steps == 0) return 0.0;
  const double frac =
      step >= total_steps ? 1.0
                          : static_cast<double>(step) / static_cast<double>(total_steps);
  return 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

void sgd_step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != grads.size()) throw ShapeError("sgd_step: shape mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

namespace {

void adam_update(std::span<double> params, std::span<const double> grads,
                 AdamState& s, double lr, double sign) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: shape mismatch");
  if (s.m.empty()) {
    s.m.assign(params.size(), 0.0);
    s.v.assign(params.size(), 0.0);
  }
  if (s.m.size() != params.size()) throw ShapeError("adam_step: moment shape");
  ++s.t;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * grads[i];
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * grads[i] * grads[i];
    const double mhat = s.m[i] / c1;
    const double vhat = s.v[i] / c2;
    params[i] += sign * lr * mhat / (std::sqrt(vhat) + s.eps);
  }
}

}  // namespace

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr) {
  adam_update(params, grads, state, lr, -1.0);
}

void adam_ascent_step(std::span<double> params, std::span<const double> grads,
                      AdamState& state, double lr) {
  adam_update(params, grads, state, lr, 1.0);
}

Optimizer::Optimizer(const OptimizerConfig& config, std::size_t total_steps)
    : config_(config), schedule_{config.learning_rate, total_steps} {
  if (!(config.learning_rate >= 0.0)) {
    throw ParameterError("learning rate must be non-negative");
  }
}

double Optimizer::current_rate() const {
  return config_.cosine ? schedule_.rate(step_) : config_.learning_rate;
}

void Optimizer::apply(std::span<double> params, std::span<const double> grads) {
  const double lr = current_rate();
  if (config_.method == OptimizerMethod::kSgd) {
    sgd_step(params, grads, lr);
  } else {
    adam_step(params, grads, adam_, lr);
  }
  ++step_;
}

}  // namespace nsnn
