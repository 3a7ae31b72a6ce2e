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

#include "nsnn/perturb.h"

#include <algorithm>
#include <cmath>

#include "nsnn/errors.h"
#include "nsnn/learning.h"
#include "nsnn/optimizer.h"
#include "nsnn/parallel.h"

namespace nsnn {

std::string to_string(AttackMethod method) {
  switch (method) {
    case AttackMethod::kFgsm:
      return "fgsm";
    case AttackMethod::kDirectOpt:
      return "direct_opt";
    case AttackMethod::kEventDrop:
      return "event_drop";
    case AttackMethod::kSpikeFlip:
      return "spike_flip";
  }
  return "unknown";
}

AttackMethod attack_method_from_string(const std::string& name) {
  if (name == "fgsm") return AttackMethod::kFgsm;
  if (name == "direct_opt") return AttackMethod::kDirectOpt;
  if (name == "event_drop") return AttackMethod::kEventDrop;
  if (name == "spike_flip") return AttackMethod::kSpikeFlip;
  throw ConfigError("unknown attack '" + name + "'");
}

namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ParameterError(std::string(name) + " must lie in [0, 1]");
  }
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw ParameterError("gamma must be finite and non-negative");
  }
}

}  // namespace

void AttackConfig::validate() const {
  check_gamma(gamma);
  check_probability(rho, "rho");
  check_probability(beta, "beta");
  if (!(do_lr > 0.0)) throw ParameterError("do_lr must be positive");
  if (grad_samples == 0) throw ParameterError("grad_samples must be positive");
}

Vector fgsm_step(std::span<const double> x, std::span<const double> grad, double gamma) {
  check_gamma(gamma);
  if (x.size() != grad.size()) throw ShapeError("fgsm: gradient shape mismatch");
  Vector out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (grad[i] > 0.0) {
      out[i] += gamma;
    } else if (grad[i] < 0.0) {
      out[i] -= gamma;
    }
  }
  return out;
}

Vector fgsm(const InputObjective& objective, std::span<const double> x, double gamma) {
  check_gamma(gamma);
  const LossGrad lg = objective(x);
  return fgsm_step(x, lg.grad, gamma);
}

DirectOptResult direct_opt(const InputObjective& objective, std::span<const double> x,
                           double gamma, std::size_t iters, double lr) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ParameterError("direct_opt: gamma must be positive");
  }
  if (!(lr > 0.0)) throw ParameterError("direct_opt: lr must be positive");
  const std::size_t n = x.size();
  if (n == 0) throw ShapeError("direct_opt: empty input");

  Vector dx(n, gamma / std::sqrt(static_cast<double>(n)));
  Vector probe(n);
  auto eval = [&](const Vector& delta) {
    for (std::size_t i = 0; i < n; ++i) probe[i] = x[i] + delta[i];
    LossGrad lg = objective(probe);
    if (!std::isfinite(lg.loss)) throw AttackError("non-finite loss during ascent");
    if (lg.grad.size() != n) throw ShapeError("direct_opt: gradient shape mismatch");
    return lg;
  };
  auto project = [&](Vector& delta) {
    const double norm = norm2(delta);
    if (norm == 0.0 || !std::isfinite(norm)) {
      std::fill(delta.begin(), delta.end(), gamma / std::sqrt(static_cast<double>(n)));
    } else {
      for (double& v : delta) v *= gamma / norm;
    }
  };

  DirectOptResult result;
  if (iters > 0) {
    Vector zero(n, 0.0);
    const LossGrad first = eval(zero);
    if (norm2(first.grad) > 0.0) {
      dx = first.grad;
      project(dx);
    }
    LossGrad lg = eval(dx);
    result.losses.push_back(lg.loss);
    AdamState adam;
    for (std::size_t it = 1; it < iters; ++it) {
      Vector tangent = lg.grad;
      axpy(-dot(tangent, dx) / (gamma * gamma), dx, tangent);
      adam_ascent_step(dx, tangent, adam, lr);
      project(dx);
      lg = eval(dx);
      result.losses.push_back(lg.loss);
    }
  }
  result.x_adv.assign(x.begin(), x.end());
  axpy(1.0, dx, result.x_adv);
  return result;
}

LossGrad network_input_gradient(const Network& net, const Matrix& x, std::size_t label,
                                RngStream& rng, std::size_t samples) {
  if (samples == 0) throw ParameterError("samples must be positive");
  const Objective objective = Objective::cross_entropy(label);
  const bool noisy = std::any_of(net.layers.begin(), net.layers.end(),
                                 [](const LayerSpec& l) { return !l.noise.is_deterministic(); });
  LossGrad out;
  out.grad.assign(x.size(), 0.0);
  const std::size_t k = noisy ? samples : 1;
  for (std::size_t s = 0; s < k; ++s) {
    Matrix dx;
    BackwardOptions opts;
    opts.input_grad = &dx;
    if (noisy) {
      const Trace tr = forward(net, x, Mode::kSample, rng, objective);
      ndl_backward(net, tr, objective, opts);
      out.loss += tr.loss / static_cast<double>(k);
    } else {
      const Trace tr = forward(net, x, Mode::kDeterministic, rng, objective);
      sgl_backward(net, tr, objective, Surrogate::kErf, opts);
      out.loss += tr.loss;
    }
    axpy(1.0 / static_cast<double>(k), dx.data(), out.grad);
  }
  return out;
}

Matrix fgsm(const Network& net, const Matrix& x, std::size_t label, double gamma,
            RngStream& rng, std::size_t samples,
            std::optional<std::pair<double, double>> clamp) {
  check_gamma(gamma);
  const LossGrad lg = network_input_gradient(net, x, label, rng, samples);
  Matrix out(x.rows(), x.cols(), fgsm_step(x.data(), lg.grad, gamma));
  if (clamp) {
    for (double& v : out.data()) v = std::clamp(v, clamp->first, clamp->second);
  }
  return out;
}

Matrix direct_opt(const Network& net, const Matrix& x, std::size_t label,
                  double gamma, std::size_t iters, double lr, RngStream& rng,
                  std::size_t samples) {
  const InputObjective objective = [&](std::span<const double> flat) {
    const Matrix probe(x.rows(), x.cols(), Vector(flat.begin(), flat.end()));
    return network_input_gradient(net, probe, label, rng, samples);
  };
  DirectOptResult r = direct_opt(objective, x.data(), gamma, iters, lr);
  return Matrix(x.rows(), x.cols(), std::move(r.x_adv));
}

Matrix event_drop(const Matrix& events, double rho, RngStream& rng) {
  check_probability(rho, "rho");
  Matrix out = events;
  for (double& v : out.data()) {
    if (v != 0.0 && rng.uniform() < rho) v = 0.0;
  }
  return out;
}

std::vector<std::uint8_t> spike_flip_mask(std::size_t n, double beta, RngStream& rng) {
  check_probability(beta, "beta");
  std::vector<std::uint8_t> mask(n);
  for (auto& m : mask) m = rng.uniform() < beta ? 1 : 0;
  return mask;
}

std::vector<std::uint8_t> apply_flip_mask(std::span<const std::uint8_t> spikes,
                                          std::span<const std::uint8_t> mask) {
  if (spikes.size() != mask.size()) throw ShapeError("flip mask shape mismatch");
  std::vector<std::uint8_t> out(spikes.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (spikes[i] != 0) != (mask[i] != 0);
  return out;
}

std::vector<std::uint8_t> spike_flip(std::span<const std::uint8_t> spikes, double beta,
                                     RngStream& rng) {
  return apply_flip_mask(spikes, spike_flip_mask(spikes.size(), beta, rng));
}

std::vector<RobustnessRow> robustness_sweep(const Network& net,
                                            const std::string& model_kind,
                                            const SpikeDataset& data,
                                            InputCoding coding,
                                            const AttackConfig& base,
                                            std::span<const double> intensities,
                                            std::uint64_t seed, RngStream rng,
                                            std::size_t passes) {
  base.validate();
  const bool input_gradient_attack = base.method == AttackMethod::kFgsm ||
                                     base.method == AttackMethod::kDirectOpt;
  if (input_gradient_attack && coding == InputCoding::kPoisson) {
    throw ConfigError("FGSM and direct_opt apply to static inputs only; use event_drop");
  }
  const bool noisy = std::any_of(net.layers.begin(), net.layers.end(),
                                 [](const LayerSpec& l) { return !l.noise.is_deterministic(); });
  const Mode mode = noisy ? Mode::kSample : Mode::kDeterministic;

  std::vector<RobustnessRow> rows;
  for (std::size_t k = 0; k < intensities.size(); ++k) {
    const double level = intensities[k];
    const RngStream level_rng = rng.split(k);
    RobustnessRow row{to_string(base.method), level, model_kind, seed, 0.0, 0.0};
    EvalResult r;
    if (base.method == AttackMethod::kSpikeFlip) {
      check_probability(level, "beta");
      r = evaluate(net, data, mode, level_rng.split(0), level, passes);
    } else {
      SpikeDataset attacked = data;
      const RngStream attack_rng = level_rng.split(1);
      parallel_for(attacked.size(), [&](std::size_t i) {
        Sample& s = attacked.samples[i];
        RngStream srng = attack_rng.split(i);
        switch (base.method) {
          case AttackMethod::kFgsm:
            s.input = fgsm(net, s.input, s.label, level, srng, base.grad_samples,
                           std::make_pair(0.0, 1.0));
            break;
          case AttackMethod::kDirectOpt:
            if (level > 0.0) {
              s.input = direct_opt(net, s.input, s.label, level, base.do_iters,
                                   base.do_lr, srng, base.grad_samples);
            }
            break;
          case AttackMethod::kEventDrop:
            s.input = event_drop(s.input, level, srng);
            break;
          case AttackMethod::kSpikeFlip:
            break;
        }
      });
      r = evaluate(net, attacked, mode, level_rng.split(0), 0.0, passes);
    }
    row.loss = r.loss;
    row.accuracy = r.accuracy;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace nsnn
