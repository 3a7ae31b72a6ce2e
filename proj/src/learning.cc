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

#include "nsnn/learning.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "nsnn/errors.h"
#include "nsnn/parallel.h"

namespace nsnn {

GradientSet GradientSet::zeros_like(const Network& net) {
  GradientSet g;
  g.layers.reserve(net.layers.size());
  for (const auto& l : net.layers) {
    g.layers.push_back({Matrix(l.out_dim(), l.in_dim()), Vector(l.out_dim(), 0.0)});
  }
  g.readout = {Matrix(net.readout.weights.rows(), net.readout.weights.cols()),
               Vector(net.readout.bias.size(), 0.0)};
  return g;
}

std::size_t GradientSet::size() const {
  std::size_t n = readout.weights.size() + readout.bias.size();
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

Vector GradientSet::flatten() const {
  Vector flat;
  flat.reserve(size());
  for (const auto& l : layers) {
    flat.insert(flat.end(), l.weights.data().begin(), l.weights.data().end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  flat.insert(flat.end(), readout.weights.data().begin(), readout.weights.data().end());
  flat.insert(flat.end(), readout.bias.begin(), readout.bias.end());
  return flat;
}

GradientSet GradientSet::unflatten(const Network& like, std::span<const double> flat) {
  GradientSet g = zeros_like(like);
  if (flat.size() != g.size()) throw ShapeError("unflatten: length mismatch");
  auto it = flat.begin();
  auto take = [&](std::vector<double>& dst) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(dst.size()), dst.begin());
    it += static_cast<std::ptrdiff_t>(dst.size());
  };
  for (auto& l : g.layers) {
    take(l.weights.data());
    take(l.bias);
  }
  take(g.readout.weights.data());
  take(g.readout.bias);
  return g;
}

bool GradientSet::all_finite() const {
  const Vector flat = flatten();
  return std::all_of(flat.begin(), flat.end(), [](double v) { return std::isfinite(v); });
}

GradientSet& GradientSet::operator+=(const GradientSet& other) {
  if (other.layers.size() != layers.size()) throw ShapeError("GradientSet +=");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    axpy(1.0, other.layers[i].weights.data(), layers[i].weights.data());
    axpy(1.0, other.layers[i].bias, layers[i].bias);
  }
  axpy(1.0, other.readout.weights.data(), readout.weights.data());
  axpy(1.0, other.readout.bias, readout.bias);
  return *this;
}

GradientSet& GradientSet::operator*=(double s) {
  for (auto& l : layers) {
    for (double& v : l.weights.data()) v *= s;
    for (double& v : l.bias) v *= s;
  }
  for (double& v : readout.weights.data()) v *= s;
  for (double& v : readout.bias) v *= s;
  return *this;
}

Vector flatten_parameters(const Network& net) {
  GradientSet view;
  for (const auto& l : net.layers) view.layers.push_back({l.weights, l.bias});
  view.readout = {net.readout.weights, net.readout.bias};
  return view.flatten();
}

void assign_parameters(Network& net, std::span<const double> flat) {
  const GradientSet g = GradientSet::unflatten(net, flat);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    net.layers[i].weights = g.layers[i].weights;
    net.layers[i].bias = g.layers[i].bias;
  }
  net.readout.weights = g.readout.weights;
  net.readout.bias = g.readout.bias;
}

std::string to_string(LearningRule rule) {
  return rule == LearningRule::kSgl ? "sgl" : "ndl";
}

LearningRule learning_rule_from_string(const std::string& name) {
  if (name == "ndl") return LearningRule::kNdl;
  if (name == "sgl") return LearningRule::kSgl;
  throw ParameterError("unknown learning rule '" + name + "'");
}

namespace {

using PseudoDerivative = double (*)(const LayerSpec&, double);

double ndl_factor(const LayerSpec& layer, double x) {
  return noise_pdf(layer.noise, x);
}

double erf_factor(const LayerSpec&, double x) { return sg_erf(x); }

PseudoDerivative factor_for(LearningRule rule) {
  return rule == LearningRule::kNdl ? &ndl_factor : &erf_factor;
}

void check_trace(const Network& net, const Trace& trace) {
  net.validate();
  if (trace.steps() == 0) throw ShapeError("empty trace");
  if (trace.logits.rows() != trace.steps() ||
      trace.logits.cols() != net.output_dim()) {
    throw ShapeError("trace logits do not match network readout");
  }
  for (const auto& step : trace.records) {
    if (step.size() != net.layers.size()) {
      throw ShapeError("trace layer count does not match network");
    }
    for (std::size_t l = 0; l < step.size(); ++l) {
      const auto& r = step[l];
      const auto& layer = net.layers[l];
      if (r.u_pre.size() != layer.out_dim() || r.spikes.size() != layer.out_dim() ||
          r.input.size() != layer.in_dim()) {
        throw ShapeError("trace record shape does not match layer " +
                         std::to_string(l));
      }
    }
  }
}

Vector scaled_input(const LayerSpec& layer, const Vector& x) {
  if (layer.input_scale == 1.0 && layer.input_shift == 0.0) return x;
  Vector xs = x;
  for (double& v : xs) v = layer.input_scale * v + layer.input_shift;
  return xs;
}

// Shared reverse sweep. d_logits (T x classes) and/or d_output_spikes
// (T x dim(L)) seed the gradient; either may be null.
GradientSet reverse_sweep(const Network& net, const Trace& trace,
                          const Matrix* d_logits, const Matrix* d_output_spikes,
                          PseudoDerivative pseudo, const BackwardOptions& options) {
  check_trace(net, trace);
  const std::size_t steps = trace.steps();
  const std::size_t depth = net.layers.size();
  GradientSet grads = GradientSet::zeros_like(net);

  std::vector<std::vector<Vector>> d_spikes(steps, std::vector<Vector>(depth));
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t l = 0; l < depth; ++l) {
      d_spikes[t][l].assign(net.layers[l].out_dim(), 0.0);
    }
  }

  if (d_logits) {
    for (std::size_t t = 0; t < steps; ++t) {
      const auto& spikes = trace.at(t, depth - 1).spikes;
      const Vector o(spikes.begin(), spikes.end());
      add_outer(grads.readout.weights, d_logits->row(t), o);
      axpy(1.0, d_logits->row(t), grads.readout.bias);
      axpy(1.0, matvec_transposed(net.readout.weights, d_logits->row(t)),
           d_spikes[t][depth - 1]);
    }
  }
  if (d_output_spikes) {
    if (d_output_spikes->rows() != steps ||
        d_output_spikes->cols() != net.layers.back().out_dim()) {
      throw ShapeError("output spike gradient shape mismatch");
    }
    for (std::size_t t = 0; t < steps; ++t) {
      axpy(1.0, d_output_spikes->row(t), d_spikes[t][depth - 1]);
    }
  }
  if (options.input_grad) *options.input_grad = Matrix(steps, net.input_dim());

  // dLoss / d(membrane carried into step t+1), per layer.
  std::vector<Vector> d_carry(depth);
  for (std::size_t l = 0; l < depth; ++l) d_carry[l].assign(net.layers[l].out_dim(), 0.0);

  for (std::size_t t = steps; t-- > 0;) {
    for (std::size_t l = depth; l-- > 0;) {
      const LayerSpec& layer = net.layers[l];
      const LayerRecord& rec = trace.at(t, l);
      const std::size_t n = layer.out_dim();
      Vector du(n, 0.0);
      for (std::size_t m = 0; m < n; ++m) {
        const double o = rec.spikes[m];
        double g_o = d_spikes[t][l][m];
        if (!options.detach_reset) {
          g_o += (layer.lif.u_reset - rec.u_pre[m]) * d_carry[l][m];
        }
        double g_u = (1.0 - o) * d_carry[l][m];
        if (g_o != 0.0) g_u += g_o * pseudo(layer, rec.u_pre[m] - layer.lif.v_th);
        du[m] = g_u;
      }
      for (std::size_t m = 0; m < n; ++m) d_carry[l][m] = layer.lif.tau * du[m];

      add_outer(grads.layers[l].weights, du, scaled_input(layer, rec.input));
      axpy(1.0, du, grads.layers[l].bias);

      if (l > 0 || options.input_grad) {
        Vector dx = matvec_transposed(layer.weights, du);
        if (layer.input_scale != 1.0) {
          for (double& v : dx) v *= layer.input_scale;
        }
        if (l > 0) {
          axpy(1.0, dx, d_spikes[t][l - 1]);
        } else {
          std::copy(dx.begin(), dx.end(), options.input_grad->row(t).begin());
        }
      }
    }
  }
  return grads;
}

GradientSet backward_with_objective(const Network& net, const Trace& trace,
                                    const Objective& objective,
                                    PseudoDerivative pseudo,
                                    const BackwardOptions& options) {
  check_trace(net, trace);
  const SequenceLoss sl = sequence_loss(net.loss_mode, trace.logits, objective);
  return reverse_sweep(net, trace, &sl.d_logits, nullptr, pseudo, options);
}

// Sum / sum-of-squares accumulator producing mean and standard error.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(std::size_t dim) : sum_(dim, 0.0), sumsq_(dim, 0.0) {}

  void add(std::span<const double> x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum_[i] += x[i];
      sumsq_[i] += x[i] * x[i];
    }
    ++n_;
  }

  void merge(const MomentAccumulator& other) {
    axpy(1.0, other.sum_, sum_);
    axpy(1.0, other.sumsq_, sumsq_);
    n_ += other.n_;
  }

  GradientEstimate finish(const Network& like) const {
    const double n = static_cast<double>(n_);
    Vector mean(sum_.size()), se(sum_.size(), 0.0);
    for (std::size_t i = 0; i < sum_.size(); ++i) {
      mean[i] = sum_[i] / n;
      if (n_ > 1) {
        const double var = std::max(0.0, (sumsq_[i] - n * mean[i] * mean[i]) / (n - 1.0));
        se[i] = std::sqrt(var / n);
      }
    }
    return {GradientSet::unflatten(like, mean), GradientSet::unflatten(like, se), n_};
  }

 private:
  Vector sum_;
  Vector sumsq_;
  std::size_t n_ = 0;
};

template <typename PerSample>
GradientEstimate monte_carlo(const Network& net, RngStream& rng,
                             std::size_t n_samples, PerSample per_sample) {
  if (n_samples == 0) throw ParameterError("n_samples must be positive");
  const RngStream base = rng.split(rng.next_u64());
  const std::size_t dim = GradientSet::zeros_like(net).size();
  const std::size_t chunks = std::min<std::size_t>(n_samples, 256);
  std::vector<MomentAccumulator> partial(chunks, MomentAccumulator(dim));
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * n_samples / chunks;
    const std::size_t end = (c + 1) * n_samples / chunks;
    for (std::size_t i = begin; i < end; ++i) {
      RngStream sample_rng = base.split(i);
      partial[c].add(per_sample(sample_rng).flatten());
    }
  });
  MomentAccumulator total(dim);
  for (const auto& p : partial) total.merge(p);
  return total.finish(net);
}

}  // namespace

GradientSet ndl_backward(const Network& net, const Trace& trace,
                         const Objective& objective, const BackwardOptions& options) {
  return backward_with_objective(net, trace, objective, &ndl_factor, options);
}

GradientSet sgl_backward(const Network& net, const Trace& trace,
                         const Objective& objective, Surrogate,
                         const BackwardOptions& options) {
  return backward_with_objective(net, trace, objective, &erf_factor, options);
}

GradientSet backward_from_spike_grads(const Network& net, const Trace& trace,
                                      const Matrix& d_output_spikes,
                                      LearningRule rule,
                                      const BackwardOptions& options) {
  return reverse_sweep(net, trace, nullptr, &d_output_spikes, factor_for(rule), options);
}

GradientEstimate local_marg_gradient(const Network& net, const Matrix& inputs,
                                     const Objective& objective, RngStream& rng,
                                     std::size_t n_samples) {
  net.validate();
  const std::size_t vars = inputs.rows() * net.spiking_units();
  if (vars > kMaxFlipVariables) {
    throw CapacityError("local marginalization over " + std::to_string(vars) +
                        " neuron-steps exceeds guard " +
                        std::to_string(kMaxFlipVariables));
  }
  const std::size_t steps = inputs.rows();
  const std::size_t depth = net.layers.size();

  auto per_sample = [&](RngStream& sample_rng) {
    const NoiseTape tape = draw_noise_tape(net, steps, Mode::kSample, sample_rng);
    const Trace trace = forward_with_tape(net, inputs, tape, objective);
    GradientSet g = GradientSet::zeros_like(net);

    // The readout enters the loss directly; its gradient is pathwise.
    const SequenceLoss sl = sequence_loss(net.loss_mode, trace.logits, objective);
    for (std::size_t t = 0; t < steps; ++t) {
      const auto& s = trace.at(t, depth - 1).spikes;
      const Vector o(s.begin(), s.end());
      add_outer(g.readout.weights, sl.d_logits.row(t), o);
      axpy(1.0, sl.d_logits.row(t), g.readout.bias);
    }

    // d u^t_{l,m} / d theta_l given all spikes: eligibility traces that decay
    // by tau and are cleared by the neuron's own reset.
    std::vector<Matrix> elig_w(depth);
    std::vector<Vector> elig_b(depth);
    for (std::size_t l = 0; l < depth; ++l) {
      elig_w[l] = Matrix(net.layers[l].out_dim(), net.layers[l].in_dim());
      elig_b[l].assign(net.layers[l].out_dim(), 0.0);
    }

    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t l = 0; l < depth; ++l) {
        const LayerSpec& layer = net.layers[l];
        const LayerRecord& rec = trace.at(t, l);
        const Vector x = scaled_input(layer, rec.input);
        for (std::size_t m = 0; m < layer.out_dim(); ++m) {
          const double keep =
              t == 0 ? 0.0 : layer.lif.tau * (1.0 - trace.at(t - 1, l).spikes[m]);
          auto row = elig_w[l].row(m);
          for (std::size_t j = 0; j < row.size(); ++j) row[j] = x[j] + keep * row[j];
          elig_b[l][m] = 1.0 + keep * elig_b[l][m];

          const double density = noise_pdf(layer.noise, rec.u_pre[m] - layer.lif.v_th);
          if (density == 0.0) continue;
          const SpikeOverride flip{t, l, m};
          const double flipped =
              forward_with_tape(net, inputs, tape, objective, &flip).loss;
          const double delta = trace.loss - flipped;
          const double coef = (2.0 * rec.spikes[m] - 1.0) * density * delta;
          if (coef == 0.0) continue;
          axpy(coef, row, g.layers[l].weights.row(m));
          g.layers[l].bias[m] += coef * elig_b[l][m];
        }
      }
    }
    return g;
  };
  return monte_carlo(net, rng, n_samples, per_sample);
}

GradientEstimate ndl_gradient_estimate(const Network& net, const Matrix& inputs,
                                       const Objective& objective,
                                       RngStream& rng, std::size_t n_samples) {
  return monte_carlo(net, rng, n_samples, [&](RngStream& sample_rng) {
    const Trace trace = forward(net, inputs, Mode::kSample, sample_rng, objective);
    return ndl_backward(net, trace, objective);
  });
}

GradientSet exact_gradient(const Network& net, const Matrix& inputs,
                           const Objective& objective, double h) {
  if (!(h > 0.0)) throw ParameterError("finite-difference step must be positive");
  const Vector params = flatten_parameters(net);
  // Surface capacity errors before spawning workers.
  (void)expected_loss(net, inputs, objective);
  Vector grad(params.size(), 0.0);
  parallel_for(params.size(), [&](std::size_t i) {
    Network probe = net;
    Vector p = params;
    p[i] = params[i] + h;
    assign_parameters(probe, p);
    const double up = expected_loss(probe, inputs, objective);
    p[i] = params[i] - h;
    assign_parameters(probe, p);
    const double down = expected_loss(probe, inputs, objective);
    grad[i] = (up - down) / (2.0 * h);
  });
  return GradientSet::unflatten(net, grad);
}

namespace {

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

void check_rule(const Network& net, LearningRule rule) {
  if (rule != LearningRule::kNdl) return;
  for (const auto& l : net.layers) {
    if (l.noise.is_deterministic()) {
      throw ParameterError("NDL training requires a stochastic noise family");
    }
  }
}

}  // namespace

EvalResult evaluate(const Network& net, const SpikeDataset& data, Mode mode,
                    RngStream rng, double flip_beta, std::size_t passes) {
  if (data.empty()) return {};
  if (passes == 0) throw ParameterError("evaluate: passes must be positive");
  std::vector<double> losses(data.size(), 0.0);
  std::vector<std::uint8_t> hits(data.size(), 0);
  parallel_for(data.size(), [&](std::size_t i) {
    const Sample& s = data.samples[i];
    const Objective objective = Objective::cross_entropy(s.label);
    RngStream sample_rng = rng.split(i);
    Vector logits(net.output_dim(), 0.0);
    double loss = 0.0;
    for (std::size_t p = 0; p < passes; ++p) {
      const Trace tr = forward(net, s.input, mode, sample_rng, objective, flip_beta);
      axpy(1.0 / static_cast<double>(passes), tr.mean_logits(), logits);
      loss += tr.loss / static_cast<double>(passes);
    }
    losses[i] = loss;
    hits[i] = argmax(logits) == s.label ? 1 : 0;
  });
  EvalResult r;
  r.loss = std::accumulate(losses.begin(), losses.end(), 0.0) /
           static_cast<double>(data.size());
  r.accuracy = static_cast<double>(std::accumulate(hits.begin(), hits.end(), 0)) /
               static_cast<double>(data.size());
  return r;
}

TrainResult train(Network net, const SpikeDataset& train_set,
                  const SpikeDataset& test_set, const TrainOptions& options,
                  RngStream rng) {
  if (train_set.empty()) throw ParameterError("training set is empty");
  if (options.batch_size == 0) throw ParameterError("batch size must be positive");
  net.validate();
  check_rule(net, options.rule);

  const Mode mode =
      options.rule == LearningRule::kNdl ? Mode::kSample : Mode::kDeterministic;
  const std::size_t n = train_set.size();
  const std::size_t batches = (n + options.batch_size - 1) / options.batch_size;
  Optimizer optimizer(options.optimizer, options.epochs * batches);
  Vector params = flatten_parameters(net);

  TrainResult result;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const double epoch_lr = optimizer.current_rate();
    const RngStream epoch_rng = rng.split(epoch);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    RngStream shuffle_rng = epoch_rng.split(0);
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(shuffle_rng.next_u64() % i);
      std::swap(order[i - 1], order[j]);
    }

    double loss_sum = 0.0;
    std::size_t correct = 0;
    const RngStream sample_base = epoch_rng.split(1);
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * options.batch_size;
      const std::size_t end = std::min(n, begin + options.batch_size);
      const std::size_t count = end - begin;
      std::vector<Vector> grads(count);
      std::vector<double> losses(count);
      std::vector<std::uint8_t> hits(count);
      parallel_for(count, [&](std::size_t k) {
        const Sample& s = train_set.samples[order[begin + k]];
        const Objective objective = Objective::cross_entropy(s.label);
        RngStream sample_rng = sample_base.split(begin + k);
        const Trace tr = forward(net, s.input, mode, sample_rng, objective);
        const GradientSet g = options.rule == LearningRule::kNdl
                                  ? ndl_backward(net, tr, objective)
                                  : sgl_backward(net, tr, objective);
        grads[k] = g.flatten();
        losses[k] = tr.loss;
        hits[k] = argmax(tr.mean_logits()) == s.label ? 1 : 0;
      });
      Vector batch_grad(params.size(), 0.0);
      for (std::size_t k = 0; k < count; ++k) {
        if (!std::isfinite(losses[k])) {
          throw TrainingError("non-finite training loss", epoch);
        }
        axpy(1.0 / static_cast<double>(count), grads[k], batch_grad);
        loss_sum += losses[k];
        correct += hits[k];
      }
      optimizer.apply(params, batch_grad);
      assign_parameters(net, params);
    }

    const EvalResult test =
        evaluate(net, test_set, mode, epoch_rng.split(2));
    const double wall =
        options.record_wall_time
            ? std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - start).count()
            : 0.0;
    result.metrics.push_back({epoch, "train", loss_sum / static_cast<double>(n),
                              static_cast<double>(correct) / static_cast<double>(n),
                              epoch_lr, wall});
    result.metrics.push_back({epoch, "test", test.loss, test.accuracy, epoch_lr, wall});
    if (!std::isfinite(test.loss)) throw TrainingError("non-finite test loss", epoch);
  }
  result.net = std::move(net);
  return result;
}

}  // namespace nsnn
