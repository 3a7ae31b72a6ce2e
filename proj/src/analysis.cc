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

#include "nsnn/analysis.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nsnn/errors.h"
#include "nsnn/parallel.h"

namespace nsnn {

void TrialEnsemble::validate() const {
  if (counts.empty()) return;
  const std::size_t n = counts.front().size();
  for (const auto& c : counts) {
    if (c.size() != n) throw ShapeError("trial count vectors differ in length");
    for (double v : c) {
      if (!(v >= 0.0) || v != std::floor(v)) {
        throw ParameterError("spike counts must be non-negative integers");
      }
    }
  }
  if (!predictions.empty()) {
    if (predictions.size() != counts.size()) {
      throw ShapeError("one prediction per trial required");
    }
    for (const auto& p : predictions) {
      if (p.size() != predictions.front().size()) {
        throw ShapeError("prediction vectors differ in length");
      }
    }
  }
}

std::vector<std::optional<double>> fano_factor(const TrialEnsemble& ensemble) {
  ensemble.validate();
  const std::size_t trials = ensemble.counts.size();
  if (trials < 2) throw InsufficientDataError("Fano factor needs at least 2 trials");
  const std::size_t neurons = ensemble.counts.front().size();
  std::vector<std::optional<double>> ff(neurons);
  for (std::size_t m = 0; m < neurons; ++m) {
    double mean = 0.0;
    for (const auto& c : ensemble.counts) mean += c[m];
    mean /= static_cast<double>(trials);
    if (mean == 0.0) continue;
    double ss = 0.0;
    for (const auto& c : ensemble.counts) ss += (c[m] - mean) * (c[m] - mean);
    ff[m] = ss / static_cast<double>(trials - 1) / mean;
  }
  return ff;
}

std::optional<double> mean_defined(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

double prediction_similarity(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ShapeError("prediction vectors differ in length");
  const double np = norm2(p);
  const double nq = norm2(q);
  if (np == 0.0 || nq == 0.0) throw DegenerateError("cosine of a zero vector");
  return std::clamp(dot(p, q) / (np * nq), -1.0, 1.0);
}

double mean_pairwise_similarity(const std::vector<Vector>& predictions) {
  if (predictions.size() < 2) throw InsufficientDataError("need at least 2 predictions");
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    for (std::size_t j = i + 1; j < predictions.size(); ++j) {
      sum += prediction_similarity(predictions[i], predictions[j]);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("pearson_r: length mismatch");
  if (x.size() < 3) throw InsufficientDataError("pearson_r needs at least 3 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateError("pearson_r: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Vector psp_filter(std::span<const double> train, double tau_s) {
  if (!(tau_s > 1.0)) throw ParameterError("psp tau_s must exceed 1");
  const double keep = 1.0 - 1.0 / tau_s;
  Vector psp(train.size());
  double prev = 0.0;
  for (std::size_t t = 0; t < train.size(); ++t) {
    prev = keep * prev + train[t] / tau_s;
    psp[t] = prev;
  }
  return psp;
}

namespace {

void check_pair(const SpikeTrainPair& pair) {
  if (pair.predicted.rows() != pair.recorded.rows() ||
      pair.predicted.cols() != pair.recorded.cols()) {
    throw ShapeError("spike train shapes differ");
  }
  if (pair.predicted.cols() == 0) throw ShapeError("spike trains are empty");
}

// d_tau = PSP(pred)_tau - PSP(rec)_tau, neurons x T.
Matrix psp_difference(const SpikeTrainPair& pair) {
  Matrix diff(pair.predicted.rows(), pair.predicted.cols());
  for (std::size_t n = 0; n < diff.rows(); ++n) {
    const Vector a = psp_filter(pair.predicted.row(n), pair.psp_tau);
    const Vector b = psp_filter(pair.recorded.row(n), pair.psp_tau);
    for (std::size_t t = 0; t < diff.cols(); ++t) diff(n, t) = a[t] - b[t];
  }
  return diff;
}

}  // namespace

double psp_mmd_loss(const SpikeTrainPair& pair) {
  check_pair(pair);
  const Matrix diff = psp_difference(pair);
  const std::size_t steps = diff.cols();
  double loss = 0.0;
  // Each tau appears in the inner sum of every t >= tau.
  for (std::size_t tau = 0; tau < steps; ++tau) {
    double sq = 0.0;
    for (std::size_t n = 0; n < diff.rows(); ++n) sq += diff(n, tau) * diff(n, tau);
    loss += static_cast<double>(steps - tau) * sq;
  }
  return loss / static_cast<double>(steps);
}

Matrix psp_mmd_gradient(const SpikeTrainPair& pair) {
  check_pair(pair);
  const Matrix diff = psp_difference(pair);
  const std::size_t steps = diff.cols();
  const double keep = 1.0 - 1.0 / pair.psp_tau;
  Matrix grad(diff.rows(), steps);
  for (std::size_t n = 0; n < diff.rows(); ++n) {
    double acc = 0.0;
    for (std::size_t t = steps; t-- > 0;) {
      acc = keep * acc + 2.0 * static_cast<double>(steps - t) * diff(n, t) /
                             static_cast<double>(steps);
      grad(n, t) = acc / pair.psp_tau;
    }
  }
  return grad;
}

std::optional<ConfidenceInterval> bootstrap_pearson_ci(std::span<const double> x,
                                                       std::span<const double> y,
                                                       std::size_t resamples,
                                                       double level, RngStream rng) {
  if (x.size() != y.size()) throw ShapeError("bootstrap: length mismatch");
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("level must lie in (0, 1)");
  const std::size_t n = x.size();
  Vector stats;
  stats.reserve(resamples);
  Vector bx(n), by(n);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = static_cast<std::size_t>(rng.next_u64() % n);
      bx[i] = x[j];
      by[i] = y[j];
    }
    try {
      stats.push_back(pearson_r(bx, by));
    } catch (const DegenerateError&) {
    } catch (const InsufficientDataError&) {
    }
  }
  if (stats.size() < 2) return std::nullopt;
  std::sort(stats.begin(), stats.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(stats.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, stats.size() - 1);
    return stats[lo] + (pos - static_cast<double>(lo)) * (stats[hi] - stats[lo]);
  };
  const double alpha = 0.5 * (1.0 - level);
  return ConfidenceInterval{quantile(alpha), quantile(1.0 - alpha)};
}

CodingReport coding_report(const Network& net, const SpikeDataset& data,
                           std::size_t n_trials, RngStream rng,
                           std::size_t bootstrap_resamples) {
  if (n_trials < 2) throw InsufficientDataError("coding report needs n_trials >= 2");
  if (data.empty()) throw InsufficientDataError("coding report needs samples");
  net.validate();
  const bool noisy = std::any_of(net.layers.begin(), net.layers.end(),
                                 [](const LayerSpec& l) { return !l.noise.is_deterministic(); });
  const Mode mode = noisy ? Mode::kSample : Mode::kDeterministic;

  CodingReport report;
  report.n_samples = data.size();
  report.n_trials = n_trials;
  report.mean_fano.assign(data.size(), 0.0);
  report.mean_cosine.assign(data.size(), 0.0);
  const RngStream trials_rng = rng.split(0);
  parallel_for(data.size(), [&](std::size_t i) {
    RngStream srng = trials_rng.split(i);
    TrialEnsemble ens;
    for (std::size_t k = 0; k < n_trials; ++k) {
      const Trace tr = forward(net, data.samples[i].input, mode, srng);
      ens.counts.push_back(tr.output_counts());
      ens.predictions.push_back(softmax(tr.mean_logits()));
    }
    const auto ff = mean_defined(fano_factor(ens));
    report.mean_fano[i] = ff ? *ff : std::numeric_limits<double>::quiet_NaN();
    report.mean_cosine[i] = mean_pairwise_similarity(ens.predictions);
  });

  Vector x, y;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (std::isnan(report.mean_fano[i])) continue;
    x.push_back(report.mean_fano[i]);
    y.push_back(report.mean_cosine[i]);
  }
  try {
    report.pearson = pearson_r(x, y);
    report.ci = bootstrap_pearson_ci(x, y, bootstrap_resamples, 0.95, rng.split(1));
  } catch (const DegenerateError&) {
    report.degenerate = true;
  } catch (const InsufficientDataError&) {
    report.degenerate = true;
  }
  return report;
}

}  // namespace nsnn
