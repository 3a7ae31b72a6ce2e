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

#ifndef NSNN_ANALYSIS_H_
#define NSNN_ANALYSIS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsnn/dataset.h"
#include "nsnn/network.h"
#include "nsnn/numerics.h"

namespace nsnn {

// Repeated trials of one stimulus: spike counts of the output neurons and
// prediction vectors, one entry per trial.
struct TrialEnsemble {
  std::vector<Vector> counts;
  std::vector<Vector> predictions;

  // Throws ShapeError on ragged trials, ParameterError on negative or
  // non-integer counts.
  void validate() const;
};

// Per-neuron Var[n] / mean(n) with the unbiased (n - 1) variance. Neurons
// with zero mean count are empty. Throws InsufficientDataError for fewer
// than 2 trials.
std::vector<std::optional<double>> fano_factor(const TrialEnsemble& ensemble);

// Arithmetic mean over the defined entries; empty if none is defined.
std::optional<double> mean_defined(const std::vector<std::optional<double>>& values);

// Cosine similarity. Throws DegenerateError for a zero vector.
double prediction_similarity(std::span<const double> p, std::span<const double> q);

// Mean cosine similarity over all unordered pairs of prediction vectors.
double mean_pairwise_similarity(const std::vector<Vector>& predictions);

// Pearson correlation. Requires equal lengths >= 3; throws DegenerateError
// for zero variance.
double pearson_r(std::span<const double> x, std::span<const double> y);

// PSP_t = (1 - 1/tau_s) PSP_{t-1} + y_t / tau_s with PSP_0 = 0.
Vector psp_filter(std::span<const double> train, double tau_s = 2.0);

// Binary trains stored neurons x T.
struct SpikeTrainPair {
  Matrix predicted;
  Matrix recorded;
  double psp_tau = 2.0;
};

// (1/T) sum_t sum_{tau <= t} |PSP(pred)_tau - PSP(rec)_tau|^2.
double psp_mmd_loss(const SpikeTrainPair& pair);
// Gradient of psp_mmd_loss with respect to `predicted` (neurons x T).
Matrix psp_mmd_gradient(const SpikeTrainPair& pair);

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool excludes_zero() const { return lower > 0.0 || upper < 0.0; }
};

// Percentile bootstrap interval of pearson_r over resampled pairs.
// Degenerate resamples are skipped.
std::optional<ConfidenceInterval> bootstrap_pearson_ci(std::span<const double> x,
                                                       std::span<const double> y,
                                                       std::size_t resamples,
                                                       double level, RngStream rng);

struct CodingReport {
  // Per sample; mean_fano is NaN when no output neuron fired in any trial.
  Vector mean_fano;
  Vector mean_cosine;
  std::optional<double> pearson;
  std::optional<ConfidenceInterval> ci;
  bool degenerate = false;
  std::size_t n_samples = 0;
  std::size_t n_trials = 0;
  std::string prediction_space = "softmax";
};

// Repeats the forward n_trials times per sample, takes spike counts of the
// last spiking layer and softmax(mean logits) as the prediction, and
// correlates mean Fano factor with mean pairwise prediction similarity
// across samples. A report whose correlation is undefined is degenerate.
CodingReport coding_report(const Network& net, const SpikeDataset& data,
                           std::size_t n_trials, RngStream rng,
                           std::size_t bootstrap_resamples = 2000);

}  // namespace nsnn

#endif  // NSNN_ANALYSIS_H_
