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

#include "nsnn/dataset.h"

#include <cmath>

#include "nsnn/errors.h"

namespace nsnn {

std::string to_string(InputCoding coding) {
  return coding == InputCoding::kStatic ? "static" : "poisson";
}

InputCoding input_coding_from_string(const std::string& name) {
  if (name == "poisson") return InputCoding::kPoisson;
  if (name == "static") return InputCoding::kStatic;
  throw ConfigError("unknown input coding '" + name + "'");
}

void SyntheticTaskSpec::validate() const {
  auto is_prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (n_classes < 2) throw ConfigError("task needs at least 2 classes");
  if (input_dim == 0 || steps == 0) throw ConfigError("task dims must be > 0");
  if (!is_prob(rate_hi) || !is_prob(rate_lo) || !is_prob(jitter) ||
      !is_prob(prototype_density)) {
    throw ConfigError("task rates, jitter and density must lie in [0, 1]");
  }
  if (!(rate_hi > rate_lo)) throw ConfigError("task requires rate_hi > rate_lo");
  if (n_train == 0) throw ConfigError("task needs n_train > 0");
}

namespace {

Sample draw_sample(const SyntheticTaskSpec& spec,
                   const std::vector<std::uint8_t>& prototype, std::size_t label,
                   RngStream& rng) {
  Sample s;
  s.label = label;
  s.input = Matrix(spec.steps, spec.input_dim);
  std::vector<double> rate(spec.input_dim);
  for (std::size_t i = 0; i < spec.input_dim; ++i) {
    bool hi = prototype[i] != 0;
    if (spec.jitter > 0.0 && rng.uniform() < spec.jitter) hi = !hi;
    rate[i] = hi ? spec.rate_hi : spec.rate_lo;
  }
  for (std::size_t t = 0; t < spec.steps; ++t) {
    for (std::size_t i = 0; i < spec.input_dim; ++i) {
      s.input(t, i) = rng.uniform() < rate[i] ? 1.0 : 0.0;
    }
  }
  if (spec.coding == InputCoding::kStatic) {
    std::vector<double> level(spec.input_dim, 0.0);
    for (std::size_t t = 0; t < spec.steps; ++t) {
      axpy(1.0 / static_cast<double>(spec.steps), s.input.row(t), level);
    }
    for (std::size_t t = 0; t < spec.steps; ++t) {
      std::copy(level.begin(), level.end(), s.input.row(t).begin());
    }
  }
  return s;
}

SpikeDataset draw_split(const SyntheticTaskSpec& spec,
                        const std::vector<std::vector<std::uint8_t>>& prototypes,
                        std::size_t n, RngStream rng) {
  SpikeDataset ds;
  ds.n_classes = spec.n_classes;
  ds.samples.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    // Balanced labels in round-robin order; each sample has its own stream.
    const std::size_t label = k % spec.n_classes;
    RngStream sample_rng = rng.split(k);
    ds.samples.push_back(draw_sample(spec, prototypes[label], label, sample_rng));
  }
  return ds;
}

}  // namespace

SyntheticTask generate_task(const SyntheticTaskSpec& spec, RngStream rng) {
  spec.validate();
  SyntheticTask task;
  RngStream proto_rng = rng.split(0);
  task.prototypes.assign(spec.n_classes,
                         std::vector<std::uint8_t>(spec.input_dim, 0));
  for (auto& proto : task.prototypes) {
    for (auto& bit : proto) bit = proto_rng.uniform() < spec.prototype_density;
  }
  task.train = draw_split(spec, task.prototypes, spec.n_train, rng.split(1));
  task.test = draw_split(spec, task.prototypes, spec.n_test, rng.split(2));
  return task;
}

}  // namespace nsnn
