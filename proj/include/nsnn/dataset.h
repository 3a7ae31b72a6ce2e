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

#ifndef NSNN_DATASET_H_
#define NSNN_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nsnn/numerics.h"

namespace nsnn {

struct Sample {
  Matrix input;  // T x input_dim
  std::size_t label = 0;
};

struct SpikeDataset {
  std::vector<Sample> samples;
  std::size_t n_classes = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

enum class InputCoding {
  kPoisson,  // binary events, Bernoulli per step
  kStatic,   // analog intensities (spike count / T), repeated every step
};

std::string to_string(InputCoding coding);
InputCoding input_coding_from_string(const std::string& name);

// Class-prototype rate-coded classification task.
struct SyntheticTaskSpec {
  std::size_t n_classes = 4;
  std::size_t input_dim = 64;
  std::size_t steps = 10;
  double rate_hi = 0.8;
  double rate_lo = 0.1;
  std::size_t n_train = 512;
  std::size_t n_test = 256;
  // Per-sample probability of flipping each prototype bit.
  double jitter = 0.0;
  // Fraction of input neurons marked "hi" in a prototype.
  double prototype_density = 0.5;
  InputCoding coding = InputCoding::kPoisson;

  // Throws ConfigError on invalid fields.
  void validate() const;
};

struct SyntheticTask {
  SpikeDataset train;
  SpikeDataset test;
  std::vector<std::vector<std::uint8_t>> prototypes;  // [class][input]
};

SyntheticTask generate_task(const SyntheticTaskSpec& spec, RngStream rng);

}  // namespace nsnn

#endif  // NSNN_DATASET_H_
