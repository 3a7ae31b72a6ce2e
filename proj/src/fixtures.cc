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

#include "nsnn/fixtures.h"

namespace nsnn {

Network tiny_222(const NoiseModel& noise) {
  Network net;
  LayerSpec hidden;
  hidden.weights = Matrix::from_rows({{0.8, 0.4}, {0.5, 0.7}});
  hidden.bias = {0.1, 0.3};
  hidden.noise = noise;
  net.layers.push_back(hidden);
  net.readout.weights = Matrix::from_rows({{1.0, -0.5}, {-0.7, 0.9}});
  net.readout.bias = {0.0, 0.1};
  return net;
}

Matrix tiny_222_inputs(std::size_t steps) {
  Matrix x(steps, 2);
  for (std::size_t t = 0; t < steps; ++t) x(t, t % 2) = 1.0;
  return x;
}

}  // namespace nsnn
