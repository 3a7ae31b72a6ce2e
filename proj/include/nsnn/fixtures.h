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

#ifndef NSNN_FIXTURES_H_
#define NSNN_FIXTURES_H_

#include <cstddef>

#include "nsnn/network.h"
#include "nsnn/numerics.h"

namespace nsnn {

// Tiny net: 2 inputs, one spiking layer of 2 Noisy LIF neurons, readout to 2
// classes. Small enough for exhaustive enumeration at T <= 12.
Network tiny_222(const NoiseModel& noise = NoiseModel::gaussian(0.3));

// Alternating binary inputs (1, 0), (0, 1), ... for T steps.
Matrix tiny_222_inputs(std::size_t steps);

}  // namespace nsnn

#endif  // NSNN_FIXTURES_H_
