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

#ifndef NSNN_STABILITY_H_
#define NSNN_STABILITY_H_

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nsnn/numerics.h"

namespace nsnn {

// du = f(u, t) dt + g(u) dW with f(u, t) = a1 u + B1 I(t).
struct SdeSystem {
  double a1 = -1.0;
  double a2 = 0.0;  // additive noise amplitude
  double b2 = 0.0;  // multiplicative noise amplitude
  Matrix coupling;  // B1, dim x dim; empty means zero
  std::function<Vector(double)> input;  // I(t); empty means zero
  std::size_t dim = 1;

  // Throws ParameterError for negative amplitudes, ShapeError for a
  // non-square or mis-sized coupling.
  void validate() const;
  Vector drift(const Vector& u, double t) const;
};

// How the diffusion difference enters the error dynamics.
enum class ErrorDiffusion {
  // g = a2 + b2 f, difference multiplied by dt (the equation as printed).
  kPrintedDt,
  // g = a2 + b2 f, difference multiplied by the shared Wiener increment.
  kWiener,
  // State-proportional diffusion g(u) = a2 diag(u) dW + b2 diag(u) dW' with
  // two independent shared Wiener processes. This form satisfies the norm
  // hypotheses of the bound theorem for every (a2, b2).
  kConforming,
};

std::string to_string(ErrorDiffusion variant);
ErrorDiffusion error_diffusion_from_string(const std::string& name);

struct ErrorPath {
  Vector times;
  Vector error_norms;
  Vector initial_error;
};

// Euler-Maruyama on u and u + eps with identical Wiener increments.
// Records every `record_every` steps plus the final one. Throws
// DivergenceError on a non-finite state.
ErrorPath simulate_pair(const SdeSystem& sys, const Vector& u0, const Vector& eps0,
                        double dt, std::size_t steps, RngStream& rng,
                        ErrorDiffusion variant = ErrorDiffusion::kPrintedDt,
                        std::size_t record_every = 1);

struct LyapunovEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  Vector per_path;
};

// Per path (log|eps_T| - log|eps_burn|) / (T - t_burn). Throws
// InsufficientDataError for fewer than 2 paths and DegenerateError on a zero
// norm.
LyapunovEstimate estimate_lyapunov(const std::vector<ErrorPath>& paths,
                                   double burn_in_fraction = 0.2);

struct LyapunovBounds {
  double lower = 0.0;
  double upper = 0.0;
};

LyapunovBounds theorem1_bounds(double a1, double a2, double b2);

// Exact sample Lyapunov exponent of the linear error equation of `variant`.
double closed_form_lyapunov(double a1, double a2, double b2, ErrorDiffusion variant);

struct StabilitySweepConfig {
  std::vector<double> a1_values{-2.0, -1.0};
  std::vector<double> a2_values{0.0, 0.5, 1.0};
  std::vector<double> b2_values{0.0, 0.25, 0.5};
  std::vector<ErrorDiffusion> variants{ErrorDiffusion::kConforming};
  double dt = 1e-3;
  double horizon = 50.0;
  std::size_t n_paths = 100;
  std::size_t dim = 1;
  double burn_in = 0.2;
  double slack = 0.15;
};

struct SweepRow {
  double a1 = 0.0;
  double a2 = 0.0;
  double b2 = 0.0;
  ErrorDiffusion variant = ErrorDiffusion::kConforming;
  LyapunovBounds bounds;
  double closed_form = 0.0;
  LyapunovEstimate estimate;
  double dt = 0.0;
  double horizon = 0.0;
  std::size_t n_paths = 0;
  bool contained = false;  // LE within [LB - slack, UB + slack]
};

// Path ensemble (parallel over paths) for every grid point and variant.
std::vector<SweepRow> stability_sweep(const StabilitySweepConfig& config, RngStream rng);

// Ensemble for one system; each path uses rng.split(path index).
std::vector<ErrorPath> simulate_ensemble(const SdeSystem& sys, const Vector& u0,
                                         const Vector& eps0, double dt,
                                         std::size_t steps, std::size_t n_paths,
                                         const RngStream& rng, ErrorDiffusion variant,
                                         std::size_t record_every);

}  // namespace nsnn

#endif  // NSNN_STABILITY_H_
