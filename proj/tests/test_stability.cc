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

#include <doctest.h>

#include <cmath>

#include "nsnn/errors.h"
#include "nsnn/stability.h"

using namespace nsnn;

namespace {

ErrorPath exact_path(double rate, double horizon, std::size_t n) {
  ErrorPath p;
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = horizon * static_cast<double>(k) / static_cast<double>(n);
    p.times.push_back(t);
    p.error_norms.push_back(std::exp(rate * t));
  }
  p.initial_error = Vector{1.0};
  return p;
}

SdeSystem system(double a1, double a2, double b2) {
  SdeSystem s;
  s.a1 = a1;
  s.a2 = a2;
  s.b2 = b2;
  return s;
}

}  // namespace

TEST_CASE("noise-free error decays exponentially") {
  RngStream rng(1, 0);
  const double dt = 1e-3;
  const ErrorPath p = simulate_pair(system(-1.0, 0.0, 0.0), Vector{1.0}, Vector{1.0}, dt,
                                    2000, rng, ErrorDiffusion::kConforming);
  CHECK(p.times.size() == 2001);
  CHECK(p.times.back() == doctest::Approx(2.0));
  CHECK(p.error_norms.back() == doctest::Approx(std::exp(-2.0)).epsilon(2e-3));
  CHECK(p.error_norms.back() == doctest::Approx(std::pow(1.0 - dt, 2000)).epsilon(1e-12));
}

TEST_CASE("zero initial error stays zero") {
  RngStream rng(2, 0);
  for (ErrorDiffusion v : {ErrorDiffusion::kPrintedDt, ErrorDiffusion::kWiener,
                           ErrorDiffusion::kConforming}) {
    SdeSystem sys = system(-1.0, 1.0, 0.5);
    sys.dim = 2;
    const ErrorPath p = simulate_pair(sys, Vector{1.0, 2.0},
                                      Vector{0.0, 0.0}, 1e-2, 100, rng, v);
    for (double n : p.error_norms) CHECK(n == 0.0);
  }
}

TEST_CASE("recording stride keeps the final step") {
  RngStream rng(3, 0);
  const ErrorPath p = simulate_pair(system(-1.0, 0.5, 0.0), Vector{1.0}, Vector{1.0}, 1e-2,
                                    25, rng, ErrorDiffusion::kConforming, 10);
  CHECK(p.times.size() == 4);
  CHECK(p.times[2] == doctest::Approx(0.2));
  CHECK(p.times.back() == doctest::Approx(0.25));
}

TEST_CASE("estimator is exact on exponential paths") {
  std::vector<ErrorPath> paths(5, exact_path(-2.0, 10.0, 1000));
  const LyapunovEstimate e = estimate_lyapunov(paths);
  CHECK(e.mean == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(e.standard_error < 1e-12);
  CHECK(e.per_path.size() == 5);
}

TEST_CASE("estimator error cases") {
  CHECK_THROWS_AS(estimate_lyapunov({exact_path(-1.0, 1.0, 10)}), InsufficientDataError);
  std::vector<ErrorPath> paths(2, exact_path(-1.0, 1.0, 10));
  paths[1].error_norms.back() = 0.0;
  CHECK_THROWS_AS(estimate_lyapunov(paths), DegenerateError);
  paths[1] = exact_path(-1.0, 2.0, 10);
  CHECK_THROWS_AS(estimate_lyapunov(paths), ParameterError);
}

TEST_CASE("bound values") {
  LyapunovBounds b = theorem1_bounds(-2.0, 0.0, 0.0);
  CHECK(b.lower == -2.0);
  CHECK(b.upper == -2.0);
  b = theorem1_bounds(-2.0, 1.0, 0.0);
  CHECK(b.lower == -2.5);
  CHECK(b.upper == -2.5);
  b = theorem1_bounds(-1.0, 1.0, 0.5);
  CHECK(b.lower == doctest::Approx(-2.75));
  CHECK(b.upper == doctest::Approx(-0.875));
  CHECK_THROWS_AS(theorem1_bounds(-1.0, -0.1, 0.0), ParameterError);
  CHECK_THROWS_AS(theorem1_bounds(-1.0, 0.0, -0.1), ParameterError);
}

TEST_CASE("bounds contain the conforming exponent and collapse without multiplicative noise") {
  RngStream rng(4, 0);
  for (int i = 0; i < 1000; ++i) {
    const double a1 = -5.0 + 5.0 * rng.uniform();
    const double a2 = 2.0 * rng.uniform();
    const double b2 = 2.0 * rng.uniform();
    const LyapunovBounds b = theorem1_bounds(a1, a2, b2);
    const double le = closed_form_lyapunov(a1, a2, b2, ErrorDiffusion::kConforming);
    CHECK(b.lower <= b.upper);
    CHECK(b.lower <= le);
    CHECK(le <= b.upper);
    const LyapunovBounds sharp = theorem1_bounds(a1, a2, 0.0);
    CHECK(sharp.lower == sharp.upper);
    if (a2 > 0.0) CHECK(sharp.upper < theorem1_bounds(a1, 0.0, 0.0).lower);
    CHECK(sharp.lower == doctest::Approx(closed_form_lyapunov(a1, a2, 0.0,
                                                              ErrorDiffusion::kConforming)));
  }
}

TEST_CASE("conforming ensemble matches its closed form") {
  for (double a2 : {0.0, 1.0}) {
    const SdeSystem sys = system(-2.0, a2, 0.0);
    const double dt = 1e-3;
    const auto paths = simulate_ensemble(sys, Vector{1.0}, Vector{1.0}, dt, 20000, 40,
                                         RngStream(5, 0), ErrorDiffusion::kConforming, 20);
    const LyapunovEstimate e = estimate_lyapunov(paths);
    const double cf = closed_form_lyapunov(-2.0, a2, 0.0, ErrorDiffusion::kConforming);
    CHECK(std::abs(e.mean - cf) < 4.0 * e.standard_error + 10.0 * dt * std::abs(cf));
  }
}

TEST_CASE("shared increments cancel without multiplicative noise") {
  const double dt = 1e-3;
  for (ErrorDiffusion v : {ErrorDiffusion::kPrintedDt, ErrorDiffusion::kWiener}) {
    RngStream rng(9, 0);
    const ErrorPath p =
        simulate_pair(system(-2.0, 1.0, 0.0), Vector{0.3}, Vector{1.0}, dt, 1000, rng, v, 100);
    for (std::size_t k = 0; k < p.times.size(); ++k) {
      const double ref = std::exp(-2.0 * p.times[k]);
      CHECK(std::abs(p.error_norms[k] - ref) <= 10.0 * dt * ref);
    }
  }
}

TEST_CASE("halving dt moves the conforming estimate by less than two standard errors") {
  const SdeSystem sys = system(-1.0, 0.5, 0.25);
  auto estimate = [&](double dt) {
    const auto steps = static_cast<std::size_t>(std::llround(20.0 / dt));
    return estimate_lyapunov(simulate_ensemble(sys, Vector{1.0}, Vector{1.0}, dt, steps, 50,
                                               RngStream(10, 0),
                                               ErrorDiffusion::kConforming, 10));
  };
  const LyapunovEstimate a = estimate(1e-2);
  const LyapunovEstimate b = estimate(5e-3);
  CHECK(std::abs(a.mean - b.mean) < 2.0 * std::hypot(a.standard_error, b.standard_error));
}

TEST_CASE("printed-dt error converges at first order in dt") {
  const SdeSystem sys = system(-1.0, 0.5, 0.5);
  const double cf = closed_form_lyapunov(-1.0, 0.5, 0.5, ErrorDiffusion::kPrintedDt);
  auto error_at = [&](double dt) {
    const auto steps = static_cast<std::size_t>(std::llround(4.0 / dt));
    const auto paths = simulate_ensemble(sys, Vector{1.0}, Vector{1.0}, dt, steps, 2,
                                         RngStream(6, 0), ErrorDiffusion::kPrintedDt, 1);
    return std::abs(estimate_lyapunov(paths).mean - cf);
  };
  const double e1 = error_at(1e-2);
  const double e2 = error_at(5e-3);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("simulation error cases") {
  RngStream rng(7, 0);
  CHECK_THROWS_AS(simulate_pair(system(-1.0, -1.0, 0.0), Vector{1.0}, Vector{1.0}, 1e-2, 10, rng),
                  ParameterError);
  CHECK_THROWS_AS(simulate_pair(system(-1.0, 0.0, 0.0), Vector{1.0, 1.0}, Vector{1.0}, 1e-2, 10,
                                rng),
                  ShapeError);
  CHECK_THROWS_AS(simulate_pair(system(-1.0, 0.0, 0.0), Vector{1.0}, Vector{1.0}, 0.0, 10, rng),
                  ParameterError);
  CHECK_THROWS_AS(simulate_pair(system(1e3, 0.0, 0.0), Vector{1.0}, Vector{1.0}, 1.0, 1000, rng),
                  DivergenceError);
  CHECK(error_diffusion_from_string(to_string(ErrorDiffusion::kWiener)) ==
        ErrorDiffusion::kWiener);
  CHECK_THROWS_AS(error_diffusion_from_string("ito"), ConfigError);
}

TEST_CASE("small sweep rows carry bounds and containment") {
  StabilitySweepConfig cfg;
  cfg.a1_values = {-1.0};
  cfg.a2_values = {0.5};
  cfg.b2_values = {0.0, 0.25};
  cfg.horizon = 10.0;
  cfg.dt = 1e-2;
  cfg.n_paths = 20;
  const auto rows = stability_sweep(cfg, RngStream(8, 0));
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].b2 == 0.25);
  CHECK(rows[1].bounds.lower == theorem1_bounds(-1.0, 0.5, 0.25).lower);
  CHECK(rows[0].contained);
  const auto again = stability_sweep(cfg, RngStream(8, 0));
  CHECK(again[1].estimate.mean == rows[1].estimate.mean);
  cfg.n_paths = 1;
  CHECK_THROWS_AS(stability_sweep(cfg, RngStream(8, 0)), ConfigError);
}
