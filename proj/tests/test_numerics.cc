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
#include <set>

#include "nsnn/errors.h"
#include "nsnn/numerics.h"
#include "nsnn/parallel.h"

using namespace nsnn;

TEST_CASE("matmul small product and shape errors") {
  const Matrix a = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  const Matrix b = Matrix::from_rows({{7, 8}, {9, 10}, {11, 12}});
  const Matrix c = matmul(a, b);
  CHECK(c == Matrix::from_rows({{58, 64}, {139, 154}}));
  CHECK_THROWS_AS(matmul(a, a), ShapeError);
  CHECK(matmul(a, Matrix::identity(3)) == a);
}

TEST_CASE("matvec and transposed matvec") {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
  const Vector y = matvec(a, Vector{1, -1});
  CHECK(y == Vector{-1, -1, -1});
  const Vector z = matvec_transposed(a, Vector{1, 0, 1});
  CHECK(z == Vector{6, 8});
  CHECK_THROWS_AS(matvec(a, Vector{1, 2, 3}), ShapeError);
}

TEST_CASE("add_outer, dot, norm2, axpy") {
  Matrix m(2, 2);
  add_outer(m, Vector{1, 2}, Vector{3, 4}, 0.5);
  CHECK(m == Matrix::from_rows({{1.5, 2}, {3, 4}}));
  CHECK(dot(Vector{1, 2, 3}, Vector{4, 5, 6}) == 32);
  CHECK(norm2(Vector{3, 4}) == 5);
  Vector y{1, 1};
  axpy(2.0, Vector{1, -1}, y);
  CHECK(y == Vector{3, -1});
}

TEST_CASE("ragged rows are rejected") {
  CHECK_THROWS_AS(Matrix::from_rows({{1, 2}, {3}}), ShapeError);
  CHECK_THROWS_AS(Matrix(2, 2, Vector{1, 2, 3}), ShapeError);
}

TEST_CASE("softmax is stable for large logits") {
  const Vector p = softmax(Vector{1000, 1000});
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));
  const Vector q = softmax(Vector{-1000, 0});
  CHECK(q[1] == doctest::Approx(1.0));
  CHECK(std::isfinite(q[0]));
}

TEST_CASE("softmax cross-entropy value and gradient against finite differences") {
  const Vector z{0.3, -1.2, 2.0, 0.1};
  const LossGrad lg = softmax_cross_entropy(z, 2);
  // Reference value straight from the definition.
  double denom = 0.0;
  for (double v : z) denom += std::exp(v);
  CHECK(lg.loss == doctest::Approx(-std::log(std::exp(2.0) / denom)).epsilon(1e-14));
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    Vector up = z, down = z;
    up[i] += 1e-6;
    down[i] -= 1e-6;
    const double fd = (softmax_cross_entropy(up, 2).loss -
                       softmax_cross_entropy(down, 2).loss) / 2e-6;
    CHECK(lg.grad[i] == doctest::Approx(fd).epsilon(1e-7));
    sum += lg.grad[i];
  }
  CHECK(std::abs(sum) < 1e-15);
  CHECK_THROWS_AS(softmax_cross_entropy(z, 4), ShapeError);
  CHECK_THROWS_AS(softmax_cross_entropy(Vector{}, 0), ShapeError);
}

TEST_CASE("philox4x32-10 known answers") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) ==
        A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                   {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                   {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("rng streams replay and split independently of consumption") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream fresh(42, 7);
  CHECK(a.split(3) == fresh.split(3));
  CHECK(fresh.split(3).next_u64() != fresh.split(4).next_u64());
  CHECK(RngStream(1, 0).next_u64() != RngStream(2, 0).next_u64());

  std::set<std::uint64_t> seen;
  RngStream s(9, 0);
  for (int i = 0; i < 10000; ++i) seen.insert(s.next_u64());
  CHECK(seen.size() == 10000);
}

TEST_CASE("uniform and gaussian moments") {
  RngStream rng(123, 0);
  const int n = 200000;
  double su = 0, su2 = 0, sg = 0, sg2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    su2 += u * u;
    const double g = rng.gaussian(2.0);
    sg += g;
    sg2 += g * g;
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.005));
  CHECK(su2 / n - (su / n) * (su / n) == doctest::Approx(1.0 / 12).epsilon(0.01));
  CHECK(std::abs(sg / n) < 0.02);
  CHECK(sg2 / n == doctest::Approx(4.0).epsilon(0.01));
  CHECK_THROWS_AS(rng.gaussian(-1.0), ParameterError);
  CHECK(rng.gaussian(0.0) == 0.0);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw ParameterError("boom");
                  }),
                  ParameterError);
  CHECK(worker_count() >= 1);
}
