// Copyright 2026 The FORTA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "forta/common.hpp"

namespace forta::testing {

inline ComplexVector random_complex(std::size_t len, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale / std::sqrt(2.0));
  ComplexVector v(len);
  for (auto& x : v) x = Complex(g(rng), g(rng));
  return v;
}

inline RealVector random_real(std::size_t len, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  RealVector v(len);
  for (auto& x : v) x = g(rng);
  return v;
}

// `count` distinct positions out of [0, n), sorted.
inline PositionSet random_positions(std::size_t n, std::size_t count, Rng& rng) {
  PositionSet all(n);
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

inline double relative_error(const ComplexVector& got, const ComplexVector& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    num += std::norm(got[i] - want[i]);
    den += std::norm(want[i]);
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

inline double relative_error(const RealVector& got, const RealVector& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    num += (got[i] - want[i]) * (got[i] - want[i]);
    den += want[i] * want[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

}  // namespace forta::testing
