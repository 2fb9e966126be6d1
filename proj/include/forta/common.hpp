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

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace forta {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;
using RealVector = std::vector<double>;

// Users and codeword positions are stored 0-based. Position p belongs to
// user p + 1 and is evaluated at omega_{p+1} = exp(2*pi*i*(p+1)/N). CSV
// exports and diagnostics print the 1-based user number.
using UserIndex = std::size_t;
using PositionSet = std::vector<std::size_t>;

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ProtocolViolation : public std::runtime_error {
 public:
  ProtocolViolation(const std::string& what, UserIndex user)
      : std::runtime_error(what), user_(user) {}
  UserIndex user() const { return user_; }

 private:
  UserIndex user_;
};

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IngestionError : public std::runtime_error {
 public:
  IngestionError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent stream seeds from a root
// seed plus a tuple of stream labels (round, user, purpose, ...).
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root,
                                 std::initializer_list<std::uint64_t> labels) {
  std::uint64_t s = mix_seed(root);
  for (std::uint64_t label : labels) s = mix_seed(s ^ mix_seed(label + 0x51ed27ULL));
  return s;
}

inline double squared_norm(const RealVector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline double norm(const ComplexVector& v) {
  double s = 0.0;
  for (const Complex& x : v) s += std::norm(x);
  return std::sqrt(s);
}

}  // namespace forta
