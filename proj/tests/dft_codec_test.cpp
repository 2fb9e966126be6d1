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

#include "forta/dft_codec.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "gtest/gtest.h"
#include "test_support.hpp"

namespace forta::codec {
namespace {

using forta::testing::random_complex;
using forta::testing::random_positions;
using forta::testing::relative_error;

DftCodec make_codec(std::size_t n = 30, std::size_t k = 10) {
  return DftCodec(CodecParams::with_defaults(n, k));
}

// Direct evaluation of sum_t m_t x^t, independent of the codec tables.
Complex horner(const ComplexVector& m, Complex x) {
  Complex acc(0.0, 0.0);
  for (auto it = m.rbegin(); it != m.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Complex omega(std::size_t i, std::size_t n) {  // 1-based i
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
}

TEST(CodecParamsTest, RejectsInvalid) {
  EXPECT_THROW(DftCodec(CodecParams::with_defaults(10, 10)), InvalidArgument);
  EXPECT_THROW(DftCodec(CodecParams::with_defaults(10, 0)), InvalidArgument);
  CodecParams p = CodecParams::with_defaults(30, 10);
  p.rank_tolerance = 1.5;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = CodecParams::with_defaults(30, 10);
  EXPECT_EQ(p.max_correctable(), 10u);
  EXPECT_DOUBLE_EQ(p.match_tolerance(), std::numbers::pi / 30.0);
}

TEST(EncodeTest, ConstantPolynomial) {
  const auto codec = make_codec();
  ComplexVector m(10, Complex(0.0, 0.0));
  m[0] = Complex(2.5, -1.0);
  const Codeword c = codec.encode(m);
  ASSERT_EQ(c.values.size(), 30u);
  for (const Complex& v : c.values) EXPECT_EQ(v, m[0]);
}

TEST(EncodeTest, IdentityPolynomialGivesRootsOfUnity) {
  const auto codec = make_codec();
  ComplexVector m(10, Complex(0.0, 0.0));
  m[1] = 1.0;
  const Codeword c = codec.encode(m);
  for (std::size_t p = 0; p < 30; ++p) EXPECT_LT(std::abs(c.values[p] - omega(p + 1, 30)), 1e-14);
}

TEST(EncodeTest, MatchesHornerEvaluation) {
  const auto codec = make_codec();
  Rng rng(7);
  const ComplexVector m = random_complex(10, rng);
  const Codeword c = codec.encode(m);
  for (std::size_t p = 0; p < 30; ++p)
    EXPECT_LT(std::abs(c.values[p] - horner(m, omega(p + 1, 30))), 1e-12);
}

TEST(EncodeTest, RejectsWrongLength) {
  const auto codec = make_codec();
  EXPECT_THROW(codec.encode(ComplexVector(9)), InvalidArgument);
  EXPECT_THROW(codec.syndromes(Codeword{ComplexVector(29)}), InvalidArgument);
}

TEST(SyndromesTest, CleanCodewordVanishes) {
  const auto codec = make_codec();
  Rng rng(11);
  const Codeword c = codec.encode(random_complex(10, rng, 5.0));
  const ComplexVector s = codec.syndromes(c);
  ASSERT_EQ(s.size(), 20u);
  for (const Complex& x : s) EXPECT_LE(std::abs(x), 1e-9 * norm(c.values));
}

TEST(SyndromesTest, ZeroWordGivesZeroSyndromes) {
  const auto codec = make_codec();
  for (const Complex& x : codec.syndromes(Codeword{ComplexVector(30)})) EXPECT_EQ(x, Complex(0.0, 0.0));
}

TEST(SyndromesTest, SingleErrorIsGeometricInConjugateRoot) {
  const auto codec = make_codec();
  Rng rng(3);
  const Codeword clean = codec.encode(random_complex(10, rng));
  const Complex e(0.7, -0.2);
  for (std::size_t p = 0; p < 30; ++p) {
    Codeword r = clean;
    r.values[p] += e;
    const ComplexVector s = codec.syndromes(r);
    // Direct DFT of an impulse e at position p over frequencies k..n-1.
    for (std::size_t q = 0; q < s.size(); ++q) {
      const Complex expected = e / 30.0 * std::pow(std::conj(omega(p + 1, 30)), static_cast<int>(10 + q));
      EXPECT_LT(std::abs(s[q] - expected), 1e-13);
    }
  }
}

TEST(SyndromesTest, Linearity) {
  const auto codec = make_codec();
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const ComplexVector x = random_complex(30, rng), y = random_complex(30, rng);
    const Complex a = random_complex(1, rng)[0], b = random_complex(1, rng)[0];
    ComplexVector mix(30);
    for (std::size_t i = 0; i < 30; ++i) mix[i] = a * x[i] + b * y[i];
    const ComplexVector sx = codec.syndromes({x}), sy = codec.syndromes({y});
    const ComplexVector sm = codec.syndromes({mix});
    ComplexVector expected(sx.size());
    for (std::size_t q = 0; q < sx.size(); ++q) expected[q] = a * sx[q] + b * sy[q];
    EXPECT_LT(relative_error(sm, expected), 1e-12);
  }
}

TEST(ErrorCountTest, ZeroSyndromes) {
  const auto codec = make_codec();
  EXPECT_EQ(codec.estimate_error_count(ComplexVector(20)), 0u);
}

TEST(ErrorCountTest, ThreeInjectedErrors) {
  const auto codec = make_codec();
  Rng rng(17);
  std::uniform_real_distribution<double> mag(1e-3, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  for (int trial = 0; trial < 100; ++trial) {
    Codeword r = codec.encode(random_complex(10, rng));
    for (std::size_t p : random_positions(30, 3, rng)) r.values[p] += std::polar(mag(rng), phase(rng));
    EXPECT_EQ(codec.estimate_error_count(codec.syndromes(r)), 3u);
  }
}

TEST(ErrorCountTest, PrecisionNoiseRegimeCountsZero) {
  const auto codec = make_codec();
  Rng rng(19);
  Codeword r = codec.encode(random_complex(10, rng));
  r.values[4] += 1e-14;
  EXPECT_EQ(codec.estimate_error_count(codec.syndromes(r)), 0u);
}

TEST(ErrorCountTest, OverCapacityIsDetectedAsFailure) {
  const auto codec = make_codec();
  Rng rng(23);
  std::uniform_real_distribution<double> mag(0.1, 10.0);
  int detected = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Codeword r = codec.encode(random_complex(10, rng));
    for (std::size_t p : random_positions(30, 11, rng)) r.values[p] += mag(rng);
    EXPECT_LE(codec.estimate_error_count(codec.syndromes(r)), 10u);
    const DecodeOutcome out = codec.try_decode(r);
    if (out.status != DecodeStatus::kOk) {
      ++detected;
      if (out.status == DecodeStatus::kUnreliable)
        EXPECT_GT(out.result.residual, 1e3 * 1e-9 * norm(r.values));
    }
  }
  EXPECT_EQ(detected, 200);
}

TEST(LocateTest, ExhaustiveSinglePosition) {
  const auto codec = make_codec();
  Rng rng(29);
  for (std::size_t p = 0; p < 30; ++p) {
    Codeword r = codec.encode(random_complex(10, rng));
    r.values[p] += Complex(0.3, 0.4);
    EXPECT_EQ(codec.locate_errors(codec.syndromes(r), 1), PositionSet{p});
  }
}

TEST(LocateTest, ThreeKnownPositions) {
  const auto codec = make_codec();
  Rng rng(31);
  // Users 3, 11 and 29 in 1-based numbering.
  const PositionSet planted{2, 10, 28};
  std::uniform_real_distribution<double> mag(1e-3, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    Codeword r = codec.encode(random_complex(10, rng));
    for (std::size_t p : planted) r.values[p] += mag(rng);
    EXPECT_EQ(codec.locate_errors(codec.syndromes(r), 3), planted);
  }
}

TEST(LocateTest, RejectsCountOutOfRange) {
  const auto codec = make_codec();
  EXPECT_THROW(codec.locate_errors(ComplexVector(20, 1.0), 0), InvalidArgument);
  EXPECT_THROW(codec.locate_errors(ComplexVector(20, 1.0), 11), InvalidArgument);
}

TEST(LocateTest, UnmatchedRootRaisesLocalizationFailure) {
  CodecParams params = CodecParams::with_defaults(30, 10);
  params.root_match_tolerance = 1e-6;
  const DftCodec codec(params);
  // A geometric sequence with ratio halfway between two conjugate roots.
  const Complex z = std::polar(1.0, -2.0 * std::numbers::pi * 4.5 / 30.0);
  ComplexVector syn(20);
  for (std::size_t q = 0; q < 20; ++q) syn[q] = std::pow(z, static_cast<int>(q));
  try {
    codec.locate_errors(syn, 1);
    FAIL() << "expected LocalizationFailure";
  } catch (const LocalizationFailure& e) {
    EXPECT_LT(std::abs(e.unmatched_root() - z), 1e-9);
  }
}

TEST(DecodeTest, CleanCodewordIsFixedPoint) {
  const auto codec = make_codec();
  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexVector m = random_complex(10, rng, 3.0);
    const Codeword c = codec.encode(m);
    const DecodeResult r = codec.decode(c);
    EXPECT_LT(relative_error(r.message, m), 1e-12);
    EXPECT_TRUE(r.error_positions.empty());
    EXPECT_LE(r.residual, 1e-8 * norm(c.values));
    for (double e : r.position_energies) EXPECT_LE(e, codec.params().noise_floor);
  }
}

TEST(DecodeTest, TenErrorsAtCapacity) {
  const auto codec = make_codec();
  Rng rng(41);
  std::uniform_real_distribution<double> mag(0.1, 10.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  int ok = 0;
  const int trials = 300;
  for (int trial = 0; trial < trials; ++trial) {
    const ComplexVector m = random_complex(10, rng);
    Codeword r = codec.encode(m);
    const PositionSet planted = random_positions(30, 10, rng);
    for (std::size_t p : planted) r.values[p] += std::polar(mag(rng), phase(rng));
    const DecodeOutcome out = codec.try_decode(r);
    if (out.status == DecodeStatus::kOk && out.result.error_positions == planted &&
        relative_error(out.result.message, m) <= 1e-5)
      ++ok;
  }
  EXPECT_GE(ok, trials * 99 / 100);
}

TEST(DecodeTest, ErasureHintsExtendCapacity) {
  const auto codec = make_codec();
  Rng rng(43);
  std::uniform_real_distribution<double> mag(0.1, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    const ComplexVector m = random_complex(10, rng);
    Codeword r = codec.encode(m);
    const PositionSet planted = random_positions(30, 11, rng);
    for (std::size_t p : planted) r.values[p] += mag(rng);
    const PositionSet hints(planted.begin(), planted.begin() + 4);
    const DecodeResult out = codec.decode(r, hints);
    EXPECT_EQ(out.error_positions, planted);
    EXPECT_EQ(out.erasures_used, 4u);
    EXPECT_LT(relative_error(out.message, m), 1e-5);
  }
}

TEST(DecodeTest, CleanHintsAreHarmless) {
  const auto codec = make_codec();
  Rng rng(47);
  const ComplexVector m = random_complex(10, rng);
  Codeword r = codec.encode(m);
  r.values[5] += 2.0;
  const DecodeResult out = codec.decode(r, PositionSet{0, 1, 2});
  EXPECT_EQ(out.error_positions, PositionSet{5});
  EXPECT_LT(relative_error(out.message, m), 1e-9);
  PositionSet too_many(21);
  std::iota(too_many.begin(), too_many.end(), 0);
  EXPECT_THROW(codec.decode(r, too_many), InvalidArgument);
}

TEST(DecodeTest, SubFloorCorruptionLeavesEvidenceOnly) {
  const auto codec = make_codec();
  Rng rng(53);
  const ComplexVector m = random_complex(10, rng);
  Codeword r = codec.encode(m);
  const PositionSet planted{4, 17};
  for (std::size_t p : planted) r.values[p] += 2e-10;
  const DecodeResult out = codec.decode(r);
  EXPECT_TRUE(out.error_positions.empty());
  for (std::size_t p = 0; p < 30; ++p) {
    const bool hit = p == 4 || p == 17;
    if (hit) EXPECT_NEAR(out.position_energies[p], 2e-10, 1e-12);
    else EXPECT_EQ(out.position_energies[p], 0.0);
    EXPECT_LE(out.position_energies[p], codec.params().noise_floor);
  }
}

// Roundtrip property over random error patterns within capacity.
TEST(DecodeProperty, RoundtripWithinCapacity) {
  const auto codec = make_codec();
  Rng rng(59);
  std::uniform_int_distribution<std::size_t> count(0, 10);
  std::uniform_real_distribution<double> log_mag(std::log(100 * 1e-9), std::log(10.0));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  int ok = 0;
  const int trials = 300;
  for (int trial = 0; trial < trials; ++trial) {
    const ComplexVector m = random_complex(10, rng);
    Codeword r = codec.encode(m);
    for (std::size_t p : random_positions(30, count(rng), rng))
      r.values[p] += std::polar(std::exp(log_mag(rng)), phase(rng));
    const DecodeOutcome out = codec.try_decode(r);
    if (out.status == DecodeStatus::kOk && relative_error(out.result.message, m) <= 1e-5) ++ok;
    EXPECT_LE(out.result.error_positions.size(), 10u);
  }
  EXPECT_GE(ok, trials * 99 / 100);
}

}  // namespace
}  // namespace forta::codec
