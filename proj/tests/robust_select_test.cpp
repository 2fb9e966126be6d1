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

#include "forta/robust_select.hpp"

#include <gtest/gtest.h>

#include <limits>

#include "forta/analog_sharing.hpp"
#include "test_support.hpp"

namespace forta::robust {
namespace {

using forta::testing::random_positions;
using forta::testing::random_real;

std::vector<RealVector> gaussian_points(std::size_t n, std::size_t d, Rng& rng) {
  std::vector<RealVector> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(random_real(d, rng));
  return pts;
}

std::vector<RealVector> pair_diffs_of(const std::vector<RealVector>& pts) {
  std::vector<RealVector> diffs;
  for (auto [j, k] : sharing::all_pairs(pts.size())) {
    RealVector d(pts[j].size());
    for (std::size_t l = 0; l < d.size(); ++l) d[l] = pts[j][l] - pts[k][l];
    diffs.push_back(d);
  }
  return diffs;
}

// Minimum over every (N-A-2)-subset of the other users, summed in index order.
double brute_force_score(const DistanceMatrix& dist, std::size_t i, std::size_t size) {
  const std::size_t n = static_cast<std::size_t>(dist.rows());
  std::vector<std::size_t> others;
  for (std::size_t j = 0; j < n; ++j)
    if (j != i) others.push_back(j);
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << others.size()); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != size) continue;
    double s = 0.0;
    for (std::size_t b = 0; b < others.size(); ++b)
      if (mask & (1u << b)) s += dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(others[b]));
    best = std::min(best, s);
  }
  return best;
}

TEST(RuleTest, RoundTripsNames) {
  for (Rule r : {Rule::kFedAvg, Rule::kKrum, Rule::kModifiedKrum})
    EXPECT_EQ(parse_rule(to_string(r)), r);
  EXPECT_THROW(parse_rule("median"), InvalidArgument);
}

TEST(DistanceTest, ZeroAndUnitDiffs) {
  std::vector<RealVector> diffs(6, RealVector(3, 0.0));
  EXPECT_EQ(distances(diffs, 4).norm(), 0.0);
  diffs[sharing::pair_index(1, 3, 4)] = {0.0, 1.0, 0.0};
  const DistanceMatrix d = distances(diffs, 4);
  EXPECT_EQ(d(1, 3), 1.0);
  EXPECT_EQ(d(3, 1), 1.0);
  diffs.pop_back();
  EXPECT_THROW(distances(diffs, 4), InvalidArgument);
}

TEST(DistanceTest, MatchesDirectComputation) {
  Rng rng(1);
  const auto pts = gaussian_points(12, 20, rng);
  const DistanceMatrix a = distances(pair_diffs_of(pts), 12);
  const DistanceMatrix b = direct_distances(pts);
  EXPECT_LT((a - b).norm(), 1e-12 * b.norm());
  for (Eigen::Index i = 0; i < 12; ++i) EXPECT_EQ(a(i, i), 0.0);
  EXPECT_EQ((a - a.transpose()).norm(), 0.0);
}

TEST(KrumTest, IdenticalPointsScoreZero) {
  const std::vector<RealVector> pts(8, RealVector{1.0, 2.0});
  const ScoreTable t = krum_scores(direct_distances(pts), 2);
  for (double s : t.scores) EXPECT_EQ(s, 0.0);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(t.neighbor_sets[i].size(), 4u);
    EXPECT_FALSE(std::binary_search(t.neighbor_sets[i].begin(), t.neighbor_sets[i].end(), i));
  }
}

TEST(KrumTest, LineExampleMatchesBruteForce) {
  std::vector<RealVector> pts{{0.0}, {1.0}, {2.0}, {3.0}, {100.0}};
  const DistanceMatrix d = direct_distances(pts);
  const ScoreTable t = krum_scores(d, 1);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(t.scores[i], brute_force_score(d, i, 2));
  EXPECT_EQ(std::max_element(t.scores.begin(), t.scores.end()) - t.scores.begin(), 4);
  EXPECT_EQ(t.scores[0], 1.0 + 4.0);
  EXPECT_EQ(t.scores[1], 1.0 + 1.0);
}

TEST(KrumTest, BruteForceEquivalenceSmallN) {
  Rng rng(2);
  for (std::size_t n = 4; n <= 7; ++n)
    for (std::size_t a = 0; a + 3 <= n; ++a) {
      const DistanceMatrix d = direct_distances(gaussian_points(n, 3, rng));
      const ScoreTable t = krum_scores(d, a);
      for (std::size_t i = 0; i < n; ++i)
        EXPECT_EQ(t.scores[i], brute_force_score(d, i, n - a - 2)) << n << " " << a << " " << i;
    }
}

TEST(KrumTest, RejectsTooManyByzantine) {
  const DistanceMatrix d = DistanceMatrix::Zero(5, 5);
  EXPECT_THROW(krum_scores(d, 3), InvalidConfiguration);
  EXPECT_NO_THROW(krum_scores(d, 2));
}

TEST(KrumTest, FarOutlierHasMaxScore) {
  int hits = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(100 + trial);
    auto pts = gaussian_points(30, 10, rng);
    for (double& x : pts[7]) x += 10.0;
    const ScoreTable t = krum_scores(direct_distances(pts), 10);
    if (std::max_element(t.scores.begin(), t.scores.end()) - t.scores.begin() == 7) ++hits;
  }
  EXPECT_GE(hits, 198);
}

TEST(ConfidenceTest, UniformCountsGiveUniformLambda) {
  const std::vector<std::size_t> counts(30, 17);
  const ConfidenceVector c = soft_confidences(counts, 0.1);
  for (double l : c.lambda) EXPECT_DOUBLE_EQ(l, 1.0 / 30.0);
  const ConfidenceVector z = soft_confidences(std::vector<std::size_t>(5, 0), 0.1);
  for (double l : z.lambda) EXPECT_DOUBLE_EQ(l, 0.2);
}

TEST(ConfidenceTest, LowTemperatureApproachesIndicator) {
  const std::vector<std::size_t> counts{3, 9, 4, 0};
  const ConfidenceVector c = soft_confidences(counts, 1e-3);
  EXPECT_NEAR(c.lambda[1], 1.0, 1e-12);
  EXPECT_NEAR(c.lambda[0] + c.lambda[2] + c.lambda[3], 0.0, 1e-12);
}

TEST(ConfidenceTest, MatchesReferenceSoftmax) {
  const std::vector<std::size_t> counts{0, 25000, 300, 25000, 7, 1};
  const double tau = 0.37;
  const ConfidenceVector c = soft_confidences(counts, tau);
  double z = 0.0;
  RealVector ref(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    ref[i] = std::exp(static_cast<double>(counts[i]) / 25000.0 / tau);
    z += ref[i];
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    EXPECT_NEAR(c.lambda[i], ref[i] / z, 1e-12);
    sum += c.lambda[i];
    EXPECT_GT(c.lambda[i], 0.0);
    EXPECT_LT(c.lambda[i], 1.0);
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
  EXPECT_GT(c.lambda[2], c.lambda[4]);  // monotone in counts
  EXPECT_THROW(soft_confidences(counts, 0.0), InvalidArgument);
}

TEST(ModifiedScoreTest, EndpointsAndFormula) {
  ScoreTable t;
  t.scores = {4.0, 10.0, 2.0};
  ConfidenceVector c;
  c.lambda = {1.0, 0.0, 0.5};
  // N = 3 would be rejected by Krum, but the formula only needs N - A - 2 > 0.
  const RealVector m = modified_scores(t, c, 0);  // S_min = 2 / 1
  EXPECT_EQ(m[0], 4.0);
  EXPECT_EQ(m[1], 2.0);
  EXPECT_EQ(m[2], 0.5 * 2.0 + 0.5 * 2.0);
}

TEST(ModifiedScoreTest, HandComputedThirtyUsers) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(1.0, 50.0);
  ScoreTable t;
  for (int i = 0; i < 30; ++i) t.scores.push_back(u(rng));
  std::vector<std::size_t> counts(30);
  for (auto& c : counts) c = static_cast<std::size_t>(u(rng));
  const ConfidenceVector conf = soft_confidences(counts, 0.1);
  const RealVector m = modified_scores(t, conf, 10);
  const double s_min = *std::min_element(t.scores.begin(), t.scores.end()) / 18.0;
  for (int i = 0; i < 30; ++i)
    EXPECT_NEAR(m[i], conf.lambda[i] * t.scores[i] + (1.0 - conf.lambda[i]) * s_min, 1e-12);
}

TEST(SelectTest, BasicCases) {
  const RealVector s{3.0, 1.0, 2.0};
  EXPECT_EQ(select(s, 2, Rule::kKrum).users, (std::vector<UserIndex>{1, 2}));
  EXPECT_EQ(select(s, 3, Rule::kKrum).users, (std::vector<UserIndex>{0, 1, 2}));
  EXPECT_EQ(select(s, 1, Rule::kFedAvg).users, (std::vector<UserIndex>{0, 1, 2}));
  EXPECT_EQ(select(RealVector{1.0, 1.0, 1.0}, 2, Rule::kKrum).users,
            (std::vector<UserIndex>{0, 1}));
  EXPECT_THROW(select(s, 0, Rule::kKrum), InvalidArgument);
  EXPECT_THROW(select(s, 4, Rule::kKrum), InvalidArgument);
}

TEST(SelectTest, MatchesSortOracle) {
  Rng rng(4);
  const RealVector s = random_real(30, rng);
  std::vector<UserIndex> order(30);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return s[a] < s[b]; });
  order.resize(8);
  std::sort(order.begin(), order.end());
  EXPECT_EQ(select(s, 8, Rule::kModifiedKrum).users, order);
}

TEST(PropertyTest, PermutationEquivariance) {
  Rng rng(5);
  const auto pts = gaussian_points(12, 4, rng);
  std::vector<std::size_t> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<RealVector> permuted(12);
  for (std::size_t i = 0; i < 12; ++i) permuted[perm[i]] = pts[i];
  std::vector<std::size_t> counts(12), pcounts(12);
  for (std::size_t i = 0; i < 12; ++i) pcounts[perm[i]] = counts[i] = i * 3;

  const ScoreTable a = krum_scores(direct_distances(pts), 3);
  const ScoreTable b = krum_scores(direct_distances(permuted), 3);
  const RealVector ma = modified_scores(a, soft_confidences(counts, 0.1), 3);
  const RealVector mb = modified_scores(b, soft_confidences(pcounts, 0.1), 3);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_NEAR(a.scores[i], b.scores[perm[i]], 1e-12);
    EXPECT_NEAR(ma[i], mb[perm[i]], 1e-12);
  }
  const auto sa = select(ma, 5, Rule::kModifiedKrum).users;
  auto sb = select(mb, 5, Rule::kModifiedKrum).users;
  std::vector<UserIndex> mapped;
  for (UserIndex u : sa) mapped.push_back(perm[u]);
  std::sort(mapped.begin(), mapped.end());
  EXPECT_EQ(mapped, sb);
}

TEST(PropertyTest, ScaleConsistency) {
  Rng rng(6);
  const DistanceMatrix d = direct_distances(gaussian_points(15, 5, rng));
  std::vector<std::size_t> counts(15);
  for (std::size_t i = 0; i < 15; ++i) counts[i] = (i * 7) % 5;
  const auto conf = soft_confidences(counts, 0.1);
  const ScoreTable a = krum_scores(d, 4);
  const ScoreTable b = krum_scores(3.5 * d, 4);
  const RealVector ma = modified_scores(a, conf, 4);
  const RealVector mb = modified_scores(b, conf, 4);
  for (std::size_t i = 0; i < 15; ++i) {
    EXPECT_NEAR(b.scores[i], 3.5 * a.scores[i], 1e-12 * b.scores[i]);
    EXPECT_NEAR(mb[i], 3.5 * ma[i], 1e-12 * mb[i]);
  }
  EXPECT_EQ(select(ma, 6, Rule::kModifiedKrum).users, select(mb, 6, Rule::kModifiedKrum).users);
}

TEST(PropertyTest, OracleProfileExcludesByzantine) {
  const std::size_t n = 30, a = 10, m = 8;
  int clean = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(500 + trial);
    auto pts = gaussian_points(n, 16, rng);
    const PositionSet byz = random_positions(n, a, rng);
    // Byzantine users move 10x the honest spread in a common direction.
    for (std::size_t b : byz) {
      pts[b] = random_real(16, rng, 0.1);
      for (double& x : pts[b]) x += 10.0;
    }
    std::vector<std::size_t> counts(n, 0);
    for (std::size_t b : byz) counts[b] = 1000;
    const ScoreTable t = krum_scores(direct_distances(pts), a);
    const RealVector mod = modified_scores(t, soft_confidences(counts, 0.1), a);
    const auto sel = select(mod, m, Rule::kModifiedKrum).users;
    bool any = false;
    for (UserIndex u : sel) any |= std::binary_search(byz.begin(), byz.end(), u);
    if (!any) ++clean;
  }
  EXPECT_GE(clean, 190);
}

}  // namespace
}  // namespace forta::robust
