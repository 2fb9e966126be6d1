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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
// followed by a summary line.
//
// Exit status: 0 when every check ran to completion (whatever its verdict),
// 1 on an internal error. With --strict, any FAIL also exits 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "forta/cli.hpp"
#include "forta/config.hpp"
#include "forta/fl_harness.hpp"
#include "forta/robust_select.hpp"
#include "forta/theory.hpp"

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path configs;
  fs::path forta;
  fs::path work;
  std::size_t trials = 50;
  std::size_t seeds = 5;
};

forta::config::RunConfig load(const Context& ctx, const std::string& name, std::uint64_t seed) {
  return forta::config::load_config(ctx.configs / name, seed);
}

// --- 1. decoder capacity ---------------------------------------------------

Verdict codec_capacity(const Context&) {
  forta::cli::FuzzOptions o;  // 30/10, 1000 trials, 10 errors in [0.1, 10]
  const auto start = Clock::now();
  const auto rows = forta::cli::codec_fuzz(o);
  const double elapsed = seconds_since(start);
  const double rate = rows.front().success_rate;
  return {rate >= 0.99 && elapsed < 10.0,
          fmt::format("success_rate={:.4f} (>= 0.99) runtime={:.2f}s (< 10s)", rate, elapsed)};
}

// --- 2. honest-path fidelity ----------------------------------------------

Verdict honest_fidelity(const Context& ctx) {
  forta::fl::TrainingConfig t = load(ctx, "no_attack.ini", 1).training;
  t.rule = forta::robust::Rule::kModifiedKrum;
  t.injected_precision_sigma = 0.0;
  const forta::fl::Simulator sim(t, forta::fl::build_task(t));
  forta::fl::GlobalModel model{forta::RealVector(sim.dim(), 0.0), 0};
  double max_dist = 0.0, max_agg = 0.0, max_round_s = 0.0;
  bool aborted = false;
  for (int round = 0; round < 3; ++round) {
    const auto start = Clock::now();
    const forta::fl::RoundRecord rec = sim.run_round(model);
    max_round_s = std::max(max_round_s, seconds_since(start));
    max_dist = std::max(max_dist, rec.max_distance_rel_error);
    max_agg = std::max(max_agg, rec.aggregate_rel_error);
    aborted = aborted || rec.aborted;
  }
  return {!aborted && sim.dim() == 68 && max_dist <= 1e-6 && max_agg <= 1e-6 && max_round_s < 30.0,
          fmt::format("d={} max_distance_rel_err={:.2e} max_aggregate_rel_err={:.2e} (<= 1e-6) "
                      "max_round={:.2f}s (< 30s)",
                      sim.dim(), max_dist, max_agg, max_round_s)};
}

// --- 3. Krum against exhaustive enumeration --------------------------------

double exhaustive_score(const forta::robust::DistanceMatrix& dist, std::size_t i, std::size_t size) {
  const auto n = static_cast<std::size_t>(dist.rows());
  std::vector<std::size_t> others;
  for (std::size_t j = 0; j < n; ++j)
    if (j != i) others.push_back(j);
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << others.size()); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != size) continue;
    double s = 0.0;
    for (std::size_t b = 0; b < others.size(); ++b)
      if (mask & (1u << b))
        s += dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(others[b]));
    best = std::min(best, s);
  }
  return best;
}

std::vector<forta::UserIndex> exhaustive_select(const forta::RealVector& scores, std::size_t m) {
  std::vector<forta::UserIndex> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return scores[a] < scores[b]; });
  order.resize(m);
  std::sort(order.begin(), order.end());
  return order;
}

Verdict krum_equivalence(const Context&) {
  constexpr std::size_t kA = 1, kSets = 100, kDim = 5;
  std::size_t mismatches = 0, checked = 0;
  for (std::size_t n : {5u, 6u, 7u}) {
    forta::Rng rng(forta::derive_seed(3, {n}));
    std::normal_distribution<double> g(0.0, 1.0);
    for (std::size_t set = 0; set < kSets; ++set) {
      std::vector<forta::RealVector> pts(n, forta::RealVector(kDim));
      for (auto& p : pts)
        for (double& x : p) x = g(rng);
      const auto dist = forta::robust::direct_distances(pts);
      const auto table = forta::robust::krum_scores(dist, kA);
      forta::RealVector want(n);
      for (std::size_t i = 0; i < n; ++i) want[i] = exhaustive_score(dist, i, n - kA - 2);
      if (table.scores != want) ++mismatches;
      for (std::size_t m = 1; m <= n - kA; ++m) {
        const auto got = forta::robust::select(table.scores, m, forta::robust::Rule::kKrum).users;
        if (got != exhaustive_select(want, m)) ++mismatches;
      }
      ++checked;
    }
  }
  return {mismatches == 0,
          fmt::format("{} point sets over N in {{5,6,7}}, A=1: {} mismatches", checked, mismatches)};
}

// --- 4 and 5. single attacked rounds ---------------------------------------

struct AttackedRound {
  forta::fl::RoundRecord record;
  forta::PositionSet byzantine;
};

AttackedRound attacked_round(const Context& ctx, const std::string& config, std::uint64_t seed) {
  forta::fl::TrainingConfig t = load(ctx, config, seed).training;
  t.rule = forta::robust::Rule::kModifiedKrum;
  const forta::fl::Simulator sim(t, forta::fl::build_task(t));
  forta::fl::GlobalModel model{forta::RealVector(sim.dim(), 0.0), 0};
  return {sim.run_round(model), t.attack.byzantine_set};
}

std::size_t byzantine_count(const std::vector<forta::UserIndex>& selected,
                            const forta::PositionSet& byzantine) {
  return static_cast<std::size_t>(std::count_if(selected.begin(), selected.end(), [&](auto u) {
    return std::binary_search(byzantine.begin(), byzantine.end(), u);
  }));
}

Verdict share_corruption_localization(const Context& ctx) {
  std::size_t exact = 0;
  for (std::size_t trial = 1; trial <= ctx.trials; ++trial) {
    const AttackedRound r = attacked_round(ctx, "share_corrupt.ini", trial);
    if (!r.record.aborted && r.record.erasure_hints == r.byzantine) ++exact;
  }
  const double rate = static_cast<double>(exact) / static_cast<double>(ctx.trials);
  return {rate >= 0.99, fmt::format("hints == Byzantine set in {}/{} trials ({:.2f} >= 0.99)", exact,
                                    ctx.trials, rate)};
}

Verdict precision_mimic_defense(const Context& ctx) {
  std::size_t krum_hit = 0, modified_clean = 0;
  for (std::size_t trial = 1; trial <= ctx.trials; ++trial) {
    const AttackedRound r = attacked_round(ctx, "precision_mimic.ini", trial);
    if (byzantine_count(r.record.first_pass_krum_selection, r.byzantine) >= 1) ++krum_hit;
    if (!r.record.aborted && byzantine_count(r.record.selected, r.byzantine) == 0) ++modified_clean;
  }
  const double n = static_cast<double>(ctx.trials);
  const double krum_rate = static_cast<double>(krum_hit) / n;
  const double mod_rate = static_cast<double>(modified_clean) / n;
  return {krum_rate >= 0.5 && mod_rate >= 0.9,
          fmt::format("krum selects a Byzantine user in {:.2f} (>= 0.50); modified_krum selects "
                      "none in {:.2f} (>= 0.90) of {} trials",
                      krum_rate, mod_rate, ctx.trials)};
}

// --- 6. end-to-end ordering ------------------------------------------------

double final_accuracy(const forta::fl::RunLog& log) {
  return log.rounds.empty() ? log.initial_accuracy : log.rounds.back().accuracy;
}

Verdict end_to_end_ordering(const Context& ctx) {
  using forta::robust::Rule;
  const auto start = Clock::now();
  double fedavg = 0.0, krum = 0.0, modified = 0.0, clean_fedavg = 0.0, clean_modified = 0.0;
  std::ostringstream quiet;
  for (std::uint64_t seed = 1; seed <= ctx.seeds; ++seed) {
    forta::config::RunConfig attacked = load(ctx, "default.ini", seed);
    attacked.rules = {Rule::kFedAvg, Rule::kKrum, Rule::kModifiedKrum};
    const auto logs = forta::cli::run_all_rules(attacked, quiet);
    fedavg += final_accuracy(logs[0]);
    krum += final_accuracy(logs[1]);
    modified += final_accuracy(logs[2]);

    forta::config::RunConfig clean = load(ctx, "no_attack.ini", seed);
    clean.training.rounds = attacked.training.rounds;
    clean.rules = {Rule::kFedAvg, Rule::kModifiedKrum};
    const auto clean_logs = forta::cli::run_all_rules(clean, quiet);
    clean_fedavg += final_accuracy(clean_logs[0]);
    clean_modified += final_accuracy(clean_logs[1]);
  }
  const double s = static_cast<double>(ctx.seeds);
  fedavg /= s, krum /= s, modified /= s, clean_fedavg /= s, clean_modified /= s;
  const double elapsed = seconds_since(start);
  const bool pass = modified >= krum && modified - fedavg >= 0.20 &&
                    std::abs(clean_modified - clean_fedavg) <= 0.03 && elapsed < 600.0;
  return {pass, fmt::format("mean final accuracy over {} seeds: fedavg={:.4f} krum={:.4f} "
                            "modified_krum={:.4f} (modified >= krum, modified - fedavg = {:+.4f} "
                            ">= 0.20); clean fedavg={:.4f} modified_krum={:.4f} (|diff| <= 0.03); "
                            "runtime={:.0f}s (< 600s)",
                            ctx.seeds, fedavg, krum, modified, modified - fedavg, clean_fedavg,
                            clean_modified, elapsed)};
}

// --- 7. theory consistency -------------------------------------------------

Verdict theory_consistency(const Context&) {
  namespace th = forta::theory;
  forta::Rng rng(7);
  std::uniform_int_distribution<std::size_t> n_dist(4, 200);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t disagreements = 0;
  for (int draw = 0; draw < 10000; ++draw) {
    th::TheoryParams p;
    p.n_users = n_dist(rng);
    p.byzantine_bound = std::uniform_int_distribution<std::size_t>(0, (p.n_users - 3) / 2)(rng);
    p.dim = std::uniform_int_distribution<std::size_t>(1, 500)(rng);
    p.sigma_g = std::exp(-6.0 + 6.0 * u(rng));
    p.sigma_eps = std::exp(-12.0 + 10.0 * u(rng));
    p.g_norm = std::exp(-2.0 + 6.0 * u(rng));
    th::FeedbackStats s;
    s.mu_t = 0.05 + 2.0 * u(rng);
    s.sigma_t = u(rng);
    s.mu_q = u(rng);
    s.sigma_q = u(rng);
    s.c1 = 1.0 + 3.0 * u(rng);
    if (th::corollary_condition(p, s) != (th::sin_alpha_mod(p, s).value < th::sin_alpha(p).value))
      ++disagreements;
  }
  const double eta_err = std::abs(th::eta(30, 10) - std::sqrt(280.0));

  // Every evaluator must reject 2A + 2 >= N.
  std::size_t accepted = 0;
  th::TheoryParams bad{.n_users = 20, .byzantine_bound = 9, .dim = 68,
                       .sigma_g = 0.1, .sigma_eps = 0.0, .g_norm = 1.0};
  const th::FeedbackStats stats;
  auto expect_reject = [&](auto&& f) {
    try {
      f();
      ++accepted;
    } catch (const forta::InvalidConfiguration&) {
    }
  };
  expect_reject([&] { th::eta_squared(20, 9); });
  expect_reject([&] { th::eta(20, 9); });
  expect_reject([&] { th::eta_prime(20, 9); });
  expect_reject([&] { th::effective_sigma(bad); });
  expect_reject([&] { th::sin_alpha(bad); });
  expect_reject([&] { th::sin_alpha_mod(bad, stats); });
  expect_reject([&] { th::corollary_condition(bad, stats); });
  expect_reject([&] { th::modified_factor(bad, stats); });

  return {disagreements == 0 && eta_err <= 1e-12 && accepted == 0,
          fmt::format("10000 draws: {} disagreements; |eta(30,10) - sqrt(280)| = {:.1e} "
                      "(<= 1e-12); {} evaluators accepted 2A + 2 >= N",
                      disagreements, eta_err, accepted)};
}

// --- 8. byte-identical CLI outputs -----------------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("missing output '{}'", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int shell(const std::string& command) {
  return std::system((command + " > /dev/null 2>&1").c_str());
}

Verdict cli_determinism(const Context& ctx) {
  fs::create_directories(ctx.work);
  const fs::path small = ctx.work / "small.ini";
  {
    std::ofstream out(small, std::ios::binary);
    out << "[protocol]\nN = 10\nT = 3\nA = 2\nm = 4\nseed = 5\n"
           "[task]\nclasses = 3\nfeatures = 5\nsamples_per_user = 60\ntest_samples = 300\n"
           "rounds = 3\n"
           "[attack]\nkind = combined\nmagnitude = 10\nshare_magnitude = 1\n"
           "[theory]\nestimate_rounds = 10\nsurrogate_draws = 50\n";
  }
  const std::string exe = fmt::format("'{}'", ctx.forta.string());
  struct Job {
    std::string name;
    std::string args;
    std::vector<std::string> files;
  };
  const std::vector<Job> jobs{
      {"run", fmt::format("run --config '{}'", small.string()),
       {"runlog.csv", "scores.csv", "profile.csv"}},
      {"codec-fuzz",
       "codec-fuzz --n 30 --k 10 --trials 200 --errors 0,5,10,11 --mag-min 0.1 --mag-max 10 "
       "--mag-bins 3 --seed 9",
       {"codec_fuzz.csv"}},
      {"bounds", fmt::format("bounds --config '{}'", small.string()), {"bounds.csv"}},
      {"bounds-manual", fmt::format("bounds --config '{}'", (ctx.configs / "bounds_manual.ini").string()),
       {"bounds.csv"}},
  };
  std::size_t compared = 0;
  std::vector<std::string> problems;
  for (const Job& job : jobs) {
    std::vector<fs::path> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = ctx.work / fmt::format("{}_{}", job.name, rep);
      fs::remove_all(dir);
      if (int rc = shell(fmt::format("{} {} --out '{}'", exe, job.args, dir.string())); rc != 0)
        problems.push_back(fmt::format("{} exited with {}", job.name, rc));
      dirs.push_back(dir);
    }
    for (const std::string& file : job.files) {
      if (!fs::exists(dirs[0] / file) || !fs::exists(dirs[1] / file)) {
        problems.push_back(fmt::format("{}: {} missing", job.name, file));
        continue;
      }
      ++compared;
      if (slurp(dirs[0] / file) != slurp(dirs[1] / file))
        problems.push_back(fmt::format("{}: {} differs", job.name, file));
    }
  }
  std::string detail = fmt::format("{} CSV files compared across 4 subcommand invocations", compared);
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks for the forta library and CLI"};
  Context ctx;
  bool strict = false;
  std::vector<int> only;
  app.add_option("--configs", ctx.configs, "directory holding the shipped configs")->required();
  app.add_option("--forta", ctx.forta, "path to the forta executable")->required();
  app.add_option("--work", ctx.work, "scratch directory")->required();
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  app.add_flag("--strict", strict, "exit 1 when any criterion fails");
  CLI11_PARSE(app, argc, argv);

  using Check = Verdict (*)(const Context&);
  const std::vector<std::pair<std::string, Check>> checks{
      {"decoder capacity", codec_capacity},
      {"honest-path fidelity", honest_fidelity},
      {"krum matches exhaustive enumeration", krum_equivalence},
      {"localization under share corruption", share_corruption_localization},
      {"precision-mimic defense", precision_mimic_defense},
      {"end-to-end ordering", end_to_end_ordering},
      {"theory consistency", theory_consistency},
      {"byte-identical cli outputs", cli_determinism},
  };

  std::size_t run = 0, passed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Verdict v;
    try {
      v = checks[i].second(ctx);
    } catch (const std::exception& e) {
      std::cout << fmt::format("criterion {} ERROR {}: {}", id, checks[i].first, e.what())
                << std::endl;
      return 1;
    }
    ++run;
    passed += v.pass ? 1 : 0;
    std::cout << fmt::format("criterion {} {} {}: {}", id, v.pass ? "PASS" : "FAIL",
                             checks[i].first, v.detail)
              << std::endl;
  }
  std::cout << fmt::format("acceptance: {}/{} criteria passed", passed, run) << std::endl;
  return strict && passed != run ? 1 : 0;
}
