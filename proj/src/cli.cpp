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

#include "forta/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "forta/dft_codec.hpp"

namespace forta::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kFuzzStream = 0x66757a7a;
constexpr std::uint64_t kSurrogateStream = 0x73757272;

// Writes through a temporary name so a crash never leaves a truncated file
// under the final name.
template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    writer(out);
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
  }
  fs::rename(tmp, path);
}

// Creates `dir` (clearing a stale "<dir>.incomplete") and runs `body`; on
// failure renames the directory to "<dir>.incomplete".
template <typename Body>
int with_output_dir(const fs::path& dir, std::ostream& err, Body&& body) {
  const fs::path incomplete = dir.string() + ".incomplete";
  try {
    fs::remove_all(incomplete);
    fs::create_directories(dir);
  } catch (const std::exception& e) {
    fmt::print(err, "forta: error: cannot create output directory: {}\n", e.what());
    return kFailure;
  }
  try {
    body();
    return kOk;
  } catch (const std::exception& e) {
    fmt::print(err, "forta: error: {}\n", e.what());
    std::error_code ec;
    fs::rename(dir, incomplete, ec);
    return dynamic_cast<const InvalidConfiguration*>(&e) ? kBadConfig : kFailure;
  }
}

double relative_error(const ComplexVector& got, const ComplexVector& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    num += std::norm(got[i] - want[i]);
    den += std::norm(want[i]);
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

void validate(const FuzzOptions& o) {
  if (o.trials == 0) throw InvalidConfiguration("--trials must be positive");
  if (o.error_counts.empty()) throw InvalidConfiguration("--errors needs at least one count");
  for (std::size_t e : o.error_counts)
    if (e > o.n) throw InvalidConfiguration(fmt::format("--errors {} exceeds --n {}", e, o.n));
  if (!(o.mag_min > 0.0) || !(o.mag_max >= o.mag_min) || !std::isfinite(o.mag_max))
    throw InvalidConfiguration("need 0 < --mag-min <= --mag-max");
  if (o.mag_bins == 0) throw InvalidConfiguration("--mag-bins must be positive");
}

}  // namespace

std::vector<reports::FuzzRow> codec_fuzz(const FuzzOptions& options) {
  validate(options);
  const codec::DftCodec codec(codec::CodecParams::with_defaults(options.n, options.k));
  const double width = (options.mag_max - options.mag_min) / static_cast<double>(options.mag_bins);
  std::vector<reports::FuzzRow> rows;
  for (std::size_t count : options.error_counts) {
    for (std::size_t bin = 0; bin < options.mag_bins; ++bin) {
      const double lo = options.mag_min + width * static_cast<double>(bin);
      const double hi = bin + 1 == options.mag_bins ? options.mag_max : lo + width;
      Rng rng(derive_seed(options.seed, {kFuzzStream, count, bin}));
      std::normal_distribution<double> g(0.0, std::sqrt(0.5));
      std::uniform_real_distribution<double> mag(lo, hi);
      std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
      PositionSet all(options.n);
      std::size_t successes = 0;
      double residual_sum = 0.0;
      for (std::size_t trial = 0; trial < options.trials; ++trial) {
        ComplexVector message(options.k);
        for (Complex& m : message) m = Complex(g(rng), g(rng));
        codec::Codeword word = codec.encode(message);
        std::iota(all.begin(), all.end(), 0);
        std::shuffle(all.begin(), all.end(), rng);
        PositionSet planted(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
        std::sort(planted.begin(), planted.end());
        for (std::size_t p : planted) word.values[p] += std::polar(mag(rng), phase(rng));
        const codec::DecodeOutcome outcome = codec.try_decode(word);
        residual_sum += outcome.result.residual;
        if (outcome.status == codec::DecodeStatus::kOk &&
            outcome.result.error_positions == planted &&
            relative_error(outcome.result.message, message) <= 1e-5)
          ++successes;
      }
      rows.push_back({count, 0.5 * (lo + hi),
                      static_cast<double>(successes) / static_cast<double>(options.trials),
                      residual_sum / static_cast<double>(options.trials)});
    }
  }
  return rows;
}

std::vector<fl::RunLog> run_all_rules(const config::RunConfig& config, std::ostream& progress) {
  std::vector<fl::RunLog> logs;
  for (robust::Rule rule : config.rules) {
    fl::TrainingConfig training = config.training;
    training.rule = rule;
    logs.push_back(fl::run_experiment(training));
    const fl::RunLog& log = logs.back();
    const double final_acc = log.rounds.empty() ? log.initial_accuracy : log.rounds.back().accuracy;
    const auto aborted = std::count_if(log.rounds.begin(), log.rounds.end(),
                                       [](const fl::RoundRecord& r) { return r.aborted; });
    fmt::print(progress, "{:<14} rounds={} final_accuracy={:.4f} aborted={} ({:.1f} s)\n",
               robust::to_string(rule), log.rounds.size(), final_acc, aborted,
               log.wall_clock_seconds);
  }
  return logs;
}

reports::BoundsReport compute_bounds(const config::RunConfig& config) {
  const fl::TrainingConfig& t = config.training;
  const config::TheorySettings& th = config.theory;
  reports::BoundsReport r;
  r.params.n_users = t.n_users;
  r.params.byzantine_bound = t.byzantine_bound;

  if (th.mode == config::TheorySettings::Mode::kManual) {
    r.source = "manual";
    r.params.dim = fl::build_task(t).dim();
    r.params.sigma_g = th.sigma_g;
    r.params.sigma_eps = th.sigma_eps;
    r.params.g_norm = th.g_norm;
    r.stats = th.stats;
  } else {
    r.source = fmt::format("estimated over {} modified_krum rounds", th.estimate_rounds);
    fl::TrainingConfig training = t;
    training.rule = robust::Rule::kModifiedKrum;
    const fl::Simulator sim(training, fl::build_task(training));
    fl::GlobalModel model{RealVector(sim.dim(), 0.0), 0};
    std::vector<RealVector> lambda_history, honest;
    double sigma_g = 0.0, sigma_eps = 0.0, g_norm = 0.0;
    for (std::size_t round = 0; round < th.estimate_rounds; ++round) {
      // Surrogates are built around the honest updates of the last round.
      if (round + 1 == th.estimate_rounds) {
        const std::vector<RealVector> updates = sim.local_updates(model);
        for (UserIndex u = 0; u < updates.size(); ++u)
          if (!t.attack.is_byzantine(u)) honest.push_back(updates[u]);
      }
      const fl::RoundRecord rec = sim.run_round(model);
      lambda_history.push_back(rec.lambda);
      sigma_g += rec.sigma_g;
      sigma_eps += rec.sigma_eps;
      g_norm += rec.g_norm;
    }
    const double rounds = static_cast<double>(th.estimate_rounds);
    r.params.dim = sim.dim();
    r.params.sigma_g = sigma_g / rounds;
    r.params.sigma_eps = sigma_eps / rounds;
    r.params.g_norm = g_norm / rounds;
    Rng rng(derive_seed(t.seed, {kSurrogateStream}));
    const auto groups =
        theory::surrogate_differences(honest, r.params.sigma_eps, th.surrogate_draws, rng);
    r.stats = theory::estimate_feedback_stats(lambda_history, groups);
  }

  r.eta = theory::eta(r.params.n_users, r.params.byzantine_bound);
  r.eta_prime = theory::eta_prime(r.params.n_users, r.params.byzantine_bound);
  r.sigma_prime = theory::effective_sigma(r.params);
  r.sin_alpha = theory::sin_alpha(r.params);
  r.sin_alpha_mod = theory::sin_alpha_mod(r.params, r.stats);
  r.corollary = theory::corollary_condition(r.params, r.stats);
  return r;
}

int cmd_run(const fs::path& config_path, const std::optional<fs::path>& out_dir,
            std::ostream& out, std::ostream& err) {
  config::RunConfig config;
  try {
    config = config::load_config(config_path, config::seed_override_from_env());
  } catch (const std::exception& e) {
    fmt::print(err, "forta: error: {}\n", e.what());
    return kBadConfig;
  }
  if (out_dir) config.output.dir = *out_dir;
  const fs::path dir = config.output.dir;
  return with_output_dir(dir, err, [&] {
    write_file(dir / "config.ini", [&](std::ostream& o) { o << config::echo_config(config); });
    const std::vector<fl::RunLog> logs = run_all_rules(config, out);
    write_file(dir / "runlog.csv", [&](std::ostream& o) { reports::write_runlog_csv(o, logs); });
    write_file(dir / "scores.csv", [&](std::ostream& o) { reports::write_scores_csv(o, logs); });
    write_file(dir / "profile.csv", [&](std::ostream& o) { reports::write_profile_csv(o, logs); });
    if (config.output.plot)
      write_file(dir / "accuracy.svg", [&](std::ostream& o) { reports::write_accuracy_svg(o, logs); });
    fmt::print(out, "wrote {}\n", dir.string());
  });
}

int cmd_codec_fuzz(const FuzzOptions& options, const fs::path& out_dir, std::ostream& out,
                   std::ostream& err) {
  return with_output_dir(out_dir, err, [&] {
    const std::vector<reports::FuzzRow> rows = codec_fuzz(options);
    write_file(out_dir / "codec_fuzz.csv", [&](std::ostream& o) { reports::write_fuzz_csv(o, rows); });
    for (const auto& r : rows)
      fmt::print(out, "errors={} magnitude={} success_rate={:.4f} mean_residual={:.3e}\n",
                 r.error_count, r.magnitude, r.success_rate, r.mean_residual);
  });
}

int cmd_bounds(const fs::path& config_path, const std::optional<fs::path>& out_dir,
               std::ostream& out, std::ostream& err) {
  config::RunConfig config;
  try {
    config = config::load_config(config_path, config::seed_override_from_env());
  } catch (const std::exception& e) {
    fmt::print(err, "forta: error: {}\n", e.what());
    return kBadConfig;
  }
  if (out_dir) config.output.dir = *out_dir;
  const fs::path dir = config.output.dir;
  return with_output_dir(dir, err, [&] {
    const reports::BoundsReport report = compute_bounds(config);
    write_file(dir / "bounds.txt", [&](std::ostream& o) { reports::write_bounds_text(o, report); });
    write_file(dir / "bounds.csv", [&](std::ostream& o) { reports::write_bounds_csv(o, report); });
    reports::write_bounds_text(out, report);
  });
}

}  // namespace forta::cli
