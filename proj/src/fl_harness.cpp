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

#include "forta/fl_harness.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace forta::fl {

namespace {

constexpr std::uint64_t kBatchStream = 0x62617463;
constexpr std::uint64_t kShareStream = 0x73686172;

double relative_gap(double got, double want) {
  const double scale = std::abs(want);
  return scale > 0.0 ? std::abs(got - want) / scale : std::abs(got - want);
}

// Codewords and decoded differences for every pair, in pair_index order.
struct PairPass {
  std::vector<RealVector> secrets;
  std::size_t failures = 0;
};

}  // namespace

std::string_view to_string(StepForm form) {
  return form == StepForm::kMean ? "mean" : "sum";
}

StepForm parse_step_form(std::string_view name) {
  if (name == "mean") return StepForm::kMean;
  if (name == "sum") return StepForm::kSum;
  throw InvalidArgument(fmt::format("unknown step form '{}'", name));
}

void TrainingConfig::validate() const {
  const std::size_t n = n_users, a = byzantine_bound, t = collusion_threshold;
  if (n < 4) throw InvalidConfiguration("protocol.N must be at least 4");
  if (t < 1) throw InvalidConfiguration("protocol.T must be at least 1");
  if (2 * a + 2 >= n)
    throw InvalidConfiguration(
        fmt::format("protocol.A: 2A + 2 < N violated (A = {}, N = {})", a, n));
  if (n < 2 * a + t + 1)
    throw InvalidConfiguration(fmt::format(
        "protocol.T: N >= 2A + T + 1 violated (N = {}, A = {}, T = {})", n, a, t));
  if (select_m < 1 || select_m > n - a)
    throw InvalidConfiguration(
        fmt::format("protocol.m: need 1 <= m <= N - A = {} (m = {})", n - a, select_m));
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw InvalidConfiguration("task.learning_rate must be positive");
  if (!(lr_decay >= 0.0)) throw InvalidConfiguration("task.lr_decay must be non-negative");
  if (batch_size < 1) throw InvalidConfiguration("task.batch_size must be positive");
  if (local_epochs < 1) throw InvalidConfiguration("task.local_epochs must be positive");
  if (!(privacy_sigma > 0.0)) throw InvalidConfiguration("codec.privacy_sigma must be positive");
  if (!(injected_precision_sigma >= 0.0))
    throw InvalidConfiguration("codec.injected_precision_sigma must be non-negative");
  if (!(rank_tolerance > 0.0 && rank_tolerance < 1.0))
    throw InvalidConfiguration("codec.rank_tolerance must lie in (0, 1)");
  if (!(noise_floor >= 0.0)) throw InvalidConfiguration("codec.noise_floor must be non-negative");
  if (!(root_match_tolerance >= 0.0))
    throw InvalidConfiguration("codec.root_match_tolerance must be non-negative");
  if (!(temperature > 0.0)) throw InvalidConfiguration("protocol.temperature must be positive");
  if (!(hint_floor >= 0.0 && hint_floor < 1.0))
    throw InvalidConfiguration("protocol.hint_floor must lie in [0, 1)");
  if (task.source == TaskConfig::Source::kCsv && task.csv_path.empty())
    throw InvalidConfiguration("task.csv_path is required when task.source = csv");
  adversary::validate_threat_model(attack, n, a, t);
}

codec::CodecParams TrainingConfig::codec_params() const {
  codec::CodecParams p = codec::CodecParams::with_defaults(n_users, collusion_threshold + 1);
  p.rank_tolerance = rank_tolerance;
  p.noise_floor = noise_floor;
  p.root_match_tolerance = root_match_tolerance;
  return p;
}

sharing::SharingParams TrainingConfig::sharing_params(std::size_t round) const {
  sharing::SharingParams p;
  p.n_users = n_users;
  p.collusion_threshold = collusion_threshold;
  p.privacy_sigma = privacy_sigma;
  p.injected_precision_sigma = injected_precision_sigma;
  p.rng_seed = derive_seed(seed, {kShareStream, round});
  return p;
}

double TrainingConfig::learning_rate_at(std::size_t round) const {
  return learning_rate / (1.0 + lr_decay * static_cast<double>(round));
}

std::size_t TrainingConfig::hint_budget() const {
  const std::size_t k = collusion_threshold + 1;
  return std::min(byzantine_bound, n_users - k - 1);
}

Simulator::Simulator(TrainingConfig config, task::FederatedTask task)
    : config_(std::move(config)), task_(std::move(task)), codec_(config_.codec_params()) {
  config_.validate();
  if (task_.users.size() != config_.n_users)
    throw InvalidConfiguration(fmt::format("task has {} users, protocol.N = {}",
                                           task_.users.size(), config_.n_users));
}

std::vector<RealVector> Simulator::local_updates(const GlobalModel& model) const {
  std::vector<RealVector> updates;
  updates.reserve(config_.n_users);
  for (UserIndex i = 0; i < config_.n_users; ++i) {
    Rng rng(derive_seed(config_.seed, {kBatchStream, model.round, i}));
    const RealVector honest =
        task::local_update(model.w, task_.users[i], task_.classes, config_.batch_size,
                           config_.local_epochs, config_.learning_rate_at(model.round), rng);
    updates.push_back(adversary::poison_update(honest, config_.attack, i, model.round));
  }
  return updates;
}

RoundRecord Simulator::run_round(GlobalModel& model) const {
  const std::size_t n = config_.n_users;
  const std::size_t d = dim();
  const std::size_t round = model.round;
  const adversary::AttackSpec& attack = config_.attack;

  RoundRecord rec;
  rec.round = round + 1;
  rec.rule = config_.rule;

  // (1)-(2)
  const std::vector<RealVector> updates = local_updates(model);
  {
    RealVector g(d, 0.0);
    std::size_t honest = 0;
    for (UserIndex i = 0; i < n; ++i) {
      if (attack.is_byzantine(i)) continue;
      ++honest;
      for (std::size_t l = 0; l < d; ++l) g[l] += updates[i][l];
    }
    for (double& x : g) x /= static_cast<double>(honest);
    double spread = 0.0;
    for (UserIndex i = 0; i < n; ++i) {
      if (attack.is_byzantine(i)) continue;
      for (std::size_t l = 0; l < d; ++l) spread += (updates[i][l] - g[l]) * (updates[i][l] - g[l]);
    }
    rec.sigma_g = std::sqrt(spread / static_cast<double>(honest * d));
    rec.g_norm = std::sqrt(squared_norm(g));
  }

  // (3) shares[owner][holder]
  const sharing::SharingParams sp = config_.sharing_params(round);
  std::vector<std::vector<sharing::Share>> shares;
  shares.reserve(n);
  for (UserIndex i = 0; i < n; ++i) shares.push_back(sharing::make_shares(updates[i], sp, i));
  std::vector<std::vector<sharing::Share>> held(n);
  for (UserIndex h = 0; h < n; ++h)
    for (UserIndex i = 0; i < n; ++i) held[h].push_back(shares[i][h]);

  std::optional<PositionSet> aggregate_hints;
  if (config_.rule == robust::Rule::kFedAvg) {
    rec.selected.resize(n);
    std::iota(rec.selected.begin(), rec.selected.end(), 0);
  } else {
    // (4)
    std::vector<std::vector<sharing::DifferenceMessage>> reports(n);
    for (UserIndex h = 0; h < n; ++h) {
      auto msgs = sharing::difference_messages(held[h], n);
      msgs = adversary::corrupt_messages(std::move(msgs), attack, round);
      reports[h] = adversary::precision_mimic(std::move(msgs), attack, codec_);
    }
    const std::size_t pairs = n * (n - 1) / 2;
    std::vector<std::vector<codec::Codeword>> codewords(pairs);
    std::vector<sharing::DifferenceMessage> column(n);
    for (std::size_t p = 0; p < pairs; ++p) {
      for (UserIndex h = 0; h < n; ++h) column[h] = std::move(reports[h][p]);
      codewords[p] = sharing::assemble_codewords(column, n);
    }
    reports.clear();

    // (5)
    localizer::ErrorEvidence evidence(n);
    PairPass first;
    first.secrets.resize(pairs);
    for (std::size_t p = 0; p < pairs; ++p) {
      const auto report = sharing::reconstruct(codewords[p], codec_);
      first.failures += report.decode_failures;
      evidence.add_report(report, p * d);
      first.secrets[p] = report.secret;
    }
    rec.decode_failures += first.failures;

    // (6)
    const localizer::Localization loc = localizer::localize(evidence);
    rec.profile_counts = loc.profile.counts;
    rec.total_codewords = loc.profile.total_codewords;

    const robust::DistanceMatrix first_dist = robust::distances(first.secrets, n);
    const robust::ScoreTable first_table = robust::krum_scores(first_dist, config_.byzantine_bound);
    rec.first_pass_krum_selection =
        robust::select(first_table.scores, config_.select_m, robust::Rule::kKrum).users;

    const std::vector<RealVector>* final_secrets = &first.secrets;
    PairPass second;
    if (config_.rule == robust::Rule::kKrum) {
      rec.krum_scores = first_table.scores;
      rec.selected = rec.first_pass_krum_selection;
    } else {
      // (7)
      rec.erasure_hints =
          localizer::erasure_hints(loc.profile, config_.hint_budget(), config_.hint_floor);
      robust::ScoreTable table = first_table;
      if (!rec.erasure_hints.empty()) {
        aggregate_hints = rec.erasure_hints;
        second.secrets.resize(pairs);
        for (std::size_t p = 0; p < pairs; ++p) {
          const auto report = sharing::reconstruct(codewords[p], codec_, aggregate_hints);
          second.failures += report.decode_failures;
          second.secrets[p] = report.secret;
        }
        rec.decode_failures += second.failures;
        final_secrets = &second.secrets;
        table = robust::krum_scores(robust::distances(second.secrets, n), config_.byzantine_bound);
      }
      // (8)
      const robust::ConfidenceVector conf =
          robust::soft_confidences(loc.profile, config_.temperature);
      rec.krum_scores = table.scores;
      rec.lambda = conf.lambda;
      rec.modified_scores = robust::modified_scores(table, conf, config_.byzantine_bound);
      rec.selected =
          robust::select(rec.modified_scores, config_.select_m, robust::Rule::kModifiedKrum).users;
    }

    // Reconstruction diagnostics against the plaintext updates.
    double eps2 = 0.0;
    std::size_t idx = 0, honest_pairs = 0;
    for (UserIndex j = 0; j < n; ++j)
      for (UserIndex k = j + 1; k < n; ++k, ++idx) {
        if (attack.is_byzantine(j) || attack.is_byzantine(k)) continue;
        ++honest_pairs;
        const RealVector& got = (*final_secrets)[idx];
        double plain = 0.0, recon = 0.0;
        for (std::size_t l = 0; l < d; ++l) {
          const double diff = updates[j][l] - updates[k][l];
          plain += diff * diff;
          recon += got[l] * got[l];
          eps2 += (got[l] - diff) * (got[l] - diff);
        }
        rec.max_distance_rel_error =
            std::max(rec.max_distance_rel_error, relative_gap(recon, plain));
      }
    if (honest_pairs > 0)
      rec.sigma_eps = std::sqrt(eps2 / static_cast<double>(honest_pairs * d));
  }

  // (9) secure aggregation over U; failures abort the round.
  RealVector aggregate;
  try {
    std::vector<ComplexVector> sums(n);
    for (UserIndex h = 0; h < n; ++h)
      sums[h] = adversary::corrupt_aggregation_message(
          sharing::aggregation_message(held[h], rec.selected, n), attack, h, round, codec_);
    const auto report =
        sharing::reconstruct(sharing::assemble_aggregate(sums), codec_, aggregate_hints);
    rec.decode_failures += report.decode_failures;
    if (report.decode_failures > 0)
      throw codec::DecodeUnreliable(
          fmt::format("aggregate: {} of {} coordinates failed to decode", report.decode_failures,
                      report.total_codewords),
          {});
    aggregate = report.secret;
  } catch (const ProtocolViolation& e) {
    rec.aborted = true;
    rec.abort_reason = e.what();
  } catch (const codec::DecodeUnreliable& e) {
    rec.aborted = true;
    rec.abort_reason = e.what();
  }

  if (!rec.aborted) {
    RealVector plain(d, 0.0);
    for (UserIndex j : rec.selected)
      for (std::size_t l = 0; l < d; ++l) plain[l] += updates[j][l];
    double num = 0.0;
    for (std::size_t l = 0; l < d; ++l) num += (aggregate[l] - plain[l]) * (aggregate[l] - plain[l]);
    rec.aggregate_rel_error = std::sqrt(num) / std::max(std::sqrt(squared_norm(plain)), 1e-300);

    // (10)
    const double scale = config_.step_form == StepForm::kMean
                             ? config_.learning_rate_at(round) / static_cast<double>(rec.selected.size())
                             : config_.learning_rate_at(round);
    for (std::size_t l = 0; l < d; ++l) model.w[l] -= scale * aggregate[l];
  }
  ++model.round;

  rec.accuracy = task::evaluate(model.w, task_.test, task_.classes);
  double total_loss = 0.0;
  std::size_t samples = 0;
  for (const auto& user : task_.users) {
    total_loss += task::loss(model.w, user, task_.classes) * static_cast<double>(user.size());
    samples += user.size();
  }
  rec.loss = total_loss / static_cast<double>(samples);
  return rec;
}

task::FederatedTask build_task(const TrainingConfig& config) {
  if (config.task.source == TaskConfig::Source::kCsv)
    return task::load_csv_task(config.task.csv_path, config.n_users, config.task.test_fraction,
                               config.seed);
  return task::make_blob_task(config.task.blobs, config.n_users, config.seed);
}

RunLog run_experiment(const TrainingConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  RunLog log;
  log.config = config;
  Simulator sim(config, build_task(config));
  GlobalModel model{RealVector(sim.dim(), 0.0), 0};
  log.initial_accuracy = task::evaluate(model.w, sim.task().test, sim.task().classes);
  for (std::size_t r = 0; r < config.rounds; ++r) log.rounds.push_back(sim.run_round(model));
  log.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return log;
}

}  // namespace forta::fl
