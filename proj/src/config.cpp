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

#include "forta/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

namespace forta::config {

namespace {

namespace pt = boost::property_tree;

constexpr std::uint64_t kAttackStream = 0x61747463;
constexpr std::uint64_t kByzantineDraw = 0x62797a61;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"protocol",
       {"N", "T", "A", "m", "rules", "step_form", "temperature", "hint_floor", "seed"}},
      {"codec",
       {"privacy_sigma", "injected_precision_sigma", "rank_tolerance", "noise_floor",
        "root_match_tolerance"}},
      {"task",
       {"source", "csv_path", "test_fraction", "classes", "features", "samples_per_user",
        "test_samples", "spread", "center_scale", "rounds", "learning_rate", "lr_decay",
        "batch_size", "local_epochs"}},
      {"attack",
       {"kind", "magnitude", "share_magnitude", "byzantine", "byzantine_count", "collusion",
        "seed"}},
      {"theory",
       {"mode", "estimate_rounds", "surrogate_draws", "sigma_g", "sigma_eps", "g_norm", "mu_T",
        "sigma_T", "mu_Q", "sigma_Q", "C1"}},
      {"output", {"dir", "plot"}},
  };
  return keys;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            std::string_view expected) {
  throw InvalidConfiguration(fmt::format("{}: expected {}, got '{}'", key, expected, value));
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty())
    bad_value(key, value, "a non-negative integer");
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty() || !std::isfinite(out))
    bad_value(key, value, "a finite number");
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "true or false");
}

// Reads a 1-based user list into sorted 0-based indices.
PositionSet to_users(const std::string& key, const std::string& value, std::size_t n_users) {
  PositionSet users;
  for (const std::string& item : split_list(value)) {
    const std::uint64_t u = to_u64(key, item);
    if (u < 1 || u > n_users)
      throw InvalidConfiguration(fmt::format("{}: user {} outside 1..{}", key, u, n_users));
    users.push_back(static_cast<UserIndex>(u - 1));
  }
  std::sort(users.begin(), users.end());
  if (std::adjacent_find(users.begin(), users.end()) != users.end())
    throw InvalidConfiguration(fmt::format("{}: users must be distinct", key));
  return users;
}

std::string to_user_list(const PositionSet& users) {
  std::vector<std::size_t> one_based;
  for (UserIndex u : users) one_based.push_back(u + 1);
  return fmt::format("{}", fmt::join(one_based, ", "));
}

// Flat view of the parsed tree with strict key checking.
class Values {
 public:
  explicit Values(const pt::ptree& tree) {
    for (const auto& [section, body] : tree) {
      const auto it = schema().find(section);
      if (body.empty() && !body.data().empty())
        throw InvalidConfiguration(
            fmt::format("key '{}' appears outside any section", section));
      if (it == schema().end())
        throw InvalidConfiguration(fmt::format("unknown section [{}]", section));
      for (const auto& [key, leaf] : body) {
        if (!it->second.contains(key))
          throw InvalidConfiguration(fmt::format("unknown key {}.{}", section, key));
        values_[section + "." + key] = trim(leaf.data());
      }
    }
  }

  bool has(const std::string& key) const { return values_.contains(key); }
  const std::string* find(const std::string& key) const {
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }

  template <typename T>
  void read_size(const std::string& key, T& out) const {
    if (const auto* v = find(key)) out = static_cast<T>(to_u64(key, *v));
  }
  void read_double(const std::string& key, double& out) const {
    if (const auto* v = find(key)) out = to_double(key, *v);
  }
  void read_bool(const std::string& key, bool& out) const {
    if (const auto* v = find(key)) out = to_bool(key, *v);
  }
  template <typename Parse, typename T>
  void read_enum(const std::string& key, T& out, Parse parse) const {
    const auto* v = find(key);
    if (!v) return;
    try {
      out = parse(*v);
    } catch (const InvalidArgument& e) {
      throw InvalidConfiguration(fmt::format("{}: {}", key, e.what()));
    }
  }

 private:
  std::map<std::string, std::string> values_;
};

void resolve_attack(const Values& v, RunConfig& c) {
  fl::TrainingConfig& t = c.training;
  adversary::AttackSpec& a = t.attack;
  v.read_enum("attack.kind", a.kind, adversary::parse_attack_kind);
  v.read_double("attack.magnitude", a.magnitude);
  v.read_double("attack.share_magnitude", a.share_magnitude);
  a.rng_seed = derive_seed(t.seed, {kAttackStream});
  if (const auto* s = v.find("attack.seed")) a.rng_seed = to_u64("attack.seed", *s);

  const auto* list = v.find("attack.byzantine");
  const auto* count = v.find("attack.byzantine_count");
  if (list && count)
    throw InvalidConfiguration("attack.byzantine and attack.byzantine_count are mutually exclusive");
  if (list) {
    a.byzantine_set = to_users("attack.byzantine", *list, t.n_users);
  } else {
    std::size_t k = a.kind == adversary::AttackKind::kNone ? 0 : t.byzantine_bound;
    if (count) k = to_u64("attack.byzantine_count", *count);
    if (k > t.n_users)
      throw InvalidConfiguration(
          fmt::format("attack.byzantine_count: {} exceeds N = {}", k, t.n_users));
    std::vector<UserIndex> users(t.n_users);
    std::iota(users.begin(), users.end(), 0);
    Rng rng(derive_seed(t.seed, {kByzantineDraw}));
    std::shuffle(users.begin(), users.end(), rng);
    a.byzantine_set.assign(users.begin(), users.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(a.byzantine_set.begin(), a.byzantine_set.end());
  }
  if (const auto* s = v.find("attack.collusion"))
    a.collusion_set = to_users("attack.collusion", *s, t.n_users);
}

void resolve_theory(const Values& v, TheorySettings& th) {
  v.read_enum("theory.mode", th.mode, [](std::string_view s) {
    if (s == "estimate") return TheorySettings::Mode::kEstimate;
    if (s == "manual") return TheorySettings::Mode::kManual;
    throw InvalidArgument(fmt::format("unknown mode '{}' (estimate | manual)", s));
  });
  v.read_size("theory.estimate_rounds", th.estimate_rounds);
  v.read_size("theory.surrogate_draws", th.surrogate_draws);
  if (th.estimate_rounds < 10)
    throw InvalidConfiguration(fmt::format(
        "theory.estimate_rounds: at least 10 rounds are required, got {}", th.estimate_rounds));
  if (th.surrogate_draws < 2)
    throw InvalidConfiguration("theory.surrogate_draws must be at least 2");

  const std::vector<std::pair<std::string, double*>> manual{
      {"theory.sigma_g", &th.sigma_g},        {"theory.sigma_eps", &th.sigma_eps},
      {"theory.g_norm", &th.g_norm},          {"theory.mu_T", &th.stats.mu_t},
      {"theory.sigma_T", &th.stats.sigma_t},  {"theory.mu_Q", &th.stats.mu_q},
      {"theory.sigma_Q", &th.stats.sigma_q},  {"theory.C1", &th.stats.c1}};
  for (const auto& [key, target] : manual) {
    if (th.mode == TheorySettings::Mode::kManual) {
      if (!v.has(key)) throw InvalidConfiguration(fmt::format("{} is required when theory.mode = manual", key));
      v.read_double(key, *target);
    } else if (v.has(key)) {
      throw InvalidConfiguration(fmt::format("{} is only valid when theory.mode = manual", key));
    }
  }
  if (th.mode == TheorySettings::Mode::kManual) {
    try {
      th.stats.validate();
    } catch (const InvalidConfiguration& e) {
      throw InvalidConfiguration(fmt::format("theory: {}", e.what()));
    }
  }
}

RunConfig resolve(const pt::ptree& tree, std::optional<std::uint64_t> seed_override) {
  const Values v(tree);
  RunConfig c;
  fl::TrainingConfig& t = c.training;

  v.read_size("protocol.N", t.n_users);
  v.read_size("protocol.T", t.collusion_threshold);
  v.read_size("protocol.A", t.byzantine_bound);
  v.read_size("protocol.m", t.select_m);
  if (const auto* s = v.find("protocol.rules")) {
    c.rules.clear();
    for (const std::string& name : split_list(*s)) {
      robust::Rule rule{};
      v.read_enum("protocol.rules", rule, [&](std::string_view) { return robust::parse_rule(name); });
      if (std::find(c.rules.begin(), c.rules.end(), rule) != c.rules.end())
        throw InvalidConfiguration(fmt::format("protocol.rules: '{}' listed twice", name));
      c.rules.push_back(rule);
    }
    if (c.rules.empty()) throw InvalidConfiguration("protocol.rules: at least one rule is required");
  }
  v.read_enum("protocol.step_form", t.step_form, fl::parse_step_form);
  v.read_double("protocol.temperature", t.temperature);
  v.read_double("protocol.hint_floor", t.hint_floor);
  v.read_size("protocol.seed", t.seed);
  if (seed_override) t.seed = *seed_override;

  v.read_double("codec.privacy_sigma", t.privacy_sigma);
  v.read_double("codec.injected_precision_sigma", t.injected_precision_sigma);
  v.read_double("codec.rank_tolerance", t.rank_tolerance);
  v.read_double("codec.noise_floor", t.noise_floor);
  v.read_double("codec.root_match_tolerance", t.root_match_tolerance);

  v.read_enum("task.source", t.task.source, [](std::string_view s) {
    if (s == "blobs") return fl::TaskConfig::Source::kBlobs;
    if (s == "csv") return fl::TaskConfig::Source::kCsv;
    throw InvalidArgument(fmt::format("unknown source '{}' (blobs | csv)", s));
  });
  if (const auto* s = v.find("task.csv_path")) t.task.csv_path = *s;
  v.read_double("task.test_fraction", t.task.test_fraction);
  v.read_size("task.classes", t.task.blobs.classes);
  v.read_size("task.features", t.task.blobs.features);
  v.read_size("task.samples_per_user", t.task.blobs.samples_per_user);
  v.read_size("task.test_samples", t.task.blobs.test_samples);
  v.read_double("task.spread", t.task.blobs.spread);
  v.read_double("task.center_scale", t.task.blobs.center_scale);
  v.read_size("task.rounds", t.rounds);
  v.read_double("task.learning_rate", t.learning_rate);
  v.read_double("task.lr_decay", t.lr_decay);
  v.read_size("task.batch_size", t.batch_size);
  v.read_size("task.local_epochs", t.local_epochs);
  if (!(t.task.test_fraction > 0.0 && t.task.test_fraction < 1.0))
    throw InvalidConfiguration("task.test_fraction must lie in (0, 1)");
  if (t.task.blobs.classes < 2) throw InvalidConfiguration("task.classes must be at least 2");
  if (t.task.blobs.features < 1) throw InvalidConfiguration("task.features must be positive");
  if (t.task.blobs.samples_per_user < 1)
    throw InvalidConfiguration("task.samples_per_user must be positive");
  if (t.task.blobs.test_samples < 1) throw InvalidConfiguration("task.test_samples must be positive");
  if (!(t.task.blobs.spread > 0.0)) throw InvalidConfiguration("task.spread must be positive");
  if (!(t.task.blobs.center_scale > 0.0))
    throw InvalidConfiguration("task.center_scale must be positive");

  resolve_attack(v, c);
  resolve_theory(v, c.theory);

  if (const auto* s = v.find("output.dir")) c.output.dir = *s;
  v.read_bool("output.plot", c.output.plot);

  t.validate();
  return c;
}

}  // namespace

RunConfig parse_config(std::istream& in, std::optional<std::uint64_t> seed_override) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidConfiguration(fmt::format("malformed configuration: {}", e.message()) +
                               (e.line() ? fmt::format(" (line {})", e.line()) : ""));
  }
  return resolve(tree, seed_override);
}

RunConfig load_config(const std::filesystem::path& path,
                      std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw InvalidConfiguration(fmt::format("cannot read configuration '{}'", path.string()));
  RunConfig c = parse_config(in, seed_override);
  // A relative CSV path is taken relative to the configuration file.
  auto& csv = c.training.task.csv_path;
  if (!csv.empty() && csv.is_relative()) csv = path.parent_path() / csv;
  return c;
}

std::optional<std::uint64_t> parse_seed_override(const char* value) {
  if (value == nullptr || *value == '\0') return std::nullopt;
  return to_u64("FORTA_SEED", trim(value));
}

std::optional<std::uint64_t> seed_override_from_env() {
  return parse_seed_override(std::getenv("FORTA_SEED"));
}

std::string echo_config(const RunConfig& c) {
  const fl::TrainingConfig& t = c.training;
  std::vector<std::string_view> rules;
  for (robust::Rule r : c.rules) rules.push_back(robust::to_string(r));
  std::string out;
  auto line = [&out](std::string_view key, const auto& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  out += "[protocol]\n";
  line("N", t.n_users);
  line("T", t.collusion_threshold);
  line("A", t.byzantine_bound);
  line("m", t.select_m);
  line("rules", fmt::format("{}", fmt::join(rules, ", ")));
  line("step_form", fl::to_string(t.step_form));
  line("temperature", t.temperature);
  line("hint_floor", t.hint_floor);
  line("seed", t.seed);
  out += "\n[codec]\n";
  line("privacy_sigma", t.privacy_sigma);
  line("injected_precision_sigma", t.injected_precision_sigma);
  line("rank_tolerance", t.rank_tolerance);
  line("noise_floor", t.noise_floor);
  line("root_match_tolerance", t.root_match_tolerance);
  out += "\n[task]\n";
  line("source", t.task.source == fl::TaskConfig::Source::kCsv ? "csv" : "blobs");
  if (!t.task.csv_path.empty()) line("csv_path", t.task.csv_path.string());
  line("test_fraction", t.task.test_fraction);
  line("classes", t.task.blobs.classes);
  line("features", t.task.blobs.features);
  line("samples_per_user", t.task.blobs.samples_per_user);
  line("test_samples", t.task.blobs.test_samples);
  line("spread", t.task.blobs.spread);
  line("center_scale", t.task.blobs.center_scale);
  line("rounds", t.rounds);
  line("learning_rate", t.learning_rate);
  line("lr_decay", t.lr_decay);
  line("batch_size", t.batch_size);
  line("local_epochs", t.local_epochs);
  out += "\n[attack]\n";
  line("kind", adversary::to_string(t.attack.kind));
  line("magnitude", t.attack.magnitude);
  line("share_magnitude", t.attack.share_magnitude);
  line("byzantine", to_user_list(t.attack.byzantine_set));
  line("collusion", to_user_list(t.attack.collusion_set));
  line("seed", t.attack.rng_seed);
  out += "\n[theory]\n";
  const bool manual = c.theory.mode == TheorySettings::Mode::kManual;
  line("mode", manual ? "manual" : "estimate");
  line("estimate_rounds", c.theory.estimate_rounds);
  line("surrogate_draws", c.theory.surrogate_draws);
  if (manual) {
    line("sigma_g", c.theory.sigma_g);
    line("sigma_eps", c.theory.sigma_eps);
    line("g_norm", c.theory.g_norm);
    line("mu_T", c.theory.stats.mu_t);
    line("sigma_T", c.theory.stats.sigma_t);
    line("mu_Q", c.theory.stats.mu_q);
    line("sigma_Q", c.theory.stats.sigma_q);
    line("C1", c.theory.stats.c1);
  }
  out += "\n[output]\n";
  line("dir", c.output.dir.string());
  line("plot", c.output.plot ? "true" : "false");
  return out;
}

}  // namespace forta::config
