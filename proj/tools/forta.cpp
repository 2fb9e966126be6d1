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

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "forta/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Byzantine-resilient secure aggregation over the reals"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "train with every configured rule and write run logs");
  run->add_option("--config", config_path, "INI configuration file")->required();
  run->add_option("--out", out_dir, "output directory (overrides output.dir)");

  forta::cli::FuzzOptions fuzz;
  std::string fuzz_out = ".";
  auto* codec_fuzz = app.add_subcommand("codec-fuzz", "Monte-Carlo decoder characterization");
  codec_fuzz->add_option("--n", fuzz.n, "code length")->capture_default_str();
  codec_fuzz->add_option("--k", fuzz.k, "message length")->capture_default_str();
  codec_fuzz->add_option("--trials", fuzz.trials, "trials per row")->capture_default_str();
  codec_fuzz->add_option("--errors", fuzz.error_counts, "error counts (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  codec_fuzz->add_option("--mag-min", fuzz.mag_min, "smallest error magnitude")->capture_default_str();
  codec_fuzz->add_option("--mag-max", fuzz.mag_max, "largest error magnitude")->capture_default_str();
  codec_fuzz->add_option("--mag-bins", fuzz.mag_bins, "magnitude bins")->capture_default_str();
  codec_fuzz->add_option("--seed", fuzz.seed, "random seed")->capture_default_str();
  codec_fuzz->add_option("--out", fuzz_out, "output directory")->capture_default_str();

  auto* bounds = app.add_subcommand("bounds", "evaluate the resilience bounds");
  bounds->add_option("--config", config_path, "INI configuration file")->required();
  bounds->add_option("--out", out_dir, "output directory (overrides output.dir)");

  CLI11_PARSE(app, argc, argv);

  const std::optional<std::filesystem::path> out =
      out_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(out_dir);
  if (*run) return forta::cli::cmd_run(config_path, out, std::cout, std::cerr);
  if (*bounds) return forta::cli::cmd_bounds(config_path, out, std::cout, std::cerr);
  try {
    if (const auto seed = forta::config::seed_override_from_env()) fuzz.seed = *seed;
  } catch (const std::exception& e) {
    std::cerr << "forta: error: " << e.what() << "\n";
    return forta::cli::kBadConfig;
  }
  return forta::cli::cmd_codec_fuzz(fuzz, fuzz_out, std::cout, std::cerr);
}
