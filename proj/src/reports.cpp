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

#include "forta/reports.hpp"

#include <algorithm>
#include <array>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace forta::reports {

namespace {

std::string user_list(const std::vector<UserIndex>& users) {
  std::string s;
  for (std::size_t i = 0; i < users.size(); ++i) {
    if (i > 0) s += ';';
    s += std::to_string(users[i] + 1);
  }
  return s;
}

bool krum_family(const fl::RunLog& log) { return log.config.rule != robust::Rule::kFedAvg; }

std::string_view series_color(robust::Rule rule) {
  switch (rule) {
    case robust::Rule::kFedAvg: return "#d62728";
    case robust::Rule::kKrum: return "#1f77b4";
    case robust::Rule::kModifiedKrum: return "#2ca02c";
  }
  return "#000000";
}

}  // namespace

void write_runlog_csv(std::ostream& out, const std::vector<fl::RunLog>& logs) {
  out << "round,rule,accuracy,loss,decode_failures,aborted,selected\n";
  for (const auto& log : logs)
    for (const auto& r : log.rounds)
      fmt::print(out, "{},{},{},{},{},{},{}\n", r.round, robust::to_string(r.rule), r.accuracy,
                 r.loss, r.decode_failures, r.aborted ? 1 : 0, user_list(r.selected));
}

void write_scores_csv(std::ostream& out, const std::vector<fl::RunLog>& logs) {
  out << "rule,round,user,S,lambda,S_mod,selected\n";
  for (const auto& log : logs) {
    if (!krum_family(log)) continue;
    for (const auto& r : log.rounds) {
      for (std::size_t u = 0; u < r.krum_scores.size(); ++u) {
        const bool selected = std::find(r.selected.begin(), r.selected.end(), u) != r.selected.end();
        const std::string lambda = r.lambda.empty() ? "" : fmt::format("{}", r.lambda[u]);
        const std::string smod =
            r.modified_scores.empty() ? "" : fmt::format("{}", r.modified_scores[u]);
        fmt::print(out, "{},{},{},{},{},{},{}\n", robust::to_string(r.rule), r.round, u + 1,
                   r.krum_scores[u], lambda, smod, selected ? 1 : 0);
      }
    }
  }
}

void write_profile_csv(std::ostream& out, const std::vector<fl::RunLog>& logs) {
  out << "rule,round,user,count,total_codewords\n";
  for (const auto& log : logs) {
    if (!krum_family(log)) continue;
    for (const auto& r : log.rounds)
      for (std::size_t u = 0; u < r.profile_counts.size(); ++u)
        fmt::print(out, "{},{},{},{},{}\n", robust::to_string(r.rule), r.round, u + 1,
                   r.profile_counts[u], r.total_codewords);
  }
}

void write_accuracy_svg(std::ostream& out, const std::vector<fl::RunLog>& logs) {
  constexpr double kWidth = 640, kHeight = 400;
  constexpr double kLeft = 60, kRight = 130, kTop = 20, kBottom = 50;
  constexpr double kPlotW = kWidth - kLeft - kRight, kPlotH = kHeight - kTop - kBottom;
  std::size_t max_round = 1;
  for (const auto& log : logs)
    for (const auto& r : log.rounds) max_round = std::max(max_round, r.round);
  auto x_of = [&](double round) { return kLeft + kPlotW * round / static_cast<double>(max_round); };
  auto y_of = [&](double acc) { return kTop + kPlotH * (1.0 - acc); };

  fmt::print(out,
             "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
             "viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n",
             kWidth, kHeight, kWidth, kHeight);
  fmt::print(out, "<rect width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", kWidth, kHeight);
  // Axes, grid and tick labels.
  for (int i = 0; i <= 4; ++i) {
    const double acc = 0.25 * i, y = y_of(acc);
    fmt::print(out,
               "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#dddddd\"/>\n",
               kLeft, y, kLeft + kPlotW, y);
    fmt::print(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.2f}</text>\n",
               kLeft - 6, y + 4, acc);
  }
  const std::size_t step = std::max<std::size_t>(1, (max_round + 4) / 5);
  for (std::size_t t = 0; t <= max_round; t += step)
    fmt::print(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n",
               x_of(static_cast<double>(t)), kTop + kPlotH + 18, t);
  fmt::print(out,
             "<path d=\"M{:.2f} {:.2f} V{:.2f} H{:.2f}\" fill=\"none\" stroke=\"black\"/>\n",
             kLeft, kTop, kTop + kPlotH, kLeft + kPlotW);
  fmt::print(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">round</text>\n",
             kLeft + kPlotW / 2, kHeight - 10);
  fmt::print(out,
             "<text x=\"14\" y=\"{:.2f}\" text-anchor=\"middle\" "
             "transform=\"rotate(-90 14 {:.2f})\">test accuracy</text>\n",
             kTop + kPlotH / 2, kTop + kPlotH / 2);

  for (std::size_t s = 0; s < logs.size(); ++s) {
    const auto& log = logs[s];
    const std::string_view color = series_color(log.config.rule);
    std::string points = fmt::format("{:.2f},{:.2f}", x_of(0), y_of(log.initial_accuracy));
    for (const auto& r : log.rounds)
      points += fmt::format(" {:.2f},{:.2f}", x_of(static_cast<double>(r.round)), y_of(r.accuracy));
    fmt::print(out, "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
               points, color);
    const double ly = kTop + 10 + 18 * static_cast<double>(s);
    fmt::print(out,
               "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
               "stroke-width=\"2\"/>\n",
               kLeft + kPlotW + 10, ly, kLeft + kPlotW + 30, ly, color);
    fmt::print(out, "<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", kLeft + kPlotW + 36, ly + 4,
               robust::to_string(log.config.rule));
  }
  out << "</svg>\n";
}

void write_fuzz_csv(std::ostream& out, const std::vector<FuzzRow>& rows) {
  out << "error_count,magnitude,success_rate,mean_residual\n";
  for (const auto& r : rows)
    fmt::print(out, "{},{},{},{}\n", r.error_count, r.magnitude, r.success_rate, r.mean_residual);
}

namespace {

// (name, value) pairs shared by the text and CSV forms.
std::vector<std::pair<std::string, std::string>> bounds_fields(const BoundsReport& r) {
  auto num = [](double v) { return fmt::format("{}", v); };
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  return {
      {"source", r.source},
      {"N", std::to_string(r.params.n_users)},
      {"A", std::to_string(r.params.byzantine_bound)},
      {"d", std::to_string(r.params.dim)},
      {"sigma_g", num(r.params.sigma_g)},
      {"sigma_eps", num(r.params.sigma_eps)},
      {"g_norm", num(r.params.g_norm)},
      {"mu_T", num(r.stats.mu_t)},
      {"sigma_T", num(r.stats.sigma_t)},
      {"mu_Q", num(r.stats.mu_q)},
      {"sigma_Q", num(r.stats.sigma_q)},
      {"C1", num(r.stats.c1)},
      {"eta", num(r.eta)},
      {"eta_prime", num(r.eta_prime)},
      {"sigma_prime", num(r.sigma_prime)},
      {"sin_alpha", num(r.sin_alpha.value)},
      {"sin_alpha_valid", flag(r.sin_alpha.valid)},
      {"sin_alpha_mod", num(r.sin_alpha_mod.value)},
      {"sin_alpha_mod_valid", flag(r.sin_alpha_mod.valid)},
      {"corollary", flag(r.corollary)},
  };
}

}  // namespace

void write_bounds_text(std::ostream& out, const BoundsReport& report) {
  for (const auto& [key, value] : bounds_fields(report)) fmt::print(out, "{} = {}\n", key, value);
}

void write_bounds_csv(std::ostream& out, const BoundsReport& report) {
  out << "quantity,value\n";
  for (const auto& [key, value] : bounds_fields(report)) {
    // Quote values that would break the column structure.
    if (value.find(',') != std::string::npos)
      fmt::print(out, "{},\"{}\"\n", key, value);
    else
      fmt::print(out, "{},{}\n", key, value);
  }
}

}  // namespace forta::reports
