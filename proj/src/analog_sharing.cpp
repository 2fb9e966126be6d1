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

#include "forta/analog_sharing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <fmt/ostream.h>

namespace forta::sharing {

namespace {

Complex unit_root(std::size_t j, std::size_t n) {
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(j % n) /
                             static_cast<double>(n));
}

// Position of each owner's share in `held`; throws on gaps or duplicates.
std::vector<std::size_t> index_by_owner(std::span<const Share> held, std::size_t n_users) {
  constexpr std::size_t kMissing = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n_users, kMissing);
  for (std::size_t s = 0; s < held.size(); ++s) {
    const UserIndex owner = held[s].owner;
    if (owner >= n_users)
      throw ProtocolViolation(fmt::format("share from unknown owner {}", owner + 1), owner);
    if (index[owner] != kMissing)
      throw ProtocolViolation(fmt::format("duplicate share from owner {}", owner + 1), owner);
    index[owner] = s;
  }
  for (UserIndex owner = 0; owner < n_users; ++owner)
    if (index[owner] == kMissing)
      throw ProtocolViolation(fmt::format("missing share from owner {}", owner + 1), owner);
  return index;
}

const Share& find_share(std::span<const Share> held, UserIndex owner) {
  for (const Share& s : held)
    if (s.owner == owner) return s;
  throw ProtocolViolation(fmt::format("missing share from owner {}", owner + 1), owner);
}

}  // namespace

void SharingParams::validate() const {
  if (collusion_threshold < 1) throw InvalidArgument("sharing: T must be at least 1");
  if (n_users <= collusion_threshold + 1)
    throw InvalidArgument(fmt::format("sharing: N ({}) must exceed T + 1 ({})", n_users,
                                      collusion_threshold + 1));
  if (!(privacy_sigma > 0.0)) throw InvalidArgument("sharing: privacy_sigma must be positive");
  if (!(injected_precision_sigma >= 0.0))
    throw InvalidArgument("sharing: injected_precision_sigma must be non-negative");
}

codec::CodecParams SharingParams::codec_params() const {
  return codec::CodecParams::with_defaults(n_users, collusion_threshold + 1);
}

std::size_t pair_index(UserIndex j, UserIndex k, std::size_t n_users) {
  if (j > k) std::swap(j, k);
  if (j == k || k >= n_users) throw InvalidArgument("pair_index: invalid pair");
  // Pairs (0,1..n-1), (1,2..n-1), ...
  return j * n_users - j * (j + 1) / 2 + (k - j - 1);
}

std::vector<std::pair<UserIndex, UserIndex>> all_pairs(std::size_t n_users) {
  std::vector<std::pair<UserIndex, UserIndex>> pairs;
  pairs.reserve(n_users * (n_users - 1) / 2);
  for (UserIndex j = 0; j < n_users; ++j)
    for (UserIndex k = j + 1; k < n_users; ++k) pairs.emplace_back(j, k);
  return pairs;
}

std::vector<Share> make_shares(std::span<const double> update, const SharingParams& params,
                               UserIndex owner) {
  params.validate();
  if (update.empty()) throw InvalidArgument("make_shares: empty update");
  if (owner >= params.n_users) throw InvalidArgument("make_shares: owner out of range");
  const std::size_t n = params.n_users;
  const std::size_t t_max = params.collusion_threshold;
  const std::size_t d = update.size();

  Rng rng(derive_seed(params.rng_seed, {owner}));
  // Total variance sigma^2 / T per complex coefficient, split evenly.
  std::normal_distribution<double> mask(
      0.0, params.privacy_sigma / std::sqrt(2.0 * static_cast<double>(t_max)));
  std::normal_distribution<double> precision(0.0, 1.0);

  Eigen::MatrixXcd coefficients(static_cast<Eigen::Index>(t_max + 1), static_cast<Eigen::Index>(d));
  for (std::size_t l = 0; l < d; ++l) {
    const double eps = params.injected_precision_sigma * precision(rng);
    coefficients(0, static_cast<Eigen::Index>(l)) = Complex(update[l] + eps, 0.0);
  }
  for (std::size_t t = 1; t <= t_max; ++t)
    for (std::size_t l = 0; l < d; ++l) {
      const double re = mask(rng);
      const double im = mask(rng);
      coefficients(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(l)) = Complex(re, im);
    }

  Eigen::MatrixXcd vandermonde(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t_max + 1));
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t t = 0; t <= t_max; ++t)
      vandermonde(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(t)) =
          unit_root((p + 1) * t, n);
  const Eigen::MatrixXcd evaluations = vandermonde * coefficients;

  std::vector<Share> shares(n);
  for (std::size_t p = 0; p < n; ++p) {
    shares[p].owner = owner;
    shares[p].holder = p;
    shares[p].payload.resize(d);
    for (std::size_t l = 0; l < d; ++l)
      shares[p].payload[l] = evaluations(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(l));
  }
  return shares;
}

ComplexVector pair_difference(std::span<const Share> held, UserIndex j, UserIndex k) {
  const Share& a = find_share(held, j);
  const Share& b = find_share(held, k);
  if (a.payload.size() != b.payload.size())
    throw ProtocolViolation("share payload dimensions differ", k);
  ComplexVector out(a.payload.size());
  for (std::size_t l = 0; l < out.size(); ++l) out[l] = a.payload[l] - b.payload[l];
  return out;
}

std::vector<DifferenceMessage> difference_messages(std::span<const Share> held,
                                                   std::size_t n_users) {
  const std::vector<std::size_t> index = index_by_owner(held, n_users);
  const UserIndex reporter = held.front().holder;
  std::vector<DifferenceMessage> messages;
  messages.reserve(n_users * (n_users - 1) / 2);
  for (UserIndex j = 0; j < n_users; ++j) {
    const ComplexVector& sj = held[index[j]].payload;
    for (UserIndex k = j + 1; k < n_users; ++k) {
      const ComplexVector& sk = held[index[k]].payload;
      DifferenceMessage m{reporter, j, k, ComplexVector(sj.size())};
      for (std::size_t l = 0; l < sj.size(); ++l) m.payload[l] = sj[l] - sk[l];
      messages.push_back(std::move(m));
    }
  }
  return messages;
}

std::vector<codec::Codeword> assemble_codewords(std::span<const DifferenceMessage> messages,
                                                std::size_t n_users) {
  if (messages.empty()) throw ProtocolViolation("no difference messages", 0);
  const UserIndex j = messages.front().first;
  const UserIndex k = messages.front().second;
  const std::size_t d = messages.front().payload.size();
  std::vector<const DifferenceMessage*> by_reporter(n_users, nullptr);
  for (const DifferenceMessage& m : messages) {
    if (m.first != j || m.second != k)
      throw ProtocolViolation("messages for different pairs mixed in one codeword set", m.reporter);
    if (m.reporter >= n_users)
      throw ProtocolViolation(fmt::format("unknown reporter {}", m.reporter + 1), m.reporter);
    if (by_reporter[m.reporter] != nullptr)
      throw ProtocolViolation(fmt::format("duplicate message from reporter {}", m.reporter + 1),
                              m.reporter);
    if (m.payload.size() != d)
      throw ProtocolViolation("payload dimension mismatch", m.reporter);
    by_reporter[m.reporter] = &m;
  }
  for (UserIndex i = 0; i < n_users; ++i)
    if (by_reporter[i] == nullptr)
      throw ProtocolViolation(fmt::format("missing message from reporter {}", i + 1), i);

  std::vector<codec::Codeword> codewords(d);
  for (std::size_t l = 0; l < d; ++l) {
    codewords[l].values.resize(n_users);
    for (UserIndex i = 0; i < n_users; ++i) codewords[l].values[i] = by_reporter[i]->payload[l];
  }
  return codewords;
}

ReconstructionReport reconstruct(std::span<const codec::Codeword> codewords,
                                 const codec::DftCodec& codec,
                                 const std::optional<PositionSet>& hints) {
  ReconstructionReport report;
  const std::size_t d = codewords.size();
  report.secret.resize(d);
  report.per_coordinate_error_positions.resize(d);
  report.position_energies.resize(d);
  report.total_codewords = d;
  for (std::size_t l = 0; l < d; ++l) {
    codec::DecodeOutcome outcome = codec.try_decode(codewords[l], hints);
    if (outcome.status != codec::DecodeStatus::kOk) ++report.decode_failures;
    const Complex constant = outcome.result.message.front();
    report.secret[l] = constant.real();
    const double imag = std::abs(constant.imag());
    report.max_imag_residue = std::max(report.max_imag_residue, imag);
    if (imag > 1e-6) ++report.imag_residue_warnings;
    report.per_coordinate_error_positions[l] = std::move(outcome.result.error_positions);
    report.position_energies[l] = std::move(outcome.result.position_energies);
  }
  return report;
}

ComplexVector aggregation_message(std::span<const Share> held,
                                  std::span<const UserIndex> selected, std::size_t n_users) {
  if (selected.empty()) throw InvalidArgument("aggregation_message: empty selection");
  std::vector<const Share*> by_owner(n_users, nullptr);
  for (const Share& s : held)
    if (s.owner < n_users) by_owner[s.owner] = &s;
  ComplexVector sum;
  for (UserIndex j : selected) {
    if (j >= n_users || by_owner[j] == nullptr)
      throw ProtocolViolation(fmt::format("missing share from selected owner {}", j + 1), j);
    const ComplexVector& payload = by_owner[j]->payload;
    if (sum.empty()) sum.assign(payload.size(), Complex(0.0, 0.0));
    for (std::size_t l = 0; l < payload.size(); ++l) sum[l] += payload[l];
  }
  return sum;
}

std::vector<codec::Codeword> assemble_aggregate(std::span<const ComplexVector> holder_messages) {
  if (holder_messages.empty()) return {};
  const std::size_t d = holder_messages.front().size();
  std::vector<codec::Codeword> codewords(d);
  for (std::size_t l = 0; l < d; ++l) {
    codewords[l].values.resize(holder_messages.size());
    for (std::size_t i = 0; i < holder_messages.size(); ++i) {
      if (holder_messages[i].size() != d)
        throw ProtocolViolation("aggregation payload dimension mismatch", i);
      codewords[l].values[i] = holder_messages[i][l];
    }
  }
  return codewords;
}

std::size_t collusion_view_rank(std::span<const UserIndex> holders, const SharingParams& params) {
  const std::size_t cols = params.collusion_threshold + 1;
  Eigen::MatrixXcd view(static_cast<Eigen::Index>(holders.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < holders.size(); ++r)
    for (std::size_t t = 0; t < cols; ++t)
      view(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) =
          unit_root((holders[r] + 1) * t, params.n_users);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(view);
  const auto& sv = svd.singularValues();
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-10 * sv(0)) ++rank;
  return rank;
}

void write_share_dump(std::ostream& out, std::size_t round,
                      std::span<const std::vector<Share>> shares_by_owner, bool header) {
  if (header) out << "round,owner,holder,coordinate,re,im\n";
  for (const auto& shares : shares_by_owner)
    for (const Share& s : shares)
      for (std::size_t l = 0; l < s.payload.size(); ++l)
        fmt::print(out, "{},{},{},{},{:.17g},{:.17g}\n", round, s.owner + 1, s.holder + 1, l,
                   s.payload[l].real(), s.payload[l].imag());
}

}  // namespace forta::sharing
