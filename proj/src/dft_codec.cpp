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

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace forta::codec {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

VectorXcd to_eigen(std::span<const Complex> v) {
  VectorXcd out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = v[i];
  return out;
}

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a > std::numbers::pi) a -= kTwoPi;
  if (a < -std::numbers::pi) a += kTwoPi;
  return a;
}

}  // namespace

CodecParams CodecParams::with_defaults(std::size_t n, std::size_t k) {
  CodecParams p;
  p.n = n;
  p.k = k;
  return p;
}

double CodecParams::match_tolerance() const {
  if (root_match_tolerance > 0.0) return root_match_tolerance;
  return std::numbers::pi / static_cast<double>(n);
}

void CodecParams::validate() const {
  if (k < 1) throw InvalidArgument("codec: k must be at least 1");
  if (n <= k) throw InvalidArgument(fmt::format("codec: n ({}) must exceed k ({})", n, k));
  if (!(rank_tolerance > 0.0 && rank_tolerance < 1.0))
    throw InvalidArgument("codec: rank_tolerance must lie in (0, 1)");
  if (root_match_tolerance < 0.0)
    throw InvalidArgument("codec: root_match_tolerance must be positive");
  if (!(noise_floor >= 0.0)) throw InvalidArgument("codec: noise_floor must be non-negative");
}

struct DftCodec::Attempt {
  DecodeResult result;
  PositionSet solved_positions;
  ComplexVector solved_values;
};

DftCodec::DftCodec(const CodecParams& params) : params_(params) {
  params_.validate();
  const std::size_t n = params_.n;
  const std::size_t k = params_.k;
  roots_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    roots_[j] = std::polar(1.0, angle);
  }
  encode_matrix_.resize(static_cast<Index>(n), static_cast<Index>(k));
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t t = 0; t < k; ++t)
      encode_matrix_(static_cast<Index>(p), static_cast<Index>(t)) = root((p + 1) * t);
  spectrum_matrix_.resize(static_cast<Index>(n), static_cast<Index>(n));
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t f = 0; f < n; ++f)
    for (std::size_t p = 0; p < n; ++p)
      spectrum_matrix_(static_cast<Index>(f), static_cast<Index>(p)) =
          std::conj(root((p + 1) * f)) * inv_n;
}

Complex DftCodec::evaluation_point(std::size_t position) const {
  return root(position + 1);
}

Codeword DftCodec::encode(std::span<const Complex> message) const {
  if (message.size() != params_.k)
    throw InvalidArgument(
        fmt::format("encode: message length {} != k = {}", message.size(), params_.k));
  const VectorXcd values = encode_matrix_ * to_eigen(message);
  return Codeword{ComplexVector(values.data(), values.data() + values.size())};
}

ComplexVector DftCodec::syndromes(const Codeword& received) const {
  if (received.values.size() != params_.n)
    throw InvalidArgument(fmt::format("syndromes: codeword length {} != n = {}",
                                      received.values.size(), params_.n));
  const auto r = static_cast<Index>(params_.parity_count());
  Eigen::Map<const VectorXcd> word(received.values.data(), static_cast<Index>(params_.n));
  const VectorXcd s = spectrum_matrix_.bottomRows(r) * word;
  return ComplexVector(s.data(), s.data() + s.size());
}

ComplexVector DftCodec::interpolate(const Codeword& word) const {
  const auto k = static_cast<Index>(params_.k);
  Eigen::Map<const VectorXcd> w(word.values.data(), static_cast<Index>(params_.n));
  const VectorXcd m = spectrum_matrix_.topRows(k) * w;
  return ComplexVector(m.data(), m.data() + m.size());
}

RealVector DftCodec::hankel_singular_values(std::span<const Complex> syn) const {
  const std::size_t len = syn.size();
  if (len < 2) return {};
  const std::size_t rows = len / 2;
  const std::size_t cols = len - rows + 1;
  MatrixXcd h(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t a = 0; a < rows; ++a)
    for (std::size_t b = 0; b < cols; ++b)
      h(static_cast<Index>(a), static_cast<Index>(b)) = syn[a + b];
  // Eigenvalues of the Hermitian Gram matrix are the squared singular
  // values. Squaring costs about sqrt(eps) * sigma_1 in absolute accuracy on
  // the small ones, far below the relative rank tolerance, and is several
  // times cheaper than a complex Jacobi SVD.
  const MatrixXcd gram = h * h.adjoint();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();  // ascending
  RealVector sv(static_cast<std::size_t>(ev.size()));
  for (Index i = 0; i < ev.size(); ++i)
    sv[static_cast<std::size_t>(i)] = std::sqrt(std::max(ev(ev.size() - 1 - i), 0.0));
  return sv;
}

std::size_t DftCodec::rank_estimate(std::span<const Complex> syn, std::size_t capacity,
                                    double abs_floor, double rel_tol) const {
  const std::size_t len = syn.size();
  if (len < 2) return 0;
  const std::size_t rows = len / 2;
  const std::size_t cols = len - rows + 1;
  capacity = std::min(capacity, rows);
  if (capacity == 0) return 0;

  // sigma_1 <= ||H||_F, so a small Frobenius norm settles the clean case
  // without an SVD.
  double frob2 = 0.0;
  for (std::size_t a = 0; a < rows; ++a)
    for (std::size_t b = 0; b < cols; ++b) frob2 += std::norm(syn[a + b]);
  if (std::sqrt(frob2) <= abs_floor || frob2 == 0.0) return 0;

  const RealVector sv = hankel_singular_values(syn);
  const double s1 = sv.front();
  if (s1 <= abs_floor) return 0;
  std::size_t count = 0;
  for (std::size_t j = 1; j <= capacity && j <= sv.size(); ++j)
    if (sv[j - 1] / s1 > rel_tol) count = j;
  return count;
}

std::size_t DftCodec::estimate_error_count(std::span<const Complex> syn) const {
  return rank_estimate(syn, params_.max_correctable(), params_.noise_floor,
                       params_.rank_tolerance);
}

PositionSet DftCodec::locate_errors(std::span<const Complex> syn, std::size_t count) const {
  if (count < 1 || count > params_.max_correctable() || 2 * count > syn.size())
    throw InvalidArgument(fmt::format("locate_errors: count {} outside [1, {}]", count,
                                      std::min(params_.max_correctable(), syn.size() / 2)));
  return locate(syn, count);
}

PositionSet DftCodec::locate(std::span<const Complex> syn, std::size_t count) const {
  const auto nu = static_cast<Index>(count);
  const auto rows = static_cast<Index>(syn.size()) - nu;
  // Linear prediction: s_{q+nu} + sum_t c_t s_{q+t} = 0.
  MatrixXcd m(rows, nu);
  VectorXcd rhs(rows);
  for (Index q = 0; q < rows; ++q) {
    for (Index t = 0; t < nu; ++t) m(q, t) = syn[static_cast<std::size_t>(q + t)];
    rhs(q) = -syn[static_cast<std::size_t>(q + nu)];
  }
  const VectorXcd c = m.colPivHouseholderQr().solve(rhs);

  VectorXcd roots(nu);
  if (nu == 1) {
    roots(0) = -c(0);
  } else {
    MatrixXcd companion = MatrixXcd::Zero(nu, nu);
    for (Index j = 0; j < nu; ++j) companion(0, j) = -c(nu - 1 - j);
    for (Index i = 1; i < nu; ++i) companion(i, i - 1) = 1.0;
    Eigen::ComplexEigenSolver<MatrixXcd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
      throw LocalizationFailure("locate_errors: locator root finding did not converge",
                                Complex(std::numeric_limits<double>::quiet_NaN(), 0.0));
    roots = solver.eigenvalues();
  }

  const double n = static_cast<double>(params_.n);
  const double tol = params_.match_tolerance();
  PositionSet positions;
  positions.reserve(count);
  for (Index i = 0; i < nu; ++i) {
    const Complex z = roots(i);
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) == 0.0)
      throw LocalizationFailure("locate_errors: degenerate locator root", z);
    // Error at position p contributes a root at conj(omega_{p+1}).
    const double theta = std::arg(z);
    const double turns = -theta * n / (2.0 * std::numbers::pi);
    const auto j = static_cast<long>(std::lround(turns));
    const double snapped = -2.0 * std::numbers::pi * static_cast<double>(j) / n;
    if (std::abs(wrap_angle(theta - snapped)) > tol)
      throw LocalizationFailure(
          fmt::format("locate_errors: root at angle {:.6f} matches no evaluation point", theta), z);
    const long nn = static_cast<long>(params_.n);
    const long idx = ((j % nn) + nn) % nn;  // idx = p + 1 (mod n)
    positions.push_back(static_cast<std::size_t>((idx + nn - 1) % nn));
  }
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
  return positions;
}

ComplexVector DftCodec::solve_error_values(std::span<const Complex> syn,
                                           const PositionSet& positions) const {
  if (positions.empty()) return {};
  const auto rows = static_cast<Index>(syn.size());
  const auto cols = static_cast<Index>(positions.size());
  MatrixXcd v(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    const std::size_t p = positions[static_cast<std::size_t>(j)];
    for (Index q = 0; q < rows; ++q) v(q, j) = std::conj(root((p + 1) * static_cast<std::size_t>(q)));
  }
  const VectorXcd a = v.colPivHouseholderQr().solve(to_eigen(syn));
  ComplexVector values(positions.size());
  const double n = static_cast<double>(params_.n);
  for (std::size_t j = 0; j < positions.size(); ++j)
    values[j] = n * a(static_cast<Index>(j)) * root((positions[j] + 1) * params_.k);
  return values;
}

ComplexVector DftCodec::forney_syndromes(std::span<const Complex> syn,
                                         const PositionSet& erasures) const {
  // gamma(x) = prod_{p in E} (x - conj(omega_{p+1})), lowest degree first.
  ComplexVector gamma{Complex(1.0, 0.0)};
  for (std::size_t p : erasures) {
    const Complex z = std::conj(root(p + 1));
    ComplexVector next(gamma.size() + 1, Complex(0.0, 0.0));
    for (std::size_t t = 0; t < gamma.size(); ++t) {
      next[t + 1] += gamma[t];
      next[t] -= z * gamma[t];
    }
    gamma = std::move(next);
  }
  const std::size_t rho = erasures.size();
  ComplexVector out(syn.size() - rho);
  for (std::size_t q = 0; q < out.size(); ++q) {
    Complex acc(0.0, 0.0);
    for (std::size_t t = 0; t <= rho; ++t) acc += gamma[t] * syn[q + t];
    out[q] = acc;
  }
  return out;
}

double DftCodec::reliability_gate(const Codeword& received) const {
  return 1e3 * params_.noise_floor * norm(received.values);
}

DftCodec::Attempt DftCodec::attempt(const Codeword& received, std::span<const Complex> syn,
                                    const PositionSet& positions) const {
  Attempt out;
  out.solved_positions = positions;
  out.solved_values = solve_error_values(syn, positions);

  Codeword corrected = received;
  for (std::size_t j = 0; j < positions.size(); ++j)
    corrected.values[positions[j]] -= out.solved_values[j];

  DecodeResult& r = out.result;
  r.message = interpolate(corrected);
  r.position_energies.assign(params_.n, 0.0);
  for (std::size_t j = 0; j < positions.size(); ++j) {
    const double magnitude = std::abs(out.solved_values[j]);
    r.position_energies[positions[j]] = magnitude;
    if (magnitude > params_.noise_floor) {
      r.error_positions.push_back(positions[j]);
      r.error_values.push_back(out.solved_values[j]);
    }
  }
  // Re-encode and compare with the corrected received word.
  const Codeword reencoded = encode(r.message);
  double res2 = 0.0;
  for (std::size_t p = 0; p < params_.n; ++p)
    res2 += std::norm(reencoded.values[p] - corrected.values[p]);
  r.residual = std::sqrt(res2);
  return out;
}

void DftCodec::add_sub_floor_evidence(const Codeword& received, std::span<const Complex> syn,
                                      DecodeResult& result) const {
  // Structured corruption below the detection floor still has a low-rank
  // syndrome signature well above float64 round-off. Recover its support
  // and report the magnitudes, clamped to the floor, as position energies
  // for joint localization. The message is left uncorrected.
  const double precision_floor =
      1e3 * std::numeric_limits<double>::epsilon() * norm(received.values);
  const std::size_t cap = params_.max_correctable();
  const std::size_t first = rank_estimate(syn, cap, precision_floor, params_.rank_tolerance);
  if (first == 0) return;
  const double syn_norm = std::sqrt(
      std::accumulate(syn.begin(), syn.end(), 0.0,
                      [](double acc, const Complex& s) { return acc + std::norm(s); }));
  for (std::size_t nu = first; nu <= cap; ++nu) {
    PositionSet positions;
    try {
      positions = locate(syn, nu);
    } catch (const LocalizationFailure&) {
      continue;
    }
    const ComplexVector values = solve_error_values(syn, positions);
    // Syndrome misfit of the fitted sparse pattern.
    double misfit2 = 0.0;
    for (std::size_t q = 0; q < syn.size(); ++q) {
      Complex model(0.0, 0.0);
      for (std::size_t j = 0; j < positions.size(); ++j) {
        const std::size_t p = positions[j];
        model += values[j] / static_cast<double>(params_.n) *
                 std::conj(root((p + 1) * (params_.k + q)));
      }
      misfit2 += std::norm(syn[q] - model);
    }
    if (std::sqrt(misfit2) > 1e-3 * syn_norm) continue;
    for (std::size_t j = 0; j < positions.size(); ++j)
      result.position_energies[positions[j]] =
          std::min(std::abs(values[j]), params_.noise_floor);
    return;
  }
}

DecodeOutcome DftCodec::try_decode(const Codeword& received,
                                   const std::optional<PositionSet>& erasure_hints) const {
  const ComplexVector syn = syndromes(received);
  const std::size_t r = params_.parity_count();

  PositionSet erasures;
  if (erasure_hints) {
    erasures = *erasure_hints;
    std::sort(erasures.begin(), erasures.end());
    erasures.erase(std::unique(erasures.begin(), erasures.end()), erasures.end());
    for (std::size_t p : erasures)
      if (p >= params_.n)
        throw InvalidArgument(fmt::format("decode: erasure hint {} out of range", p));
    if (erasures.size() > r)
      throw InvalidArgument(
          fmt::format("decode: {} erasure hints exceed n - k = {}", erasures.size(), r));
  }
  const std::size_t rho = erasures.size();
  const std::size_t capacity = (r - rho) / 2;
  const ComplexVector modified = rho > 0 ? forney_syndromes(syn, erasures) : syn;
  const std::size_t first =
      rank_estimate(modified, capacity, params_.noise_floor, params_.rank_tolerance);
  const double gate = reliability_gate(received);

  DecodeOutcome out;
  if (rho == 0 && first == 0) {
    out.result = attempt(received, syn, {}).result;
    add_sub_floor_evidence(received, syn, out.result);
    out.status = out.result.residual > gate ? DecodeStatus::kUnreliable : DecodeStatus::kOk;
    return out;
  }

  std::optional<DecodeResult> best;
  std::optional<Complex> unmatched;
  // The rank estimate can undercount when error magnitudes span many
  // decades; escalate until the re-encoding residual passes the gate.
  for (std::size_t nu = first; nu <= capacity; ++nu) {
    PositionSet positions = erasures;
    if (nu > 0) {
      PositionSet located;
      try {
        located = locate(modified, nu);
      } catch (const LocalizationFailure& e) {
        if (!unmatched) unmatched = e.unmatched_root();
        continue;
      }
      for (std::size_t p : located)
        if (!std::binary_search(erasures.begin(), erasures.end(), p)) positions.push_back(p);
      std::sort(positions.begin(), positions.end());
      assert(2 * (positions.size() - rho) + rho <= r);
    }
    Attempt a = attempt(received, syn, positions);
    a.result.erasures_used = rho;
    if (a.result.residual <= gate) {
      out.status = DecodeStatus::kOk;
      out.result = std::move(a.result);
      return out;
    }
    if (!best || a.result.residual < best->residual) best = std::move(a.result);
  }

  if (best) {
    out.status = DecodeStatus::kUnreliable;
    out.result = std::move(*best);
    return out;
  }
  out.status = DecodeStatus::kLocalizationFailure;
  out.result = attempt(received, syn, erasures).result;
  out.result.erasures_used = rho;
  out.unmatched_root = unmatched.value_or(Complex{});
  return out;
}

DecodeResult DftCodec::decode(const Codeword& received,
                              const std::optional<PositionSet>& erasure_hints) const {
  DecodeOutcome outcome = try_decode(received, erasure_hints);
  switch (outcome.status) {
    case DecodeStatus::kOk:
      return std::move(outcome.result);
    case DecodeStatus::kUnreliable:
      throw DecodeUnreliable(
          fmt::format("decode: residual {:.3e} exceeds reliability gate", outcome.result.residual),
          std::move(outcome.result));
    case DecodeStatus::kLocalizationFailure:
      break;
  }
  throw LocalizationFailure("decode: error localization failed", outcome.unmatched_root);
}

}  // namespace forta::codec
