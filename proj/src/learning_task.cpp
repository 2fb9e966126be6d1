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

#include "forta/learning_task.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <string>

#include <fmt/format.h>

namespace forta::task {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// View of the flat parameter vector as a classes x (features + 1) matrix.
Eigen::Map<const RowMajor> as_matrix(std::span<const double> w, std::size_t classes,
                                     std::size_t features) {
  if (w.size() != classes * (features + 1))
    throw InvalidArgument(fmt::format("model has {} parameters, expected {}", w.size(),
                                      classes * (features + 1)));
  return {w.data(), static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(features + 1)};
}

// Row-wise softmax probabilities of the selected samples.
Eigen::MatrixXd probabilities(const Eigen::Map<const RowMajor>& W, const Eigen::MatrixXd& X) {
  const Eigen::Index f = X.cols();
  Eigen::MatrixXd z = X * W.leftCols(f).transpose();
  z.rowwise() += W.col(f).transpose();
  const Eigen::VectorXd mx = z.rowwise().maxCoeff();
  z.colwise() -= mx;
  z = z.array().exp();
  const Eigen::VectorXd sums = z.rowwise().sum();
  z.array().colwise() /= sums.array();
  return z;
}

Dataset subset(const Dataset& data, std::span<const std::size_t> rows) {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), data.features.cols());
  out.labels.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) =
        data.features.row(static_cast<Eigen::Index>(rows[r]));
    out.labels[r] = data.labels[rows[r]];
  }
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

double parse_number(const std::string& field, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty() || !std::isfinite(v))
    throw IngestionError(fmt::format("line {}: '{}' is not a number", line, field), line);
  return v;
}

}  // namespace

FederatedTask make_blob_task(const BlobSpec& spec, std::size_t n_users, std::uint64_t seed) {
  if (spec.classes < 2 || spec.features < 1 || spec.samples_per_user < 1 || spec.test_samples < 1)
    throw InvalidConfiguration("task: blobs need >= 2 classes, >= 1 feature and non-empty splits");
  if (!(spec.spread > 0.0) || !(spec.center_scale > 0.0))
    throw InvalidConfiguration("task: spread and center_scale must be positive");

  FederatedTask task;
  task.classes = spec.classes;
  task.features = spec.features;
  const auto c = static_cast<Eigen::Index>(spec.classes);
  const auto f = static_cast<Eigen::Index>(spec.features);

  Rng center_rng(derive_seed(seed, {0x63656e74}));
  std::normal_distribution<double> center(0.0, spec.center_scale);
  Eigen::MatrixXd centers(c, f);
  for (Eigen::Index i = 0; i < c; ++i)
    for (Eigen::Index j = 0; j < f; ++j) centers(i, j) = center(center_rng);

  auto draw = [&](std::size_t count, Rng& rng) {
    std::uniform_int_distribution<int> label(0, static_cast<int>(spec.classes) - 1);
    std::normal_distribution<double> noise(0.0, spec.spread);
    Dataset d;
    d.features.resize(static_cast<Eigen::Index>(count), f);
    d.labels.resize(count);
    for (std::size_t s = 0; s < count; ++s) {
      d.labels[s] = label(rng);
      for (Eigen::Index j = 0; j < f; ++j)
        d.features(static_cast<Eigen::Index>(s), j) = centers(d.labels[s], j) + noise(rng);
    }
    return d;
  };
  for (std::size_t u = 0; u < n_users; ++u) {
    Rng rng(derive_seed(seed, {0x75736572, u}));
    task.users.push_back(draw(spec.samples_per_user, rng));
  }
  Rng test_rng(derive_seed(seed, {0x74657374}));
  task.test = draw(spec.test_samples, test_rng);
  return task;
}

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("line 1: missing header row", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  const auto label_it = std::find(header.begin(), header.end(), "label");
  if (label_it == header.end()) throw IngestionError("line 1: no 'label' column", 1);
  if (header.size() < 2) throw IngestionError("line 1: no feature columns", 1);
  const std::size_t label_col = static_cast<std::size_t>(label_it - header.begin());
  const std::size_t width = header.size();

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != width)
      throw IngestionError(fmt::format("line {}: expected {} fields, found {}", line_no, width,
                                       fields.size()),
                           line_no);
    for (std::size_t i = 0; i < width; ++i) {
      const double v = parse_number(fields[i], line_no);
      if (i == label_col) {
        if (v != std::floor(v) || std::abs(v) > 1e9)
          throw IngestionError(fmt::format("line {}: label '{}' is not an integer", line_no,
                                           fields[i]),
                               line_no);
        labels.push_back(static_cast<int>(v));
      } else {
        values.push_back(v);
      }
    }
  }
  if (labels.empty()) throw IngestionError("line 1: no data rows after the header", 1);

  Dataset d;
  const auto f = static_cast<Eigen::Index>(width - 1);
  d.features = Eigen::Map<const RowMajor>(values.data(), static_cast<Eigen::Index>(labels.size()), f);
  d.labels = std::move(labels);
  return d;
}

FederatedTask load_csv_task(const std::filesystem::path& path, std::size_t n_users,
                            double test_fraction, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw IngestionError(fmt::format("cannot open '{}'", path.string()), 0);
  Dataset all = read_csv(in);
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw InvalidConfiguration("task.test_fraction must lie in (0, 1)");

  std::map<int, int> remap;
  for (int l : all.labels) remap.emplace(l, 0);
  if (remap.size() < 2) throw InvalidConfiguration("task: CSV needs at least two classes");
  int next = 0;
  for (auto& [raw, id] : remap) id = next++;
  for (int& l : all.labels) l = remap.at(l);

  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, {0x63737673}));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(all.size())));
  if (n_test == 0 || all.size() - n_test < n_users)
    throw InvalidConfiguration(fmt::format(
        "task: {} rows cannot give a test split and one row to each of {} users", all.size(),
        n_users));

  FederatedTask task;
  task.classes = remap.size();
  task.features = static_cast<std::size_t>(all.features.cols());
  const std::span<const std::size_t> test_rows(order.data(), n_test);
  const std::span<const std::size_t> train_rows(order.data() + n_test, order.size() - n_test);

  Dataset train = subset(all, train_rows);
  const Eigen::RowVectorXd mean = train.features.colwise().mean();
  Eigen::RowVectorXd stdev =
      ((train.features.rowwise() - mean).array().square().colwise().sum() /
       static_cast<double>(train.size()))
          .sqrt();
  for (Eigen::Index j = 0; j < stdev.size(); ++j)
    if (stdev(j) == 0.0) stdev(j) = 1.0;  // constant column: center only
  auto standardize = [&](Dataset& d) {
    d.features = (d.features.rowwise() - mean).array().rowwise() / stdev.array();
  };
  standardize(train);
  task.test = subset(all, test_rows);
  standardize(task.test);

  std::vector<std::vector<std::size_t>> per_user(n_users);
  for (std::size_t r = 0; r < train.size(); ++r) per_user[r % n_users].push_back(r);
  for (const auto& rows : per_user) task.users.push_back(subset(train, rows));
  return task;
}

double loss(std::span<const double> w, const Dataset& data, std::size_t classes) {
  if (data.size() == 0) throw InvalidConfiguration("loss: empty dataset");
  const auto W = as_matrix(w, classes, static_cast<std::size_t>(data.features.cols()));
  const Eigen::MatrixXd p = probabilities(W, data.features);
  double total = 0.0;
  for (std::size_t s = 0; s < data.size(); ++s)
    total -= std::log(std::max(p(static_cast<Eigen::Index>(s), data.labels[s]), 1e-300));
  return total / static_cast<double>(data.size());
}

RealVector gradient(std::span<const double> w, const Dataset& data, std::size_t classes,
                    std::span<const std::size_t> rows) {
  if (!rows.empty()) return gradient(w, subset(data, rows), classes);
  if (data.size() == 0) throw InvalidConfiguration("gradient: empty dataset");
  const std::size_t f = static_cast<std::size_t>(data.features.cols());
  const auto W = as_matrix(w, classes, f);
  Eigen::MatrixXd residual = probabilities(W, data.features);  // P - Y
  for (std::size_t s = 0; s < data.size(); ++s)
    residual(static_cast<Eigen::Index>(s), data.labels[s]) -= 1.0;
  const double inv = 1.0 / static_cast<double>(data.size());
  RowMajor g(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(f + 1));
  g.leftCols(static_cast<Eigen::Index>(f)) = residual.transpose() * data.features * inv;
  g.col(static_cast<Eigen::Index>(f)) = residual.colwise().sum().transpose() * inv;
  return RealVector(g.data(), g.data() + g.size());
}

RealVector minibatch_gradient(std::span<const double> w, const Dataset& data,
                              std::size_t classes, std::size_t batch_size, Rng& rng) {
  if (data.size() == 0) throw InvalidConfiguration("local update: user has an empty dataset");
  if (batch_size == 0) throw InvalidConfiguration("local update: batch size must be positive");
  if (batch_size >= data.size()) return gradient(w, data, classes);
  // Partial Fisher-Yates: the first batch_size entries are a uniform sample.
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  for (std::size_t i = 0; i < batch_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, rows.size() - 1);
    std::swap(rows[i], rows[pick(rng)]);
  }
  rows.resize(batch_size);
  return gradient(w, data, classes, rows);
}

RealVector local_update(std::span<const double> w, const Dataset& data, std::size_t classes,
                        std::size_t batch_size, std::size_t local_epochs, double learning_rate,
                        Rng& rng) {
  if (local_epochs <= 1) return minibatch_gradient(w, data, classes, batch_size, rng);
  if (!(learning_rate > 0.0))
    throw InvalidConfiguration("local update: learning rate must be positive");
  RealVector v(w.begin(), w.end());
  for (std::size_t e = 0; e < local_epochs; ++e) {
    const RealVector g = minibatch_gradient(v, data, classes, batch_size, rng);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= learning_rate * g[i];
  }
  RealVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (w[i] - v[i]) / learning_rate;
  return out;
}

double evaluate(std::span<const double> w, const Dataset& data, std::size_t classes) {
  if (data.size() == 0) throw InvalidConfiguration("evaluate: empty test set");
  const auto W = as_matrix(w, classes, static_cast<std::size_t>(data.features.cols()));
  const Eigen::Index f = data.features.cols();
  Eigen::MatrixXd z = data.features * W.leftCols(f).transpose();
  z.rowwise() += W.col(f).transpose();
  std::size_t correct = 0;
  for (std::size_t s = 0; s < data.size(); ++s) {
    Eigen::Index best = 0;
    z.row(static_cast<Eigen::Index>(s)).maxCoeff(&best);  // first max on ties
    if (best == data.labels[s]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace forta::task
