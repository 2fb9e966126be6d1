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

// Desk-scale federated classification task: multinomial logistic
// regression on Gaussian blobs or on a numeric CSV.
//
// Parameters are a flat vector of classes * (features + 1) entries, row c
// holding the weights of class c followed by its bias.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "forta/common.hpp"

namespace forta::task {

struct Dataset {
  Eigen::MatrixXd features;  // one sample per row
  std::vector<int> labels;   // 0..classes-1

  std::size_t size() const { return labels.size(); }
};

struct FederatedTask {
  std::vector<Dataset> users;
  Dataset test;
  std::size_t classes = 0;
  std::size_t features = 0;

  std::size_t dim() const { return classes * (features + 1); }
};

struct BlobSpec {
  std::size_t classes = 4;
  std::size_t features = 16;
  std::size_t samples_per_user = 200;
  std::size_t test_samples = 2000;
  double spread = 1.0;        // within-class std per feature
  double center_scale = 1.0;  // class centers ~ N(0, center_scale^2 I)
};

// Centers are shared; every user and the test set draw labels uniformly
// and features around the label's center (i.i.d. split).
FederatedTask make_blob_task(const BlobSpec& spec, std::size_t n_users, std::uint64_t seed);

// Header row with a "label" column (integer class ids) and numeric feature
// columns. Throws IngestionError carrying the 1-based line number.
Dataset read_csv(std::istream& in);

// Reads `path`, holds out a seeded test_fraction, deals the rest to users
// round-robin after a seeded shuffle, and standardizes features with the
// training split's mean and std. Labels are remapped to 0..C-1 in sorted
// order of the distinct values.
FederatedTask load_csv_task(const std::filesystem::path& path, std::size_t n_users,
                            double test_fraction, std::uint64_t seed);

// Mean cross-entropy.
double loss(std::span<const double> w, const Dataset& data, std::size_t classes);

// Gradient of the mean cross-entropy over the rows in `rows` (all rows if
// empty).
RealVector gradient(std::span<const double> w, const Dataset& data, std::size_t classes,
                    std::span<const std::size_t> rows = {});

// Gradient over a batch drawn uniformly without replacement (the whole set
// when batch_size >= size). Throws InvalidConfiguration on empty data.
RealVector minibatch_gradient(std::span<const double> w, const Dataset& data,
                              std::size_t classes, std::size_t batch_size, Rng& rng);

// One local step returns the mini-batch gradient. With local_epochs > 1 the
// user runs that many SGD steps at `learning_rate` and reports the
// accumulated displacement divided by the rate, so one global step at the
// same rate reproduces the local trajectory.
RealVector local_update(std::span<const double> w, const Dataset& data, std::size_t classes,
                        std::size_t batch_size, std::size_t local_epochs, double learning_rate,
                        Rng& rng);

// Fraction of argmax-correct predictions (ties to the lower class).
double evaluate(std::span<const double> w, const Dataset& data, std::size_t classes);

}  // namespace forta::task
