/*
 * Copyright 2026 The LCA Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <Eigen/Dense>
#include <vector>

namespace lca::metrics {

/// Column of M2 (0-based) matched to each column of M1, with a sign per match.
struct SignedPermutation {
    std::vector<int> mapping;
    std::vector<int> signs;
};

struct Assignment {
    std::vector<int> column_for_row;
    double total = 0.0;
};

struct PmseResult {
    double value = 0.0;
    SignedPermutation perm;
    /// Squared distance of each matched, sign-corrected, unit-normalized pair.
    std::vector<double> per_component;
};

/// Minimum-cost injective assignment of the rows of a Q x R cost matrix
/// (Q <= R) to distinct columns. Shortest augmenting path with potentials.
Assignment hungarian(const Eigen::MatrixXd& cost);

/// Sign- and permutation-invariant discrepancy between the columns of M1
/// (T x Q) and M2 (T x R), Q <= R, after normalizing columns to unit norm.
/// The value is the raw sum of matched squared distances (no 1/Q factor).
/// Throws NormalizationError for a column with norm below 1e-12 and
/// DimensionError for mismatched rows or Q > R.
PmseResult pmse(const Eigen::MatrixXd& M1, const Eigen::MatrixXd& M2);

/// Signal-to-noise ratio sum(signal) / sum(noise) of covariance eigenvalues. Throws ConfigError for negative
/// entries and Error when the noise sum is zero.
double snr(const Eigen::VectorXd& signal_eigvals, const Eigen::VectorXd& noise_eigvals);

struct RunMatch {
    SignedPermutation perm;
    std::vector<double> distances;
};

/// Matches the components of every run in `others` to `reference`.
std::vector<RunMatch> match_components(const Eigen::MatrixXd& reference,
                                       const std::vector<Eigen::MatrixXd>& others);

}  // namespace lca::metrics
