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
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace lca::test {

inline Eigen::MatrixXd random_matrix(int r, int c, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd M(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) M(i, j) = n(rng);
    return M;
}

/// Minimum over all injections rows -> columns by exhaustive enumeration.
inline double brute_force_assignment(const Eigen::MatrixXd& cost) {
    const int Q = static_cast<int>(cost.rows()), R = static_cast<int>(cost.cols());
    std::vector<int> cols(static_cast<size_t>(R));
    std::iota(cols.begin(), cols.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    // Every injection appears as the prefix of some permutation of the columns.
    do {
        double total = 0.0;
        for (int q = 0; q < Q; ++q) total += cost(q, cols[static_cast<size_t>(q)]);
        best = std::min(best, total);
    } while (std::next_permutation(cols.begin(), cols.end()));
    return best;
}

/// Exhaustive signed-permutation PMSE: every injection and every sign pattern.
inline double brute_force_pmse(Eigen::MatrixXd A, Eigen::MatrixXd B) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) A.col(j).normalize();
    for (Eigen::Index j = 0; j < B.cols(); ++j) B.col(j).normalize();
    const int Q = static_cast<int>(A.cols()), R = static_cast<int>(B.cols());
    std::vector<int> cols(static_cast<size_t>(R));
    std::iota(cols.begin(), cols.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        for (int signs = 0; signs < (1 << Q); ++signs) {
            double total = 0.0;
            for (int q = 0; q < Q; ++q) {
                const double s = (signs >> q) & 1 ? -1.0 : 1.0;
                total += (A.col(q) - s * B.col(cols[static_cast<size_t>(q)])).squaredNorm();
            }
            best = std::min(best, total);
        }
    } while (std::next_permutation(cols.begin(), cols.end()));
    return best;
}

inline double excess_kurtosis(const Eigen::VectorXd& x) {
    const double m = x.mean();
    const Eigen::ArrayXd d = x.array() - m;
    const double m2 = d.square().mean();
    return d.square().square().mean() / (m2 * m2) - 3.0;
}

inline double lag1_autocorrelation(const Eigen::VectorXd& x) {
    const Eigen::ArrayXd d = x.array() - x.mean();
    const Eigen::Index n = d.size();
    return (d.head(n - 1) * d.tail(n - 1)).sum() / d.square().sum();
}

/// Composite Simpson rule on [a, b] with n (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int n = 2000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

}  // namespace lca::test
