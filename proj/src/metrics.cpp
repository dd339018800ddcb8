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
#include "lca/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lca/error.hpp"

namespace lca::metrics {

Assignment hungarian(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    if (n > m) throw DimensionError("hungarian: more rows than columns");
    if (!cost.allFinite()) throw ConfigError("hungarian: costs must be finite");
    Assignment out;
    if (n == 0) return out;

    // 1-based potentials u (rows), v (columns); p[j] = row assigned to column j.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    out.column_for_row.assign(static_cast<size_t>(n), -1);
    for (int j = 1; j <= m; ++j) {
        if (p[j] != 0) out.column_for_row[static_cast<size_t>(p[j] - 1)] = j - 1;
    }
    for (int i = 0; i < n; ++i) out.total += cost(i, out.column_for_row[static_cast<size_t>(i)]);
    return out;
}

namespace {

Eigen::MatrixXd unit_columns(const Eigen::MatrixXd& M, const char* name) {
    Eigen::MatrixXd out = M;
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        const double nrm = M.col(j).norm();
        if (!(nrm >= 1e-12)) {
            std::ostringstream os;
            os << "pmse: column " << j << " of " << name << " has (near) zero norm";
            throw NormalizationError(os.str(), static_cast<int>(j));
        }
        out.col(j) /= nrm;
    }
    return out;
}

}  // namespace

PmseResult pmse(const Eigen::MatrixXd& M1, const Eigen::MatrixXd& M2) {
    if (M1.rows() != M2.rows()) throw DimensionError("pmse: row counts differ");
    if (M1.cols() > M2.cols()) throw DimensionError("pmse: first argument has more columns");
    const Eigen::MatrixXd A = unit_columns(M1, "M1");
    const Eigen::MatrixXd B = unit_columns(M2, "M2");
    const auto Q = A.cols();
    const auto R = B.cols();
    // For unit vectors ||a - b||^2 = 2 - 2 a'b and ||a + b||^2 = 2 + 2 a'b.
    const Eigen::MatrixXd G = A.transpose() * B;
    Eigen::MatrixXd cost(Q, R);
    for (Eigen::Index q = 0; q < Q; ++q) {
        for (Eigen::Index r = 0; r < R; ++r) {
            cost(q, r) = std::min((A.col(q) - B.col(r)).squaredNorm(),
                                  (A.col(q) + B.col(r)).squaredNorm());
        }
    }
    const Assignment asg = hungarian(cost);
    PmseResult out;
    out.perm.mapping = asg.column_for_row;
    out.perm.signs.resize(static_cast<size_t>(Q));
    out.per_component.resize(static_cast<size_t>(Q));
    for (Eigen::Index q = 0; q < Q; ++q) {
        const int r = asg.column_for_row[static_cast<size_t>(q)];
        out.perm.signs[static_cast<size_t>(q)] = G(q, r) >= 0.0 ? 1 : -1;
        out.per_component[static_cast<size_t>(q)] = cost(q, r);
    }
    out.value = asg.total;
    return out;
}

double snr(const Eigen::VectorXd& signal_eigvals, const Eigen::VectorXd& noise_eigvals) {
    if ((signal_eigvals.array() < 0.0).any() || (noise_eigvals.array() < 0.0).any()) {
        throw ConfigError("snr: eigenvalues must be nonnegative");
    }
    const double noise = noise_eigvals.sum();
    if (!(noise > 0.0)) throw Error("snr: total noise variance is zero");
    return signal_eigvals.sum() / noise;
}

std::vector<RunMatch> match_components(const Eigen::MatrixXd& reference,
                                       const std::vector<Eigen::MatrixXd>& others) {
    std::vector<RunMatch> out;
    out.reserve(others.size());
    for (const auto& run : others) {
        if (run.rows() != reference.rows() || run.cols() != reference.cols()) {
            throw DimensionError("match_components: run dimensions differ from the reference");
        }
        PmseResult r = pmse(reference, run);
        out.push_back(RunMatch{std::move(r.perm), std::move(r.per_component)});
    }
    return out;
}

}  // namespace lca::metrics
