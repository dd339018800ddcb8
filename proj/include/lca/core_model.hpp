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
 *
 * Linear-algebra substrate: centering, whitening, semi-orthogonal
 * matrices and least-squares mixing recovery.
 */
#pragma once

#include <Eigen/Dense>
#include <utility>

namespace lca {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// V x T observation matrix; rows are replicates, columns variables.
class DataMatrix {
public:
    DataMatrix() = default;
    /// Throws DimensionError on an empty matrix or ConfigError on a non-finite entry.
    explicit DataMatrix(MatrixXd values);

    const MatrixXd& values() const noexcept { return values_; }
    Eigen::Index rows() const noexcept { return values_.rows(); }
    Eigen::Index cols() const noexcept { return values_.cols(); }

private:
    MatrixXd values_;
};

/// Symmetric whitening L = U diag(1/sqrt(lambda)) U' of the sample covariance
/// (divisor V). Eigenvalues are sorted descending.
struct WhiteningTransform {
    VectorXd mean;
    MatrixXd L;
    VectorXd eigvals;
    MatrixXd eigvecs;

    /// Applies the transform row-wise: z_v = L (x_v - mean).
    MatrixXd apply(const MatrixXd& x) const;
};

/// Centered, decorrelated data together with the transform that produced it.
struct WhitenedData {
    MatrixXd z;
    WhiteningTransform transform;

    Eigen::Index rows() const noexcept { return z.rows(); }
    Eigen::Index cols() const noexcept { return z.cols(); }
};

/// Q* x T matrix with orthonormal rows.
class SemiOrthogonalMatrix {
public:
    SemiOrthogonalMatrix() = default;
    /// Checks ||W W' - I||_F <= tol and throws RankError otherwise.
    explicit SemiOrthogonalMatrix(MatrixXd rows, double tol = 1e-8);

    const MatrixXd& rows() const noexcept { return rows_; }
    Eigen::Index n_components() const noexcept { return rows_.rows(); }
    Eigen::Index dim() const noexcept { return rows_.cols(); }

    /// ||W W' - I||_F.
    double orthogonality_error() const;

private:
    MatrixXd rows_;
};

/// T x Q* least-squares mixing matrix.
struct MixingEstimate {
    MatrixXd M_S;
};

/// Subtracts the column means. Throws DimensionError on an empty matrix.
std::pair<DataMatrix, VectorXd> center(const DataMatrix& data);

/// Sample covariance with divisor V of already-centered data.
MatrixXd covariance(const MatrixXd& centered);

/// Whitens `data` with z_v = L (x_v - mean). The input is re-centered, so
/// already-centered data passes through unchanged apart from whitening.
/// Throws DimensionError when V < T and ConditioningError when the smallest
/// covariance eigenvalue is below 1e-12 times the largest.
WhitenedData whiten(const DataMatrix& data);

/// Nearest matrix with orthonormal rows: U V' from the thin SVD W = U D V'.
/// Throws RankError when a singular value is below 1e-12 (relative to max(1, s_max)).
SemiOrthogonalMatrix symmetric_orthogonalize(const MatrixXd& W);

/// argmin_M sum_v ||x_v - M s_v||^2 = X' S (S'S)^{-1}. Throws RankError if S
/// is column rank deficient.
MixingEstimate estimate_mixing(const DataMatrix& data, const MatrixXd& S);

/// Orthogonal projector onto the row space of W.
MatrixXd row_space_projector(const MatrixXd& W);

}  // namespace lca
