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
#include "lca/core_model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <numeric>
#include <sstream>
#include <vector>

#include "lca/error.hpp"

namespace lca {

DataMatrix::DataMatrix(MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() == 0 || values_.cols() == 0) {
        throw DimensionError("data matrix is empty");
    }
    if (!values_.allFinite()) {
        for (Eigen::Index i = 0; i < values_.rows(); ++i) {
            for (Eigen::Index j = 0; j < values_.cols(); ++j) {
                if (!std::isfinite(values_(i, j))) {
                    std::ostringstream os;
                    os << "non-finite entry at row " << i << ", column " << j;
                    throw ConfigError(os.str());
                }
            }
        }
    }
}

MatrixXd WhiteningTransform::apply(const MatrixXd& x) const {
    // L is symmetric, so (L x_v)' stacked over rows is X L.
    return (x.rowwise() - mean.transpose()) * L;
}

SemiOrthogonalMatrix::SemiOrthogonalMatrix(MatrixXd rows, double tol) : rows_(std::move(rows)) {
    if (rows_.rows() > rows_.cols()) {
        throw DimensionError("semi-orthogonal matrix needs at most as many rows as columns");
    }
    const double err = orthogonality_error();
    if (!(err <= tol)) {
        std::ostringstream os;
        os << "rows are not orthonormal: ||W W' - I||_F = " << err;
        throw RankError(os.str());
    }
}

double SemiOrthogonalMatrix::orthogonality_error() const {
    const auto q = rows_.rows();
    return (rows_ * rows_.transpose() - MatrixXd::Identity(q, q)).norm();
}

std::pair<DataMatrix, VectorXd> center(const DataMatrix& data) {
    if (data.rows() == 0 || data.cols() == 0) {
        throw DimensionError("cannot center an empty matrix");
    }
    VectorXd mean = data.values().colwise().mean();
    MatrixXd centered = data.values().rowwise() - mean.transpose();
    return {DataMatrix(std::move(centered)), std::move(mean)};
}

MatrixXd covariance(const MatrixXd& centered) {
    return (centered.transpose() * centered) / static_cast<double>(centered.rows());
}

WhitenedData whiten(const DataMatrix& data) {
    const auto V = data.rows();
    const auto T = data.cols();
    if (V < T) {
        std::ostringstream os;
        os << "whitening needs V >= T (V=" << V << ", T=" << T << ")";
        throw DimensionError(os.str());
    }
    auto [centered, mean] = center(data);
    const MatrixXd cov = covariance(centered.values());

    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) {
        throw ConditioningError("eigendecomposition of the covariance failed", 0.0);
    }
    // Solver returns ascending order; re-sort descending with stable index tie-break.
    std::vector<Eigen::Index> order(static_cast<size_t>(T));
    std::iota(order.begin(), order.end(), 0);
    const VectorXd& ev = eig.eigenvalues();
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return ev(a) > ev(b); });

    WhiteningTransform tr;
    tr.mean = std::move(mean);
    tr.eigvals.resize(T);
    tr.eigvecs.resize(T, T);
    for (Eigen::Index k = 0; k < T; ++k) {
        tr.eigvals(k) = ev(order[static_cast<size_t>(k)]);
        tr.eigvecs.col(k) = eig.eigenvectors().col(order[static_cast<size_t>(k)]);
    }
    const double largest = tr.eigvals(0);
    const double smallest = tr.eigvals(T - 1);
    if (!(largest > 0.0) || smallest < 1e-12 * largest) {
        std::ostringstream os;
        os << "covariance is singular or nearly so: smallest eigenvalue " << smallest
           << " vs largest " << largest;
        throw ConditioningError(os.str(), smallest);
    }
    tr.L = tr.eigvecs * tr.eigvals.cwiseSqrt().cwiseInverse().asDiagonal() * tr.eigvecs.transpose();
    // Symmetrize away the round-off so z = X L matches z_v = L x_v exactly.
    tr.L = 0.5 * (tr.L + tr.L.transpose()).eval();

    WhitenedData out;
    out.z = centered.values() * tr.L;
    out.transform = std::move(tr);
    return out;
}

SemiOrthogonalMatrix symmetric_orthogonalize(const MatrixXd& W) {
    if (W.rows() == 0 || W.rows() > W.cols()) {
        throw DimensionError("symmetric_orthogonalize needs 1 <= rows <= cols");
    }
    Eigen::JacobiSVD<MatrixXd> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd& s = svd.singularValues();
    const double scale = std::max(1.0, s(0));
    if (!(s(s.size() - 1) >= 1e-12 * scale)) {
        std::ostringstream os;
        os << "matrix is rank deficient: smallest singular value " << s(s.size() - 1);
        throw RankError(os.str());
    }
    MatrixXd R = svd.matrixU() * svd.matrixV().transpose();
    return SemiOrthogonalMatrix(std::move(R), 1e-8);
}

MixingEstimate estimate_mixing(const DataMatrix& data, const MatrixXd& S) {
    if (S.rows() != data.rows()) {
        throw DimensionError("estimate_mixing: S and X must have the same number of rows");
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qr(S);
    qr.setThreshold(1e-12);
    if (qr.rank() < S.cols()) {
        throw RankError("estimate_mixing: component matrix is column rank deficient");
    }
    // Solve S B = X for B (Q x T); M = B'.
    MatrixXd B = qr.solve(data.values());
    return MixingEstimate{B.transpose()};
}

MatrixXd row_space_projector(const MatrixXd& W) {
    Eigen::HouseholderQR<MatrixXd> qr(W.transpose());
    const MatrixXd Qthin = qr.householderQ() * MatrixXd::Identity(W.cols(), W.rows());
    return Qthin * Qthin.transpose();
}

}  // namespace lca
