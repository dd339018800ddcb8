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
 * Comparison methods: deflationary FastICA, PCA followed by square ICA, and
 * two-class independent factor analysis with isotropic noise.
 */
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lca/core_model.hpp"
#include "lca/estimator.hpp"

namespace lca::baselines {

/// E[log cosh(n)] for n ~ N(0, 1); see tools/derive_logcosh_constant.py.
inline constexpr double kLogCoshGaussianMean = 0.37456720749143796;

struct DFastIcaOptions {
    int n_restarts = 20;
    int max_iter = 200;
    double tol = 1e-6;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct DeflationDirection {
    bool converged = false;
    int iterations = 0;
    double objective = 0.0;           ///< {(1/V) sum G(w'z) - E G(n)}^2
    std::vector<double> objective_trace;
};

struct DFastIcaResult {
    MatrixXd W;                       ///< n_components x T, orthonormal rows, whitened coordinates
    MatrixXd S;                       ///< V x n_components, extraction order
    MatrixXd M_S;                     ///< T x n_components
    std::vector<DeflationDirection> directions;
    double objective = 0.0;           ///< sum of direction objectives
    int restart_id = 0;
    WhiteningTransform whitening;
};

/// Index {(1/V) sum_v G(s_v) - E G(n)}^2 with G = log cosh.
double negentropy_index(const VectorXd& s);

/// Extracts n_components directions one at a time. Every fixed-point update is
/// followed by Gram-Schmidt against the earlier directions; an update that
/// lowers the index is shortened by halving until it does not. The restart
/// with the largest summed index wins. A direction that does not converge
/// within max_iter is kept and flagged.
DFastIcaResult dfastica_deflation(const DataMatrix& data, int n_components,
                                  const DFastIcaOptions& opts = {});

/// Keeps the first q components of a deflation run (extraction order).
DFastIcaResult retain_components(const DFastIcaResult& full, int q, const DataMatrix& data);

/// First q standardized principal components, V x q, unit sample variance (divisor V).
MatrixXd pca_reduce(const DataMatrix& data, int q);

/// fit_logis_lca with Q* = q on pca_reduce(data, q). W_S is mapped back to the
/// whitened coordinates of `data` and M_S re-estimated on the centered data.
LcaFit pca_infomax(const DataMatrix& data, int q, const RestartConfig& cfg = {});
/// fit_spline_lca analogue of pca_infomax.
LcaFit pca_prodenica(const DataMatrix& data, int q, const RestartConfig& cfg = {},
                     const SplineOptions& spline = {});

/// Two-class Gaussian mixture per component; class 2 is derived so that each
/// component has mean 0 and variance 1.
struct IfaParams {
    MatrixXd M_S;         ///< T x Q
    double sigma2 = 1.0;  ///< isotropic noise variance
    VectorXd pi1;         ///< Q, in (0, 1)
    VectorXd mu1;         ///< Q
    VectorXd nu1;         ///< Q, positive

    int n_components() const { return static_cast<int>(M_S.cols()); }
    int dim() const { return static_cast<int>(M_S.rows()); }
    double pi2(int q) const { return 1.0 - pi1(q); }
    double mu2(int q) const { return -pi1(q) * mu1(q) / pi2(q); }
    double nu2(int q) const;

    /// Throws ConfigError unless every pi1 in (0,1), nu1 > 0, derived nu2 > 0, sigma2 > 0.
    void validate() const;
};

/// Preset density parameters for q components; M_S and sigma2 = 1 left for the caller.
IfaParams ifa_super_gaussian_preset(int q);  ///< pi1 = 0.7, mu1 = -0.5, nu1 = 0.5
IfaParams ifa_sub_gaussian_preset(int q);    ///< pi1 = 0.3, mu1 = -1, nu1 = 0.5

/// f_X(x) = sum over 2^Q class states k of w_k N(x; M_S mu(k), M_S diag(nu(k)) M_S' + sigma2 I).
/// Requires Q <= 10. Throws ConfigError for infeasible parameters.
double ifa_density(const VectorXd& x, const IfaParams& params);

/// sum_v log f_X(x_v) over the rows of X.
double ifa_loglik(const MatrixXd& X, const IfaParams& params);

/// Unconstrained coordinates: M_S (column-major), log sigma2, then per
/// component (logit pi1, atanh of mu1 sqrt(pi1/pi2), logit of pi1 nu1 / (1 - B))
/// with B = pi1 mu1^2 / pi2 the between-class variance. Every finite vector maps to
/// feasible parameters.
VectorXd ifa_pack(const IfaParams& params);
IfaParams ifa_unpack(const VectorXd& theta, int T, int Q);

/// Log-likelihood and its gradient in the unconstrained coordinates.
double ifa_loglik_grad(const MatrixXd& X, const VectorXd& theta, int T, int Q, VectorXd& grad);

/// E[s_v | x_v] for every row of X, V x Q.
MatrixXd ifa_conditional_means(const MatrixXd& X, const IfaParams& params);

struct IfaInit {
    std::string label;
    IfaParams params;
};

struct IfaOptions {
    int n_random = 7;           ///< random mixing matrices per density preset
    int max_iter = 500;
    std::uint64_t seed = 0;
    int threads = 1;
    bool use_super_preset = true;
    bool use_sub_preset = true;
};

struct IfaRunRecord {
    std::string label;
    bool ok = false;
    double loglik = 0.0;
    int iterations = 0;
    std::string message;
};

struct IfaFit {
    IfaParams params;
    MatrixXd S;        ///< conditional means, V x Q
    double loglik = 0.0;
    int iterations = 0;
    std::string init_label;
    std::vector<IfaRunRecord> runs;
};

/// Quasi-Newton (BFGS) maximization of ifa_loglik on the centered data from
/// each of `extra_inits` plus the preset strategies, each preset with
/// n_random random mixing matrices. Returns the best run; throws
/// AggregateFitError when every run fails.
IfaFit fit_ifa(const DataMatrix& data, int q, const IfaOptions& opts = {},
               const std::vector<IfaInit>& extra_inits = {});

/// Truth-initialization strategy: the given parameters plus n_random random
/// mixing matrices with the same density parameters.
std::vector<IfaInit> ifa_truth_inits(const IfaParams& truth, const DataMatrix& data, int n_random,
                                     std::uint64_t seed);

/// Draws V observations from the IFA model.
MatrixXd ifa_sample(const IfaParams& params, int V, std::mt19937_64& rng, MatrixXd* sources = nullptr);

}  // namespace lca::baselines
