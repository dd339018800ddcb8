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
 * Likelihood component analysis: maximum likelihood over semi-orthogonal
 * unmixing matrices with logistic (Logis-LCA) or spline-tilted Gaussian
 * (Spline-LCA) component densities.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lca/core_model.hpp"
#include "lca/densities.hpp"
#include "lca/error.hpp"

namespace lca {

enum class ObjectiveKind { logis, spline };

/// Multi-start settings. Restarts [0, n_principal_subspace) start inside
/// the principal subspace, the rest from unconstrained random matrices.
struct RestartConfig {
    int n_restarts = 20;
    int n_principal_subspace = 10;
    int max_iter = 300;
    double tol = 1e-6;
    std::uint64_t seed = 0;
    int threads = 1;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;
};

struct SplineOptions {
    int bins = 100;
    double df = 8.0;
    TiltFitOptions tilt;
};

/// Outcome of one restart, kept for diagnostics.
struct RestartRecord {
    int restart_id = 0;
    bool ok = false;
    bool converged = false;
    int iterations = 0;
    double objective = 0.0;
    double max_orthogonality_error = 0.0;
    std::string message;
};

/// Result of an LCA fit.
struct LcaFit {
    SemiOrthogonalMatrix W_S;        ///< Q* x T, in whitened coordinates
    MixingEstimate M_S;              ///< T x Q*
    MatrixXd S;                      ///< V x Q*, S = Z W_S'
    std::vector<DensityModel> densities;
    double objective = 0.0;
    bool converged = false;
    int iterations = 0;
    int restart_id = 0;
    std::uint64_t seed = 0;
    ObjectiveKind kind = ObjectiveKind::logis;
    std::vector<double> objective_trace;
    /// Largest ||W W' - I||_F over every iterate of the winning restart.
    double max_orthogonality_error = 0.0;
    WhiteningTransform whitening;
    std::vector<RestartRecord> restarts;
};

/// Signals that a restart hit a rank collapse; the driver records and skips it.
class RestartAborted : public RankError {
public:
    using RankError::RankError;
};

/// One fixed-point update: w*_q = (1/V) sum_v { z_v h'_q(w_q'z_v) - h''_q(w_q'z_v) w_q },
/// followed by symmetric orthogonalization. Throws RestartAborted when the
/// updated matrix loses rank.
SemiOrthogonalMatrix fixed_point_step(const SemiOrthogonalMatrix& W, const MatrixXd& Z,
                                      const std::vector<DensityModel>& densities);

/// Random semi-orthogonal start. Unconstrained: orthogonalized Q* x T standard
/// normal matrix. Principal: O U_{1:Q*}' with O a random orthogonal Q* x Q*.
SemiOrthogonalMatrix make_initial_W(int T, int q_star, bool principal_subspace,
                                    const WhiteningTransform& eig, std::uint64_t rng_seed);

/// Seed of restart `restart_id` derived from the fit seed.
std::uint64_t restart_seed(std::uint64_t seed, int restart_id);

/// Logis: -sum_v sum_q log(1 + exp(-s_vq pi / sqrt 3)).
/// Spline: sum_q [-lambda_q int g_q''^2 - int phi e^{g_q}] + (1/V) sum_v sum_q g_q(s_vq)
///         - (T/2)(log 2 pi + 1).
double eval_objective(const MatrixXd& S, const std::vector<DensityModel>& densities,
                      ObjectiveKind kind, int T);

/// Flips each component so sum_v s_vq^3 >= 0 (reflecting its density and the
/// matching W_S row and M_S column) and sorts components by decreasing
/// sum_v log f_q(s_vq). An exactly zero third moment keeps its sign.
LcaFit canonical_order(LcaFit fit, const WhitenedData& whitened);

/// Runs a single restart from `init` on whitened data. The returned fit is
/// not canonically ordered and has no mixing estimate. For the spline
/// objective a step that lowers the objective is halved toward the current
/// iterate (at most 10 times); when no shortened step is accepted the
/// iterate is kept and the restart reported as converged.
LcaFit fit_lca_from(const WhitenedData& whitened, const SemiOrthogonalMatrix& init,
                    ObjectiveKind kind, int max_iter, double tol,
                    const SplineOptions& spline = {});

LcaFit fit_logis_lca(const DataMatrix& data, int q_star, const RestartConfig& cfg = {});

LcaFit fit_spline_lca(const DataMatrix& data, int q_star, const RestartConfig& cfg = {},
                      const SplineOptions& spline = {});

/// Shared driver behind both estimators.
LcaFit fit_lca(const DataMatrix& data, int q_star, ObjectiveKind kind, const RestartConfig& cfg,
               const SplineOptions& spline = {});

}  // namespace lca
