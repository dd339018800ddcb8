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
#include "lca/estimator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "lca/metrics.hpp"
#include "lca/parallel.hpp"

namespace lca {

void RestartConfig::validate() const {
    if (n_restarts < 1) throw ConfigError("n_restarts must be at least 1");
    if (n_principal_subspace < 0 || n_principal_subspace > n_restarts) {
        throw ConfigError("n_principal_subspace must lie in [0, n_restarts]");
    }
    if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");
}

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

template <class Density>
void accumulate_update(const Density& d, const MatrixXd& Z, const VectorXd& w, VectorXd& out) {
    const VectorXd s = Z * w;
    VectorXd h1(s.size());
    double h2_sum = 0.0;
    for (Eigen::Index v = 0; v < s.size(); ++v) {
        h1(v) = d.score(s(v));
        h2_sum += d.score_deriv(s(v));
    }
    const double inv_v = 1.0 / static_cast<double>(Z.rows());
    out = (Z.transpose() * h1 - h2_sum * w) * inv_v;
}

}  // namespace

SemiOrthogonalMatrix fixed_point_step(const SemiOrthogonalMatrix& W, const MatrixXd& Z,
                                      const std::vector<DensityModel>& densities) {
    const auto Q = W.n_components();
    if (static_cast<Eigen::Index>(densities.size()) != Q) {
        throw DimensionError("fixed_point_step: one density per component is required");
    }
    if (Z.cols() != W.dim()) throw DimensionError("fixed_point_step: W and Z disagree on T");
    MatrixXd next(Q, W.dim());
    VectorXd row;
    for (Eigen::Index q = 0; q < Q; ++q) {
        const VectorXd w = W.rows().row(q).transpose();
        std::visit([&](const auto& d) { accumulate_update(d, Z, w, row); },
                   densities[static_cast<size_t>(q)]);
        next.row(q) = row.transpose();
    }
    if (!next.allFinite()) throw RestartAborted("fixed-point update is not finite");
    try {
        return symmetric_orthogonalize(next);
    } catch (const RankError& e) {
        throw RestartAborted(std::string("fixed-point update collapsed: ") + e.what());
    }
}

std::uint64_t restart_seed(std::uint64_t seed, int restart_id) {
    // splitmix64 finalizer over (seed, id).
    std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(restart_id) + 1);
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

SemiOrthogonalMatrix make_initial_W(int T, int q_star, bool principal_subspace,
                                    const WhiteningTransform& eig, std::uint64_t rng_seed) {
    if (q_star < 1 || q_star > T) throw ConfigError("make_initial_W needs 1 <= Q* <= T");
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto gaussian = [&](int r, int c) {
        MatrixXd G(r, c);
        for (int j = 0; j < c; ++j)
            for (int i = 0; i < r; ++i) G(i, j) = normal(rng);
        return G;
    };
    if (!principal_subspace) {
        return symmetric_orthogonalize(gaussian(q_star, T));
    }
    if (eig.eigvecs.rows() != T) throw DimensionError("make_initial_W: eigenvectors do not match T");
    const MatrixXd O = symmetric_orthogonalize(gaussian(q_star, q_star)).rows();
    MatrixXd W = O * eig.eigvecs.leftCols(q_star).transpose();
    return symmetric_orthogonalize(W);
}

double eval_objective(const MatrixXd& S, const std::vector<DensityModel>& densities,
                      ObjectiveKind kind, int T) {
    const auto V = S.rows();
    const auto Q = S.cols();
    if (static_cast<Eigen::Index>(densities.size()) != Q) {
        throw DimensionError("eval_objective: one density per component is required");
    }
    if (kind == ObjectiveKind::logis) {
        const double k = std::numbers::pi / std::numbers::sqrt3;
        double total = 0.0;
        for (Eigen::Index q = 0; q < Q; ++q)
            for (Eigen::Index v = 0; v < V; ++v) total -= softplus(-S(v, q) * k);
        return total;
    }
    double total = -0.5 * T * (std::log(2.0 * std::numbers::pi) + 1.0);
    for (Eigen::Index q = 0; q < Q; ++q) {
        const auto* d = std::get_if<TiltedGaussianDensity>(&densities[static_cast<size_t>(q)]);
        if (d == nullptr) throw ConfigError("spline objective needs tilted Gaussian densities");
        double mean_tilt = 0.0;
        for (Eigen::Index v = 0; v < V; ++v) mean_tilt += d->tilt(S(v, q));
        mean_tilt /= static_cast<double>(V);
        total += -d->lambda() * d->roughness() - d->total_mass() + mean_tilt;
    }
    return total;
}

LcaFit canonical_order(LcaFit fit, const WhitenedData& whitened) {
    const MatrixXd& Z = whitened.z;
    MatrixXd W = fit.W_S.rows();
    const auto Q = W.rows();
    MatrixXd S = Z * W.transpose();
    const bool has_mixing = fit.M_S.M_S.cols() == Q && Q > 0;
    std::vector<double> loglik(static_cast<size_t>(Q), 0.0);
    for (Eigen::Index q = 0; q < Q; ++q) {
        const double m3 = S.col(q).array().cube().sum();
        auto& dens = fit.densities[static_cast<size_t>(q)];
        if (m3 < 0.0) {
            W.row(q) *= -1.0;
            S.col(q) *= -1.0;
            if (has_mixing) fit.M_S.M_S.col(q) *= -1.0;
            dens = reflect(dens);
        }
        double ll = 0.0;
        for (Eigen::Index v = 0; v < S.rows(); ++v) ll += density_logpdf(dens, S(v, q));
        loglik[static_cast<size_t>(q)] = ll;
    }
    std::vector<Eigen::Index> order(static_cast<size_t>(Q));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return loglik[static_cast<size_t>(a)] > loglik[static_cast<size_t>(b)];
    });
    MatrixXd W2(Q, W.cols());
    MatrixXd S2(S.rows(), Q);
    MatrixXd M2 = has_mixing ? MatrixXd(fit.M_S.M_S.rows(), Q) : MatrixXd();
    std::vector<DensityModel> d2;
    d2.reserve(static_cast<size_t>(Q));
    for (Eigen::Index k = 0; k < Q; ++k) {
        const auto src = order[static_cast<size_t>(k)];
        W2.row(k) = W.row(src);
        S2.col(k) = S.col(src);
        if (has_mixing) M2.col(k) = fit.M_S.M_S.col(src);
        d2.push_back(fit.densities[static_cast<size_t>(src)]);
    }
    fit.W_S = SemiOrthogonalMatrix(std::move(W2), 1e-6);
    fit.S = std::move(S2);
    if (has_mixing) fit.M_S.M_S = std::move(M2);
    fit.densities = std::move(d2);
    return fit;
}

namespace {

std::vector<DensityModel> fit_densities(const MatrixXd& S, const SplineOptions& spline,
                                        const std::vector<DensityModel>* warm) {
    std::vector<DensityModel> out;
    out.reserve(static_cast<size_t>(S.cols()));
    for (Eigen::Index q = 0; q < S.cols(); ++q) {
        const BinnedTilt binned = bin_samples(S.col(q), spline.bins);
        const TiltedGaussianDensity* prev = nullptr;
        if (warm != nullptr && static_cast<Eigen::Index>(warm->size()) == S.cols()) {
            prev = std::get_if<TiltedGaussianDensity>(&(*warm)[static_cast<size_t>(q)]);
        }
        out.emplace_back(fit_tilt(binned, S.rows(), spline.df, spline.tilt, prev));
    }
    return out;
}

}  // namespace

namespace {

constexpr double kAscentSlack = 1e-9;
constexpr int kMaxHalvings = 10;

}  // namespace

LcaFit fit_lca_from(const WhitenedData& whitened, const SemiOrthogonalMatrix& init,
                    ObjectiveKind kind, int max_iter, double tol, const SplineOptions& spline) {
    const MatrixXd& Z = whitened.z;
    const int T = static_cast<int>(Z.cols());
    const auto Q = init.n_components();
    if (init.dim() != T) throw DimensionError("initial W does not match the data dimension");

    LcaFit fit;
    fit.kind = kind;
    SemiOrthogonalMatrix W = init;
    fit.max_orthogonality_error = W.orthogonality_error();
    std::vector<DensityModel> densities;
    if (kind == ObjectiveKind::logis) densities.assign(static_cast<size_t>(Q), LogisticDensity{});

    MatrixXd S = Z * W.rows().transpose();
    if (kind == ObjectiveKind::spline) densities = fit_densities(S, spline, nullptr);
    double objective = eval_objective(S, densities, kind, T);

    for (int it = 1; it <= max_iter; ++it) {
        fit.objective_trace.push_back(objective);
        SemiOrthogonalMatrix next = fixed_point_step(W, Z, densities);
        MatrixXd S_next = Z * next.rows().transpose();
        std::vector<DensityModel> dens_next;
        double obj_next = 0.0;
        if (kind == ObjectiveKind::spline) {
            dens_next = fit_densities(S_next, spline, &densities);
            obj_next = eval_objective(S_next, dens_next, kind, T);
            if (obj_next < objective - kAscentSlack) {
                // Shorten the step toward W until the objective does not drop.
                MatrixXd target = next.rows();
                for (Eigen::Index q = 0; q < Q; ++q)
                    if (target.row(q).dot(W.rows().row(q)) < 0.0) target.row(q) *= -1.0;
                double t = 1.0;
                for (int h = 0; h < kMaxHalvings && obj_next < objective - kAscentSlack; ++h) {
                    t *= 0.5;
                    next = symmetric_orthogonalize((1.0 - t) * W.rows() + t * target);
                    S_next = Z * next.rows().transpose();
                    dens_next = fit_densities(S_next, spline, &densities);
                    obj_next = eval_objective(S_next, dens_next, kind, T);
                }
                if (obj_next < objective - kAscentSlack) {
                    next = W;
                    S_next = S;
                    dens_next = densities;
                    obj_next = objective;
                }
            }
        } else {
            dens_next = densities;
            obj_next = eval_objective(S_next, dens_next, kind, T);
        }
        const double orth = next.orthogonality_error();
        assert(orth <= 1e-8);
        fit.max_orthogonality_error = std::max(fit.max_orthogonality_error, orth);
        const double change = metrics::pmse(next.rows().transpose(), W.rows().transpose()).value;
        W = std::move(next);
        S = std::move(S_next);
        densities = std::move(dens_next);
        objective = obj_next;
        fit.iterations = it;
        if (change < tol) {
            fit.converged = true;
            break;
        }
    }
    fit.S = std::move(S);
    fit.objective = objective;
    if (!std::isfinite(fit.objective)) throw FitError("objective is not finite", fit.objective_trace);
    fit.W_S = std::move(W);
    fit.densities = std::move(densities);
    fit.whitening = whitened.transform;
    return fit;
}

LcaFit fit_lca(const DataMatrix& data, int q_star, ObjectiveKind kind, const RestartConfig& cfg,
               const SplineOptions& spline) {
    cfg.validate();
    const int T = static_cast<int>(data.cols());
    if (q_star < 1 || q_star > T) {
        std::ostringstream os;
        os << "Q* must lie in [1, " << T << "], got " << q_star;
        throw ConfigError(os.str());
    }
    auto [centered, mean] = center(data);
    const WhitenedData whitened = whiten(centered);

    const int n = cfg.n_restarts;
    std::vector<std::optional<LcaFit>> fits(static_cast<size_t>(n));
    std::vector<RestartRecord> records(static_cast<size_t>(n));
    parallel_for(n, cfg.threads, [&](int r) {
        RestartRecord& rec = records[static_cast<size_t>(r)];
        rec.restart_id = r;
        try {
            const std::uint64_t rs = restart_seed(cfg.seed, r);
            const SemiOrthogonalMatrix init =
                make_initial_W(T, q_star, r < cfg.n_principal_subspace, whitened.transform, rs);
            LcaFit f = fit_lca_from(whitened, init, kind, cfg.max_iter, cfg.tol, spline);
            f = canonical_order(std::move(f), whitened);
            f.restart_id = r;
            rec.ok = true;
            rec.converged = f.converged;
            rec.iterations = f.iterations;
            rec.objective = f.objective;
            rec.max_orthogonality_error = f.max_orthogonality_error;
            fits[static_cast<size_t>(r)] = std::move(f);
        } catch (const Error& e) {
            rec.ok = false;
            rec.message = e.what();
        }
    });

    int best = -1;
    for (int r = 0; r < n; ++r) {
        if (!fits[static_cast<size_t>(r)]) continue;
        if (best < 0 || fits[static_cast<size_t>(r)]->objective >
                            fits[static_cast<size_t>(best)]->objective) {
            best = r;
        }
    }
    if (best < 0) {
        std::vector<std::string> diag;
        for (const auto& rec : records) {
            std::ostringstream os;
            os << "restart " << rec.restart_id << ": " << rec.message;
            diag.push_back(os.str());
        }
        throw AggregateFitError("all restarts failed", std::move(diag));
    }
    LcaFit out = std::move(*fits[static_cast<size_t>(best)]);
    out.M_S = estimate_mixing(centered, out.S);
    out.seed = cfg.seed;
    out.restarts = std::move(records);
    return out;
}

LcaFit fit_logis_lca(const DataMatrix& data, int q_star, const RestartConfig& cfg) {
    return fit_lca(data, q_star, ObjectiveKind::logis, cfg);
}

LcaFit fit_spline_lca(const DataMatrix& data, int q_star, const RestartConfig& cfg,
                      const SplineOptions& spline) {
    return fit_lca(data, q_star, ObjectiveKind::spline, cfg, spline);
}

}  // namespace lca
