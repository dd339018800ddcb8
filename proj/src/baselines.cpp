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
#include "lca/baselines.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "lca/error.hpp"
#include "lca/parallel.hpp"

namespace lca::baselines {

namespace {

double log_cosh(double x) {
    const double a = std::abs(x);
    return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

MatrixXd gaussian_matrix(int r, int c, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd G(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) G(i, j) = normal(rng);
    return G;
}

void project_out(VectorXd& w, const MatrixXd& W, int n_prev) {
    for (int j = 0; j < n_prev; ++j) {
        const VectorXd wj = W.row(j).transpose();
        w -= wj.dot(w) * wj;
    }
}

struct DeflationRun {
    MatrixXd W;
    std::vector<DeflationDirection> directions;
    double objective = 0.0;
};

DeflationRun run_deflation(const MatrixXd& Z, int n_components, const MatrixXd& G0,
                           const DFastIcaOptions& opts) {
    const int T = static_cast<int>(Z.cols());
    const double V = static_cast<double>(Z.rows());
    DeflationRun run;
    run.W = MatrixXd::Zero(n_components, T);
    auto normalize = [](VectorXd& w) {
        const double n = w.norm();
        if (!(n > 1e-12)) throw RankError("deflation direction collapsed");
        w /= n;
    };
    for (int p = 0; p < n_components; ++p) {
        DeflationDirection dir;
        VectorXd w = G0.row(p).transpose();
        project_out(w, run.W, p);
        normalize(w);
        double J = negentropy_index(Z * w);
        dir.objective_trace.push_back(J);
        for (int it = 1; it <= opts.max_iter; ++it) {
            const VectorXd s = Z * w;
            const Eigen::ArrayXd g = s.array().tanh();
            const double mean_gp = (1.0 - g.square()).mean();
            VectorXd w_new = Z.transpose() * g.matrix() / V - mean_gp * w;
            project_out(w_new, run.W, p);
            normalize(w_new);
            if (w_new.dot(w) < 0.0) w_new = -w_new;
            double J_new = negentropy_index(Z * w_new);
            if (J_new < J) {
                bool improved = false;
                VectorXd step = w_new - w;
                for (int h = 1; h <= 30 && !improved; ++h) {
                    step *= 0.5;
                    VectorXd cand = w + step;
                    project_out(cand, run.W, p);
                    normalize(cand);
                    const double Jc = negentropy_index(Z * cand);
                    if (Jc >= J) {
                        w_new = cand;
                        J_new = Jc;
                        improved = true;
                    }
                }
                if (!improved) {
                    w_new = w;
                    J_new = J;
                }
            }
            const double change = 1.0 - std::abs(w_new.dot(w));
            w = w_new;
            J = J_new;
            dir.objective_trace.push_back(J);
            dir.iterations = it;
            if (change < opts.tol) {
                dir.converged = true;
                break;
            }
        }
        dir.objective = J;
        run.W.row(p) = w.transpose();
        run.objective += J;
        run.directions.push_back(std::move(dir));
    }
    return run;
}

}  // namespace

double negentropy_index(const VectorXd& s) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) acc += log_cosh(s(i));
    const double d = acc / static_cast<double>(s.size()) - kLogCoshGaussianMean;
    return d * d;
}

DFastIcaResult dfastica_deflation(const DataMatrix& data, int n_components,
                                  const DFastIcaOptions& opts) {
    const int T = static_cast<int>(data.cols());
    if (n_components < 1 || n_components > T) {
        throw ConfigError("n_components must lie in [1, T]");
    }
    if (opts.n_restarts < 1 || opts.max_iter < 1 || !(opts.tol > 0.0)) {
        throw ConfigError("invalid deflation options");
    }
    auto [centered, mean] = center(data);
    const WhitenedData whitened = whiten(centered);

    const int n = opts.n_restarts;
    std::vector<std::optional<DeflationRun>> runs(static_cast<size_t>(n));
    std::vector<std::string> messages(static_cast<size_t>(n));
    parallel_for(n, opts.threads, [&](int r) {
        std::mt19937_64 rng(restart_seed(opts.seed, r));
        const MatrixXd G0 = gaussian_matrix(n_components, T, rng);
        try {
            runs[static_cast<size_t>(r)] = run_deflation(whitened.z, n_components, G0, opts);
        } catch (const Error& e) {
            messages[static_cast<size_t>(r)] = e.what();
        }
    });
    int best = -1;
    for (int r = 0; r < n; ++r) {
        if (!runs[static_cast<size_t>(r)]) continue;
        if (best < 0 || runs[static_cast<size_t>(r)]->objective > runs[static_cast<size_t>(best)]->objective) {
            best = r;
        }
    }
    if (best < 0) {
        std::vector<std::string> diag;
        for (int r = 0; r < n; ++r) diag.push_back("restart " + std::to_string(r) + ": " + messages[static_cast<size_t>(r)]);
        throw AggregateFitError("all deflation restarts failed", std::move(diag));
    }
    DeflationRun& run = *runs[static_cast<size_t>(best)];
    DFastIcaResult out;
    out.W = run.W;
    out.S = whitened.z * run.W.transpose();
    out.M_S = estimate_mixing(centered, out.S).M_S;
    out.directions = std::move(run.directions);
    out.objective = run.objective;
    out.restart_id = best;
    out.whitening = whitened.transform;
    return out;
}

DFastIcaResult retain_components(const DFastIcaResult& full, int q, const DataMatrix& data) {
    if (q < 1 || q > full.W.rows()) throw ConfigError("cannot retain that many components");
    DFastIcaResult out;
    out.W = full.W.topRows(q);
    out.S = full.S.leftCols(q);
    out.M_S = estimate_mixing(center(data).first, out.S).M_S;
    out.directions.assign(full.directions.begin(), full.directions.begin() + q);
    for (const auto& d : out.directions) out.objective += d.objective;
    out.restart_id = full.restart_id;
    out.whitening = full.whitening;
    return out;
}

MatrixXd pca_reduce(const DataMatrix& data, int q) {
    const int T = static_cast<int>(data.cols());
    if (q < 1 || q > T) throw ConfigError("Q must lie in [1, T]");
    const WhitenedData w = whiten(data);
    return w.z * w.transform.eigvecs.leftCols(q);
}

namespace {

LcaFit pca_then(const DataMatrix& data, int q, ObjectiveKind kind, const RestartConfig& cfg,
                const SplineOptions& spline) {
    const int T = static_cast<int>(data.cols());
    if (q < 1 || q > T) throw ConfigError("Q must lie in [1, T]");
    auto [centered, mean] = center(data);
    const WhitenedData full = whiten(centered);
    const MatrixXd Y = full.z * full.transform.eigvecs.leftCols(q);
    LcaFit fit = fit_lca(DataMatrix(Y), q, kind, cfg, spline);
    const MatrixXd W_full =
        fit.W_S.rows() * fit.whitening.L * full.transform.eigvecs.leftCols(q).transpose();
    fit.W_S = symmetric_orthogonalize(W_full);
    fit.whitening = full.transform;
    fit.M_S = estimate_mixing(centered, fit.S);
    return fit;
}

}  // namespace

LcaFit pca_infomax(const DataMatrix& data, int q, const RestartConfig& cfg) {
    return pca_then(data, q, ObjectiveKind::logis, cfg, {});
}

LcaFit pca_prodenica(const DataMatrix& data, int q, const RestartConfig& cfg,
                     const SplineOptions& spline) {
    return pca_then(data, q, ObjectiveKind::spline, cfg, spline);
}

// ---------------------------------------------------------------------------

double IfaParams::nu2(int q) const {
    const double p1 = pi1(q), p2 = pi2(q), m2 = mu2(q);
    return (1.0 - p1 * nu1(q) - p1 * mu1(q) * mu1(q)) / p2 - m2 * m2;
}

void IfaParams::validate() const {
    const int Q = n_components();
    if (Q < 1 || Q > 10) throw ConfigError("IFA needs 1 <= Q <= 10");
    if (pi1.size() != Q || mu1.size() != Q || nu1.size() != Q) {
        throw ConfigError("IFA density parameter lengths must equal Q");
    }
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ConfigError("sigma2 must be positive");
    for (int q = 0; q < Q; ++q) {
        if (!(pi1(q) > 0.0 && pi1(q) < 1.0)) throw ConfigError("pi1 must lie in (0, 1)");
        if (!(nu1(q) > 0.0)) throw ConfigError("nu1 must be positive");
        if (!(nu2(q) > 0.0)) throw ConfigError("derived nu2 is not positive");
    }
    if (!M_S.allFinite()) throw ConfigError("M_S must be finite");
}

IfaParams ifa_super_gaussian_preset(int q) {
    IfaParams p;
    p.pi1 = VectorXd::Constant(q, 0.7);
    p.mu1 = VectorXd::Constant(q, -0.5);
    p.nu1 = VectorXd::Constant(q, 0.5);
    p.sigma2 = 1.0;
    return p;
}

IfaParams ifa_sub_gaussian_preset(int q) {
    IfaParams p;
    p.pi1 = VectorXd::Constant(q, 0.3);
    p.mu1 = VectorXd::Constant(q, -1.0);
    p.nu1 = VectorXd::Constant(q, 0.5);
    p.sigma2 = 1.0;
    return p;
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

/// One enumerated class state with its Gaussian marginal of x.
struct IfaState {
    VectorXd mu;        // Q
    VectorXd nu;        // Q
    std::vector<int> cls;
    double logw = 0.0;
    VectorXd mean;      // T
    MatrixXd Sinv;      // T x T
    double logdet = 0.0;
};

std::vector<IfaState> enumerate_states(const IfaParams& p) {
    p.validate();
    const int Q = p.n_components(), T = p.dim();
    std::vector<IfaState> states(static_cast<size_t>(1) << Q);
    for (size_t k = 0; k < states.size(); ++k) {
        IfaState& s = states[k];
        s.mu.resize(Q);
        s.nu.resize(Q);
        s.cls.resize(static_cast<size_t>(Q));
        for (int q = 0; q < Q; ++q) {
            const int c = static_cast<int>((k >> q) & 1U);
            s.cls[static_cast<size_t>(q)] = c;
            s.mu(q) = c == 0 ? p.mu1(q) : p.mu2(q);
            s.nu(q) = c == 0 ? p.nu1(q) : p.nu2(q);
            s.logw += std::log(c == 0 ? p.pi1(q) : p.pi2(q));
        }
        s.mean = p.M_S * s.mu;
        const MatrixXd Sigma = p.M_S * s.nu.asDiagonal() * p.M_S.transpose() +
                               p.sigma2 * MatrixXd::Identity(T, T);
        Eigen::LLT<MatrixXd> llt(Sigma);
        if (llt.info() != Eigen::Success) throw ConfigError("state covariance is not positive definite");
        s.Sinv = llt.solve(MatrixXd::Identity(T, T));
        s.logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    }
    return states;
}

/// log w_k + log N(x; mean_k, Sigma_k) for every state, and alpha_k = Sinv_k (x - mean_k).
void state_terms(const std::vector<IfaState>& states, const VectorXd& x, VectorXd& logterm,
                 std::vector<VectorXd>* alphas) {
    const double T = static_cast<double>(x.size());
    logterm.resize(static_cast<Eigen::Index>(states.size()));
    for (size_t k = 0; k < states.size(); ++k) {
        const VectorXd d = x - states[k].mean;
        VectorXd a = states[k].Sinv * d;
        logterm(static_cast<Eigen::Index>(k)) =
            states[k].logw - 0.5 * (T * kLog2Pi + states[k].logdet + d.dot(a));
        if (alphas) (*alphas)[k] = std::move(a);
    }
}

double log_sum_exp(const VectorXd& v, VectorXd* weights) {
    const double m = v.maxCoeff();
    const VectorXd e = (v.array() - m).exp().matrix();
    const double s = e.sum();
    if (weights) *weights = e / s;
    return m + std::log(s);
}

}  // namespace

double ifa_density(const VectorXd& x, const IfaParams& params) {
    if (x.size() != params.dim()) throw DimensionError("x length must equal T");
    const auto states = enumerate_states(params);
    VectorXd lt;
    state_terms(states, x, lt, nullptr);
    return std::exp(log_sum_exp(lt, nullptr));
}

double ifa_loglik(const MatrixXd& X, const IfaParams& params) {
    if (X.cols() != params.dim()) throw DimensionError("X columns must equal T");
    const auto states = enumerate_states(params);
    double total = 0.0;
    VectorXd lt;
    for (Eigen::Index v = 0; v < X.rows(); ++v) {
        state_terms(states, X.row(v).transpose(), lt, nullptr);
        total += log_sum_exp(lt, nullptr);
    }
    return total;
}

VectorXd ifa_pack(const IfaParams& p) {
    p.validate();
    const int T = p.dim(), Q = p.n_components();
    VectorXd theta(T * Q + 1 + 3 * Q);
    theta.head(T * Q) = Eigen::Map<const VectorXd>(p.M_S.data(), T * Q);
    theta(T * Q) = std::log(p.sigma2);
    for (int q = 0; q < Q; ++q) {
        const double p1 = p.pi1(q), p2 = 1.0 - p1;
        const double t = p.mu1(q) * std::sqrt(p1 / p2);
        const double B = t * t;
        const double sc = p1 * p.nu1(q) / (1.0 - B);
        theta(T * Q + 1 + 3 * q) = logit(p1);
        theta(T * Q + 2 + 3 * q) = std::atanh(t);
        theta(T * Q + 3 + 3 * q) = logit(sc);
    }
    return theta;
}

IfaParams ifa_unpack(const VectorXd& theta, int T, int Q) {
    if (theta.size() != T * Q + 1 + 3 * Q) throw DimensionError("theta has the wrong length");
    IfaParams p;
    p.M_S = Eigen::Map<const MatrixXd>(theta.data(), T, Q);
    p.sigma2 = std::exp(theta(T * Q));
    p.pi1.resize(Q);
    p.mu1.resize(Q);
    p.nu1.resize(Q);
    for (int q = 0; q < Q; ++q) {
        const double p1 = sigmoid(theta(T * Q + 1 + 3 * q));
        const double t = std::tanh(theta(T * Q + 2 + 3 * q));
        const double sc = sigmoid(theta(T * Q + 3 + 3 * q));
        p.pi1(q) = p1;
        p.mu1(q) = t * std::sqrt((1.0 - p1) / p1);
        p.nu1(q) = (1.0 - t * t) * sc / p1;
    }
    return p;
}

double ifa_loglik_grad(const MatrixXd& X, const VectorXd& theta, int T, int Q, VectorXd& grad) {
    if (X.cols() != T) throw DimensionError("X columns must equal T");
    const IfaParams p = ifa_unpack(theta, T, Q);
    const auto states = enumerate_states(p);
    const size_t K = states.size();

    std::vector<double> R(K, 0.0);
    std::vector<VectorXd> A(K, VectorXd::Zero(T));
    std::vector<MatrixXd> AA(K, MatrixXd::Zero(T, T));
    std::vector<VectorXd> alphas(K);
    VectorXd lt, r;
    double total = 0.0;
    for (Eigen::Index v = 0; v < X.rows(); ++v) {
        state_terms(states, X.row(v).transpose(), lt, &alphas);
        total += log_sum_exp(lt, &r);
        for (size_t k = 0; k < K; ++k) {
            const double rk = r(static_cast<Eigen::Index>(k));
            R[k] += rk;
            A[k] += rk * alphas[k];
            AA[k].selfadjointView<Eigen::Lower>().rankUpdate(alphas[k], rk);
        }
    }

    MatrixXd gM = MatrixXd::Zero(T, Q);
    double gs2 = 0.0;
    MatrixXd g_pi = MatrixXd::Zero(Q, 2), g_mu = MatrixXd::Zero(Q, 2), g_nu = MatrixXd::Zero(Q, 2);
    for (size_t k = 0; k < K; ++k) {
        const IfaState& s = states[k];
        const MatrixXd AAk = AA[k].selfadjointView<Eigen::Lower>();
        const MatrixXd G = 0.5 * (AAk - R[k] * s.Sinv);
        gM += A[k] * s.mu.transpose() + 2.0 * G * p.M_S * s.nu.asDiagonal();
        gs2 += G.trace();
        const VectorXd MtA = p.M_S.transpose() * A[k];
        const MatrixXd MtGM = p.M_S.transpose() * G * p.M_S;
        for (int q = 0; q < Q; ++q) {
            const int c = s.cls[static_cast<size_t>(q)];
            g_mu(q, c) += MtA(q);
            g_nu(q, c) += MtGM(q, q);
            g_pi(q, c) += R[k] / (c == 0 ? p.pi1(q) : p.pi2(q));
        }
    }

    grad.resize(theta.size());
    grad.head(T * Q) = Eigen::Map<const VectorXd>(gM.data(), T * Q);
    grad(T * Q) = gs2 * p.sigma2;
    for (int q = 0; q < Q; ++q) {
        const double p1 = p.pi1(q), p2 = p.pi2(q);
        const double t = std::tanh(theta(T * Q + 2 + 3 * q));
        const double sc = sigmoid(theta(T * Q + 3 + 3 * q));
        const double B = t * t, dB = 2.0 * t * (1.0 - t * t);
        const double rr = std::sqrt(p2 / p1);
        const double mu1 = p.mu1(q), mu2 = p.mu2(q), nu1 = p.nu1(q), nu2 = p.nu2(q);
        const double da = (g_pi(q, 0) - g_pi(q, 1)) * p1 * p2 - 0.5 * g_mu(q, 0) * mu1 +
                          0.5 * g_mu(q, 1) * mu2 - g_nu(q, 0) * nu1 * p2 + g_nu(q, 1) * nu2 * p1;
        const double db = (1.0 - t * t) * (g_mu(q, 0) * rr - g_mu(q, 1) / rr) +
                          dB * (-g_nu(q, 0) * sc / p1 - g_nu(q, 1) * (1.0 - sc) / p2);
        const double dc = sc * (1.0 - sc) * (1.0 - B) * (g_nu(q, 0) / p1 - g_nu(q, 1) / p2);
        grad(T * Q + 1 + 3 * q) = da;
        grad(T * Q + 2 + 3 * q) = db;
        grad(T * Q + 3 + 3 * q) = dc;
    }
    return total;
}

MatrixXd ifa_conditional_means(const MatrixXd& X, const IfaParams& params) {
    if (X.cols() != params.dim()) throw DimensionError("X columns must equal T");
    const auto states = enumerate_states(params);
    const int Q = params.n_components();
    MatrixXd S(X.rows(), Q);
    std::vector<VectorXd> alphas(states.size());
    VectorXd lt, r;
    const MatrixXd Mt = params.M_S.transpose();
    for (Eigen::Index v = 0; v < X.rows(); ++v) {
        state_terms(states, X.row(v).transpose(), lt, &alphas);
        log_sum_exp(lt, &r);
        VectorXd e = VectorXd::Zero(Q);
        for (size_t k = 0; k < states.size(); ++k) {
            e += r(static_cast<Eigen::Index>(k)) *
                 (states[k].mu + states[k].nu.cwiseProduct(Mt * alphas[k]));
        }
        S.row(v) = e.transpose();
    }
    return S;
}

MatrixXd ifa_sample(const IfaParams& params, int V, std::mt19937_64& rng, MatrixXd* sources) {
    params.validate();
    const int Q = params.n_components(), T = params.dim();
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    MatrixXd S(V, Q);
    for (int v = 0; v < V; ++v) {
        for (int q = 0; q < Q; ++q) {
            const bool first = unif(rng) < params.pi1(q);
            const double m = first ? params.mu1(q) : params.mu2(q);
            const double s2 = first ? params.nu1(q) : params.nu2(q);
            S(v, q) = m + std::sqrt(s2) * normal(rng);
        }
    }
    MatrixXd E = gaussian_matrix(V, T, rng);
    MatrixXd X = S * params.M_S.transpose() + std::sqrt(params.sigma2) * E;
    if (sources) *sources = std::move(S);
    return X;
}

namespace {

struct IfaObjective {
    const MatrixXd* X;
    int T;
    int Q;
    double scale;
};

double neg_ll_f(const gsl_vector* x, void* ctx) {
    const auto* o = static_cast<const IfaObjective*>(ctx);
    const VectorXd theta = Eigen::Map<const VectorXd>(x->data, static_cast<Eigen::Index>(x->size));
    try {
        const double ll = ifa_loglik(*o->X, ifa_unpack(theta, o->T, o->Q));
        return std::isfinite(ll) ? -ll * o->scale : GSL_POSINF;
    } catch (const Error&) {
        return GSL_POSINF;
    }
}

void neg_ll_fdf(const gsl_vector* x, void* ctx, double* f, gsl_vector* g) {
    const auto* o = static_cast<const IfaObjective*>(ctx);
    const VectorXd theta = Eigen::Map<const VectorXd>(x->data, static_cast<Eigen::Index>(x->size));
    VectorXd grad;
    try {
        const double ll = ifa_loglik_grad(*o->X, theta, o->T, o->Q, grad);
        if (!std::isfinite(ll) || !grad.allFinite()) throw ConfigError("non-finite likelihood");
        *f = -ll * o->scale;
        for (size_t i = 0; i < g->size; ++i) gsl_vector_set(g, i, -grad(static_cast<Eigen::Index>(i)) * o->scale);
    } catch (const Error&) {
        *f = GSL_POSINF;
        gsl_vector_set_zero(g);
    }
}

void neg_ll_df(const gsl_vector* x, void* ctx, gsl_vector* g) {
    double f = 0.0;
    neg_ll_fdf(x, ctx, &f, g);
}

struct IfaRun {
    IfaParams params;
    double loglik = 0.0;
    int iterations = 0;
};

IfaRun maximize_ifa(const MatrixXd& X, const IfaParams& init, int max_iter) {
    const int T = init.dim(), Q = init.n_components();
    VectorXd theta0 = ifa_pack(init);
    IfaObjective obj{&X, T, Q, 1.0 / static_cast<double>(X.rows())};
    gsl_multimin_function_fdf fn;
    fn.n = static_cast<size_t>(theta0.size());
    fn.f = &neg_ll_f;
    fn.df = &neg_ll_df;
    fn.fdf = &neg_ll_fdf;
    fn.params = &obj;

    gsl_vector* x = gsl_vector_alloc(fn.n);
    for (size_t i = 0; i < fn.n; ++i) gsl_vector_set(x, i, theta0(static_cast<Eigen::Index>(i)));
    gsl_multimin_fdfminimizer* s =
        gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, fn.n);
    gsl_multimin_fdfminimizer_set(s, &fn, x, 0.01, 0.1);
    if (!std::isfinite(s->f)) {
        gsl_multimin_fdfminimizer_free(s);
        gsl_vector_free(x);
        throw FitError("IFA likelihood is not finite at the initial point");
    }
    int it = 0;
    for (; it < max_iter; ++it) {
        const int status = gsl_multimin_fdfminimizer_iterate(s);
        if (status) break;
        if (gsl_multimin_test_gradient(s->gradient, 1e-6) == GSL_SUCCESS) {
            ++it;
            break;
        }
    }
    VectorXd theta(static_cast<Eigen::Index>(fn.n));
    for (size_t i = 0; i < fn.n; ++i) theta(static_cast<Eigen::Index>(i)) = gsl_vector_get(s->x, i);
    const double f = s->f;
    gsl_multimin_fdfminimizer_free(s);
    gsl_vector_free(x);
    if (!std::isfinite(f)) throw FitError("IFA optimizer left the finite region");
    IfaRun run;
    run.params = ifa_unpack(theta, T, Q);
    run.loglik = -f / obj.scale;
    run.iterations = it;
    return run;
}

/// Mixing matrix Sigma^{1/2} W' for a random semi-orthogonal W.
MatrixXd random_mixing_init(const WhiteningTransform& wt, int q, std::mt19937_64& rng) {
    const int T = static_cast<int>(wt.eigvals.size());
    const MatrixXd W = symmetric_orthogonalize(gaussian_matrix(q, T, rng)).rows();
    const MatrixXd half = wt.eigvecs * wt.eigvals.cwiseSqrt().asDiagonal() * wt.eigvecs.transpose();
    return half * W.transpose();
}

struct GslErrorsOff {
    GslErrorsOff() { gsl_set_error_handler_off(); }
};

}  // namespace

std::vector<IfaInit> ifa_truth_inits(const IfaParams& truth, const DataMatrix& data, int n_random,
                                     std::uint64_t seed) {
    truth.validate();
    const WhitenedData w = whiten(data);
    std::vector<IfaInit> inits;
    inits.push_back({"truth", truth});
    for (int i = 0; i < n_random; ++i) {
        std::mt19937_64 rng(restart_seed(seed ^ 0x7472757468ULL, i));
        IfaParams p = truth;
        p.M_S = random_mixing_init(w.transform, truth.n_components(), rng);
        inits.push_back({"truth-density/random-" + std::to_string(i), std::move(p)});
    }
    return inits;
}

IfaFit fit_ifa(const DataMatrix& data, int q, const IfaOptions& opts,
               const std::vector<IfaInit>& extra_inits) {
    static const GslErrorsOff gsl_errors_off;
    const int T = static_cast<int>(data.cols());
    if (q < 1 || q > T || q > 10) throw ConfigError("IFA needs 1 <= Q <= min(T, 10)");
    if (opts.max_iter < 1 || opts.n_random < 0) throw ConfigError("invalid IFA options");
    auto [centered, mean] = center(data);
    const WhitenedData w = whiten(centered);

    std::vector<IfaInit> inits = extra_inits;
    for (const auto& e : inits) {
        if (e.params.n_components() != q || e.params.dim() != T) {
            throw ConfigError("IFA initial parameters do not match (T, Q)");
        }
    }
    auto add_preset = [&](const IfaParams& preset, const std::string& name, std::uint64_t salt) {
        for (int i = 0; i < opts.n_random; ++i) {
            std::mt19937_64 rng(restart_seed(opts.seed ^ salt, i));
            IfaParams p = preset;
            p.M_S = random_mixing_init(w.transform, q, rng);
            inits.push_back({name + "/random-" + std::to_string(i), std::move(p)});
        }
    };
    if (opts.use_super_preset) add_preset(ifa_super_gaussian_preset(q), "super", 0x5375706572ULL);
    if (opts.use_sub_preset) add_preset(ifa_sub_gaussian_preset(q), "sub", 0x537562ULL);
    if (inits.empty()) throw ConfigError("IFA has no initializations");

    const MatrixXd& X = centered.values();
    const int n = static_cast<int>(inits.size());
    std::vector<std::optional<IfaRun>> runs(static_cast<size_t>(n));
    std::vector<IfaRunRecord> records(static_cast<size_t>(n));
    parallel_for(n, opts.threads, [&](int i) {
        IfaRunRecord& rec = records[static_cast<size_t>(i)];
        rec.label = inits[static_cast<size_t>(i)].label;
        try {
            IfaRun run = maximize_ifa(X, inits[static_cast<size_t>(i)].params, opts.max_iter);
            rec.ok = true;
            rec.loglik = run.loglik;
            rec.iterations = run.iterations;
            runs[static_cast<size_t>(i)] = std::move(run);
        } catch (const Error& e) {
            rec.message = e.what();
        }
    });
    int best = -1;
    for (int i = 0; i < n; ++i) {
        if (!runs[static_cast<size_t>(i)]) continue;
        if (best < 0 || runs[static_cast<size_t>(i)]->loglik > runs[static_cast<size_t>(best)]->loglik) best = i;
    }
    if (best < 0) {
        std::vector<std::string> diag;
        for (const auto& rec : records) diag.push_back(rec.label + ": " + rec.message);
        throw AggregateFitError("all IFA initializations failed", std::move(diag));
    }
    IfaFit fit;
    fit.params = runs[static_cast<size_t>(best)]->params;
    fit.loglik = runs[static_cast<size_t>(best)]->loglik;
    fit.iterations = runs[static_cast<size_t>(best)]->iterations;
    fit.init_label = records[static_cast<size_t>(best)].label;
    fit.S = ifa_conditional_means(X, fit.params);
    fit.runs = std::move(records);
    return fit;
}

}  // namespace lca::baselines
