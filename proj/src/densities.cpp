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
#include "lca/densities.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lca/error.hpp"

namespace lca {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// 5-point Gauss-Legendre on [0, 1].
constexpr double kGlNodes[5] = {0.04691007703066800, 0.23076534494715845, 0.5,
                                0.76923465505284155, 0.95308992296933200};
constexpr double kGlWeights[5] = {0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
                                  0.23931433524968324, 0.11846344252809454};

// log P(N(0,1) > z), accurate in the far tail.
double log_upper_tail(double z) {
    if (z < 20.0) {
        return std::log(0.5 * std::erfc(z / std::numbers::sqrt2));
    }
    // Mills ratio asymptotics.
    const double z2 = z * z;
    return -0.5 * z2 - kLogSqrt2Pi - std::log(z) + std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

}  // namespace

double log_std_normal_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

// ---------------------------------------------------------------- logistic

double LogisticDensity::scale() { return std::numbers::sqrt3 / std::numbers::pi; }

double LogisticDensity::logpdf(double x) {
    // f(x) = 1 / (4 c cosh^2(x / 2c)); log cosh(a) = |a| + log1p(e^{-2|a|}) - log 2.
    const double c = scale();
    const double a = std::abs(x / (2.0 * c));
    const double log_cosh = a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
    return -std::log(4.0 * c) - 2.0 * log_cosh;
}

double LogisticDensity::score(double x) {
    const double c = scale();
    return -std::tanh(x / (2.0 * c)) / c;
}

double LogisticDensity::score_deriv(double x) {
    const double c = scale();
    const double sech = 1.0 / std::cosh(x / (2.0 * c));
    return -sech * sech / (2.0 * c * c);
}

double logistic_logpdf(double x) { return LogisticDensity::logpdf(x); }
double logistic_score(double x) { return LogisticDensity::score(x); }
double logistic_score_deriv(double x) { return LogisticDensity::score_deriv(x); }

// ---------------------------------------------------------------- B-spline

UniformCubicBSpline::UniformCubicBSpline(double lo, double hi, int n_basis)
    : lo_(lo), hi_(hi), n_basis_(n_basis) {
    if (n_basis < 4) {
        throw ConfigError("cubic B-spline needs at least 4 basis functions");
    }
    if (!(hi > lo)) {
        throw ConfigError("cubic B-spline support must have hi > lo");
    }
    h_ = (hi - lo) / (n_basis - 3);
}

std::vector<double> UniformCubicBSpline::knots() const {
    std::vector<double> t(static_cast<size_t>(n_basis_ + 4));
    for (int j = 0; j < n_basis_ + 4; ++j) {
        t[static_cast<size_t>(j)] = lo_ + (j - 3) * h_;
    }
    return t;
}

int UniformCubicBSpline::eval_basis(double x, int deriv, double out[4]) const {
    const int n_spans = n_basis_ - 3;
    const double pos = (x - lo_) / h_;
    int j = static_cast<int>(std::floor(pos));
    j = std::clamp(j, 0, n_spans - 1);
    const double u = pos - j;
    const double v = 1.0 - u;
    switch (deriv) {
        case 0:
            out[0] = v * v * v / 6.0;
            out[1] = (3.0 * u * u * u - 6.0 * u * u + 4.0) / 6.0;
            out[2] = (-3.0 * u * u * u + 3.0 * u * u + 3.0 * u + 1.0) / 6.0;
            out[3] = u * u * u / 6.0;
            break;
        case 1: {
            const double s = 1.0 / h_;
            out[0] = -0.5 * v * v * s;
            out[1] = 0.5 * (3.0 * u * u - 4.0 * u) * s;
            out[2] = 0.5 * (-3.0 * u * u + 2.0 * u + 1.0) * s;
            out[3] = 0.5 * u * u * s;
            break;
        }
        case 2: {
            const double s = 1.0 / (h_ * h_);
            out[0] = v * s;
            out[1] = (3.0 * u - 2.0) * s;
            out[2] = (1.0 - 3.0 * u) * s;
            out[3] = u * s;
            break;
        }
        default:
            throw ConfigError("B-spline derivative order must be 0, 1 or 2");
    }
    return j;
}

Eigen::MatrixXd UniformCubicBSpline::design(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(x.size(), n_basis_);
    double b[4];
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const int j = eval_basis(x(i), 0, b);
        for (int k = 0; k < 4; ++k) B(i, j + k) = b[k];
    }
    return B;
}

Eigen::MatrixXd UniformCubicBSpline::curvature_penalty() const {
    // B'' is linear on each span, so two-point Gauss-Legendre is exact.
    const double g0 = 0.5 - 0.5 / std::numbers::sqrt3;
    const double g1 = 0.5 + 0.5 / std::numbers::sqrt3;
    const int n_spans = n_basis_ - 3;
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(n_basis_, n_basis_);
    double b[4];
    for (int j = 0; j < n_spans; ++j) {
        for (double u : {g0, g1}) {
            eval_basis(lo_ + (j + u) * h_, 2, b);
            for (int a = 0; a < 4; ++a) {
                for (int c = 0; c < 4; ++c) {
                    omega(j + a, j + c) += 0.5 * h_ * b[a] * b[c];
                }
            }
        }
    }
    return omega;
}

// ---------------------------------------------------------------- tilted Gaussian

TiltedGaussianDensity::TiltedGaussianDensity(UniformCubicBSpline basis,
                                             Eigen::VectorXd coefficients, double penalty,
                                             double effective_df, double bin_width)
    : basis_(std::move(basis)), coef_(std::move(coefficients)), penalty_(penalty),
      df_(effective_df), bin_width_(bin_width) {
    if (coef_.size() != basis_.n_basis()) {
        throw DimensionError("tilt coefficients do not match the basis size");
    }
    auto eval = [&](double x, int deriv) {
        double b[4];
        const int j = basis_.eval_basis(x, deriv, b);
        return b[0] * coef_(j) + b[1] * coef_(j + 1) + b[2] * coef_(j + 2) + b[3] * coef_(j + 3);
    };
    g_lo_ = eval(basis_.lo(), 0);
    d_lo_ = eval(basis_.lo(), 1);
    g_hi_ = eval(basis_.hi(), 0);
    d_hi_ = eval(basis_.hi(), 1);
}

TiltedGaussianDensity TiltedGaussianDensity::null_tilt(double lo, double hi, int n_basis) {
    return TiltedGaussianDensity(UniformCubicBSpline(lo, hi, n_basis),
                                 Eigen::VectorXd::Zero(n_basis), 0.0, 2.0);
}

double TiltedGaussianDensity::tilt(double x) const {
    if (x < basis_.lo()) return g_lo_ + d_lo_ * (x - basis_.lo());
    if (x > basis_.hi()) return g_hi_ + d_hi_ * (x - basis_.hi());
    double b[4];
    const int j = basis_.eval_basis(x, 0, b);
    return b[0] * coef_(j) + b[1] * coef_(j + 1) + b[2] * coef_(j + 2) + b[3] * coef_(j + 3);
}

double TiltedGaussianDensity::tilt_d1(double x) const {
    if (x < basis_.lo()) return d_lo_;
    if (x > basis_.hi()) return d_hi_;
    double b[4];
    const int j = basis_.eval_basis(x, 1, b);
    return b[0] * coef_(j) + b[1] * coef_(j + 1) + b[2] * coef_(j + 2) + b[3] * coef_(j + 3);
}

double TiltedGaussianDensity::tilt_d2(double x) const {
    if (x < basis_.lo() || x > basis_.hi()) return 0.0;
    double b[4];
    const int j = basis_.eval_basis(x, 2, b);
    return b[0] * coef_(j) + b[1] * coef_(j + 1) + b[2] * coef_(j + 2) + b[3] * coef_(j + 3);
}

double TiltedGaussianDensity::logpdf(double x) const { return log_std_normal_pdf(x) + tilt(x); }
double TiltedGaussianDensity::score(double x) const { return -x + tilt_d1(x); }
double TiltedGaussianDensity::score_deriv(double x) const { return -1.0 + tilt_d2(x); }

double TiltedGaussianDensity::roughness() const {
    return coef_.dot(basis_.curvature_penalty() * coef_);
}

namespace {

template <class F>
double integrate_support(const UniformCubicBSpline& basis, F&& f) {
    // Splitting each knot span in four keeps the Gaussian factor well resolved.
    constexpr int kSub = 4;
    const int n_spans = basis.n_basis() - 3;
    const double step = basis.spacing() / kSub;
    double total = 0.0;
    for (int j = 0; j < n_spans * kSub; ++j) {
        const double a = basis.lo() + j * step;
        for (int k = 0; k < 5; ++k) total += kGlWeights[k] * f(a + kGlNodes[k] * step);
    }
    return total * step;
}

}  // namespace

double TiltedGaussianDensity::total_mass() const {
    const double inner =
        integrate_support(basis_, [&](double x) { return std::exp(logpdf(x)); });
    const double lo = basis_.lo();
    const double hi = basis_.hi();
    // int_hi^inf phi(x) e^{g_hi + d (x - hi)} dx = e^{g_hi - d hi + d^2/2} P(N > hi - d)
    const double right =
        std::exp(g_hi_ - d_hi_ * hi + 0.5 * d_hi_ * d_hi_ + log_upper_tail(hi - d_hi_));
    const double left =
        std::exp(g_lo_ - d_lo_ * lo + 0.5 * d_lo_ * d_lo_ + log_upper_tail(d_lo_ - lo));
    return inner + left + right;
}

double TiltedGaussianDensity::first_moment() const {
    const double inner =
        integrate_support(basis_, [&](double x) { return x * std::exp(logpdf(x)); });
    const double lo = basis_.lo();
    const double hi = basis_.hi();
    // int_b^inf x phi(x) e^{d x} dx = e^{d^2/2} [d P(N > b - d) + phi(b - d)]
    const double cr = std::exp(g_hi_ - d_hi_ * hi + 0.5 * d_hi_ * d_hi_);
    const double right = cr * (d_hi_ * std::exp(log_upper_tail(hi - d_hi_)) +
                               std_normal_pdf(hi - d_hi_));
    const double cl = std::exp(g_lo_ - d_lo_ * lo + 0.5 * d_lo_ * d_lo_);
    const double left = cl * (d_lo_ * std::exp(log_upper_tail(d_lo_ - lo)) -
                              std_normal_pdf(lo - d_lo_));
    return inner + left + right;
}

TiltedGaussianDensity TiltedGaussianDensity::reflected() const {
    UniformCubicBSpline mirrored(-basis_.hi(), -basis_.lo(), basis_.n_basis());
    Eigen::VectorXd c = coef_.reverse();
    return TiltedGaussianDensity(std::move(mirrored), std::move(c), penalty_, df_, bin_width_);
}

double tilt_logpdf(const TiltedGaussianDensity& d, double x) { return d.logpdf(x); }
double tilt_score(const TiltedGaussianDensity& d, double x) { return d.score(x); }
double tilt_score_deriv(const TiltedGaussianDensity& d, double x) { return d.score_deriv(x); }

// ---------------------------------------------------------------- binning

long BinnedTilt::total() const {
    long n = 0;
    for (int c : counts) n += c;
    return n;
}

BinnedTilt bin_samples(const Eigen::VectorXd& s, int bins) {
    const auto V = s.size();
    if (V < 2) throw ConfigError("bin_samples needs at least two samples");
    if (bins < 2) throw ConfigError("bin_samples needs at least two bins");
    const double mean = s.mean();
    const double sd = std::sqrt((s.array() - mean).square().sum() / static_cast<double>(V - 1));
    const double lo_s = s.minCoeff();
    const double hi_s = s.maxCoeff();
    if (!(hi_s > lo_s) || !(sd > 0.0)) {
        throw FitError("degenerate support: all samples are equal");
    }
    BinnedTilt out;
    const double lo = lo_s - 0.1 * sd;
    const double hi = hi_s + 0.1 * sd;
    out.delta = (hi - lo) / bins;
    out.edges.resize(static_cast<size_t>(bins + 1));
    out.midpoints.resize(static_cast<size_t>(bins));
    out.counts.assign(static_cast<size_t>(bins), 0);
    for (int l = 0; l <= bins; ++l) out.edges[static_cast<size_t>(l)] = lo + l * out.delta;
    for (int l = 0; l < bins; ++l) {
        out.midpoints[static_cast<size_t>(l)] = lo + (l + 0.5) * out.delta;
    }
    for (Eigen::Index v = 0; v < V; ++v) {
        int l = static_cast<int>(std::floor((s(v) - lo) / out.delta));
        l = std::clamp(l, 0, bins - 1);
        ++out.counts[static_cast<size_t>(l)];
    }
    return out;
}

// ---------------------------------------------------------------- tilt fitting

namespace {

// Simultaneous diagonalization of the weighted Gram matrix A and the penalty
// Omega through P = A + s Omega = R R'. With R^{-1} A R^{-T} = E diag(a) E',
// (A + lambda Omega)^{-1} = R^{-T} E diag(1 / (a + (lambda/s)(1 - a))) E' R^{-1}.
struct PenalizedSystem {
    Eigen::MatrixXd Rinv;  // R^{-1}
    Eigen::MatrixXd E;
    Eigen::VectorXd a;
    double s = 1.0;

    void compute(const Eigen::MatrixXd& A, const Eigen::MatrixXd& omega) {
        s = A.trace() / std::max(omega.trace(), 1e-300);
        Eigen::MatrixXd P = A + s * omega;
        const auto K = A.rows();
        P.diagonal().array() += 1e-13 * P.trace() / static_cast<double>(K);
        Eigen::LLT<Eigen::MatrixXd> llt(P);
        if (llt.info() != Eigen::Success) {
            throw FitError("penalized Gram matrix is not positive definite");
        }
        Rinv = llt.matrixL().solve(Eigen::MatrixXd::Identity(K, K));
        Eigen::MatrixXd M = Rinv * A * Rinv.transpose();
        M = 0.5 * (M + M.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
        E = eig.eigenvectors();
        a = eig.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
    }

    double df(double lambda) const {
        const double g = lambda / s;
        double total = 0.0;
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            const double denom = a(i) + g * (1.0 - a(i));
            if (denom > 0.0) total += a(i) / denom;
        }
        return total;
    }

    Eigen::VectorXd solve(double lambda, const Eigen::VectorXd& rhs) const {
        const double g = lambda / s;
        Eigen::VectorXd y = E.transpose() * (Rinv * rhs);
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            const double denom = a(i) + g * (1.0 - a(i));
            y(i) = denom > 0.0 ? y(i) / denom : 0.0;
        }
        return Rinv.transpose() * (E * y);
    }
};

struct TiltProblem {
    Eigen::MatrixXd B;
    Eigen::MatrixXd omega;
    Eigen::VectorXd y;
    Eigen::VectorXd offset;  // log(V delta phi(x_l))
    UniformCubicBSpline basis;
};

TiltProblem make_problem(const BinnedTilt& binned, long V, const TiltFitOptions& opts) {
    const int L = binned.bins();
    if (L < 2) throw ConfigError("fit_tilt needs at least two bins");
    if (binned.total() != V) {
        std::ostringstream os;
        os << "bin counts sum to " << binned.total() << " but V = " << V;
        throw ConfigError(os.str());
    }
    const int K = std::max(4, std::min(opts.n_basis, L));
    TiltProblem p;
    p.basis = UniformCubicBSpline(binned.edges.front(), binned.edges.back(), K);
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(binned.midpoints.data(), L);
    p.B = p.basis.design(x);
    p.omega = p.basis.curvature_penalty();
    p.y.resize(L);
    p.offset.resize(L);
    const double log_vd = std::log(static_cast<double>(V) * binned.delta);
    for (int l = 0; l < L; ++l) {
        p.y(l) = binned.counts[static_cast<size_t>(l)];
        p.offset(l) = log_vd + log_std_normal_pdf(x(l));
    }
    return p;
}

// Penalized Poisson log-likelihood sum_l [y eta - mu] - (lambda/2) c' Omega c.
double penalized_loglik(const TiltProblem& p, const Eigen::VectorXd& c, double lambda) {
    const Eigen::VectorXd eta = p.B * c;
    double ll = 0.0;
    for (Eigen::Index l = 0; l < eta.size(); ++l) {
        ll += p.y(l) * eta(l) - std::exp(p.offset(l) + eta(l));
    }
    return ll - 0.5 * lambda * c.dot(p.omega * c);
}

TiltedGaussianDensity run_irls(const BinnedTilt& binned, long V, std::optional<double> target_df,
                               std::optional<double> fixed_beta, const TiltFitOptions& opts,
                               const TiltedGaussianDensity* warm) {
    const TiltProblem p = make_problem(binned, V, opts);
    const auto L = p.B.rows();
    const auto K = p.B.cols();
    // Newton system matrix is A + lambda Omega with lambda = 2 V delta beta.
    const double to_lambda = 2.0 * static_cast<double>(V) * binned.delta;

    Eigen::VectorXd eta = Eigen::VectorXd::Zero(L);
    if (warm != nullptr) {
        for (Eigen::Index l = 0; l < L; ++l) eta(l) = warm->tilt(binned.midpoints[l]);
    }
    std::optional<Eigen::VectorXd> coef_prev;
    if (warm == nullptr) coef_prev = Eigen::VectorXd::Zero(K);

    PenalizedSystem sys;
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(K);
    double lambda = fixed_beta ? *fixed_beta * to_lambda : 0.0;
    double df = 0.0;
    std::vector<double> trace;

    for (int it = 0; it < opts.max_iter; ++it) {
        Eigen::VectorXd w(L), z(L);
        for (Eigen::Index l = 0; l < L; ++l) {
            const double mu = std::exp(p.offset(l) + eta(l));
            w(l) = mu;
            z(l) = eta(l) + (p.y(l) - mu) / mu;
        }
        if (!w.allFinite() || !z.allFinite()) {
            throw FitError("tilt IRLS produced non-finite working values", trace);
        }
        const Eigen::MatrixXd A = p.B.transpose() * w.asDiagonal() * p.B;
        const Eigen::VectorXd rhs = p.B.transpose() * w.cwiseProduct(z);
        sys.compute(A, p.omega);

        if (target_df) {
            double lo = std::log(opts.beta_min * to_lambda);
            double hi = std::log(opts.beta_max * to_lambda);
            const double df_lo = sys.df(std::exp(lo));
            const double df_hi = sys.df(std::exp(hi));
            if (df_lo < *target_df || df_hi > *target_df) {
                std::ostringstream os;
                os << "target df " << *target_df << " outside the reachable range [" << df_hi
                   << ", " << df_lo << "]";
                throw FitError(os.str(), trace);
            }
            for (int b = 0; b < 100 && hi - lo > 1e-10; ++b) {
                const double mid = 0.5 * (lo + hi);
                if (sys.df(std::exp(mid)) > *target_df) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lambda = std::exp(0.5 * (lo + hi));
        }
        df = sys.df(lambda);
        Eigen::VectorXd coef_new = sys.solve(lambda, rhs);

        if (coef_prev) {
            // Step halving keeps the penalized likelihood from decreasing.
            const double ll_old = penalized_loglik(p, *coef_prev, lambda);
            double ll_new = penalized_loglik(p, coef_new, lambda);
            for (int h = 0; h < 30 && !(ll_new >= ll_old - 1e-10 * std::abs(ll_old)); ++h) {
                coef_new = 0.5 * (coef_new + *coef_prev);
                ll_new = penalized_loglik(p, coef_new, lambda);
            }
            trace.push_back(ll_new);
        } else {
            trace.push_back(penalized_loglik(p, coef_new, lambda));
        }

        const Eigen::VectorXd eta_new = p.B * coef_new;
        const double change = (eta_new - eta).cwiseAbs().maxCoeff();
        const double scale = 1.0 + eta_new.cwiseAbs().maxCoeff();
        eta = eta_new;
        coef = coef_new;
        coef_prev = coef_new;
        if (it > 0 && change < opts.tol * scale) {
            return TiltedGaussianDensity(p.basis, coef, lambda / to_lambda, df, binned.delta);
        }
    }
    std::ostringstream os;
    os << "tilt IRLS did not converge in " << opts.max_iter << " iterations";
    throw FitError(os.str(), trace);
}

}  // namespace

TiltedGaussianDensity fit_tilt(const BinnedTilt& binned, long V, double target_df,
                               const TiltFitOptions& opts, const TiltedGaussianDensity* warm_start) {
    if (!(target_df > 2.0)) throw ConfigError("target df must exceed 2");
    return run_irls(binned, V, target_df, std::nullopt, opts, warm_start);
}

TiltedGaussianDensity fit_tilt_fixed_penalty(const BinnedTilt& binned, long V, double beta,
                                             const TiltFitOptions& opts) {
    if (!(beta >= 0.0)) throw ConfigError("penalty must be nonnegative");
    return run_irls(binned, V, std::nullopt, beta, opts, nullptr);
}

// ---------------------------------------------------------------- variant helpers

double density_logpdf(const DensityModel& d, double x) {
    return std::visit([x](const auto& m) { return m.logpdf(x); }, d);
}

double density_score(const DensityModel& d, double x) {
    return std::visit([x](const auto& m) { return m.score(x); }, d);
}

double density_score_deriv(const DensityModel& d, double x) {
    return std::visit([x](const auto& m) { return m.score_deriv(x); }, d);
}

DensityModel reflect(const DensityModel& d) {
    if (const auto* t = std::get_if<TiltedGaussianDensity>(&d)) return t->reflected();
    return d;
}

}  // namespace lca
