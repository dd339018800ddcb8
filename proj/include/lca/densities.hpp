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
 * Univariate component densities: the unit-variance logistic and the
 * tilted Gaussian phi(x) exp(g(x)) with a cubic B-spline tilt g fitted by a
 * penalized Poisson regression on binned samples.
 */
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <variant>
#include <vector>

namespace lca {

/// log of the standard normal density.
double log_std_normal_pdf(double x);

/// Zero-mean unit-variance logistic density, scale c = sqrt(3)/pi.
struct LogisticDensity {
    static double scale();
    static double logpdf(double x);
    /// d/dx log f = -(1/c) tanh(x / 2c).
    static double score(double x);
    /// d^2/dx^2 log f = -(1/(2c^2)) sech^2(x / 2c).
    static double score_deriv(double x);
};

double logistic_logpdf(double x);
double logistic_score(double x);
double logistic_score_deriv(double x);

/// Cubic B-spline on uniform knots t_j = lo + (j - 3) h, j = 0..K+3, giving K
/// basis functions that form a partition of unity on [lo, hi].
class UniformCubicBSpline {
public:
    UniformCubicBSpline() = default;
    UniformCubicBSpline(double lo, double hi, int n_basis);

    int n_basis() const noexcept { return n_basis_; }
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double spacing() const noexcept { return h_; }
    std::vector<double> knots() const;

    /// First nonzero basis index at x in [lo, hi] and the four basis values
    /// (deriv = 0, 1, 2 for value, first, second derivative).
    int eval_basis(double x, int deriv, double out[4]) const;

    /// Dense rows of basis values at each point (points inside [lo, hi]).
    Eigen::MatrixXd design(const Eigen::VectorXd& x) const;
    /// Exact curvature penalty Omega_ij = int_lo^hi B_i'' B_j''.
    Eigen::MatrixXd curvature_penalty() const;

private:
    double lo_ = 0.0;
    double hi_ = 1.0;
    double h_ = 1.0;
    int n_basis_ = 0;
};

/// phi(x) exp(g(x)) with g a cubic spline on [lo, hi], extended linearly
/// (g'' = 0) outside the support.
class TiltedGaussianDensity {
public:
    TiltedGaussianDensity() = default;
    TiltedGaussianDensity(UniformCubicBSpline basis, Eigen::VectorXd coefficients, double penalty,
                          double effective_df, double bin_width = 0.0);

    /// Null tilt g == 0 on [lo, hi].
    static TiltedGaussianDensity null_tilt(double lo = -5.0, double hi = 5.0, int n_basis = 8);

    const UniformCubicBSpline& basis() const noexcept { return basis_; }
    const Eigen::VectorXd& coefficients() const noexcept { return coef_; }
    std::vector<double> knots() const { return basis_.knots(); }
    /// Penalty beta on the binned (divided-by-width) scale.
    double penalty() const noexcept { return penalty_; }
    /// Width of the bins the tilt was fitted on; 0 when not fitted.
    double bin_width() const noexcept { return bin_width_; }
    /// Penalty on the per-observation likelihood scale, lambda = beta * width.
    double lambda() const noexcept { return penalty_ * bin_width_; }
    double effective_df() const noexcept { return df_; }
    double support_lo() const noexcept { return basis_.lo(); }
    double support_hi() const noexcept { return basis_.hi(); }

    double tilt(double x) const;
    double tilt_d1(double x) const;
    double tilt_d2(double x) const;

    double logpdf(double x) const;
    double score(double x) const;
    double score_deriv(double x) const;

    /// int (g'')^2 over the support.
    double roughness() const;
    /// int phi e^g over the real line (support by quadrature, tails in closed form).
    double total_mass() const;
    /// int x phi e^g over the real line.
    double first_moment() const;

    /// Density of -X when X has this density.
    TiltedGaussianDensity reflected() const;

private:
    UniformCubicBSpline basis_;
    Eigen::VectorXd coef_;
    double penalty_ = 0.0;
    double df_ = 0.0;
    double bin_width_ = 0.0;
    double g_lo_ = 0.0, d_lo_ = 0.0, g_hi_ = 0.0, d_hi_ = 0.0;
};

double tilt_logpdf(const TiltedGaussianDensity& d, double x);
double tilt_score(const TiltedGaussianDensity& d, double x);
double tilt_score_deriv(const TiltedGaussianDensity& d, double x);

/// Equal-width histogram of one projected component.
struct BinnedTilt {
    std::vector<double> edges;      ///< bins + 1 strictly increasing edges
    std::vector<double> midpoints;  ///< bins midpoints
    std::vector<int> counts;        ///< samples per bin, summing to V
    double delta = 0.0;             ///< common bin width

    int bins() const noexcept { return static_cast<int>(counts.size()); }
    long total() const;
};

/// Bins s over [min - 0.1 sd, max + 0.1 sd] (sd with divisor V - 1). The last
/// bin is closed on the right. Throws ConfigError when V < 2 or bins < 2 and
/// FitError when s is constant.
BinnedTilt bin_samples(const Eigen::VectorXd& s, int bins);

struct TiltFitOptions {
    int n_basis = 40;           ///< capped at the bin count
    int max_iter = 100;
    double tol = 1e-9;          ///< max change of the linear predictor
    double beta_min = 1e-10;
    double beta_max = 1e10;
};

/// Poisson-GAM fit of the tilt with the penalty chosen so the effective
/// degrees of freedom (trace of the smoother) equal target_df. `warm_start`
/// seeds the linear predictor from a previous fit. Throws FitError on IRLS
/// non-convergence or when target_df cannot be reached in [beta_min, beta_max].
TiltedGaussianDensity fit_tilt(const BinnedTilt& binned, long V, double target_df,
                               const TiltFitOptions& opts = {},
                               const TiltedGaussianDensity* warm_start = nullptr);

/// Same fit with a fixed penalty beta; the returned density reports the
/// resulting effective df.
TiltedGaussianDensity fit_tilt_fixed_penalty(const BinnedTilt& binned, long V, double beta,
                                             const TiltFitOptions& opts = {});

/// A component density model.
using DensityModel = std::variant<LogisticDensity, TiltedGaussianDensity>;

double density_logpdf(const DensityModel& d, double x);
double density_score(const DensityModel& d, double x);
double density_score_deriv(const DensityModel& d, double x);
DensityModel reflect(const DensityModel& d);

}  // namespace lca
