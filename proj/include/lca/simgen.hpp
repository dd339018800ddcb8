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
 * Simulation scenes: iid sources under rank-(T-Q) or rank-T Gaussian noise,
 * and spatio-temporal networks with smooth spatial noise and AR(1) / HRF
 * temporal loadings.
 */
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace lca::sim {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Rng = std::mt19937_64;

enum class SourceKind { logistic, student_t, gumbel, sub_gaussian_mix, super_gaussian_mix, sparse_image };
enum class ModelKind { lca, noisy_ica };

std::string to_string(SourceKind kind);
std::string to_string(ModelKind kind);
/// Accepts the names printed by to_string plus the short CLI aliases; throws ConfigError.
SourceKind parse_source_kind(const std::string& name);
ModelKind parse_model_kind(const std::string& name);

/// A generated data set together with its ground truth.
struct SimScene {
    MatrixXd X;    ///< V x T observations
    MatrixXd S;    ///< V x Q true sources
    MatrixXd N;    ///< V x (T-Q) (lca) or V x T (noisy ICA) noise, already scaled
    MatrixXd M_S;  ///< T x Q
    MatrixXd M_N;  ///< T x (T-Q); empty for noisy ICA
    ModelKind model = ModelKind::lca;
    std::string design;  ///< "iid-factorial" or "spatiotemporal"
    std::string dist;
    double snr = 0.0;    ///< requested
    std::uint64_t seed = 0;
};

/// X = S M_S' + N M_N' (or + N when M_N is empty); the identity the scene was built with.
MatrixXd reconstruct(const SimScene& scene);

/// Signal-to-noise ratio of a scene from sample covariance eigenvalues (divisor V).
double realized_snr(const SimScene& scene);

/// U D V' from the SVD of a T x T standard normal matrix with D ~ uniform(lo, hi).
MatrixXd random_mixing(int T, Rng& rng, double lo = 1.0, double hi = 10.0);

/// V x Q iid draws, each column standardized to sample mean 0 and variance 1
/// (divisor V). sparse_image requires V = 1000 and Q = 2.
MatrixXd sample_sources(SourceKind kind, int V, int Q, Rng& rng);

/// One unstandardized draw of the given kind (sparse_image not supported).
double draw_source(SourceKind kind, Rng& rng);

/// Standardizes each column to sample mean 0 and variance 1 (divisor V).
void standardize_columns(MatrixXd& M);

/// Two vectorized 10 x 10 x 10 images (V = 1000): a radius-2 sphere at
/// (5,5,5) with decay 0.5 and a width-2 cube at (7,7,7) with decay 1, value 1
/// inside, exp(-rate d) at distance d outside, plus N(0, 1e-4) everywhere.
/// Coordinates run 1..10; the voxel (i,j,k) is at row (i-1) + 10(j-1) + 100(k-1).
MatrixXd sparse_image_sources(Rng& rng);

/// Gaussian kernel standard deviation for a full width at half maximum.
double fwhm_to_sigma(double fwhm);

/// White noise smoothed by a truncated (radius 3 sigma) Gaussian kernel on a
/// grid padded by that radius, cropped to width^ndim and standardized to
/// sample mean 0 and variance 1. ndim is 2 or 3; x varies fastest in the output.
VectorXd grf_noise(int width, int ndim, double fwhm, Rng& rng);

/// T x K matrix of independent stationary AR(1) paths with unit marginal variance.
MatrixXd ar1_loading_columns(int T, int K, double rho, Rng& rng);

/// Double-gamma impulse response: gamma(shape 7, scale 1) - gamma(shape 17, scale 1) / 6,
/// i.e. response peak 6, undershoot peak 16, unit dispersions, ratio 1/6.
double canonical_hrf(double t);
/// int_0^t canonical_hrf.
double canonical_hrf_integral(double t);

/// Column c is the boxcar with onsets onset_sets[c] and the given duration
/// convolved with canonical_hrf, sampled at t = 0, 1, ..., T-1.
MatrixXd hrf_block_loadings(const std::vector<std::vector<double>>& onset_sets,
                            double duration = 5.0, int T = 50);

/// Three 33 x 33 network images (V = 1089) showing "1", "2 2", "3 3 3";
/// active pixels uniform(0.5, 1), inactive N(0, 1e-4). Row-major pixels.
MatrixXd network_images(Rng& rng);

struct SceneDims {
    int V = 1000;
    int T = 5;
    int Q = 2;
};

/// iid factorial scene. LCA: [M_S, M_N] = random_mixing(T), N has T - Q
/// columns. Noisy ICA: M_S = first Q columns of random_mixing(T), N is V x T.
/// Noise is iid normal, or 3-D Gaussian random fields (FWHM 6) for sparse
/// images. N is rescaled by one scalar so the realized SNR equals snr_target.
SimScene assemble_scene(ModelKind model, SourceKind source, double snr_target,
                        const SceneDims& dims, Rng& rng);

/// Spatio-temporal network scene: V = 1089, T = 50, Q = 3, SNR 0.4 by default.
SimScene assemble_spatiotemporal_scene(ModelKind model, double snr_target, Rng& rng);

}  // namespace lca::sim
