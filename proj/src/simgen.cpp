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
#include "lca/simgen.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lca/error.hpp"
#include "lca/metrics.hpp"

namespace lca::sim {

std::string to_string(SourceKind kind) {
    switch (kind) {
        case SourceKind::logistic: return "logistic";
        case SourceKind::student_t: return "student_t";
        case SourceKind::gumbel: return "gumbel";
        case SourceKind::sub_gaussian_mix: return "sub_gaussian_mix";
        case SourceKind::super_gaussian_mix: return "super_gaussian_mix";
        case SourceKind::sparse_image: return "sparse_image";
    }
    return "unknown";
}

std::string to_string(ModelKind kind) { return kind == ModelKind::lca ? "lca" : "noisy-ica"; }

SourceKind parse_source_kind(const std::string& name) {
    if (name == "logistic") return SourceKind::logistic;
    if (name == "student_t" || name == "t" || name == "t5") return SourceKind::student_t;
    if (name == "gumbel") return SourceKind::gumbel;
    if (name == "sub_gaussian_mix" || name == "sub-gaussian" || name == "sub") {
        return SourceKind::sub_gaussian_mix;
    }
    if (name == "super_gaussian_mix" || name == "super-gaussian" || name == "super") {
        return SourceKind::super_gaussian_mix;
    }
    if (name == "sparse_image" || name == "sparse-image" || name == "sparse") {
        return SourceKind::sparse_image;
    }
    throw ConfigError("unknown source distribution '" + name + "'");
}

ModelKind parse_model_kind(const std::string& name) {
    if (name == "lca") return ModelKind::lca;
    if (name == "noisy-ica" || name == "noisy_ica") return ModelKind::noisy_ica;
    throw ConfigError("unknown model '" + name + "'");
}

MatrixXd reconstruct(const SimScene& scene) {
    if (scene.M_N.size() == 0) return scene.S * scene.M_S.transpose() + scene.N;
    return scene.S * scene.M_S.transpose() + scene.N * scene.M_N.transpose();
}

namespace {

MatrixXd centered(const MatrixXd& M) { return M.rowwise() - M.colwise().mean(); }

double total_variance(const MatrixXd& M) {
    return centered(M).squaredNorm() / static_cast<double>(M.rows());
}

VectorXd cov_eigenvalues(const MatrixXd& M) {
    const MatrixXd C = centered(M);
    const MatrixXd cov = C.transpose() * C / static_cast<double>(M.rows());
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseMax(0.0);
}

MatrixXd gaussian_matrix(int r, int c, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd G(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) G(i, j) = normal(rng);
    return G;
}

}  // namespace

double realized_snr(const SimScene& scene) {
    const MatrixXd signal = scene.S * scene.M_S.transpose();
    const MatrixXd noise = scene.M_N.size() == 0 ? scene.N : MatrixXd(scene.N * scene.M_N.transpose());
    return metrics::snr(cov_eigenvalues(signal), cov_eigenvalues(noise));
}

MatrixXd random_mixing(int T, Rng& rng, double lo, double hi) {
    if (T < 2) throw ConfigError("random_mixing needs T >= 2");
    const MatrixXd G = gaussian_matrix(T, T, rng);
    Eigen::JacobiSVD<MatrixXd> svd(G, Eigen::ComputeFullU | Eigen::ComputeFullV);
    std::uniform_real_distribution<double> unif(lo, hi);
    VectorXd d(T);
    for (int i = 0; i < T; ++i) d(i) = unif(rng);
    return svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
}

double draw_source(SourceKind kind, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto open_unit = [&] {
        double u = unif(rng);
        while (u <= 0.0 || u >= 1.0) u = unif(rng);
        return u;
    };
    switch (kind) {
        case SourceKind::logistic: {
            const double u = open_unit();
            return std::numbers::sqrt3 / std::numbers::pi * std::log(u / (1.0 - u));
        }
        case SourceKind::student_t: {
            std::student_t_distribution<double> t5(5.0);
            return t5(rng);
        }
        case SourceKind::gumbel: {
            const double beta = std::sqrt(6.0) / std::numbers::pi;
            return -beta * std::log(-std::log(open_unit()));
        }
        case SourceKind::super_gaussian_mix: {
            // 0.95 N(0, sd 2/3) + 0.05 N(5, 1): excess kurtosis 9.01.
            if (unif(rng) < 0.95) return (2.0 / 3.0) * normal(rng);
            return 5.0 + normal(rng);
        }
        case SourceKind::sub_gaussian_mix: {
            // 0.75 N(-1.7, 1) + 0.25 N(1.7, 1): excess kurtosis -0.31.
            if (unif(rng) < 0.75) return -1.7 + normal(rng);
            return 1.7 + normal(rng);
        }
        case SourceKind::sparse_image:
            break;
    }
    throw ConfigError("draw_source: sparse images are generated as whole images");
}

void standardize_columns(MatrixXd& M) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        const double mean = M.col(j).mean();
        M.col(j).array() -= mean;
        const double sd = std::sqrt(M.col(j).squaredNorm() / static_cast<double>(M.rows()));
        if (sd > 0.0) M.col(j) /= sd;
    }
}

MatrixXd sample_sources(SourceKind kind, int V, int Q, Rng& rng) {
    if (V < 1 || Q < 1) throw ConfigError("sample_sources needs V >= 1 and Q >= 1");
    MatrixXd S;
    if (kind == SourceKind::sparse_image) {
        if (V != 1000 || Q != 2) throw ConfigError("sparse images need V = 1000 and Q = 2");
        S = sparse_image_sources(rng);
    } else {
        S.resize(V, Q);
        for (int q = 0; q < Q; ++q)
            for (int v = 0; v < V; ++v) S(v, q) = draw_source(kind, rng);
    }
    standardize_columns(S);
    return S;
}

MatrixXd sparse_image_sources(Rng& rng) {
    constexpr int kW = 10;
    std::normal_distribution<double> background(0.0, 0.01);
    MatrixXd S(kW * kW * kW, 2);
    for (int k = 1; k <= kW; ++k) {
        for (int j = 1; j <= kW; ++j) {
            for (int i = 1; i <= kW; ++i) {
                const int row = (i - 1) + kW * (j - 1) + kW * kW * (k - 1);
                const double ds = std::sqrt(double((i - 5) * (i - 5) + (j - 5) * (j - 5) +
                                                   (k - 5) * (k - 5)));
                const double sphere_gap = std::max(0.0, ds - 2.0);
                auto axis_gap = [](int p) { return std::max(0.0, std::abs(p - 7.0) - 1.0); };
                const double gx = axis_gap(i), gy = axis_gap(j), gz = axis_gap(k);
                const double cube_gap = std::sqrt(gx * gx + gy * gy + gz * gz);
                S(row, 0) = std::exp(-0.5 * sphere_gap) + background(rng);
                S(row, 1) = std::exp(-1.0 * cube_gap) + background(rng);
            }
        }
    }
    return S;
}

double fwhm_to_sigma(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2)); }

VectorXd grf_noise(int width, int ndim, double fwhm, Rng& rng) {
    if (width < 3) throw ConfigError("grf_noise needs width >= 3");
    if (ndim != 2 && ndim != 3) throw ConfigError("grf_noise supports 2 or 3 dimensions");
    if (fwhm < 0.0) throw ConfigError("fwhm must be nonnegative");
    const double sigma = fwhm_to_sigma(fwhm);
    const int radius = sigma > 0.0 ? static_cast<int>(std::ceil(3.0 * sigma)) : 0;
    // White noise on a grid padded by the kernel radius, smoothed, then cropped.
    const int padded = width + 2 * radius;
    const int n_pad = ndim == 2 ? padded * padded : padded * padded * padded;
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorXd field(n_pad);
    for (int i = 0; i < n_pad; ++i) field(i) = normal(rng);

    if (radius >= 1) {
        std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
        for (int o = -radius; o <= radius; ++o) {
            kernel[static_cast<size_t>(o + radius)] = std::exp(-0.5 * o * o / (sigma * sigma));
        }
        const int strides[3] = {1, padded, padded * padded};
        VectorXd tmp(n_pad);
        for (int axis = 0; axis < ndim; ++axis) {
            const int stride = strides[axis];
            for (int idx = 0; idx < n_pad; ++idx) {
                const int pos = (idx / stride) % padded;
                double acc = 0.0;
                for (int o = -radius; o <= radius; ++o) {
                    const int p = pos + o;
                    if (p < 0 || p >= padded) continue;
                    acc += kernel[static_cast<size_t>(o + radius)] * field(idx + o * stride);
                }
                tmp(idx) = acc;
            }
            field.swap(tmp);
        }
    }

    const int n = ndim == 2 ? width * width : width * width * width;
    VectorXd out(n);
    const int depth = ndim == 2 ? 1 : width;
    int k = 0;
    for (int z = 0; z < depth; ++z) {
        for (int y = 0; y < width; ++y) {
            for (int x = 0; x < width; ++x) {
                const int pz = ndim == 2 ? 0 : z + radius;
                out(k++) = field((pz * padded + y + radius) * padded + x + radius);
            }
        }
    }
    out.array() -= out.mean();
    const double sd = std::sqrt(out.squaredNorm() / n);
    if (sd > 0.0) out /= sd;
    return out;
}

MatrixXd ar1_loading_columns(int T, int K, double rho, Rng& rng) {
    if (!(std::abs(rho) < 1.0)) throw ConfigError("AR(1) coefficient must satisfy |rho| < 1");
    if (T < 1 || K < 0) throw ConfigError("ar1_loading_columns needs T >= 1 and K >= 0");
    std::normal_distribution<double> normal(0.0, 1.0);
    const double innov = std::sqrt(1.0 - rho * rho);
    MatrixXd M(T, K);
    for (int k = 0; k < K; ++k) {
        M(0, k) = normal(rng);
        for (int t = 1; t < T; ++t) M(t, k) = rho * M(t - 1, k) + innov * normal(rng);
    }
    return M;
}

namespace {

double gamma_pdf_int_shape(int shape, double t) {
    if (t <= 0.0) return 0.0;
    return std::exp((shape - 1) * std::log(t) - t - std::lgamma(static_cast<double>(shape)));
}

// Regularized lower incomplete gamma for an integer shape, unit scale.
double gamma_cdf_int_shape(int shape, double t) {
    if (t <= 0.0) return 0.0;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < shape; ++k) {
        term *= t / k;
        sum += term;
    }
    return 1.0 - std::exp(-t) * sum;
}

constexpr int kResponseShape = 7;
constexpr int kUndershootShape = 17;
constexpr double kUndershootRatio = 1.0 / 6.0;

}  // namespace

double canonical_hrf(double t) {
    return gamma_pdf_int_shape(kResponseShape, t) -
           kUndershootRatio * gamma_pdf_int_shape(kUndershootShape, t);
}

double canonical_hrf_integral(double t) {
    return gamma_cdf_int_shape(kResponseShape, t) -
           kUndershootRatio * gamma_cdf_int_shape(kUndershootShape, t);
}

MatrixXd hrf_block_loadings(const std::vector<std::vector<double>>& onset_sets, double duration,
                            int T) {
    if (T < 1) throw ConfigError("hrf_block_loadings needs T >= 1");
    if (duration < 0.0) throw ConfigError("block duration must be nonnegative");
    MatrixXd M = MatrixXd::Zero(T, static_cast<Eigen::Index>(onset_sets.size()));
    for (size_t c = 0; c < onset_sets.size(); ++c) {
        for (double onset : onset_sets[c]) {
            if (onset < 0.0 || onset >= T) throw ConfigError("onset outside [0, T)");
            for (int t = 0; t < T; ++t) {
                M(t, static_cast<Eigen::Index>(c)) +=
                    canonical_hrf_integral(t - onset) - canonical_hrf_integral(t - onset - duration);
            }
        }
    }
    return M;
}

namespace {

// 5 x 7 bitmap glyphs, top row first.
constexpr std::array<const char*, 7> kGlyph1 = {"..#..", ".##..", "..#..", "..#..",
                                                "..#..", "..#..", ".###."};
constexpr std::array<const char*, 7> kGlyph2 = {".###.", "#...#", "....#", "...#.",
                                                "..#..", ".#...", "#####"};
constexpr std::array<const char*, 7> kGlyph3 = {".###.", "#...#", "....#", "..##.",
                                                "....#", "#...#", ".###."};

}  // namespace

MatrixXd network_images(Rng& rng) {
    constexpr int kW = 33;
    constexpr int kScale = 2;
    constexpr int kGlyphW = 5 * kScale;
    constexpr int kGlyphH = 7 * kScale;
    std::normal_distribution<double> background(0.0, 0.01);
    std::uniform_real_distribution<double> active(0.5, 1.0);
    const std::array<const std::array<const char*, 7>*, 3> glyphs = {&kGlyph1, &kGlyph2, &kGlyph3};

    MatrixXd S(kW * kW, 3);
    for (int c = 0; c < 3; ++c) {
        const int copies = c + 1;
        const int gap = copies == 3 ? 1 : 3;
        const int total = copies * kGlyphW + (copies - 1) * gap;
        const int col0 = (kW - total) / 2;
        const int row0 = (kW - kGlyphH) / 2;
        std::vector<char> mask(kW * kW, 0);
        for (int g = 0; g < copies; ++g) {
            const int gc = col0 + g * (kGlyphW + gap);
            for (int r = 0; r < kGlyphH; ++r) {
                for (int x = 0; x < kGlyphW; ++x) {
                    if ((*glyphs[static_cast<size_t>(c)])[static_cast<size_t>(r / kScale)][x / kScale] == '#') {
                        mask[static_cast<size_t>((row0 + r) * kW + gc + x)] = 1;
                    }
                }
            }
        }
        for (int p = 0; p < kW * kW; ++p) {
            S(p, c) = mask[static_cast<size_t>(p)] ? active(rng) : background(rng);
        }
    }
    return S;
}

namespace {

SimScene finish_scene(MatrixXd S, MatrixXd M_S, MatrixXd noise_raw, MatrixXd M_N, double snr_target) {
    SimScene scene;
    const MatrixXd signal = S * M_S.transpose();
    const MatrixXd noise = M_N.size() == 0 ? noise_raw : MatrixXd(noise_raw * M_N.transpose());
    const double tr_s = total_variance(signal);
    const double tr_n = total_variance(noise);
    if (!(tr_n > 0.0)) throw ConfigError("noise term has zero variance");
    const double c = std::sqrt(tr_s / (snr_target * tr_n));
    scene.S = std::move(S);
    scene.M_S = std::move(M_S);
    scene.N = c * noise_raw;
    scene.M_N = std::move(M_N);
    scene.snr = snr_target;
    scene.X = reconstruct(scene);
    return scene;
}

}  // namespace

SimScene assemble_scene(ModelKind model, SourceKind source, double snr_target,
                        const SceneDims& dims, Rng& rng) {
    if (!(snr_target > 0.0)) throw ConfigError("target SNR must be positive");
    const int V = dims.V, T = dims.T, Q = dims.Q;
    if (Q < 1 || Q >= T || V < T) throw ConfigError("scene dims need 1 <= Q < T <= V");
    MatrixXd S = sample_sources(source, V, Q, rng);
    const MatrixXd M = random_mixing(T, rng);
    MatrixXd M_S = M.leftCols(Q);
    MatrixXd M_N;
    const int n_noise = model == ModelKind::lca ? T - Q : T;
    if (model == ModelKind::lca) M_N = M.rightCols(T - Q);
    MatrixXd noise(V, n_noise);
    if (source == SourceKind::sparse_image) {
        for (int k = 0; k < n_noise; ++k) noise.col(k) = grf_noise(10, 3, 6.0, rng);
    } else {
        noise = gaussian_matrix(V, n_noise, rng);
    }
    SimScene scene = finish_scene(std::move(S), std::move(M_S), std::move(noise), std::move(M_N), snr_target);
    scene.model = model;
    scene.design = "iid-factorial";
    scene.dist = to_string(source);
    return scene;
}

SimScene assemble_spatiotemporal_scene(ModelKind model, double snr_target, Rng& rng) {
    if (!(snr_target > 0.0)) throw ConfigError("target SNR must be positive");
    constexpr int kWidth = 33;
    constexpr int kT = 50;
    constexpr int kQ = 3;
    constexpr double kRho = 0.47;
    constexpr double kFwhm = 6.0;
    MatrixXd S = network_images(rng);
    standardize_columns(S);
    MatrixXd M_S = hrf_block_loadings({{1.0, 20.6}, {10.8, 40.2}, {10.8, 30.4}}, 5.0, kT);
    const int V = kWidth * kWidth;
    MatrixXd noise;
    MatrixXd M_N;
    if (model == ModelKind::lca) {
        noise.resize(V, kT - kQ);
        for (int k = 0; k < kT - kQ; ++k) noise.col(k) = grf_noise(kWidth, 2, kFwhm, rng);
        M_N = ar1_loading_columns(kT, kT - kQ, kRho, rng);
    } else {
        noise.resize(V, kT);
        noise.col(0) = grf_noise(kWidth, 2, kFwhm, rng);
        for (int t = 1; t < kT; ++t) {
            noise.col(t) = kRho * noise.col(t - 1) + grf_noise(kWidth, 2, kFwhm, rng);
        }
    }
    SimScene scene = finish_scene(std::move(S), std::move(M_S), std::move(noise), std::move(M_N), snr_target);
    scene.model = model;
    scene.design = "spatiotemporal";
    scene.dist = "networks";
    return scene;
}

}  // namespace lca::sim
