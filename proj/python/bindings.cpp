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
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lca/baselines.hpp"
#include "lca/core_model.hpp"
#include "lca/error.hpp"
#include "lca/estimator.hpp"
#include "lca/metrics.hpp"
#include "lca/simgen.hpp"

namespace py = pybind11;
using namespace lca;

namespace {

RestartConfig make_config(int restarts, int principal, std::uint64_t seed, int max_iter, double tol, int threads) {
    RestartConfig cfg;
    cfg.n_restarts = restarts;
    cfg.n_principal_subspace = principal;
    cfg.seed = seed;
    cfg.max_iter = max_iter;
    cfg.tol = tol;
    cfg.threads = threads;
    return cfg;
}

py::dict fit_to_dict(const LcaFit& f) {
    py::dict d;
    d["W_S"] = f.W_S.rows();
    d["M_S"] = f.M_S.M_S;
    d["S"] = f.S;
    d["objective"] = f.objective;
    d["converged"] = f.converged;
    d["iterations"] = f.iterations;
    d["restart_id"] = f.restart_id;
    d["objective_trace"] = f.objective_trace;
    return d;
}

py::dict scene_to_dict(const sim::SimScene& sc) {
    py::dict d;
    d["X"] = sc.X;
    d["S"] = sc.S;
    d["N"] = sc.N;
    d["M_S"] = sc.M_S;
    d["M_N"] = sc.M_N;
    d["snr"] = sc.snr;
    d["realized_snr"] = sim::realized_snr(sc);
    return d;
}

}  // namespace

PYBIND11_MODULE(_lca, m) {
    m.doc() = "Likelihood component analysis";

    py::register_exception<Error>(m, "LcaError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

    m.def(
        "whiten",
        [](const MatrixXd& X) {
            const WhitenedData w = whiten(DataMatrix(X));
            py::dict d;
            d["z"] = w.z;
            d["L"] = w.transform.L;
            d["mean"] = w.transform.mean;
            d["eigvals"] = w.transform.eigvals;
            d["eigvecs"] = w.transform.eigvecs;
            return d;
        },
        py::arg("X"), "Centered, whitened data (sample covariance with divisor V is the identity).");

    m.def(
        "pmse",
        [](const MatrixXd& A, const MatrixXd& B) {
            const metrics::PmseResult r = metrics::pmse(A, B);
            py::dict d;
            d["value"] = r.value;
            d["mapping"] = r.perm.mapping;
            d["signs"] = r.perm.signs;
            d["per_component"] = r.per_component;
            return d;
        },
        py::arg("A"), py::arg("B"), "Sign- and permutation-invariant discrepancy between columns of A and B.");

    m.def("snr", &metrics::snr, py::arg("signal_eigvals"), py::arg("noise_eigvals"));

    m.def(
        "fit_logis_lca",
        [](const MatrixXd& X, int q, int restarts, int principal, std::uint64_t seed, int max_iter, double tol,
           int threads) {
            const RestartConfig cfg = make_config(restarts, principal, seed, max_iter, tol, threads);
            LcaFit f;
            {
                py::gil_scoped_release release;
                f = fit_logis_lca(DataMatrix(X), q, cfg);
            }
            return fit_to_dict(f);
        },
        py::arg("X"), py::arg("q"), py::arg("restarts") = 20, py::arg("principal_restarts") = 10,
        py::arg("seed") = 0, py::arg("max_iter") = 300, py::arg("tol") = 1e-6, py::arg("threads") = 1);

    m.def(
        "fit_spline_lca",
        [](const MatrixXd& X, int q, int restarts, int principal, std::uint64_t seed, int max_iter, double tol,
           int threads, int bins, double df) {
            const RestartConfig cfg = make_config(restarts, principal, seed, max_iter, tol, threads);
            SplineOptions opts;
            opts.bins = bins;
            opts.df = df;
            LcaFit f;
            {
                py::gil_scoped_release release;
                f = fit_spline_lca(DataMatrix(X), q, cfg, opts);
            }
            return fit_to_dict(f);
        },
        py::arg("X"), py::arg("q"), py::arg("restarts") = 20, py::arg("principal_restarts") = 10,
        py::arg("seed") = 0, py::arg("max_iter") = 300, py::arg("tol") = 1e-6, py::arg("threads") = 1,
        py::arg("bins") = 100, py::arg("df") = 8.0);

    m.def(
        "pca_infomax",
        [](const MatrixXd& X, int q, int restarts, std::uint64_t seed) {
            RestartConfig cfg = make_config(restarts, restarts / 2, seed, 300, 1e-6, 1);
            return fit_to_dict(baselines::pca_infomax(DataMatrix(X), q, cfg));
        },
        py::arg("X"), py::arg("q"), py::arg("restarts") = 20, py::arg("seed") = 0);

    m.def(
        "dfastica",
        [](const MatrixXd& X, int q, int restarts, std::uint64_t seed) {
            baselines::DFastIcaOptions opts;
            opts.n_restarts = restarts;
            opts.seed = seed;
            const auto r = baselines::dfastica_deflation(DataMatrix(X), q, opts);
            py::dict d;
            d["W"] = r.W;
            d["S"] = r.S;
            d["M_S"] = r.M_S;
            d["objective"] = r.objective;
            return d;
        },
        py::arg("X"), py::arg("q"), py::arg("restarts") = 20, py::arg("seed") = 0);

    m.def(
        "simulate",
        [](const std::string& model, const std::string& dist, double snr, int V, int T, int Q, std::uint64_t seed) {
            sim::Rng rng(seed);
            return scene_to_dict(sim::assemble_scene(sim::parse_model_kind(model), sim::parse_source_kind(dist), snr,
                                                     {V, T, Q}, rng));
        },
        py::arg("model") = "lca", py::arg("dist") = "logistic", py::arg("snr") = 5.0, py::arg("V") = 1000,
        py::arg("T") = 5, py::arg("Q") = 2, py::arg("seed") = 0);

    m.def(
        "simulate_spatiotemporal",
        [](const std::string& model, double snr, std::uint64_t seed) {
            sim::Rng rng(seed);
            return scene_to_dict(sim::assemble_spatiotemporal_scene(sim::parse_model_kind(model), snr, rng));
        },
        py::arg("model") = "lca", py::arg("snr") = 0.4, py::arg("seed") = 0);
}
