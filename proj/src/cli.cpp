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
#include "lca/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "lca/baselines.hpp"
#include "lca/error.hpp"
#include "lca/io.hpp"
#include "lca/metrics.hpp"
#include "lca/parallel.hpp"
#include "lca/simgen.hpp"

namespace lca::cli {

namespace fs = std::filesystem;

const std::vector<std::string>& method_names() {
    static const std::vector<std::string> names = {"logis-lca",   "spline-lca",    "dfastica",
                                                   "pca-infomax", "pca-prodenica", "ifa"};
    return names;
}

namespace {

json restart_log(const std::vector<RestartRecord>& records) {
    json log = json::array();
    for (const auto& r : records) {
        log.push_back({{"restart_id", r.restart_id},
                       {"ok", r.ok},
                       {"converged", r.converged},
                       {"iterations", r.iterations},
                       {"objective", r.ok ? json(r.objective) : json(nullptr)},
                       {"message", r.message}});
    }
    return log;
}

MethodResult from_lca(const std::string& method, const LcaFit& fit) {
    MethodResult r;
    r.method = method;
    r.q_star = static_cast<int>(fit.S.cols());
    r.W_S = fit.W_S.rows();
    r.M_S = fit.M_S.M_S;
    r.S = fit.S;
    for (const auto& d : fit.densities) r.densities.push_back(io::density_to_json(d));
    r.objective = fit.objective;
    r.converged = fit.converged;
    r.iterations = fit.iterations;
    r.restart_id = fit.restart_id;
    r.runs = restart_log(fit.restarts);
    r.extra["max_orthogonality_error"] = fit.max_orthogonality_error;
    return r;
}

RestartConfig restart_config(const MethodOptions& o) {
    RestartConfig cfg;
    cfg.n_restarts = o.restarts;
    cfg.n_principal_subspace = std::min(o.principal_restarts, o.restarts);
    cfg.max_iter = o.max_iter;
    cfg.tol = o.tol;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    return cfg;
}

SplineOptions spline_options(const MethodOptions& o) {
    SplineOptions s;
    s.bins = o.bins;
    s.df = o.df;
    return s;
}

}  // namespace

MethodResult run_method(const std::string& method, const DataMatrix& data, int q,
                        const MethodOptions& opts) {
    const int T = static_cast<int>(data.cols());
    if (q < 1 || q > T) {
        throw ConfigError("--q must lie in [1, " + std::to_string(T) + "], got " + std::to_string(q));
    }
    if (opts.restarts < 1) throw ConfigError("--restarts must be at least 1");
    if (opts.principal_restarts < 0) throw ConfigError("--principal-restarts must be nonnegative");
    if (method == "logis-lca") return from_lca(method, fit_logis_lca(data, q, restart_config(opts)));
    if (method == "spline-lca") {
        return from_lca(method, fit_spline_lca(data, q, restart_config(opts), spline_options(opts)));
    }
    if (method == "pca-infomax") return from_lca(method, baselines::pca_infomax(data, q, restart_config(opts)));
    if (method == "pca-prodenica") {
        return from_lca(method,
                        baselines::pca_prodenica(data, q, restart_config(opts), spline_options(opts)));
    }
    if (method == "dfastica") {
        baselines::DFastIcaOptions o;
        o.n_restarts = opts.restarts;
        o.max_iter = opts.max_iter;
        o.tol = opts.tol;
        o.seed = opts.seed;
        o.threads = opts.threads;
        const auto full = baselines::dfastica_deflation(data, T, o);
        const auto kept = baselines::retain_components(full, q, data);
        MethodResult r;
        r.method = method;
        r.q_star = q;
        r.W_S = kept.W;
        r.M_S = kept.M_S;
        r.S = kept.S;
        r.objective = kept.objective;
        r.converged = std::all_of(kept.directions.begin(), kept.directions.end(),
                                  [](const auto& d) { return d.converged; });
        for (const auto& d : kept.directions) r.iterations = std::max(r.iterations, d.iterations);
        r.restart_id = kept.restart_id;
        for (size_t p = 0; p < full.directions.size(); ++p) {
            const auto& d = full.directions[p];
            r.runs.push_back({{"direction", p},
                              {"converged", d.converged},
                              {"iterations", d.iterations},
                              {"objective", d.objective}});
        }
        for (int k = 0; k < q; ++k) r.densities.push_back({{"family", "log-cosh-contrast"}});
        return r;
    }
    if (method == "ifa") {
        if (q > 4) throw ConfigError("ifa supports --q <= 4");
        baselines::IfaOptions o;
        o.n_random = std::max(1, (opts.restarts + 1) / 3);
        o.max_iter = std::max(opts.max_iter, 1);
        o.seed = opts.seed;
        o.threads = opts.threads;
        const auto fit = baselines::fit_ifa(data, q, o);
        MethodResult r;
        r.method = method;
        r.q_star = q;
        r.M_S = fit.params.M_S;
        r.S = fit.S;
        r.objective = fit.loglik;
        r.converged = true;
        r.iterations = fit.iterations;
        for (int k = 0; k < q; ++k) r.densities.push_back(io::ifa_density_to_json(fit.params, k));
        for (const auto& run : fit.runs) {
            r.runs.push_back({{"init", run.label},
                              {"ok", run.ok},
                              {"loglik", run.ok ? json(run.loglik) : json(nullptr)},
                              {"iterations", run.iterations},
                              {"message", run.message}});
        }
        r.extra["sigma2"] = fit.params.sigma2;
        r.extra["init"] = fit.init_label;
        return r;
    }
    throw ConfigError("unknown method '" + method + "'");
}

double oriented_pmse(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.cols() <= B.cols()) return metrics::pmse(A, B).value;
    return metrics::pmse(B, A).value;
}

Eigen::MatrixXd standardize(const Eigen::MatrixXd& X) {
    Eigen::MatrixXd Y = X.rowwise() - X.colwise().mean();
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
        const double sd = std::sqrt(Y.col(j).squaredNorm() / static_cast<double>(Y.rows()));
        if (!(sd > 0.0)) throw InputError("cannot standardize a constant column", 0, j + 1);
        Y.col(j) /= sd;
    }
    return Y;
}

Summary summarize(std::vector<double> v) {
    if (v.empty()) throw ConfigError("summary of an empty sample");
    std::sort(v.begin(), v.end());
    auto quantile = [&](double p) {
        const double h = p * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<size_t>(std::floor(h));
        const size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    return {quantile(0.25), quantile(0.5), quantile(0.75)};
}

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << text;
    if (!out) throw InputError("failed writing '" + path + "'");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> items;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

std::vector<std::string> column_names(const std::string& prefix, Eigen::Index n) {
    std::vector<std::string> h;
    for (Eigen::Index j = 0; j < n; ++j) h.push_back(prefix + std::to_string(j + 1));
    return h;
}

void add_method_flags(CLI::App* cmd, MethodOptions& o) {
    cmd->add_option("--restarts", o.restarts, "Random restarts")->capture_default_str();
    cmd->add_option("--principal-restarts", o.principal_restarts,
                    "Restarts constrained to the principal subspace")
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    cmd->add_option("--max-iter", o.max_iter, "Maximum iterations per restart")->capture_default_str();
    cmd->add_option("--tol", o.tol, "Convergence tolerance")->capture_default_str();
    cmd->add_option("--bins", o.bins, "Histogram bins for spline densities")->capture_default_str();
    cmd->add_option("--df", o.df, "Effective degrees of freedom for spline densities")
        ->capture_default_str();
}

// ---------------------------------------------------------------------------

struct FitArgs {
    std::string input;
    std::string method;
    int q = 0;
    std::string output;
    std::string truth;
    bool standardize = false;
    MethodOptions opts;
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
    (void)out;
    const io::CsvTable table = io::read_csv(a.input);
    const Eigen::MatrixXd X = a.standardize ? standardize(table.values) : table.values;
    const DataMatrix data(X);
    if (a.q < 1 || a.q > data.cols()) {
        throw ConfigError("--q must lie in [1, " + std::to_string(data.cols()) + "], got " +
                          std::to_string(a.q));
    }
    std::optional<Eigen::MatrixXd> truth;
    if (!a.truth.empty()) {
        truth = io::read_csv(a.truth).values;
        if (truth->rows() != data.rows()) throw InputError("--truth must have one row per observation");
    }
    MethodOptions opts = a.opts;
    opts.threads = default_thread_count();

    const auto t0 = std::chrono::steady_clock::now();
    MethodResult r;
    try {
        r = run_method(a.method, data, a.q, opts);
    } catch (const AggregateFitError& e) {
        err << "fit failed: " << e.what() << '\n';
        for (const auto& d : e.diagnostics()) err << "  " << d << '\n';
        return kExitNumerical;
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0).count();

    json doc;
    doc["meta"] = {{"method", a.method},
                   {"q_star", a.q},
                   {"V", data.rows()},
                   {"T", data.cols()},
                   {"columns", table.header},
                   {"input", a.input},
                   {"standardize", a.standardize},
                   {"seed", a.opts.seed},
                   {"restarts", a.opts.restarts},
                   {"principal_restarts", a.opts.principal_restarts},
                   {"max_iter", a.opts.max_iter},
                   {"tol", a.opts.tol},
                   {"bins", a.opts.bins},
                   {"df", a.opts.df}};
    doc["W_S"] = r.W_S ? io::matrix_to_json(*r.W_S) : json(nullptr);
    doc["M_S"] = io::matrix_to_json(r.M_S);
    doc["S"] = io::matrix_to_json(r.S);
    doc["densities"] = r.densities;
    json report = {{"method", a.method},
                   {"q_star", a.q},
                   {"seed", a.opts.seed},
                   {"objective", r.objective},
                   {"converged", r.converged},
                   {"iterations", r.iterations},
                   {"pmse_vs_truth", truth ? json(oriented_pmse(r.S, *truth)) : json(nullptr)},
                   {"wall_time_ms", ms},
                   {"restart_id", r.restart_id},
                   {"runs", r.runs}};
    for (auto it = r.extra.begin(); it != r.extra.end(); ++it) report[it.key()] = it.value();
    doc["report"] = std::move(report);
    write_text(a.output, doc.dump() + "\n");
    if (!r.converged) err << "warning: best restart did not converge\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string design;
    std::string model = "lca";
    std::string dist = "logistic";
    std::optional<double> snr;
    int n_sims = 1;
    int V = 1000;
    int T = 5;
    int Q = 2;
    std::uint64_t seed = 0;
    std::string output;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    if (a.design != "iid-factorial" && a.design != "spatiotemporal") {
        throw ConfigError("unknown design '" + a.design + "'");
    }
    if (a.n_sims < 0) throw ConfigError("--n-sims must be nonnegative");
    const sim::ModelKind model = sim::parse_model_kind(a.model);
    const bool spatial = a.design == "spatiotemporal";
    const sim::SourceKind source = spatial ? sim::SourceKind::logistic : sim::parse_source_kind(a.dist);
    const double snr = a.snr.value_or(spatial ? 0.4 : 5.0);
    if (!(snr > 0.0)) throw ConfigError("--snr must be positive");
    if (!spatial && (a.Q < 1 || a.Q >= a.T || a.V < a.T)) throw ConfigError("need 1 <= Q < T <= V");
    if (a.n_sims == 0) return kExitOk;
    fs::create_directories(a.output);
    for (int i = 0; i < a.n_sims; ++i) {
        const std::uint64_t seed = restart_seed(a.seed, i);
        sim::Rng rng(seed);
        sim::SimScene scene = spatial ? sim::assemble_spatiotemporal_scene(model, snr, rng)
                                      : sim::assemble_scene(model, source, snr, {a.V, a.T, a.Q}, rng);
        scene.seed = seed;
        std::ostringstream name;
        name << "scene_" << std::setw(4) << std::setfill('0') << i;
        const fs::path dir = fs::path(a.output) / name.str();
        fs::create_directories(dir);
        io::write_csv((dir / "X.csv").string(), scene.X);
        io::write_csv((dir / "S.csv").string(), scene.S, column_names("s", scene.S.cols()));
        io::write_csv((dir / "M_S.csv").string(), scene.M_S, column_names("s", scene.M_S.cols()));
        const json meta = {{"design", scene.design},
                           {"model", sim::to_string(scene.model)},
                           {"dist", scene.dist},
                           {"snr", scene.snr},
                           {"realized_snr", sim::realized_snr(scene)},
                           {"seed", scene.seed},
                           {"V", scene.X.rows()},
                           {"T", scene.X.cols()},
                           {"Q", scene.S.cols()}};
        write_text((dir / "scene.json").string(), meta.dump(2) + "\n");
    }
    out << "wrote " << a.n_sims << " scene(s) to " << a.output << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    std::string scenes;
    std::string methods = "logis-lca,spline-lca,pca-infomax,pca-prodenica";
    std::string q_star;
    std::string report;
    std::string runs;
    MethodOptions opts;
};

struct Scene {
    std::string name;
    Eigen::MatrixXd X, S, M_S;
    json meta;
};

struct CellResult {
    bool ok = false;
    double pmse_S = 0.0;
    double pmse_M = 0.0;
    double objective = 0.0;
    bool converged = false;
    int iterations = 0;
    std::string message;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
    if (!fs::is_directory(a.scenes)) throw InputError("--scenes is not a directory: " + a.scenes);
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(a.scenes)) {
        if (e.is_directory() && e.path().filename().string().rfind("scene_", 0) == 0) dirs.push_back(e.path());
    }
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) throw InputError("no scene_* directories under " + a.scenes);

    std::vector<Scene> scenes;
    for (const auto& d : dirs) {
        for (const char* f : {"X.csv", "S.csv", "M_S.csv", "scene.json"}) {
            if (!fs::exists(d / f)) throw InputError("missing ground truth: " + (d / f).string());
        }
        Scene s;
        s.name = d.filename().string();
        s.X = io::read_csv((d / "X.csv").string()).values;
        s.S = io::read_csv((d / "S.csv").string()).values;
        s.M_S = io::read_csv((d / "M_S.csv").string()).values;
        std::ifstream in(d / "scene.json");
        s.meta = json::parse(in);
        scenes.push_back(std::move(s));
    }

    const auto methods = split_list(a.methods);
    if (methods.empty()) throw ConfigError("--methods is empty");
    for (const auto& m : methods) {
        if (std::find(method_names().begin(), method_names().end(), m) == method_names().end()) {
            throw ConfigError("unknown method '" + m + "'");
        }
    }
    std::vector<int> q_list;
    for (const auto& s : split_list(a.q_star)) {
        try {
            q_list.push_back(std::stoi(s));
        } catch (const std::exception&) {
            throw ConfigError("--q-star entries must be integers");
        }
    }

    struct Cell {
        size_t scene;
        size_t method;
        int q;
    };
    std::vector<Cell> cells;
    for (size_t i = 0; i < scenes.size(); ++i) {
        const std::vector<int> qs =
            q_list.empty() ? std::vector<int>{static_cast<int>(scenes[i].S.cols())} : q_list;
        for (size_t m = 0; m < methods.size(); ++m)
            for (int q : qs) cells.push_back({i, m, q});
    }
    std::vector<CellResult> results(cells.size());
    parallel_for(static_cast<int>(cells.size()), default_thread_count(), [&](int c) {
        const Cell& cell = cells[static_cast<size_t>(c)];
        const Scene& sc = scenes[cell.scene];
        MethodOptions o = a.opts;
        o.seed = restart_seed(a.opts.seed, static_cast<int>(cell.scene));
        o.threads = 1;
        CellResult& r = results[static_cast<size_t>(c)];
        try {
            const MethodResult fit = run_method(methods[cell.method], DataMatrix(sc.X), cell.q, o);
            r.pmse_S = oriented_pmse(fit.S, sc.S);
            r.pmse_M = oriented_pmse(fit.M_S, sc.M_S);
            r.objective = fit.objective;
            r.converged = fit.converged;
            r.iterations = fit.iterations;
            r.ok = true;
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            r.message = e.what();
        }
    });

    using Key = std::tuple<std::string, std::string, std::string, double, size_t, int>;
    std::vector<Key> order;
    std::map<Key, std::vector<size_t>> groups;
    for (size_t c = 0; c < cells.size(); ++c) {
        const json& m = scenes[cells[c].scene].meta;
        Key k{m.value("design", ""), m.value("model", ""), m.value("dist", ""), m.value("snr", 0.0),
              cells[c].method, cells[c].q};
        if (!groups.count(k)) order.push_back(k);
        groups[k].push_back(c);
    }
    std::sort(order.begin(), order.end());

    std::ostringstream rep;
    rep << "design,model,dist,snr,method,q_star,n,n_failed,pmse_S_median,pmse_S_q1,pmse_S_q3,"
           "pmse_M_median,pmse_M_q1,pmse_M_q3\n";
    for (const Key& k : order) {
        std::vector<double> ps, pm;
        int failed = 0;
        for (size_t c : groups[k]) {
            if (!results[c].ok) {
                ++failed;
                continue;
            }
            ps.push_back(results[c].pmse_S);
            pm.push_back(results[c].pmse_M);
        }
        rep << std::get<0>(k) << ',' << std::get<1>(k) << ',' << std::get<2>(k) << ','
            << io::format_double(std::get<3>(k)) << ',' << methods[std::get<4>(k)] << ','
            << std::get<5>(k) << ',' << groups[k].size() << ',' << failed;
        if (ps.empty()) {
            rep << ",NA,NA,NA,NA,NA,NA\n";
            continue;
        }
        const Summary s = summarize(ps), m = summarize(pm);
        rep << ',' << io::format_double(s.median) << ',' << io::format_double(s.q1) << ','
            << io::format_double(s.q3) << ',' << io::format_double(m.median) << ','
            << io::format_double(m.q1) << ',' << io::format_double(m.q3) << '\n';
    }
    write_text(a.report, rep.str());

    if (!a.runs.empty()) {
        std::ostringstream runs;
        runs << "scene,method,q_star,ok,pmse_S,pmse_M,objective,converged,iterations,message\n";
        for (size_t c = 0; c < cells.size(); ++c) {
            const CellResult& r = results[c];
            runs << scenes[cells[c].scene].name << ',' << methods[cells[c].method] << ',' << cells[c].q
                 << ',' << (r.ok ? 1 : 0) << ',';
            if (r.ok) {
                runs << io::format_double(r.pmse_S) << ',' << io::format_double(r.pmse_M) << ','
                     << io::format_double(r.objective) << ',' << (r.converged ? 1 : 0) << ','
                     << r.iterations << ",\n";
            } else {
                std::string msg = r.message;
                std::replace(msg.begin(), msg.end(), '"', '\'');
                runs << "NA,NA,NA,0,0,\"" << msg << "\"\n";
            }
        }
        write_text(a.runs, runs.str());
    }
    size_t failed = 0;
    for (const auto& r : results) failed += r.ok ? 0 : 1;
    if (failed) err << failed << " of " << results.size() << " fits failed\n";
    out << "wrote " << order.size() << " report row(s) to " << a.report << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_pmse(const std::string& path_a, const std::string& path_b, std::ostream& out) {
    const Eigen::MatrixXd A = io::read_csv(path_a).values;
    const Eigen::MatrixXd B = io::read_csv(path_b).values;
    if (A.rows() != B.rows()) {
        throw DimensionError("row counts differ: " + std::to_string(A.rows()) + " vs " +
                             std::to_string(B.rows()));
    }
    const metrics::PmseResult r = metrics::pmse(A, B);
    const json doc = {{"value", r.value},
                      {"mapping", r.perm.mapping},
                      {"signs", r.perm.signs},
                      {"per_component", r.per_component}};
    out << doc.dump() << '\n';
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Likelihood component analysis", "lca"};
    app.require_subcommand(1);

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a model to a CSV data matrix");
    fit_cmd->add_option("--input", fit.input, "CSV with a header row; rows are observations")->required();
    fit_cmd->add_option("--method", fit.method, "Estimator")
        ->required()
        ->check(CLI::IsMember(method_names()));
    fit_cmd->add_option("--q", fit.q, "Number of non-Gaussian components")->required();
    fit_cmd->add_option("--output", fit.output, "Result JSON path")->required();
    fit_cmd->add_option("--truth", fit.truth, "Optional CSV of true components for scoring");
    fit_cmd->add_flag("--standardize", fit.standardize, "Center and scale each column first");
    add_method_flags(fit_cmd, fit.opts);

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "Generate simulation scenes");
    sim_cmd->add_option("--design", sim_args.design, "iid-factorial or spatiotemporal")->required();
    sim_cmd->add_option("--model", sim_args.model, "lca or noisy-ica")->capture_default_str();
    sim_cmd->add_option("--dist", sim_args.dist, "Source distribution")->capture_default_str();
    sim_cmd->add_option("--snr", sim_args.snr, "Signal-to-noise ratio (default 5, spatiotemporal 0.4)");
    sim_cmd->add_option("--n-sims", sim_args.n_sims, "Number of scenes")->capture_default_str();
    sim_cmd->add_option("--v", sim_args.V, "Observations per scene (iid design)")->capture_default_str();
    sim_cmd->add_option("--t", sim_args.T, "Variables (iid design)")->capture_default_str();
    sim_cmd->add_option("--q", sim_args.Q, "Non-Gaussian components (iid design)")->capture_default_str();
    sim_cmd->add_option("--seed", sim_args.seed, "Random seed")->capture_default_str();
    sim_cmd->add_option("--output", sim_args.output, "Output directory")->required();

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Fit and score every scene, method and Q*");
    bench_cmd->add_option("--scenes", bench.scenes, "Directory written by simulate")->required();
    bench_cmd->add_option("--methods", bench.methods, "Comma-separated methods")->capture_default_str();
    bench_cmd->add_option("--q-star", bench.q_star, "Comma-separated Q* values (default: true Q)");
    bench_cmd->add_option("--report", bench.report, "Summary CSV path")->required();
    bench_cmd->add_option("--runs", bench.runs, "Optional per-fit CSV path");
    add_method_flags(bench_cmd, bench.opts);

    std::string pmse_a, pmse_b;
    auto* pmse_cmd = app.add_subcommand("pmse", "Signed-permutation-invariant distance of two CSV matrices");
    pmse_cmd->add_option("--a", pmse_a, "CSV with Q columns")->required();
    pmse_cmd->add_option("--b", pmse_b, "CSV with R >= Q columns")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(fit, out, err);
        if (sim_cmd->parsed()) return cmd_simulate(sim_args, out);
        if (bench_cmd->parsed()) return cmd_bench(bench, out, err);
        if (pmse_cmd->parsed()) return cmd_pmse(pmse_a, pmse_b, out);
    } catch (const InputError& e) {
        err << "input error: " << e.what();
        if (e.row() > 0) err << " (line " << e.row();
        if (e.row() > 0 && e.column() > 0) err << ", column " << e.column();
        if (e.row() > 0) err << ')';
        err << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DimensionError& e) {
        err << "input error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const AggregateFitError& e) {
        err << "numerical failure: " << e.what() << '\n';
        for (const auto& d : e.diagnostics()) err << "  " << d << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const fs::filesystem_error& e) {
        err << "input error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        err << "input error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace lca::cli
