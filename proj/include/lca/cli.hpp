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
 * Command-line front end: fit, simulate, bench, pmse.
 * Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lca/core_model.hpp"
#include "lca/serialize.hpp"

namespace lca::cli {

using io::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Runs the `lca` command line and returns its exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct MethodOptions {
    int restarts = 20;
    int principal_restarts = 10;
    std::uint64_t seed = 0;
    int max_iter = 300;
    double tol = 1e-6;
    int bins = 100;
    double df = 8.0;
    int threads = 1;
};

/// Method-independent view of a fit.
struct MethodResult {
    std::string method;
    int q_star = 0;
    std::optional<Eigen::MatrixXd> W_S;
    Eigen::MatrixXd M_S;
    Eigen::MatrixXd S;
    json densities = json::array();
    double objective = 0.0;
    bool converged = false;
    int iterations = 0;
    int restart_id = 0;
    json runs = json::array();
    json extra = json::object();
};

/// Names accepted by --method.
const std::vector<std::string>& method_names();

/// Fits one method. Throws ConfigError for an unknown name or invalid Q and
/// the fitting errors of the underlying estimator.
MethodResult run_method(const std::string& method, const DataMatrix& data, int q,
                        const MethodOptions& opts);

/// PMSE with the narrower matrix first.
double oriented_pmse(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// Per-column centering and unit-variance scaling (divisor V). Throws InputError on a constant column.
Eigen::MatrixXd standardize(const Eigen::MatrixXd& X);

/// Median and quartiles with linear interpolation between order statistics.
struct Summary {
    double q1 = 0.0, median = 0.0, q3 = 0.0;
};
Summary summarize(std::vector<double> values);

}  // namespace lca::cli
