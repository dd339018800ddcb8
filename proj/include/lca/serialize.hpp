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
#pragma once

#include "json.hpp"

#include "lca/baselines.hpp"
#include "lca/densities.hpp"
#include "lca/estimator.hpp"

namespace lca::io {

using nlohmann::json;

/// Row-major nested arrays.
json matrix_to_json(const Eigen::MatrixXd& M);
Eigen::MatrixXd matrix_from_json(const json& j);

/// {"family": "logistic", "scale": c} or {"family": "tilted-gaussian",
/// "n_basis", "support": [lo, hi], "knots", "coefficients", "penalty",
/// "bin_width", "lambda", "effective_df"}.
json density_to_json(const DensityModel& d);
DensityModel density_from_json(const json& j);

/// {"family": "gaussian-mixture-2", "pi": [p1, p2], "mu": [m1, m2], "nu": [v1, v2]} per component.
json ifa_density_to_json(const baselines::IfaParams& p, int q);

}  // namespace lca::io
