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
#include "lca/serialize.hpp"

#include "lca/error.hpp"

namespace lca::io {

json matrix_to_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    if (!j.is_array()) throw InputError("matrix must be an array of rows");
    const auto r = static_cast<Eigen::Index>(j.size());
    const auto c = r ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Eigen::MatrixXd M(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const json& row = j[static_cast<size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) {
            throw InputError("ragged matrix", i + 1, 0);
        }
        for (Eigen::Index k = 0; k < c; ++k) M(i, k) = row[static_cast<size_t>(k)].get<double>();
    }
    return M;
}

json density_to_json(const DensityModel& d) {
    if (std::holds_alternative<LogisticDensity>(d)) {
        return json{{"family", "logistic"}, {"scale", LogisticDensity::scale()}};
    }
    const auto& t = std::get<TiltedGaussianDensity>(d);
    const Eigen::VectorXd& c = t.coefficients();
    return json{{"family", "tilted-gaussian"},
                {"n_basis", t.basis().n_basis()},
                {"support", {t.support_lo(), t.support_hi()}},
                {"knots", t.knots()},
                {"coefficients", std::vector<double>(c.data(), c.data() + c.size())},
                {"penalty", t.penalty()},
                {"bin_width", t.bin_width()},
                {"lambda", t.lambda()},
                {"effective_df", t.effective_df()}};
}

DensityModel density_from_json(const json& j) {
    const std::string family = j.at("family").get<std::string>();
    if (family == "logistic") return LogisticDensity{};
    if (family != "tilted-gaussian") throw InputError("unknown density family '" + family + "'");
    const int n_basis = j.at("n_basis").get<int>();
    const auto support = j.at("support").get<std::vector<double>>();
    const auto coef = j.at("coefficients").get<std::vector<double>>();
    if (support.size() != 2 || static_cast<int>(coef.size()) != n_basis) {
        throw InputError("inconsistent tilted-gaussian record");
    }
    UniformCubicBSpline basis(support[0], support[1], n_basis);
    Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
    return TiltedGaussianDensity(basis, c, j.at("penalty").get<double>(),
                                 j.at("effective_df").get<double>(), j.at("bin_width").get<double>());
}

json ifa_density_to_json(const baselines::IfaParams& p, int q) {
    return json{{"family", "gaussian-mixture-2"},
                {"pi", {p.pi1(q), p.pi2(q)}},
                {"mu", {p.mu1(q), p.mu2(q)}},
                {"nu", {p.nu1(q), p.nu2(q)}}};
}

}  // namespace lca::io
