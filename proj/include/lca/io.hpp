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
 * CSV matrices and JSON records for fits and densities.
 */
#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "lca/densities.hpp"

namespace lca::io {

struct CsvTable {
    std::vector<std::string> header;
    Eigen::MatrixXd values;
};

/// Parses a CSV with a mandatory header row. Quoted fields follow RFC 4180.
/// Throws InputError naming the 1-based line and column of the first problem.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

/// Writes a header (default x1..xn) and rows in shortest round-trip form.
void write_csv(std::ostream& out, const Eigen::MatrixXd& M, const std::vector<std::string>& header = {});
void write_csv(const std::string& path, const Eigen::MatrixXd& M,
               const std::vector<std::string>& header = {});

/// Shortest decimal string that parses back to exactly x.
std::string format_double(double x);

}  // namespace lca::io
