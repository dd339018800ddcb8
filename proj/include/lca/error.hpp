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

#include <stdexcept>
#include <string>
#include <vector>

namespace lca {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Empty input, mismatched shapes, or an index out of range.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Covariance too close to singular to whiten.
class ConditioningError : public Error {
public:
    ConditioningError(const std::string& what, double eigenvalue)
        : Error(what), eigenvalue_(eigenvalue) {}
    double eigenvalue() const noexcept { return eigenvalue_; }

private:
    double eigenvalue_;
};

/// A matrix that must have full rank does not.
class RankError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or parameter value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A column of zero norm where unit normalization is required.
class NormalizationError : public Error {
public:
    NormalizationError(const std::string& what, int column) : Error(what), column_(column) {}
    int column() const noexcept { return column_; }

private:
    int column_;
};

/// Iterative fit failed (IRLS divergence, df bracket, infeasible parameters).
class FitError : public Error {
public:
    explicit FitError(const std::string& what, std::vector<double> trace = {})
        : Error(what), trace_(std::move(trace)) {}
    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

/// Every restart of a multi-start fit failed; carries one diagnostic per restart.
class AggregateFitError : public Error {
public:
    AggregateFitError(const std::string& what, std::vector<std::string> diagnostics)
        : Error(what), diagnostics_(std::move(diagnostics)) {}
    const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

/// Malformed input file; row and column are 1-based, 0 when not applicable.
class InputError : public Error {
public:
    InputError(const std::string& what, long row = 0, long column = 0)
        : Error(what), row_(row), column_(column) {}
    long row() const noexcept { return row_; }
    long column() const noexcept { return column_; }

private:
    long row_;
    long column_;
};

}  // namespace lca
