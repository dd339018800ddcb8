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
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "lca/error.hpp"
#include "lca/io.hpp"

namespace lca::io {

namespace {

/// Splits one logical record; quoted fields may contain commas, doubled quotes and newlines.
bool next_record(std::istream& in, std::vector<std::string>& fields, long& line) {
    fields.clear();
    std::string field;
    bool in_quotes = false, any = false, was_quoted = false;
    const long start = line + 1;
    char c;
    while (in.get(c)) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            if (!field.empty() && !was_quoted) {
                throw InputError("stray quote inside unquoted field", start,
                                 static_cast<long>(fields.size()) + 1);
            }
            in_quotes = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else if (c == '\n') {
            ++line;
            if (!field.empty() && field.back() == '\r') field.pop_back();
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(c);
        }
    }
    if (in_quotes) throw InputError("unterminated quoted field", start, static_cast<long>(fields.size()) + 1);
    if (!any) return false;
    ++line;
    if (!field.empty() && field.back() == '\r') field.pop_back();
    fields.push_back(std::move(field));
    return true;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool is_blank(const std::vector<std::string>& fields) {
    return fields.size() == 1 && trim(fields[0]).empty();
}

}  // namespace

CsvTable parse_csv(std::istream& in) {
    CsvTable table;
    std::vector<std::string> fields;
    long line = 0;
    if (!next_record(in, fields, line) || is_blank(fields)) throw InputError("missing header row", 1, 0);
    if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
    for (auto& f : fields) table.header.push_back(trim(f));
    const size_t n_cols = table.header.size();
    size_t numeric = 0;
    for (const std::string& h : table.header) {
        double probe = 0.0;
        const auto res = std::from_chars(h.data(), h.data() + h.size(), probe);
        if (!h.empty() && res.ec == std::errc() && res.ptr == h.data() + h.size()) ++numeric;
    }
    if (numeric == n_cols) throw InputError("header row required: first row is numeric", 1, 1);

    std::vector<std::vector<double>> rows;
    while (true) {
        const long record_line = line + 1;
        if (!next_record(in, fields, line)) break;
        if (is_blank(fields)) continue;
        if (fields.size() != n_cols) {
            std::ostringstream os;
            os << "expected " << n_cols << " fields, found " << fields.size();
            throw InputError(os.str(), record_line, static_cast<long>(std::min(fields.size(), n_cols)) + 1);
        }
        std::vector<double> row(n_cols);
        for (size_t j = 0; j < n_cols; ++j) {
            const std::string f = trim(fields[j]);
            const char* b = f.data();
            const char* e = b + f.size();
            if (!f.empty() && *b == '+') ++b;
            const auto res = std::from_chars(b, e, row[j]);
            if (f.empty() || res.ec != std::errc() || res.ptr != e || !std::isfinite(row[j])) {
                throw InputError("not a finite number: '" + f + "'", record_line, static_cast<long>(j) + 1);
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError("no data rows", 2, 0);
    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_cols));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < n_cols; ++j)
            table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        return parse_csv(in);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what(), e.row(), e.column());
    }
}

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const Eigen::MatrixXd& M, const std::vector<std::string>& header) {
    if (!header.empty() && static_cast<Eigen::Index>(header.size()) != M.cols()) {
        throw DimensionError("header length must equal the column count");
    }
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        if (j) out << ',';
        out << (header.empty() ? "x" + std::to_string(j + 1) : header[static_cast<size_t>(j)]);
    }
    out << '\n';
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) out << ',';
            out << format_double(M(i, j));
        }
        out << '\n';
    }
}

void write_csv(const std::string& path, const Eigen::MatrixXd& M, const std::vector<std::string>& header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    write_csv(out, M, header);
    if (!out) throw InputError("failed writing '" + path + "'");
}

}  // namespace lca::io
