// Copyright 2026 The qfair Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <complex>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qfair/common.hpp"
#include "qfair/qstate.hpp"

namespace qfair {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// RFC 4180: quoted fields, doubled quotes, CRLF or LF line ends, embedded
/// newlines inside quotes. A leading UTF-8 byte-order mark is dropped.
inline CsvTable parse_csv(std::istream& in) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (text.rfind("\xEF\xBB\xBF", 0) == 0) text.erase(0, 3);

    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t i = 0;
    auto end_record = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
        if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
        record.clear();
    };
    while (i < text.size()) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                    continue;
                }
                quoted = false;
            } else {
                field += c;
            }
            ++i;
            continue;
        }
        if (c == '"') {
            if (field_started) throw FormatError("stray quote inside unquoted CSV field");
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            field_started = false;
        } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            end_record();
            ++i;
        } else if (c == '\n' || c == '\r') {
            end_record();
        } else {
            field += c;
            field_started = true;
        }
        ++i;
    }
    if (quoted) throw FormatError("unterminated quoted CSV field");
    if (field_started || !record.empty()) end_record();

    if (records.empty()) throw FormatError("CSV has no header row");
    CsvTable t;
    t.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.header.size()) {
            throw FormatError("CSV row " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                              " fields, header has " + std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(records[r]));
    }
    return t;
}

using CategoricalMap = std::map<std::string, std::map<std::string, double>>;

struct LoadOptions {
    std::optional<std::string> label_column;
    /// Explicit category codes per column. Listed columns are categorical and
    /// every cell must appear in the column's map.
    CategoricalMap categorical_map;
    /// Feature columns in qubit order; empty means every non-label column.
    std::vector<std::string> feature_columns;
    /// Normalization constants to reuse instead of the observed maxima.
    std::map<std::string, double> column_max;
};

struct FeatureVector {
    std::vector<double> values;
    std::vector<std::string> column_names;
};

struct Dataset {
    std::vector<std::string> columns;
    std::vector<FeatureVector> rows;
    std::vector<int> labels;
    std::map<std::string, int> label_codes;
    std::map<std::string, double> column_max;
    /// Codes actually used, explicit or assigned in first-seen order from 1.
    CategoricalMap categorical_map;

    bool operator==(const Dataset& o) const {
        if (columns != o.columns || labels != o.labels || label_codes != o.label_codes ||
            column_max != o.column_max || categorical_map != o.categorical_map || rows.size() != o.rows.size()) {
            return false;
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].values != o.rows[i].values || rows[i].column_names != o.rows[i].column_names) return false;
        }
        return true;
    }
};

namespace detail {

inline std::optional<double> parse_number(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return std::nullopt;
    const std::string t = s.substr(b, e - b + 1);
    try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size() || !std::isfinite(v)) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

inline bool blank(const std::string& s) { return s.find_first_not_of(" \t") == std::string::npos; }

}  // namespace detail

inline Dataset load_csv(const CsvTable& table, const LoadOptions& opt = {}) {
    auto column_index = [&](const std::string& name) {
        for (std::size_t i = 0; i < table.header.size(); ++i) {
            if (table.header[i] == name) return i;
        }
        throw ValidationError("missing column '" + name + "'");
    };
    for (const auto& [col, _] : opt.categorical_map) column_index(col);

    Dataset ds;
    std::optional<std::size_t> label_idx;
    if (opt.label_column) label_idx = column_index(*opt.label_column);
    ds.columns = opt.feature_columns;
    if (ds.columns.empty()) {
        for (std::size_t i = 0; i < table.header.size(); ++i) {
            if (!label_idx || i != *label_idx) ds.columns.push_back(table.header[i]);
        }
    }
    if (ds.columns.empty()) throw ValidationError("no feature columns selected");

    const std::size_t rows = table.rows.size();
    std::vector<std::vector<double>> raw(rows, std::vector<double>(ds.columns.size()));
    for (std::size_t c = 0; c < ds.columns.size(); ++c) {
        const std::string& name = ds.columns[c];
        const std::size_t idx = column_index(name);
        for (std::size_t r = 0; r < rows; ++r) {
            if (detail::blank(table.rows[r][idx])) {
                throw ValidationError("missing value in column '" + name + "' at data row " + std::to_string(r + 1));
            }
        }
        const auto explicit_map = opt.categorical_map.find(name);
        bool categorical = explicit_map != opt.categorical_map.end();
        if (!categorical) {
            bool any_numeric = false;
            bool all_numeric = true;
            for (std::size_t r = 0; r < rows; ++r) {
                const bool num = detail::parse_number(table.rows[r][idx]).has_value();
                any_numeric = any_numeric || num;
                all_numeric = all_numeric && num;
            }
            if (any_numeric && !all_numeric) {
                for (std::size_t r = 0; r < rows; ++r) {
                    if (!detail::parse_number(table.rows[r][idx])) {
                        throw ValidationError("non-numeric cell '" + table.rows[r][idx] + "' in numeric column '" +
                                              name + "'");
                    }
                }
            }
            categorical = !any_numeric && rows > 0;
        }
        if (categorical) {
            std::map<std::string, double> codes;
            if (explicit_map != opt.categorical_map.end()) codes = explicit_map->second;
            for (std::size_t r = 0; r < rows; ++r) {
                const std::string& cell = table.rows[r][idx];
                auto it = codes.find(cell);
                if (it == codes.end()) {
                    if (explicit_map != opt.categorical_map.end()) {
                        throw ValidationError("value '" + cell + "' in column '" + name + "' has no categorical code");
                    }
                    it = codes.emplace(cell, static_cast<double>(codes.size() + 1)).first;
                }
                raw[r][c] = it->second;
            }
            ds.categorical_map[name] = std::move(codes);
        } else {
            for (std::size_t r = 0; r < rows; ++r) raw[r][c] = *detail::parse_number(table.rows[r][idx]);
        }

        double mx = 0.0;
        if (auto it = opt.column_max.find(name); it != opt.column_max.end()) {
            mx = it->second;
        } else {
            mx = rows ? raw[0][c] : 0.0;
            for (std::size_t r = 0; r < rows; ++r) mx = std::max(mx, raw[r][c]);
        }
        if (!(mx > 0.0)) throw ValidationError("column '" + name + "' has non-positive maximum; cannot normalize");
        ds.column_max[name] = mx;
        for (std::size_t r = 0; r < rows; ++r) {
            raw[r][c] /= mx;
            if (raw[r][c] < 0.0 || raw[r][c] > 1.0) {
                throw ValidationError("column '" + name + "' value at data row " + std::to_string(r + 1) +
                                      " normalizes outside [0, 1]");
            }
        }
    }

    for (std::size_t r = 0; r < rows; ++r) ds.rows.push_back({raw[r], ds.columns});

    if (label_idx) {
        bool numeric01 = true;
        for (const auto& row : table.rows) {
            const auto v = detail::parse_number(row[*label_idx]);
            numeric01 = numeric01 && v && (*v == 0.0 || *v == 1.0);
        }
        for (const auto& row : table.rows) {
            const std::string& cell = row[*label_idx];
            if (detail::blank(cell)) throw ValidationError("missing label value");
            if (numeric01) {
                ds.labels.push_back(static_cast<int>(*detail::parse_number(cell)));
                continue;
            }
            auto it = ds.label_codes.find(cell);
            if (it == ds.label_codes.end()) {
                if (ds.label_codes.size() == 2) {
                    throw ValidationError("label column '" + *opt.label_column + "' has more than two values");
                }
                it = ds.label_codes.emplace(cell, static_cast<int>(ds.label_codes.size())).first;
            }
            ds.labels.push_back(it->second);
        }
    }
    return ds;
}

inline Dataset load_csv(const std::string& path, const LoadOptions& opt = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open CSV file '" + path + "'");
    return load_csv(parse_csv(in), opt);
}

/// X^t |0> = ((1 + e^{i pi t})/2, (1 - e^{i pi t})/2) for t in [0, 1].
inline std::pair<Complex, Complex> feature_qubit(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("feature value outside [0, 1]");
    const Complex ph = std::polar(1.0, std::numbers::pi * t);
    return {0.5 * (1.0 + ph), 0.5 * (1.0 - ph)};
}

/// One qubit per feature, first feature on the most significant qubit.
inline PureState feature_map(const FeatureVector& x) {
    if (x.values.empty()) throw ValidationError("feature_map needs at least one feature");
    Vector state(1);
    state[0] = 1.0;
    for (double t : x.values) {
        const auto [a0, a1] = feature_qubit(t);
        Vector next(state.size() * 2);
        for (Eigen::Index i = 0; i < state.size(); ++i) {
            next[2 * i] = state[i] * a0;
            next[2 * i + 1] = state[i] * a1;
        }
        state = std::move(next);
    }
    return PureState::normalized(static_cast<int>(x.values.size()), std::move(state));
}

struct Sidecar {
    CategoricalMap categorical_map;
    std::map<std::string, double> column_max;
};

inline nlohmann::json sidecar_json(const Dataset& ds) {
    return {{"categorical_map", ds.categorical_map}, {"column_max", ds.column_max}};
}

inline void write_sidecar(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write sidecar '" + path + "'");
    out << sidecar_json(ds).dump(2) << '\n';
}

inline Sidecar read_sidecar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open sidecar '" + path + "'");
    try {
        const auto j = nlohmann::json::parse(in);
        Sidecar s;
        if (j.contains("categorical_map")) s.categorical_map = j.at("categorical_map").get<CategoricalMap>();
        if (j.contains("column_max")) s.column_max = j.at("column_max").get<std::map<std::string, double>>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed sidecar: ") + e.what());
    }
}

}  // namespace qfair
