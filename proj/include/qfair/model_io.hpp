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

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qfair/channel.hpp"
#include "qfair/common.hpp"
#include "qfair/lipschitz_tn.hpp"
#include "qfair/measurement.hpp"
#include "qfair/model.hpp"

namespace qfair {

using json = nlohmann::json;

namespace io {

inline json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw FormatError("complex numbers are written as [re, im]");
}

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw FormatError("matrix must be a nonempty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array() || j[0].empty()) throw FormatError("matrix rows must be nonempty arrays");
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw FormatError("matrix rows have unequal lengths");
        }
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
    }
    return m;
}

inline json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v[i]));
    return out;
}

inline Vector vector_from_json(const json& j) {
    if (!j.is_array()) throw FormatError("vector must be an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = complex_from_json(j[i]);
    return v;
}

inline std::vector<Matrix> matrices_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw FormatError("expected a nonempty list of matrices");
    std::vector<Matrix> out;
    for (const auto& m : j) out.push_back(matrix_from_json(m));
    return out;
}

template <typename T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw FormatError(std::string("field '") + key + "' has the wrong type");
    }
}

inline json layer_to_json(const LocalOp& op) {
    switch (op.kind()) {
        case OpKind::gate:
            if (op.name() == "unitary") {
                return {{"kind", "gate"}, {"name", "unitary"}, {"targets", op.targets()},
                        {"matrix", matrix_to_json(op.kraus().front())}};
            }
            return {{"kind", "gate"}, {"name", op.name()}, {"targets", op.targets()}, {"params", op.params()}};
        case OpKind::noise:
            return {{"kind", "noise"}, {"name", op.name()}, {"p", op.probability()}, {"targets", op.targets()}};
        case OpKind::raw_kraus: {
            json ms = json::array();
            for (const Matrix& k : op.kraus()) ms.push_back(matrix_to_json(k));
            return {{"kind", "raw_kraus"}, {"matrices", ms}, {"targets", op.targets()}};
        }
        case OpKind::global_depolarizing:
            return {{"kind", "noise"}, {"name", "global-depolarizing"}, {"p", op.probability()}};
    }
    return {};
}

inline void push_layer(CircuitChannel& c, const json& l) {
    if (!l.is_object()) throw FormatError("each layer must be an object");
    const auto kind = field<std::string>(l, "kind");
    if (kind == "gate") {
        const auto name = field<std::string>(l, "name");
        const auto targets = field<std::vector<int>>(l, "targets");
        if (name == "unitary") {
            if (!l.contains("matrix")) throw FormatError("unitary gate needs 'matrix'");
            c.push_back(LocalOp::unitary(matrix_from_json(l.at("matrix")), targets));
        } else {
            const auto params = l.contains("params") ? field<std::vector<double>>(l, "params") : std::vector<double>{};
            c.push_back(LocalOp::gate(name, targets, params));
        }
    } else if (kind == "noise") {
        const auto name = field<std::string>(l, "name");
        const auto p = field<double>(l, "p");
        if (name == "global-depolarizing") {
            c.push_back(LocalOp::global_depolarizing(p));
            return;
        }
        for (int q : field<std::vector<int>>(l, "targets")) c.push_back(LocalOp::noise(name, p, q));
    } else if (kind == "raw_kraus") {
        if (!l.contains("matrices")) throw FormatError("raw_kraus layer needs 'matrices'");
        c.push_back(LocalOp::raw_kraus(matrices_from_json(l.at("matrices")), field<std::vector<int>>(l, "targets")));
    } else {
        throw FormatError("unknown layer kind '" + kind + "'");
    }
}

inline json povm_to_json(const Povm& povm) {
    if (povm.is_last_qubit_projective()) return "last_qubit";
    json effects = json::array();
    for (const Matrix& e : povm.local_effects()) effects.push_back(matrix_to_json(e));
    return {{"effects", effects}, {"targets", povm.targets()}, {"labels", povm.labels()}};
}

inline Povm povm_from_json(int n, const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() != "last_qubit") throw FormatError("unknown measurement '" + j.get<std::string>() + "'");
        return Povm::last_qubit_projective(n);
    }
    if (!j.is_object()) throw FormatError("measurement must be \"last_qubit\" or an object");
    const auto targets = j.contains("targets") ? field<std::vector<int>>(j, "targets") : std::vector<int>{};
    const auto labels = j.contains("labels") ? field<std::vector<std::string>>(j, "labels") : std::vector<std::string>{};
    if (j.contains("raw_ops")) return Povm::from_measurement_ops(n, matrices_from_json(j.at("raw_ops")), targets, labels);
    if (j.contains("effects")) {
        std::vector<int> t = targets;
        if (t.empty()) {
            for (int q = 0; q < n; ++q) t.push_back(q);
        }
        return Povm::from_effects(n, t, matrices_from_json(j.at("effects")), labels);
    }
    throw FormatError("measurement object needs 'raw_ops' or 'effects'");
}

}  // namespace io

inline json model_to_json(const DecisionModel& m) {
    json layers = json::array();
    for (const LocalOp& op : m.circuit().layers()) layers.push_back(io::layer_to_json(op));
    return {{"num_qubits", m.num_qubits()},
            {"name", m.name()},
            {"layers", layers},
            {"measurement", io::povm_to_json(m.povm())},
            {"metadata", m.metadata()}};
}

/// Parses a model spec. Structural problems raise FormatError; well-formed
/// specs describing invalid physics raise the validating type's error.
inline DecisionModel model_from_json(const json& j) {
    if (!j.is_object()) throw FormatError("model spec must be a JSON object");
    const int n = io::field<int>(j, "num_qubits");
    if (n < 1 || n > 30) throw FormatError("num_qubits must lie in [1, 30]");
    CircuitChannel c(n);
    if (j.contains("layers")) {
        if (!j.at("layers").is_array()) throw FormatError("'layers' must be an array");
        for (const auto& l : j.at("layers")) io::push_layer(c, l);
    }
    if (!j.contains("measurement")) throw FormatError("missing field 'measurement'");
    Povm povm = io::povm_from_json(n, j.at("measurement"));
    std::map<std::string, std::string> meta;
    if (j.contains("metadata")) {
        if (!j.at("metadata").is_object()) throw FormatError("'metadata' must be an object");
        for (const auto& [k, v] : j.at("metadata").items()) meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    const std::string name = j.contains("name") ? io::field<std::string>(j, "name") : "model";
    return DecisionModel(std::move(c), std::move(povm), name, std::move(meta));
}

/// Optional "solver" block: {"tolerance", "max_iters", "seed"}.
inline void apply_solver_block(const json& j, PowerIterationConfig& cfg) {
    if (!j.contains("solver")) return;
    const json& s = j.at("solver");
    if (!s.is_object()) throw FormatError("'solver' must be an object");
    if (s.contains("tolerance")) cfg.tolerance = io::field<double>(s, "tolerance");
    if (s.contains("max_iters")) cfg.max_iters = io::field<long>(s, "max_iters");
    if (s.contains("seed")) cfg.seed = io::field<std::uint64_t>(s, "seed");
    cfg.validate();
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline DecisionModel load_model(const std::string& path) { return model_from_json(read_json_file(path)); }

inline void save_model(const DecisionModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << model_to_json(m).dump(2) << '\n';
}

}  // namespace qfair
