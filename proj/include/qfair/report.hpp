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

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qfair/fairness.hpp"
#include "qfair/lipschitz_dense.hpp"
#include "qfair/model.hpp"
#include "qfair/model_io.hpp"

namespace qfair {

/// Sparse kernel amplitudes: the `kept` largest-magnitude entries, listed by
/// basis index. `truncated` is set only when a dropped entry was nonzero.
struct KernelRecord {
    int num_qubits = 1;
    bool truncated = false;
    std::vector<std::pair<std::uint64_t, Complex>> amplitudes;

    static KernelRecord from_state(const PureState& s, std::size_t keep) {
        KernelRecord r;
        r.num_qubits = s.num_qubits();
        const Vector& a = s.amplitudes();
        std::vector<std::uint64_t> idx(static_cast<std::size_t>(a.size()));
        std::iota(idx.begin(), idx.end(), 0);
        if (idx.size() > keep) {
            std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(),
                              [&](std::uint64_t x, std::uint64_t y) {
                                  const double ax = std::abs(a[static_cast<Eigen::Index>(x)]);
                                  const double ay = std::abs(a[static_cast<Eigen::Index>(y)]);
                                  return ax != ay ? ax > ay : x < y;
                              });
            for (std::size_t i = keep; i < idx.size(); ++i) {
                if (a[static_cast<Eigen::Index>(idx[i])] != Complex{0.0, 0.0}) r.truncated = true;
            }
            idx.resize(keep);
            std::sort(idx.begin(), idx.end());
        }
        for (std::uint64_t i : idx) {
            const Complex z = a[static_cast<Eigen::Index>(i)];
            if (z != Complex{0.0, 0.0}) r.amplitudes.emplace_back(i, z);
        }
        return r;
    }

    /// Dense state; truncated records are renormalized.
    PureState to_state() const {
        Vector v = Vector::Zero(static_cast<Eigen::Index>(dimension_of(num_qubits)));
        for (const auto& [i, z] : amplitudes) {
            if (i >= static_cast<std::uint64_t>(v.size())) throw FormatError("kernel amplitude index out of range");
            v[static_cast<Eigen::Index>(i)] = z;
        }
        return truncated ? PureState::normalized(num_qubits, std::move(v)) : PureState::from_amplitudes(num_qubits, std::move(v));
    }
};

struct VerdictRecord {
    bool fair = false;
    double epsilon = 0.0;
    double delta = 0.0;
    double witness_margin = 0.0;
};

struct VerificationReport {
    json model;
    std::string backend;
    double k_star = 0.0;
    std::vector<std::string> optimal_subset;
    std::map<std::string, double> subset_spreads;
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    bool degenerate = false;
    std::optional<KernelRecord> kernel_psi;
    std::optional<KernelRecord> kernel_phi;
    SolverDiagnostics solver;
    double wall_time_seconds = 0.0;
    std::optional<VerdictRecord> verdict;
};

inline constexpr std::size_t kDefaultKernelAmplitudes = 64;

/// Kernel is attached unless a verdict says the model is fair.
inline VerificationReport make_report(const DecisionModel& model, const LipschitzReport& lr,
                                      const std::optional<FairnessVerdict>& verdict = std::nullopt,
                                      bool full_kernel = false) {
    VerificationReport r;
    r.model = model_to_json(model);
    r.backend = lr.backend;
    r.k_star = lr.k_star;
    r.optimal_subset = lr.optimal_subset;
    r.subset_spreads = lr.subset_spreads;
    r.lambda_max = lr.lambda_max;
    r.lambda_min = lr.lambda_min;
    r.degenerate = lr.degenerate;
    r.solver = lr.solver;
    r.wall_time_seconds = lr.wall_time_seconds;
    if (verdict) r.verdict = VerdictRecord{verdict->fair, verdict->epsilon, verdict->delta, verdict->witness_margin};
    if (!verdict || !verdict->fair) {
        const std::size_t keep = full_kernel ? static_cast<std::size_t>(-1) : kDefaultKernelAmplitudes;
        r.kernel_psi = KernelRecord::from_state(lr.kernel_psi, keep);
        r.kernel_phi = KernelRecord::from_state(lr.kernel_phi, keep);
    }
    return r;
}

namespace io {

inline json kernel_to_json(const KernelRecord& k) {
    json amps = json::array();
    for (const auto& [i, z] : k.amplitudes) amps.push_back(json::array({i, z.real(), z.imag()}));
    return {{"num_qubits", k.num_qubits}, {"truncated", k.truncated}, {"amplitudes", amps}};
}

inline KernelRecord kernel_from_json(const json& j) {
    KernelRecord k;
    k.num_qubits = field<int>(j, "num_qubits");
    k.truncated = field<bool>(j, "truncated");
    if (!j.contains("amplitudes") || !j.at("amplitudes").is_array()) throw FormatError("kernel needs 'amplitudes'");
    for (const auto& a : j.at("amplitudes")) {
        if (!a.is_array() || a.size() != 3) throw FormatError("kernel amplitudes are [index, re, im]");
        try {
            k.amplitudes.emplace_back(a[0].get<std::uint64_t>(), Complex{a[1].get<double>(), a[2].get<double>()});
        } catch (const json::exception&) {
            throw FormatError("kernel amplitudes are [index, re, im]");
        }
    }
    return k;
}

}  // namespace io

inline json report_to_json(const VerificationReport& r) {
    json j = {{"model", r.model},
              {"backend", r.backend},
              {"k_star", r.k_star},
              {"optimal_subset", r.optimal_subset},
              {"subset_spreads", r.subset_spreads},
              {"lambda_max", r.lambda_max},
              {"lambda_min", r.lambda_min},
              {"degenerate", r.degenerate},
              {"solver",
               {{"converged", r.solver.converged},
                {"iterations_max", r.solver.iterations_max},
                {"iterations_min", r.solver.iterations_min},
                {"residual_max", r.solver.residual_max},
                {"residual_min", r.solver.residual_min}}},
              {"wall_time_seconds", r.wall_time_seconds}};
    if (r.kernel_psi && r.kernel_phi) {
        j["kernel"] = {{"psi", io::kernel_to_json(*r.kernel_psi)}, {"phi", io::kernel_to_json(*r.kernel_phi)}};
    }
    if (r.verdict) {
        j["verdict"] = {{"fair", r.verdict->fair},
                        {"epsilon", r.verdict->epsilon},
                        {"delta", r.verdict->delta},
                        {"witness_margin", r.verdict->witness_margin}};
    }
    return j;
}

inline VerificationReport report_from_json(const json& j) {
    using io::field;
    if (!j.is_object()) throw FormatError("report must be a JSON object");
    VerificationReport r;
    if (!j.contains("model")) throw FormatError("report lacks the model");
    r.model = j.at("model");
    r.backend = field<std::string>(j, "backend");
    r.k_star = field<double>(j, "k_star");
    r.optimal_subset = field<std::vector<std::string>>(j, "optimal_subset");
    r.subset_spreads = field<std::map<std::string, double>>(j, "subset_spreads");
    r.lambda_max = field<double>(j, "lambda_max");
    r.lambda_min = field<double>(j, "lambda_min");
    r.degenerate = field<bool>(j, "degenerate");
    r.wall_time_seconds = field<double>(j, "wall_time_seconds");
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        r.solver.converged = field<bool>(s, "converged");
        r.solver.iterations_max = field<long>(s, "iterations_max");
        r.solver.iterations_min = field<long>(s, "iterations_min");
        r.solver.residual_max = field<double>(s, "residual_max");
        r.solver.residual_min = field<double>(s, "residual_min");
    }
    if (j.contains("kernel")) {
        const json& k = j.at("kernel");
        if (!k.contains("psi") || !k.contains("phi")) throw FormatError("kernel needs 'psi' and 'phi'");
        r.kernel_psi = io::kernel_from_json(k.at("psi"));
        r.kernel_phi = io::kernel_from_json(k.at("phi"));
    }
    if (j.contains("verdict")) {
        const json& v = j.at("verdict");
        r.verdict = VerdictRecord{field<bool>(v, "fair"), field<double>(v, "epsilon"), field<double>(v, "delta"),
                                  field<double>(v, "witness_margin")};
    }
    return r;
}

/// Reapplies the decision rule to the stored K*, epsilon and delta.
inline std::optional<bool> verdict_from_report(const VerificationReport& r) {
    if (!r.verdict) return std::nullopt;
    return meets_bound(r.k_star, r.verdict->epsilon, r.verdict->delta);
}

inline VerificationReport load_report(const std::string& path) { return report_from_json(read_json_file(path)); }

}  // namespace qfair
