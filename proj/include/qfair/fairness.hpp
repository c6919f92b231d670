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

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qfair/common.hpp"
#include "qfair/lipschitz_dense.hpp"
#include "qfair/lipschitz_tn.hpp"
#include "qfair/model.hpp"
#include "qfair/qstate.hpp"

namespace qfair {

enum class Backend { dense, tensor_network };

inline Backend parse_backend(const std::string& s) {
    if (s == "dense") return Backend::dense;
    if (s == "tn" || s == "tensor-network") return Backend::tensor_network;
    throw ValidationError("unknown backend '" + s + "' (expected dense or tn)");
}

inline LipschitzReport compute_lipschitz(const DecisionModel& model, Backend backend,
                                         const PowerIterationConfig& cfg = {}) {
    return backend == Backend::dense ? lipschitz(model) : lipschitz_tn(model, cfg);
}

struct FairnessVerdict {
    bool fair = false;
    double epsilon = 0.0;
    double delta = 0.0;
    double k_star = 0.0;
    /// Present exactly when the model is not fair.
    std::optional<std::pair<PureState, PureState>> kernel;
    double witness_margin = 0.0;
};

inline void check_thresholds(double epsilon, double delta) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ValidationError("epsilon must lie in (0, 1]");
    if (!(delta > 0.0 && delta <= 1.0)) throw ValidationError("delta must lie in (0, 1]");
}

/// delta >= K* epsilon, up to the roundoff carried by K* itself. Without the
/// slack, boundary cases such as K* = 0.98, eps = 0.05, delta = 0.049 flip on
/// the last bit of the product.
inline bool meets_bound(double k_star, double epsilon, double delta) {
    return delta >= k_star * epsilon - tolerances().verdict_slack;
}

inline FairnessVerdict decide(const LipschitzReport& report, double epsilon, double delta) {
    check_thresholds(epsilon, delta);
    FairnessVerdict v;
    v.epsilon = epsilon;
    v.delta = delta;
    v.k_star = report.k_star;
    v.witness_margin = report.k_star * epsilon - delta;
    v.fair = meets_bound(report.k_star, epsilon, delta);
    if (!v.fair) v.kernel = std::make_pair(report.kernel_psi, report.kernel_phi);
    return v;
}

inline FairnessVerdict verify(const DecisionModel& model, double epsilon, double delta,
                              Backend backend = Backend::dense, const PowerIterationConfig& cfg = {}) {
    check_thresholds(epsilon, delta);
    return decide(compute_lipschitz(model, backend, cfg), epsilon, delta);
}

struct BiasPair {
    DensityMatrix rho_psi;
    DensityMatrix rho_phi;
    double input_distance = 0.0;
    /// Filled by bias_pair_for(); bias_pairs() alone has no model.
    double output_distance = 0.0;
};

/// rho_psi = eps psi + (1 - eps) sigma and likewise for phi.
inline BiasPair bias_pairs(const std::pair<PureState, PureState>& kernel, const DensityMatrix& sigma, double epsilon) {
    const auto& [psi, phi] = kernel;
    if (psi.num_qubits() != sigma.num_qubits() || phi.num_qubits() != sigma.num_qubits()) {
        throw DimensionError("bias_pairs: kernel and sigma act on different qubit counts");
    }
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ValidationError("epsilon must lie in (0, 1]");
    if (overlap_magnitude(psi, phi) > tolerances().kernel_orthogonality) {
        throw ValidationError("bias kernel states are not orthogonal");
    }
    const Matrix p = psi.amplitudes() * psi.amplitudes().adjoint();
    const Matrix f = phi.amplitudes() * phi.amplitudes().adjoint();
    const int n = sigma.num_qubits();
    Matrix a = epsilon * p + (1.0 - epsilon) * sigma.matrix();
    Matrix b = epsilon * f + (1.0 - epsilon) * sigma.matrix();
    BiasPair out{DensityMatrix::from_matrix(n, std::move(a)), DensityMatrix::from_matrix(n, std::move(b)), 0.0, 0.0};
    out.input_distance = trace_distance(out.rho_psi, out.rho_phi);
    return out;
}

inline BiasPair bias_pair_for(const DecisionModel& model, const std::pair<PureState, PureState>& kernel,
                              const DensityMatrix& sigma, double epsilon) {
    BiasPair out = bias_pairs(kernel, sigma, epsilon);
    out.output_distance = tv_distance(forward(model, out.rho_psi), forward(model, out.rho_phi));
    return out;
}

/// D(rho, sigma) <= eps and d(A(rho), A(sigma)) > delta.
inline bool check_pair(const DecisionModel& model, const DensityMatrix& rho, const DensityMatrix& sigma,
                       double epsilon, double delta) {
    if (rho.num_qubits() != model.num_qubits() || sigma.num_qubits() != model.num_qubits()) {
        throw DimensionError("check_pair: states and model act on different qubit counts");
    }
    if (trace_distance(rho, sigma) > epsilon + tolerances().input_distance_slack) return false;
    return tv_distance(forward(model, rho), forward(model, sigma)) > delta;
}

/// "maximally-mixed", "mixed[:seed]" or "pure[:seed]".
struct SigmaSource {
    enum class Kind { maximally_mixed, random_mixed, random_pure } kind = Kind::maximally_mixed;
    std::uint64_t seed = 0;

    static SigmaSource parse(const std::string& text) {
        SigmaSource s;
        const auto colon = text.find(':');
        const std::string head = text.substr(0, colon);
        if (head == "maximally-mixed") {
            if (colon != std::string::npos) throw ValidationError("maximally-mixed takes no seed");
            return s;
        }
        if (head == "mixed") {
            s.kind = Kind::random_mixed;
        } else if (head == "pure") {
            s.kind = Kind::random_pure;
        } else {
            throw ValidationError("unknown sigma source '" + text + "'");
        }
        if (colon != std::string::npos) {
            try {
                std::size_t used = 0;
                s.seed = std::stoull(text.substr(colon + 1), &used);
                if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ValidationError("bad sigma seed in '" + text + "'");
            }
        }
        return s;
    }

    /// The k-th draw; maximally mixed ignores k.
    DensityMatrix draw(int num_qubits, std::uint64_t k) const {
        switch (kind) {
            case Kind::random_mixed:
                return random_mixed_state(num_qubits, seed + k);
            case Kind::random_pure:
                return pure_to_density(random_pure_state(num_qubits, seed + k));
            case Kind::maximally_mixed:
                break;
        }
        return DensityMatrix::maximally_mixed(num_qubits);
    }
};

}  // namespace qfair
