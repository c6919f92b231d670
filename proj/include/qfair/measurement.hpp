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

#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qfair/common.hpp"
#include "qfair/kernels.hpp"

namespace qfair {

/// POVM {M_i^dagger M_i} stored in local form: effects act on `targets`
/// (identity elsewhere), so large registers never need dense N x N effects.
class Povm {
   public:
    /// Effects on `targets`; labels default to "0", "1", ...
    static Povm from_effects(int num_qubits, std::vector<int> targets, std::vector<Matrix> effects,
                             std::vector<std::string> labels = {},
                             double completeness_tol = tolerances().povm_completeness) {
        if (effects.empty()) {
            throw ValidationError("POVM needs at least one effect");
        }
        if (targets.empty()) {
            throw ValidationError("POVM targets must be nonempty");
        }
        kernels::LocalIndexer check(num_qubits, targets);  // range and duplicate checks
        const auto d = static_cast<Eigen::Index>(dimension_of(static_cast<int>(targets.size())));
        const Tolerances& tol = tolerances();
        Matrix sum = Matrix::Zero(d, d);
        for (const Matrix& e : effects) {
            if (e.rows() != d || e.cols() != d) {
                throw DimensionError("POVM effect shape does not match its targets");
            }
            if (hermitian_defect(e) > tol.hermitian) {
                throw ValidationError("POVM effect is not Hermitian");
            }
            Eigen::SelfAdjointEigenSolver<Matrix> es(e, Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() < -tol.psd) {
                throw ValidationError("POVM effect is not positive semi-definite");
            }
            sum += e;
        }
        if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > completeness_tol) {
            throw ValidationError("POVM effects do not sum to the identity");
        }
        if (labels.empty()) {
            for (std::size_t i = 0; i < effects.size(); ++i) labels.push_back(std::to_string(i));
        }
        if (labels.size() != effects.size()) {
            throw ValidationError("POVM label count does not match effect count");
        }
        if (std::set<std::string>(labels.begin(), labels.end()).size() != labels.size()) {
            throw ValidationError("POVM labels must be distinct");
        }
        Povm p;
        p.num_qubits_ = num_qubits;
        p.targets_ = std::move(targets);
        p.effects_ = std::move(effects);
        p.labels_ = std::move(labels);
        return p;
    }

    /// Effects M_i^dagger M_i of measurement operators acting on `targets`
    /// (all qubits when empty).
    static Povm from_measurement_ops(int num_qubits, const std::vector<Matrix>& ops, std::vector<int> targets = {},
                                     std::vector<std::string> labels = {}) {
        if (targets.empty()) {
            targets.resize(static_cast<std::size_t>(num_qubits));
            std::iota(targets.begin(), targets.end(), 0);
        }
        std::vector<Matrix> effects;
        effects.reserve(ops.size());
        for (const Matrix& m : ops) {
            Matrix e = m.adjoint() * m;
            e = 0.5 * (e + e.adjoint());
            effects.push_back(std::move(e));
        }
        return from_effects(num_qubits, std::move(targets), std::move(effects), std::move(labels),
                            tolerances().measurement_ops_completeness);
    }

    /// {I (x) |0><0|, I (x) |1><1|} on the last qubit, labels "0" and "1".
    static Povm last_qubit_projective(int num_qubits) {
        if (num_qubits < 1) {
            throw ValidationError("POVM needs at least one qubit");
        }
        Matrix p0 = Matrix::Zero(2, 2);
        Matrix p1 = Matrix::Zero(2, 2);
        p0(0, 0) = 1;
        p1(1, 1) = 1;
        Povm p = from_effects(num_qubits, {num_qubits - 1}, {p0, p1}, {"0", "1"});
        p.last_qubit_ = true;
        return p;
    }

    int num_qubits() const { return num_qubits_; }
    std::size_t size() const { return effects_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<int>& targets() const { return targets_; }
    const std::vector<Matrix>& local_effects() const { return effects_; }
    bool is_last_qubit_projective() const { return last_qubit_; }

    /// N x N effect for outcome i.
    Matrix effect(std::size_t i) const { return kernels::embed_dense(effects_.at(i), targets_, num_qubits_); }

   private:
    Povm() = default;

    int num_qubits_ = 0;
    std::vector<int> targets_;
    std::vector<Matrix> effects_;
    std::vector<std::string> labels_;
    bool last_qubit_ = false;
};

}  // namespace qfair
