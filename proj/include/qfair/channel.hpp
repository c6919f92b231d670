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
#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "qfair/common.hpp"
#include "qfair/gates.hpp"
#include "qfair/kernels.hpp"
#include "qfair/qstate.hpp"

namespace qfair {

/// Super-operator given by a Kraus family of full N x N matrices.
class KrausChannel {
   public:
    KrausChannel(int num_qubits, std::vector<Matrix> kraus_ops) : num_qubits_(num_qubits), ops_(std::move(kraus_ops)) {
        if (ops_.empty()) {
            throw ValidationError("Kraus family must be nonempty");
        }
        const auto n = static_cast<Eigen::Index>(dimension_of(num_qubits_));
        Matrix sum = Matrix::Zero(n, n);
        for (const Matrix& k : ops_) {
            if (k.rows() != n || k.cols() != n) {
                throw DimensionError("Kraus operator shape does not match 2^num_qubits");
            }
            sum += k.adjoint() * k;
        }
        if ((sum - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > tolerances().kraus_completeness) {
            throw ValidationError("Kraus family is not trace preserving");
        }
    }

    int num_qubits() const { return num_qubits_; }
    const std::vector<Matrix>& kraus_ops() const { return ops_; }

   private:
    int num_qubits_;
    std::vector<Matrix> ops_;
};

/// Probabilities of I, X, Y, Z for a single-qubit Pauli channel.
using PauliWeights = std::array<double, 4>;

namespace detail {

// Pauli index as (x, z) bits: I=0b00, X=0b10, Y=0b11, Z=0b01.
inline int pauli_bits(int idx) {
    static constexpr std::array<int, 4> bits{0b00, 0b10, 0b11, 0b01};
    return bits[static_cast<std::size_t>(idx)];
}

inline PauliWeights compose_pauli(const PauliWeights& first, const PauliWeights& second) {
    PauliWeights out{0, 0, 0, 0};
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            const int c = pauli_bits(a) ^ pauli_bits(b);
            for (int k = 0; k < 4; ++k) {
                if (pauli_bits(k) == c) {
                    out[static_cast<std::size_t>(k)] += first[static_cast<std::size_t>(a)] * second[static_cast<std::size_t>(b)];
                }
            }
        }
    }
    return out;
}

inline std::vector<Matrix> pauli_kraus(const PauliWeights& w) {
    static constexpr std::array<char, 4> names{'I', 'X', 'Y', 'Z'};
    std::vector<Matrix> ops;
    for (std::size_t k = 0; k < 4; ++k) {
        if (w[k] > 0.0) {
            ops.push_back(std::sqrt(w[k]) * gates::pauli(names[k]));
        }
    }
    return ops;
}

}  // namespace detail

inline const std::vector<std::string>& noise_names() {
    static const std::vector<std::string> names{"bit-flip", "phase-flip", "bit-phase-flip", "depolarizing", "mixed"};
    return names;
}

/// Pauli weights of the named single-qubit noise. "mixed" composes bit flip,
/// phase flip and depolarizing (in that order), each at probability p.
inline PauliWeights noise_weights(const std::string& name, double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError("noise probability must lie in [0,1]");
    }
    if (name == "bit-flip") return {1 - p, p, 0, 0};
    if (name == "phase-flip") return {1 - p, 0, 0, p};
    if (name == "bit-phase-flip") return {1 - p, 0, p, 0};
    if (name == "depolarizing") return {1 - 3 * p / 4, p / 4, p / 4, p / 4};
    if (name == "mixed") {
        return detail::compose_pauli(detail::compose_pauli(noise_weights("bit-flip", p), noise_weights("phase-flip", p)),
                                     noise_weights("depolarizing", p));
    }
    throw ValidationError("unknown noise '" + name + "'");
}

/// Local 2 x 2 Kraus matrices of a named noise; zero-weight terms are dropped.
inline std::vector<Matrix> noise_kraus(const std::string& name, double p) {
    return detail::pauli_kraus(noise_weights(name, p));
}

inline KrausChannel noise_channel(const std::string& name, double p) { return KrausChannel(1, noise_kraus(name, p)); }

enum class OpKind { gate, noise, raw_kraus, global_depolarizing };

/// One circuit layer: a gate or noise acting on one or two qubits, or the
/// register-wide depolarizing channel (1-p) rho + p I/N.
class LocalOp {
   public:
    static LocalOp gate(std::string name, std::vector<int> targets, std::vector<double> params) {
        const gates::GateInfo gi = gates::info(name);
        if (static_cast<int>(targets.size()) != gi.arity) {
            throw ValidationError("gate " + name + " acts on " + std::to_string(gi.arity) + " qubit(s)");
        }
        Matrix u = gates::matrix(name, params);
        LocalOp op(OpKind::gate, std::move(targets));
        op.name_ = std::move(name);
        op.params_ = std::move(params);
        op.kraus_.push_back(std::move(u));
        return op;
    }

    /// Raw unitary on one or two qubits.
    static LocalOp unitary(Matrix u, std::vector<int> targets) {
        check_local_shape(u, targets);
        const Matrix id = Matrix::Identity(u.rows(), u.cols());
        if ((u.adjoint() * u - id).cwiseAbs().maxCoeff() > tolerances().unitarity) {
            throw ValidationError("gate matrix is not unitary");
        }
        LocalOp op(OpKind::gate, std::move(targets));
        op.name_ = "unitary";
        op.kraus_.push_back(std::move(u));
        return op;
    }

    static LocalOp noise(std::string name, double p, int target) {
        LocalOp op(OpKind::noise, {target});
        op.kraus_ = noise_kraus(name, p);
        op.name_ = std::move(name);
        op.probability_ = p;
        return op;
    }

    static LocalOp raw_kraus(std::vector<Matrix> ops, std::vector<int> targets) {
        if (ops.empty()) {
            throw ValidationError("raw Kraus family must be nonempty");
        }
        Matrix sum = Matrix::Zero(ops.front().rows(), ops.front().cols());
        for (const Matrix& k : ops) {
            check_local_shape(k, targets);
            sum += k.adjoint() * k;
        }
        if ((sum - Matrix::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff() > tolerances().kraus_completeness) {
            throw ValidationError("raw Kraus family is not trace preserving");
        }
        LocalOp op(OpKind::raw_kraus, std::move(targets));
        op.name_ = "raw_kraus";
        op.kraus_ = std::move(ops);
        return op;
    }

    static LocalOp global_depolarizing(double p) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ValidationError("noise probability must lie in [0,1]");
        }
        LocalOp op(OpKind::global_depolarizing, {});
        op.name_ = "global-depolarizing";
        op.probability_ = p;
        return op;
    }

    OpKind kind() const { return kind_; }
    bool is_unitary() const { return kind_ == OpKind::gate; }
    const std::vector<int>& targets() const { return targets_; }
    const std::string& name() const { return name_; }
    const std::vector<double>& params() const { return params_; }
    double probability() const { return probability_; }
    /// Local Kraus family (a single unitary for gates; empty for global depolarizing).
    const std::vector<Matrix>& kraus() const { return kraus_; }

   private:
    LocalOp(OpKind kind, std::vector<int> targets) : kind_(kind), targets_(std::move(targets)) {}

    static void check_local_shape(const Matrix& m, const std::vector<int>& targets) {
        if (targets.empty() || targets.size() > 2) {
            throw ValidationError("local operations act on one or two qubits");
        }
        const auto d = static_cast<Eigen::Index>(dimension_of(static_cast<int>(targets.size())));
        if (m.rows() != d || m.cols() != d) {
            throw DimensionError("local matrix shape does not match its target count");
        }
    }

    OpKind kind_;
    std::vector<int> targets_;
    std::string name_;
    std::vector<double> params_;
    double probability_ = 0.0;
    std::vector<Matrix> kraus_;
};

/// Ordered layers; layers[0] acts first.
class CircuitChannel {
   public:
    explicit CircuitChannel(int num_qubits) : num_qubits_(num_qubits) {
        if (num_qubits < 1) {
            throw ValidationError("circuit needs at least one qubit");
        }
    }

    void push_back(LocalOp op) {
        for (int t : op.targets()) {
            if (t < 0 || t >= num_qubits_) {
                throw DimensionError("layer target " + std::to_string(t) + " out of range for " +
                                     std::to_string(num_qubits_) + " qubits");
            }
        }
        if (op.targets().size() == 2 && op.targets()[0] == op.targets()[1]) {
            throw DimensionError("two-qubit layer repeats a target");
        }
        layers_.push_back(std::move(op));
    }

    int num_qubits() const { return num_qubits_; }
    const std::vector<LocalOp>& layers() const { return layers_; }
    bool is_unitary() const {
        return std::all_of(layers_.begin(), layers_.end(), [](const LocalOp& op) { return op.is_unitary(); });
    }

   private:
    int num_qubits_;
    std::vector<LocalOp> layers_;
};

/// Full-register Kraus family of a local layer.
inline KrausChannel embed(const LocalOp& op, int num_qubits) {
    if (op.kind() == OpKind::global_depolarizing) {
        throw ValidationError("global depolarizing is not a local layer");
    }
    std::vector<Matrix> full;
    full.reserve(op.kraus().size());
    for (const Matrix& k : op.kraus()) {
        full.push_back(kernels::embed_dense(k, op.targets(), num_qubits));
    }
    return KrausChannel(num_qubits, std::move(full));
}

inline DensityMatrix apply(const KrausChannel& channel, const DensityMatrix& rho) {
    if (channel.num_qubits() != rho.num_qubits()) {
        throw DimensionError("apply: channel and state act on different qubit counts");
    }
    Matrix acc = Matrix::Zero(rho.matrix().rows(), rho.matrix().cols());
    for (const Matrix& k : channel.kraus_ops()) {
        acc += k * rho.matrix() * k.adjoint();
    }
    return DensityMatrix::trusted(rho.num_qubits(), std::move(acc));
}

namespace detail {

inline void apply_layer(Matrix& rho, const LocalOp& op, int n) {
    if (op.kind() == OpKind::global_depolarizing) {
        const double p = op.probability();
        const Complex tr = rho.trace();
        rho *= (1.0 - p);
        rho.diagonal().array() += p * tr / static_cast<double>(rho.rows());
        return;
    }
    rho = kernels::conjugate_kraus(rho, op.kraus(), op.targets(), n);
}

inline void adjoint_layer(Matrix& effect, const LocalOp& op, int n) {
    if (op.kind() == OpKind::global_depolarizing) {
        const double p = op.probability();
        const Complex tr = effect.trace();
        effect *= (1.0 - p);
        effect.diagonal().array() += p * tr / static_cast<double>(effect.rows());
        return;
    }
    effect = kernels::conjugate_kraus_adjoint(effect, op.kraus(), op.targets(), n);
}

/// Runs of unitary layers on identical targets, fused into one matrix so the
/// N x N operand is swept once per run. `reverse` walks from the last layer.
template <typename Visit>
void for_each_fused(const CircuitChannel& channel, bool reverse, Visit&& visit) {
    const auto& layers = channel.layers();
    const std::size_t count = layers.size();
    std::size_t i = 0;
    while (i < count) {
        const LocalOp& op = layers[reverse ? count - 1 - i : i];
        ++i;
        if (op.kind() == OpKind::global_depolarizing || !op.is_unitary()) {
            visit(op, nullptr);
            continue;
        }
        Matrix u = op.kraus().front();
        bool fused = false;
        while (i < count) {
            const LocalOp& next = layers[reverse ? count - 1 - i : i];
            if (next.kind() == OpKind::global_depolarizing || !next.is_unitary() || next.targets() != op.targets()) {
                break;
            }
            // Time order is earlier-then-later; the product is later * earlier.
            u = reverse ? (u * next.kraus().front()).eval() : (next.kraus().front() * u).eval();
            fused = true;
            ++i;
        }
        visit(op, fused ? &u : nullptr);
    }
}

}  // namespace detail

/// Layers applied in order: E_d(...E_1(rho)).
inline DensityMatrix apply(const CircuitChannel& channel, const DensityMatrix& rho) {
    if (channel.num_qubits() != rho.num_qubits()) {
        throw DimensionError("apply: circuit and state act on different qubit counts");
    }
    Matrix m = rho.matrix();
    const int q = channel.num_qubits();
    detail::for_each_fused(channel, false, [&](const LocalOp& op, const Matrix* fused) {
        if (fused) {
            m = kernels::conjugate_kraus(m, std::span<const Matrix>(fused, 1), op.targets(), q);
        } else {
            detail::apply_layer(m, op, q);
        }
    });
    return DensityMatrix::trusted(rho.num_qubits(), std::move(m));
}

/// Heisenberg picture: E_1^dagger(...E_d^dagger(effect)), layers in reverse order.
inline Matrix adjoint_apply(const CircuitChannel& channel, const Matrix& effect) {
    const auto n = static_cast<Eigen::Index>(dimension_of(channel.num_qubits()));
    if (effect.rows() != n || effect.cols() != n) {
        throw DimensionError("adjoint_apply: effect shape does not match the circuit");
    }
    const double scale = std::max(1.0, effect.cwiseAbs().maxCoeff());
    if (hermitian_defect(effect) > tolerances().hermitian * scale) {
        throw ValidationError("adjoint_apply: effect is not Hermitian");
    }
    Matrix w = effect;
    const int q = channel.num_qubits();
    detail::for_each_fused(channel, true, [&](const LocalOp& op, const Matrix* fused) {
        if (fused) {
            w = kernels::conjugate_kraus_adjoint(w, std::span<const Matrix>(fused, 1), op.targets(), q);
        } else {
            detail::adjoint_layer(w, op, q);
        }
    });
    return w;
}

}  // namespace qfair
