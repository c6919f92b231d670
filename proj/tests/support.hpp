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

// Test-only helpers. The oracle namespace rebuilds every operator as an
// explicit 2^n x 2^n matrix by index arithmetic, independent of the strided
// kernels the library uses.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qfair/qfair.hpp"

namespace oracle {

using qfair::Complex;
using qfair::Matrix;
using qfair::Vector;

inline int bit_of(std::uint64_t index, int qubit, int n) { return static_cast<int>((index >> (n - 1 - qubit)) & 1u); }

/// I (x) op on `targets`, entry by entry.
inline Matrix embed(const Matrix& op, const std::vector<int>& targets, int n) {
    const std::uint64_t dim = std::uint64_t{1} << n;
    std::uint64_t tmask = 0;
    for (int t : targets) tmask |= std::uint64_t{1} << (n - 1 - t);
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::uint64_t r = 0; r < dim; ++r) {
        for (std::uint64_t c = 0; c < dim; ++c) {
            if ((r & ~tmask) != (c & ~tmask)) continue;
            std::uint64_t lr = 0, lc = 0;
            for (int t : targets) {
                lr = (lr << 1) | static_cast<std::uint64_t>(bit_of(r, t, n));
                lc = (lc << 1) | static_cast<std::uint64_t>(bit_of(c, t, n));
            }
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                op(static_cast<Eigen::Index>(lr), static_cast<Eigen::Index>(lc));
        }
    }
    return out;
}

inline Matrix apply(const qfair::CircuitChannel& c, Matrix rho) {
    const int n = c.num_qubits();
    const auto dim = rho.rows();
    for (const auto& op : c.layers()) {
        if (op.kind() == qfair::OpKind::global_depolarizing) {
            const Complex tr = rho.trace();
            rho = (1.0 - op.probability()) * rho +
                  op.probability() * tr / static_cast<double>(dim) * Matrix::Identity(dim, dim);
            continue;
        }
        Matrix next = Matrix::Zero(dim, dim);
        for (const Matrix& k : op.kraus()) {
            const Matrix big = embed(k, op.targets(), n);
            next += big * rho * big.adjoint();
        }
        rho = next;
    }
    return rho;
}

inline Matrix adjoint(const qfair::CircuitChannel& c, Matrix w) {
    const int n = c.num_qubits();
    const auto dim = w.rows();
    const auto& layers = c.layers();
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
        if (it->kind() == qfair::OpKind::global_depolarizing) {
            const Complex tr = w.trace();
            w = (1.0 - it->probability()) * w +
                it->probability() * tr / static_cast<double>(dim) * Matrix::Identity(dim, dim);
            continue;
        }
        Matrix next = Matrix::Zero(dim, dim);
        for (const Matrix& k : it->kraus()) {
            const Matrix big = embed(k, it->targets(), n);
            next += big.adjoint() * w * big;
        }
        w = next;
    }
    return w;
}

/// Product of the embedded gates; only meaningful for unitary circuits.
inline Matrix unitary(const qfair::CircuitChannel& c) {
    const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << c.num_qubits());
    Matrix u = Matrix::Identity(dim, dim);
    for (const auto& op : c.layers()) u = embed(op.kraus().front(), op.targets(), c.num_qubits()) * u;
    return u;
}

inline Matrix effect(const qfair::Povm& p, std::size_t i) {
    return embed(p.local_effects()[i], p.targets(), p.num_qubits());
}

/// max over all subsets of the outcome set of the eigenvalue spread.
inline double k_star(const qfair::DecisionModel& m) {
    const auto& povm = m.povm();
    std::vector<Matrix> w;
    for (std::size_t i = 0; i < povm.size(); ++i) w.push_back(adjoint(m.circuit(), effect(povm, i)));
    const auto dim = w.front().rows();
    double best = 0.0;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << povm.size()); ++s) {
        Matrix acc = Matrix::Zero(dim, dim);
        for (std::size_t i = 0; i < povm.size(); ++i) {
            if ((s >> i) & 1u) acc += w[i];
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (acc + acc.adjoint()), Eigen::EigenvaluesOnly);
        best = std::max(best, es.eigenvalues()(dim - 1) - es.eigenvalues()(0));
    }
    return best;
}

inline double trace_norm_half(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace oracle

namespace gen {

using qfair::Complex;
using qfair::Matrix;
using qfair::Vector;

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(g(rng), g(rng));
    }
    return m;
}

inline Matrix random_unitary(Eigen::Index d, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Matrix> qr(gaussian(d, d, rng));
    return qr.householderQ() * Matrix::Identity(d, d);
}

/// k Kraus operators on d dimensions from a random isometry.
inline std::vector<Matrix> random_kraus(Eigen::Index d, int k, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Matrix> qr(gaussian(d * k, d, rng));
    const Matrix v = qr.householderQ() * Matrix::Identity(d * k, d);
    std::vector<Matrix> out;
    for (int j = 0; j < k; ++j) out.push_back(v.block(j * d, 0, d, d));
    return out;
}

/// Random effects on `targets` (not projective), labelled "0".."k-1".
inline qfair::Povm random_povm(int n, std::vector<int> targets, int k, std::mt19937_64& rng) {
    const auto d = static_cast<Eigen::Index>(std::uint64_t{1} << targets.size());
    std::vector<Matrix> a;
    Matrix s = Matrix::Zero(d, d);
    for (int i = 0; i < k; ++i) {
        a.push_back(gaussian(d, d, rng));
        s += a.back().adjoint() * a.back();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.adjoint()));
    const Matrix inv_sqrt =
        es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
    std::vector<Matrix> effects;
    for (const Matrix& ai : a) {
        Matrix e = inv_sqrt * ai.adjoint() * ai * inv_sqrt;
        effects.push_back(0.5 * (e + e.adjoint()));
    }
    // Absorb the rounding residue into the last effect so completeness is exact.
    Matrix sum = Matrix::Zero(d, d);
    for (const Matrix& e : effects) sum += e;
    effects.back() += Matrix::Identity(d, d) - sum;
    return qfair::Povm::from_effects(n, std::move(targets), std::move(effects));
}

/// Random gate sequence over named and raw unitaries.
inline qfair::CircuitChannel random_unitary_circuit(int n, int depth, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
    std::uniform_int_distribution<int> qd(0, n - 1);
    qfair::CircuitChannel c(n);
    for (int l = 0; l < depth; ++l) {
        const int q = qd(rng);
        switch (l % 4) {
            case 0:
                c.push_back(qfair::LocalOp::gate("ZXZ", {q}, {ang(rng), ang(rng), ang(rng)}));
                break;
            case 1:
                if (n > 1) {
                    const int r = (q + 1 + qd(rng) % (n - 1)) % n;
                    c.push_back(qfair::LocalOp::gate("XX", {q, r}, {ang(rng)}));
                } else {
                    c.push_back(qfair::LocalOp::gate("RY", {q}, {ang(rng)}));
                }
                break;
            case 2:
                c.push_back(qfair::LocalOp::unitary(random_unitary(2, rng), {q}));
                break;
            default:
                if (n > 1) {
                    const int r = (q + 1 + qd(rng) % (n - 1)) % n;
                    c.push_back(qfair::LocalOp::unitary(random_unitary(4, rng), {q, r}));
                } else {
                    c.push_back(qfair::LocalOp::gate("H", {q}, {}));
                }
        }
    }
    return c;
}

/// Appends one random noise layer: a named channel on every qubit, or a random
/// Kraus map on a random qubit or pair, or global depolarizing.
inline void append_random_noise(qfair::CircuitChannel& c, std::mt19937_64& rng) {
    const int n = c.num_qubits();
    std::uniform_int_distribution<int> pick(0, 6);
    std::uniform_real_distribution<double> prob(0.0, 0.3);
    std::uniform_int_distribution<int> qd(0, n - 1);
    const int choice = pick(rng);
    if (choice < 5) {
        const std::string name = qfair::noise_names()[static_cast<std::size_t>(choice)];
        const double p = prob(rng);
        for (int q = 0; q < n; ++q) c.push_back(qfair::LocalOp::noise(name, p, q));
    } else if (choice == 5) {
        const int q = qd(rng);
        if (n > 1 && (rng() & 1u)) {
            const int r = (q + 1) % n;
            c.push_back(qfair::LocalOp::raw_kraus(random_kraus(4, 3, rng), {q, r}));
        } else {
            c.push_back(qfair::LocalOp::raw_kraus(random_kraus(2, 2, rng), {q}));
        }
    } else {
        c.push_back(qfair::LocalOp::global_depolarizing(prob(rng)));
    }
}

inline qfair::DensityMatrix random_density(int n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> kind(0, 2);
    switch (kind(rng)) {
        case 0:
            return qfair::pure_to_density(qfair::random_pure_state(n, rng()));
        case 1:
            return qfair::random_mixed_state(n, rng(), 2);
        default:
            return qfair::random_mixed_state(n, rng());
    }
}

}  // namespace gen
