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
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qfair/common.hpp"

namespace qfair {

/// Normalized state vector on n qubits.
class PureState {
   public:
    /// Validates length 2^n and unit norm.
    static PureState from_amplitudes(int num_qubits, Vector amplitudes) {
        if (num_qubits < 1) {
            throw ValidationError("pure state needs at least one qubit");
        }
        if (static_cast<std::uint64_t>(amplitudes.size()) != dimension_of(num_qubits)) {
            throw DimensionError("amplitude vector length does not match 2^num_qubits");
        }
        const double norm = amplitudes.norm();
        if (std::abs(norm - 1.0) > tolerances().state_norm) {
            throw ValidationError("pure state is not normalized (norm " + std::to_string(norm) + ")");
        }
        return PureState(num_qubits, std::move(amplitudes));
    }

    /// Rescales `amplitudes` to unit norm; throws on the zero vector.
    static PureState normalized(int num_qubits, Vector amplitudes) {
        const double norm = amplitudes.norm();
        if (norm == 0.0) {
            throw ValidationError("cannot normalize the zero vector");
        }
        amplitudes /= norm;
        return from_amplitudes(num_qubits, std::move(amplitudes));
    }

    static PureState basis(int num_qubits, std::uint64_t index) {
        Vector v = Vector::Zero(static_cast<Eigen::Index>(dimension_of(num_qubits)));
        if (index >= dimension_of(num_qubits)) {
            throw DimensionError("basis index out of range");
        }
        v(static_cast<Eigen::Index>(index)) = 1.0;
        return PureState(num_qubits, std::move(v));
    }

    int num_qubits() const { return num_qubits_; }
    std::uint64_t dimension() const { return dimension_of(num_qubits_); }
    const Vector& amplitudes() const { return amplitudes_; }

   private:
    PureState(int n, Vector v) : num_qubits_(n), amplitudes_(std::move(v)) {}

    int num_qubits_;
    Vector amplitudes_;
};

/// Unit-trace positive semi-definite matrix on n qubits.
class DensityMatrix {
   public:
    /// Validates Hermiticity, trace and positivity.
    static DensityMatrix from_matrix(int num_qubits, Matrix m) {
        if (auto err = check(num_qubits, m); !err.empty()) {
            throw ValidationError(err);
        }
        return DensityMatrix(num_qubits, std::move(m));
    }

    /// Skips validation. For outputs of operations that preserve the invariants.
    static DensityMatrix trusted(int num_qubits, Matrix m) { return DensityMatrix(num_qubits, std::move(m)); }

    static DensityMatrix maximally_mixed(int num_qubits) {
        const auto n = static_cast<Eigen::Index>(dimension_of(num_qubits));
        return DensityMatrix(num_qubits, Matrix::Identity(n, n) / static_cast<double>(n));
    }

    /// Empty string when `m` is a valid density matrix, otherwise the reason.
    static std::string check(int num_qubits, const Matrix& m) {
        if (num_qubits < 1) {
            return "density matrix needs at least one qubit";
        }
        const auto n = static_cast<Eigen::Index>(dimension_of(num_qubits));
        if (m.rows() != n || m.cols() != n) {
            return "density matrix shape does not match 2^num_qubits";
        }
        const Tolerances& tol = tolerances();
        if (hermitian_defect(m) > tol.hermitian) {
            return "density matrix is not Hermitian";
        }
        if (std::abs(m.trace() - Complex{1.0, 0.0}) > tol.trace) {
            return "density matrix trace is not 1";
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -tol.psd) {
            return "density matrix is not positive semi-definite";
        }
        return {};
    }

    int num_qubits() const { return num_qubits_; }
    std::uint64_t dimension() const { return dimension_of(num_qubits_); }
    const Matrix& matrix() const { return matrix_; }

   private:
    DensityMatrix(int n, Matrix m) : num_qubits_(n), matrix_(std::move(m)) {}

    int num_qubits_;
    Matrix matrix_;
};

/// Probability vector over labelled outcomes.
struct OutcomeDistribution {
    std::vector<std::string> labels;
    std::vector<double> probabilities;

    std::string check() const {
        if (labels.size() != probabilities.size()) {
            return "outcome labels and probabilities differ in length";
        }
        const Tolerances& tol = tolerances();
        double sum = 0.0;
        for (double p : probabilities) {
            if (p < -tol.distribution_entry || p > 1.0 + tol.distribution_entry) {
                return "probability outside [0,1]";
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > tol.distribution_sum) {
            return "probabilities do not sum to 1";
        }
        return {};
    }
};

inline DensityMatrix pure_to_density(const PureState& psi) {
    const Vector& a = psi.amplitudes();
    return DensityMatrix::trusted(psi.num_qubits(), a * a.adjoint());
}

/// Convex combination sum_k w_k rho_k. Weights must be non-negative and sum to 1.
inline DensityMatrix mix(const std::vector<std::pair<double, DensityMatrix>>& terms) {
    if (terms.empty()) {
        throw ValidationError("mixture needs at least one term");
    }
    const int n = terms.front().second.num_qubits();
    Matrix acc = Matrix::Zero(terms.front().second.matrix().rows(), terms.front().second.matrix().cols());
    double total = 0.0;
    for (const auto& [w, rho] : terms) {
        if (rho.num_qubits() != n) {
            throw DimensionError("mixture terms act on different qubit counts");
        }
        if (w < 0.0) {
            throw ValidationError("mixture weight is negative");
        }
        acc += w * rho.matrix();
        total += w;
    }
    if (std::abs(total - 1.0) > tolerances().distribution_sum) {
        throw ValidationError("mixture weights do not sum to 1");
    }
    return DensityMatrix::trusted(n, std::move(acc));
}

/// Half the trace norm of rho - sigma, via the eigenvalues of the difference.
inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.num_qubits() != sigma.num_qubits()) {
        throw DimensionError("trace_distance: states act on different qubit counts");
    }
    const Matrix diff = rho.matrix() - sigma.matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> es(diff, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// Half the L1 distance between two distributions over the same labels.
inline double tv_distance(const OutcomeDistribution& p, const OutcomeDistribution& q) {
    if (p.labels != q.labels) {
        throw DimensionError("tv_distance: outcome labels differ");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < p.probabilities.size(); ++i) {
        acc += std::abs(p.probabilities[i] - q.probabilities[i]);
    }
    return 0.5 * acc;
}

/// Normalized i.i.d. complex Gaussian vector; deterministic per seed.
inline PureState random_pure_state(int num_qubits, std::uint64_t seed) {
    if (num_qubits < 1) {
        throw ValidationError("random_pure_state needs at least one qubit");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(static_cast<Eigen::Index>(dimension_of(num_qubits)));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v(i) = Complex{re, im};
    }
    return PureState::normalized(num_qubits, std::move(v));
}

/// Convex mixture of `rank` seeded pure states with uniform random weights.
inline DensityMatrix random_mixed_state(int num_qubits, std::uint64_t seed, int rank = 0) {
    if (rank <= 0) {
        rank = static_cast<int>(std::min<std::uint64_t>(dimension_of(num_qubits), 8));
    }
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> w(static_cast<std::size_t>(rank));
    double total = 0.0;
    for (double& x : w) {
        x = unif(rng) + 1e-3;
        total += x;
    }
    const auto n = static_cast<Eigen::Index>(dimension_of(num_qubits));
    Matrix acc = Matrix::Zero(n, n);
    for (int k = 0; k < rank; ++k) {
        const Vector a = random_pure_state(num_qubits, rng()).amplitudes();
        acc += (w[static_cast<std::size_t>(k)] / total) * (a * a.adjoint());
    }
    // Renormalize the trace exactly; the weight sum carries rounding.
    acc /= acc.trace().real();
    return DensityMatrix::trusted(num_qubits, std::move(acc));
}

/// |<a|b>|
inline double overlap_magnitude(const PureState& a, const PureState& b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw DimensionError("overlap: states act on different qubit counts");
    }
    return std::abs(a.amplitudes().dot(b.amplitudes()));
}

}  // namespace qfair
