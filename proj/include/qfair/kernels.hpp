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

// Index kernels for applying a k-local operator to vectors and matrices on an
// n-qubit register. Qubit 0 is the most significant bit of a basis index, and
// inside a local operator targets[0] is the most significant local bit.

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "qfair/common.hpp"

namespace qfair::kernels {

/// Offsets and base enumeration for one set of target qubits.
class LocalIndexer {
   public:
    LocalIndexer(int num_qubits, std::span<const int> targets)
        : num_qubits_(num_qubits), k_(static_cast<int>(targets.size())) {
        if (k_ == 0 || k_ > num_qubits) {
            throw DimensionError("local operator must act on 1..n qubits");
        }
        std::uint64_t seen = 0;
        for (int t : targets) {
            if (t < 0 || t >= num_qubits) {
                throw DimensionError("target qubit " + std::to_string(t) + " out of range for " +
                                     std::to_string(num_qubits) + " qubits");
            }
            std::uint64_t bit = std::uint64_t{1} << (num_qubits - 1 - t);
            if (seen & bit) {
                throw DimensionError("duplicate target qubit " + std::to_string(t));
            }
            seen |= bit;
            positions_.push_back(num_qubits - 1 - t);
        }
        target_mask_ = seen;
        offsets_.resize(std::size_t{1} << k_);
        for (std::size_t l = 0; l < offsets_.size(); ++l) {
            std::uint64_t off = 0;
            for (int j = 0; j < k_; ++j) {
                if ((l >> (k_ - 1 - j)) & 1u) {
                    off |= std::uint64_t{1} << positions_[j];
                }
            }
            offsets_[l] = off;
        }
        sorted_positions_ = positions_;
        std::sort(sorted_positions_.begin(), sorted_positions_.end());
    }

    int arity() const { return k_; }
    int num_qubits() const { return num_qubits_; }
    std::uint64_t num_bases() const { return std::uint64_t{1} << (num_qubits_ - k_); }
    std::uint64_t target_mask() const { return target_mask_; }
    const std::vector<std::uint64_t>& offsets() const { return offsets_; }

    /// Index with all target bits zero whose remaining bits spell `b`.
    std::uint64_t base(std::uint64_t b) const {
        for (int pos : sorted_positions_) {
            std::uint64_t low = b & ((std::uint64_t{1} << pos) - 1);
            b = ((b >> pos) << (pos + 1)) | low;
        }
        return b;
    }

   private:
    int num_qubits_;
    int k_;
    std::vector<int> positions_;
    std::vector<int> sorted_positions_;
    std::vector<std::uint64_t> offsets_;
    std::uint64_t target_mask_ = 0;
};

/// Next index after i whose bits under `mask` are all zero.
inline std::uint64_t next_base(std::uint64_t i, std::uint64_t mask) { return ((i | mask) + 1) & ~mask; }

inline void check_shape(const LocalIndexer& ix, const Matrix& op) {
    const auto d = static_cast<Eigen::Index>(ix.offsets().size());
    if (op.rows() != d || op.cols() != d) {
        throw DimensionError("local operator shape does not match target count");
    }
}

/// data[i * stride] <- (op embedded on targets) applied to the strided vector.
inline void apply_strided(Complex* data, std::ptrdiff_t stride, const LocalIndexer& ix, const Matrix& op) {
    check_shape(ix, op);
    const auto& off = ix.offsets();
    const std::size_t d = off.size();
    const std::uint64_t mask = ix.target_mask();
    const std::uint64_t end = std::uint64_t{1} << ix.num_qubits();
    std::vector<Complex> in(d);
    for (std::uint64_t base = 0; base < end; base = next_base(base, mask)) {
        for (std::size_t l = 0; l < d; ++l) in[l] = data[static_cast<std::ptrdiff_t>(base + off[l]) * stride];
        for (std::size_t r = 0; r < d; ++r) {
            Complex acc{0.0, 0.0};
            for (std::size_t c = 0; c < d; ++c) acc += op(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * in[c];
            data[static_cast<std::ptrdiff_t>(base + off[r]) * stride] = acc;
        }
    }
}

inline void apply_to_vector(Vector& v, const Matrix& op, std::span<const int> targets, int num_qubits) {
    LocalIndexer ix(num_qubits, targets);
    apply_strided(v.data(), 1, ix, op);
}

/// x <- op_embedded * x
inline void apply_left(Matrix& x, const Matrix& op, std::span<const int> targets, int num_qubits) {
    LocalIndexer ix(num_qubits, targets);
    const Eigen::Index n = x.rows();
    for (Eigen::Index c = 0; c < x.cols(); ++c) apply_strided(x.data() + c * n, 1, ix, op);
}

/// x <- x * op_embedded. Columns are mixed whole so memory is read in order.
inline void apply_right(Matrix& x, const Matrix& op, std::span<const int> targets, int num_qubits) {
    LocalIndexer ix(num_qubits, targets);
    check_shape(ix, op);
    const auto& off = ix.offsets();
    const std::size_t d = off.size();
    const std::uint64_t mask = ix.target_mask();
    const std::uint64_t end = std::uint64_t{1} << num_qubits;
    const Eigen::Index rows = x.rows();
    Matrix block(rows, static_cast<Eigen::Index>(d));
    for (std::uint64_t base = 0; base < end; base = next_base(base, mask)) {
        for (std::size_t l = 0; l < d; ++l) block.col(static_cast<Eigen::Index>(l)) = x.col(static_cast<Eigen::Index>(base + off[l]));
        for (std::size_t c = 0; c < d; ++c) {
            auto dst = x.col(static_cast<Eigen::Index>(base + off[c]));
            dst = block.col(0) * op(0, static_cast<Eigen::Index>(c));
            for (std::size_t l = 1; l < d; ++l) {
                dst += block.col(static_cast<Eigen::Index>(l)) * op(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(c));
            }
        }
    }
}

/// Sum_j K_j x K_j^dagger (Schroedinger picture).
inline Matrix conjugate_kraus(const Matrix& x, std::span<const Matrix> kraus, std::span<const int> targets,
                              int num_qubits) {
    if (kraus.size() == 1) {
        Matrix out = x;
        apply_left(out, kraus[0], targets, num_qubits);
        apply_right(out, kraus[0].adjoint(), targets, num_qubits);
        return out;
    }
    Matrix acc = Matrix::Zero(x.rows(), x.cols());
    for (const Matrix& k : kraus) {
        Matrix term = x;
        apply_left(term, k, targets, num_qubits);
        apply_right(term, k.adjoint(), targets, num_qubits);
        acc += term;
    }
    return acc;
}

/// Sum_j K_j^dagger x K_j (Heisenberg picture).
inline Matrix conjugate_kraus_adjoint(const Matrix& x, std::span<const Matrix> kraus,
                                      std::span<const int> targets, int num_qubits) {
    if (kraus.size() == 1) {
        Matrix out = x;
        apply_left(out, kraus[0].adjoint(), targets, num_qubits);
        apply_right(out, kraus[0], targets, num_qubits);
        return out;
    }
    Matrix acc = Matrix::Zero(x.rows(), x.cols());
    for (const Matrix& k : kraus) {
        Matrix term = x;
        apply_left(term, k.adjoint(), targets, num_qubits);
        apply_right(term, k, targets, num_qubits);
        acc += term;
    }
    return acc;
}

/// tr((I (x) m) x) without building the embedded operator.
inline Complex local_expectation(const Matrix& x, const Matrix& m, std::span<const int> targets, int num_qubits) {
    LocalIndexer ix(num_qubits, targets);
    const auto& off = ix.offsets();
    const std::size_t d = off.size();
    Complex acc{0.0, 0.0};
    const std::uint64_t end = std::uint64_t{1} << num_qubits;
    for (std::uint64_t base = 0; base < end; base = next_base(base, ix.target_mask())) {
        for (std::size_t l = 0; l < d; ++l) {
            for (std::size_t lp = 0; lp < d; ++lp) {
                acc += m(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(lp)) *
                       x(static_cast<Eigen::Index>(base + off[lp]), static_cast<Eigen::Index>(base + off[l]));
            }
        }
    }
    return acc;
}

/// Full N x N matrix of `op` acting on `targets`, identity elsewhere.
inline Matrix embed_dense(const Matrix& op, std::span<const int> targets, int num_qubits) {
    Matrix out = Matrix::Identity(static_cast<Eigen::Index>(dimension_of(num_qubits)),
                                  static_cast<Eigen::Index>(dimension_of(num_qubits)));
    apply_left(out, op, targets, num_qubits);
    return out;
}

}  // namespace qfair::kernels
