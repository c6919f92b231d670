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
#include <chrono>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <lapacke.h>

#include "qfair/channel.hpp"
#include "qfair/common.hpp"
#include "qfair/measurement.hpp"
#include "qfair/model.hpp"
#include "qfair/qstate.hpp"

namespace qfair {

/// Power-iteration bookkeeping; the dense backend leaves the defaults.
struct SolverDiagnostics {
    bool converged = true;
    long iterations_max = 0;
    long iterations_min = 0;
    double residual_max = 0.0;
    double residual_min = 0.0;
};

struct LipschitzReport {
    double k_star = 0.0;
    std::vector<std::string> optimal_subset;
    PureState kernel_psi = PureState::basis(1, 0);
    PureState kernel_phi = PureState::basis(1, 1);
    /// Keyed by subset_key(); holds every subset visited by the sweep.
    std::map<std::string, double> subset_spreads;
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    bool degenerate = false;
    double wall_time_seconds = 0.0;
    std::string backend = "dense";
    SolverDiagnostics solver;
};

/// "{a,b}" with labels in the given order.
inline std::string subset_key(const std::vector<std::string>& subset) {
    std::string key = "{";
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (i) key += ',';
        key += subset[i];
    }
    return key + "}";
}

/// Outcome-index subsets that contain outcome 0, excluding the full set.
/// Complements carry the same spread so the other half is never visited.
inline std::vector<std::vector<std::size_t>> pivot_subsets(std::size_t num_outcomes) {
    if (num_outcomes > 20) {
        throw CapacityError("outcome set too large for subset enumeration (|O| > 20)");
    }
    std::vector<std::vector<std::size_t>> out;
    if (num_outcomes < 2) return out;
    const std::uint64_t rest = num_outcomes - 1;
    const std::uint64_t full = (std::uint64_t{1} << rest) - 1;
    for (std::uint64_t m = 0; m < full; ++m) {
        std::vector<std::size_t> s{0};
        for (std::uint64_t j = 0; j < rest; ++j) {
            if ((m >> j) & 1u) s.push_back(j + 1);
        }
        out.push_back(std::move(s));
    }
    return out;
}

inline std::vector<std::size_t> complement_of(const std::vector<std::size_t>& subset, std::size_t num_outcomes) {
    std::vector<bool> in(num_outcomes, false);
    for (std::size_t i : subset) in[i] = true;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < num_outcomes; ++i) {
        if (!in[i]) out.push_back(i);
    }
    return out;
}

inline std::vector<std::string> subset_labels(const Povm& povm, const std::vector<std::size_t>& subset) {
    std::vector<std::string> out;
    for (std::size_t i : subset) out.push_back(povm.labels()[i]);
    return out;
}

/// Rotates v so that its largest-magnitude entry is real and positive.
inline void normalize_phase(Vector& v) {
    Eigen::Index best = 0;
    double mag = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > mag + 1e-12) {
            mag = std::abs(v[i]);
            best = i;
        }
    }
    if (mag > 0.0) v *= std::conj(v[best]) / mag;
}

/// W_i = E^dagger(M_i) for each effect, in POVM label order.
inline std::vector<Matrix> heisenberg_effects(const DecisionModel& model) {
    std::vector<Matrix> out;
    out.reserve(model.povm().size());
    for (std::size_t i = 0; i < model.povm().size(); ++i) {
        out.push_back(adjoint_apply(model.circuit(), model.povm().effect(i)));
    }
    return out;
}

namespace detail {

inline Matrix heisenberg_effect(const DecisionModel& model, std::size_t i) {
    return adjoint_apply(model.circuit(), model.povm().effect(i));
}

struct Eigenpair {
    double value = 0.0;
    Vector vector;
};

/// Eigenpair number `index` (0 = smallest) of a Hermitian matrix. LAPACK's
/// zheevr finds just the requested pair, which is far cheaper than a full
/// decomposition at 2^10 and up. Only the upper triangle is read.
inline Eigenpair hermitian_eigenpair(const Matrix& m, Eigen::Index index) {
    const auto n = static_cast<lapack_int>(m.rows());
    const auto which = static_cast<lapack_int>(index) + 1;
    Matrix a = m;
    std::vector<double> w(static_cast<std::size_t>(n));
    Vector z(m.rows());
    std::vector<lapack_int> support(2);
    lapack_int found = 0;
    // std::complex<double> and LAPACK's complex type share one layout.
    auto* pa = reinterpret_cast<lapack_complex_double*>(a.data());
    auto* pz = reinterpret_cast<lapack_complex_double*>(z.data());
    const lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, pa, n, 0.0, 0.0, which, which,
                                           2.0 * LAPACKE_dlamch('S'), &found, w.data(), pz, n, support.data());
    if (info != 0 || found != 1) {
        throw Error("Hermitian eigensolver failed (zheevr info " + std::to_string(info) + ")");
    }
    return {w[0], std::move(z)};
}

inline bool subset_less(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::string> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return sa < sb;
}

}  // namespace detail

inline LipschitzReport lipschitz(const DecisionModel& model) {
    const auto t0 = std::chrono::steady_clock::now();
    const Povm& povm = model.povm();
    const int n = model.num_qubits();
    const auto dim = static_cast<Eigen::Index>(dimension_of(n));
    const auto subsets = pivot_subsets(povm.size());

    std::vector<Matrix> w;
    if (povm.size() == 2) {
        w.push_back(detail::heisenberg_effect(model, 0));
    } else if (povm.size() > 2) {
        w = heisenberg_effects(model);
    }

    LipschitzReport rep;
    rep.backend = "dense";
    Vector best_top, best_bottom;
    double best = -1.0;
    for (const auto& s : subsets) {
        Matrix m = Matrix::Zero(dim, dim);
        for (std::size_t i : s) m += w[i];
        m = (0.5 * (m + m.adjoint())).eval();
        auto bottom = detail::hermitian_eigenpair(m, 0);
        auto top = detail::hermitian_eigenpair(m, dim - 1);
        const double spread = top.value - bottom.value;
        auto labels = subset_labels(povm, s);
        rep.subset_spreads[subset_key(labels)] = spread;
        if (spread > best || (spread == best && detail::subset_less(labels, rep.optimal_subset))) {
            best = spread;
            rep.optimal_subset = labels;
            rep.lambda_max = top.value;
            rep.lambda_min = bottom.value;
            best_top = std::move(top.vector);
            best_bottom = std::move(bottom.vector);
        }
    }

    rep.k_star = std::max(best, 0.0);
    if (subsets.empty() || rep.k_star <= tolerances().degenerate_spread) {
        rep.degenerate = true;
        rep.kernel_psi = PureState::basis(n, 0);
        rep.kernel_phi = PureState::basis(n, 1);
        if (subsets.empty()) {
            rep.lambda_max = rep.lambda_min = 1.0;
        }
    } else {
        normalize_phase(best_top);
        normalize_phase(best_bottom);
        rep.kernel_psi = PureState::normalized(n, best_top);
        rep.kernel_phi = PureState::normalized(n, best_bottom);
    }
    rep.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

/// Optimal success probability of telling rho from sigma with the POVM:
/// 1/2 + 1/4 sum_i |tr(M_i (rho - sigma))|.
inline double distinguishability(const Povm& povm, const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.num_qubits() != povm.num_qubits() || sigma.num_qubits() != povm.num_qubits()) {
        throw DimensionError("distinguishability: states and POVM act on different qubit counts");
    }
    const Matrix diff = rho.matrix() - sigma.matrix();
    double acc = 0.0;
    for (const Matrix& e : povm.local_effects()) {
        acc += std::abs(kernels::local_expectation(diff, e, povm.targets(), povm.num_qubits()).real());
    }
    return 0.5 + 0.25 * acc;
}

namespace detail {

inline Vector gaussian_vector(Eigen::Index dim, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = Complex{g(rng), g(rng)};
    return v;
}

/// Normalizes psi, then makes phi a unit vector orthogonal to it.
inline bool orthonormalize(Vector& psi, Vector& phi) {
    const double np = psi.norm();
    if (np < 1e-300) return false;
    psi /= np;
    phi -= psi.dot(phi) * psi;
    const double nf = phi.norm();
    if (nf < 1e-12) return false;
    phi /= nf;
    return true;
}

inline double pair_output_distance(const DecisionModel& model, const Vector& psi, const Vector& phi) {
    const int n = model.num_qubits();
    const auto a = forward(model, DensityMatrix::trusted(n, psi * psi.adjoint()));
    const auto b = forward(model, DensityMatrix::trusted(n, phi * phi.adjoint()));
    return tv_distance(a, b);
}

}  // namespace detail

/// Brute-force lower bound on K*: the best output distance over sampled
/// orthogonal pure pairs. Half the budget draws uniform pairs, the other half
/// refines the best one by adaptive local perturbation. Evaluated through the
/// forward map only, so it shares no code with the eigenvalue route.
inline double oracle_k_star(const DecisionModel& model, std::size_t num_samples, std::uint64_t seed) {
    const int n = model.num_qubits();
    if (n > 4) {
        throw CapacityError("oracle_k_star is limited to at most 4 qubits");
    }
    const auto dim = static_cast<Eigen::Index>(dimension_of(n));
    std::mt19937_64 rng(seed);
    double best = 0.0;
    Vector best_psi, best_phi;

    const std::size_t uniform = num_samples - num_samples / 2;
    for (std::size_t s = 0; s < uniform; ++s) {
        Vector psi = detail::gaussian_vector(dim, rng);
        Vector phi = detail::gaussian_vector(dim, rng);
        if (!detail::orthonormalize(psi, phi)) continue;
        const double d = detail::pair_output_distance(model, psi, phi);
        if (d > best || best_psi.size() == 0) {
            best = d;
            best_psi = psi;
            best_phi = phi;
        }
    }

    double step = 0.3;
    for (std::size_t s = uniform; s < num_samples && best_psi.size() > 0; ++s) {
        Vector psi = best_psi + detail::gaussian_vector(dim, rng, step);
        Vector phi = best_phi + detail::gaussian_vector(dim, rng, step);
        if (!detail::orthonormalize(psi, phi)) continue;
        const double d = detail::pair_output_distance(model, psi, phi);
        if (d > best) {
            best = d;
            best_psi = psi;
            best_phi = phi;
            step = std::min(step * 1.5, 1.0);
        } else {
            step *= 0.97;
            if (step < 1e-7) step = 0.3;
        }
    }
    return best;
}

}  // namespace qfair
