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
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "qfair/channel.hpp"
#include "qfair/common.hpp"
#include "qfair/kernels.hpp"
#include "qfair/lipschitz_dense.hpp"
#include "qfair/model.hpp"

namespace qfair {

struct PowerIterationConfig {
    long max_iters = 1000000;
    /// Bound on both the per-step eigenvalue change and the residual norm.
    double tolerance = 1e-7;
    std::uint64_t seed = 0;
    /// Iterate on the contracted light-cone operator instead of the full space.
    bool reduce_to_support = true;
    bool record_history = false;
    std::optional<std::chrono::steady_clock::time_point> deadline;
    int max_support_qubits = 12;

    void validate() const {
        if (max_iters < 1) throw ValidationError("max_iters must be at least 1");
        if (!(tolerance > 0.0)) throw ValidationError("tolerance must be positive");
        if (max_support_qubits < 1) throw ValidationError("max_support_qubits must be at least 1");
    }
};

enum class NodeKind { effect, gate, gate_adjoint, channel, global_depolarizing };

/// One tensor of the double-layer network. Gate nodes hold a single matrix,
/// channel nodes hold their Kraus operators.
struct NetworkNode {
    NodeKind kind;
    std::vector<int> targets;
    std::vector<Matrix> tensors;
    double probability = 0.0;
};

/// M_A = sum_{i in A} E^dagger(M_i) as a network rooted at the local effect.
/// Operations outside the backward light cone of the effect act trivially
/// (adjoints of trace-preserving maps fix the identity) and are pruned, so the
/// network only touches the support qubits and is contracted exactly into a
/// 2^|S| x 2^|S| block. The full operator is I_rest (x) W_S.
class OperatorNetwork {
   public:
    int num_qubits() const { return num_qubits_; }
    const std::vector<NetworkNode>& nodes() const { return nodes_; }
    const std::vector<int>& support() const { return support_; }
    const Matrix& support_operator() const { return w_; }
    const std::vector<std::size_t>& subset() const { return subset_; }

    Vector matvec(const Vector& v) const {
        if (static_cast<std::uint64_t>(v.size()) != dimension_of(num_qubits_)) {
            throw DimensionError("matvec: vector length does not match 2^n");
        }
        Vector out = v;
        kernels::apply_to_vector(out, w_, support_, num_qubits_);
        return out;
    }

    Complex entry(std::uint64_t row, std::uint64_t col) const {
        const std::uint64_t dim = dimension_of(num_qubits_);
        if (row >= dim || col >= dim) throw DimensionError("entry index out of range");
        const kernels::LocalIndexer ix(num_qubits_, support_);
        if ((row & ~ix.target_mask()) != (col & ~ix.target_mask())) return {0.0, 0.0};
        return w_(static_cast<Eigen::Index>(local_index(row)), static_cast<Eigen::Index>(local_index(col)));
    }

    Matrix to_dense() const {
        if (num_qubits_ > 12) throw CapacityError("to_dense is limited to 12 qubits");
        return kernels::embed_dense(w_, support_, num_qubits_);
    }

    /// Places a support-register vector into the full space with every other
    /// qubit in |0>.
    Vector lift(const Vector& local) const {
        const kernels::LocalIndexer ix(num_qubits_, support_);
        Vector full = Vector::Zero(static_cast<Eigen::Index>(dimension_of(num_qubits_)));
        for (std::size_t l = 0; l < ix.offsets().size(); ++l) {
            full[static_cast<Eigen::Index>(ix.offsets()[l])] = local[static_cast<Eigen::Index>(l)];
        }
        return full;
    }

   private:
    friend OperatorNetwork build_operator_network(const DecisionModel&, const std::vector<std::size_t>&, int);

    std::uint64_t local_index(std::uint64_t full) const {
        std::uint64_t l = 0;
        for (int q : support_) l = (l << 1) | ((full >> (num_qubits_ - 1 - q)) & 1u);
        return l;
    }

    int num_qubits_ = 0;
    std::vector<NetworkNode> nodes_;
    std::vector<int> support_;
    Matrix w_;
    std::vector<std::size_t> subset_;
};

/// Builds and contracts the network for the outcome indices in `subset`.
inline OperatorNetwork build_operator_network(const DecisionModel& model, const std::vector<std::size_t>& subset,
                                              int max_support_qubits = 12) {
    const Povm& povm = model.povm();
    const int n = model.num_qubits();
    OperatorNetwork net;
    net.num_qubits_ = n;
    net.subset_ = subset;

    const auto d = static_cast<Eigen::Index>(povm.local_effects().front().rows());
    Matrix effect = Matrix::Zero(d, d);
    for (std::size_t i : subset) {
        if (i >= povm.size()) throw ValidationError("subset refers to an unknown outcome");
        effect += povm.local_effects()[i];
    }
    net.nodes_.push_back({NodeKind::effect, povm.targets(), {effect}, 0.0});

    std::set<int> support(povm.targets().begin(), povm.targets().end());
    const auto& layers = model.circuit().layers();
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
        const LocalOp& op = *it;
        if (op.kind() == OpKind::global_depolarizing) {
            net.nodes_.push_back({NodeKind::global_depolarizing, {}, {}, op.probability()});
            continue;
        }
        const bool touches = std::any_of(op.targets().begin(), op.targets().end(),
                                         [&](int q) { return support.count(q) > 0; });
        if (!touches) continue;
        support.insert(op.targets().begin(), op.targets().end());
        if (op.is_unitary()) {
            const Matrix& u = op.kraus().front();
            net.nodes_.push_back({NodeKind::gate_adjoint, op.targets(), {u.adjoint()}, 0.0});
            net.nodes_.push_back({NodeKind::gate, op.targets(), {u}, 0.0});
        } else {
            net.nodes_.push_back({NodeKind::channel, op.targets(), op.kraus(), 0.0});
        }
    }
    net.support_.assign(support.begin(), support.end());
    if (static_cast<int>(net.support_.size()) > max_support_qubits) {
        throw CapacityError("light cone spans " + std::to_string(net.support_.size()) +
                            " qubits, above the contraction limit of " + std::to_string(max_support_qubits));
    }

    // Contract on a register holding only the support qubits, in ascending order.
    const int k = static_cast<int>(net.support_.size());
    std::vector<int> pos(static_cast<std::size_t>(n), -1);
    for (int j = 0; j < k; ++j) pos[static_cast<std::size_t>(net.support_[static_cast<std::size_t>(j)])] = j;
    auto local = [&](const std::vector<int>& t) {
        std::vector<int> out;
        for (int q : t) out.push_back(pos[static_cast<std::size_t>(q)]);
        return out;
    };

    Matrix w = kernels::embed_dense(effect, local(povm.targets()), k);
    const double kdim = static_cast<double>(dimension_of(k));
    for (std::size_t i = 1; i < net.nodes_.size(); ++i) {
        const NetworkNode& node = net.nodes_[i];
        switch (node.kind) {
            case NodeKind::gate_adjoint:
                kernels::apply_left(w, node.tensors.front(), local(node.targets), k);
                break;
            case NodeKind::gate:
                kernels::apply_right(w, node.tensors.front(), local(node.targets), k);
                break;
            case NodeKind::channel:
                w = kernels::conjugate_kraus_adjoint(w, node.tensors, local(node.targets), k);
                break;
            case NodeKind::global_depolarizing: {
                const Complex tr = w.trace();
                w *= (1.0 - node.probability);
                w.diagonal().array() += node.probability * tr / kdim;
                break;
            }
            case NodeKind::effect:
                break;
        }
    }
    net.w_ = 0.5 * (w + w.adjoint());
    return net;
}

inline OperatorNetwork build_operator_network(const DecisionModel& model, const std::vector<std::string>& labels,
                                              int max_support_qubits = 12) {
    std::vector<std::size_t> subset;
    for (const auto& l : labels) {
        const auto& all = model.povm().labels();
        const auto it = std::find(all.begin(), all.end(), l);
        if (it == all.end()) throw ValidationError("unknown outcome label '" + l + "'");
        subset.push_back(static_cast<std::size_t>(it - all.begin()));
    }
    return build_operator_network(model, subset, max_support_qubits);
}

struct PowerResult {
    double eigenvalue = 0.0;
    Vector vector;
    long iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::vector<double> history;
};

/// Power method for the largest eigenvalue of a positive semi-definite
/// operator given by its action. Stops once both the Rayleigh-quotient change
/// and the residual norm fall below the tolerance.
inline PowerResult power_iteration(const std::function<Vector(const Vector&)>& op, Eigen::Index dim,
                                   const PowerIterationConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = Complex{g(rng), g(rng)};
    v.normalize();

    PowerResult res;
    Vector mv = op(v);
    double theta = v.dot(mv).real();
    if (cfg.record_history) res.history.push_back(theta);
    for (long it = 1; it <= cfg.max_iters; ++it) {
        if (cfg.deadline && (it & 63) == 0 && std::chrono::steady_clock::now() > *cfg.deadline) {
            throw TimeoutError("power iteration exceeded its deadline");
        }
        const double norm = mv.norm();
        if (norm < 1e-300) {
            res.eigenvalue = 0.0;
            res.vector = v;
            res.iterations = it;
            res.converged = true;
            return res;
        }
        v = mv / norm;
        mv = op(v);
        const double next = v.dot(mv).real();
        const double residual = (mv - next * v).norm();
        if (cfg.record_history) res.history.push_back(next);
        const double change = std::abs(next - theta);
        theta = next;
        res.iterations = it;
        res.residual = residual;
        if (change <= cfg.tolerance && residual <= cfg.tolerance) {
            res.converged = true;
            break;
        }
    }
    res.eigenvalue = theta;
    res.vector = v;
    return res;
}

struct ExtremalEigs {
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    Vector psi;
    Vector phi;
    PowerResult top;
    PowerResult bottom;
};

/// lambda_max(M_A) directly, lambda_min(M_A) = 1 - lambda_max(M_{O\A}).
/// Returned vectors live in the full 2^n space.
inline ExtremalEigs extremal_eigs(const OperatorNetwork& net_a, const OperatorNetwork& net_c,
                                  const PowerIterationConfig& cfg) {
    if (net_a.num_qubits() != net_c.num_qubits()) {
        throw DimensionError("extremal_eigs: networks act on different qubit counts");
    }
    ExtremalEigs out;
    auto run = [&](const OperatorNetwork& net, std::uint64_t seed) {
        PowerIterationConfig c = cfg;
        c.seed = seed;
        if (cfg.reduce_to_support) {
            const Matrix& w = net.support_operator();
            PowerResult r = power_iteration([&](const Vector& x) -> Vector { return w * x; }, w.rows(), c);
            r.vector = net.lift(r.vector);
            return r;
        }
        return power_iteration([&](const Vector& x) { return net.matvec(x); },
                               static_cast<Eigen::Index>(dimension_of(net.num_qubits())), c);
    };
    out.top = run(net_a, cfg.seed);
    out.bottom = run(net_c, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    out.lambda_max = out.top.eigenvalue;
    out.lambda_min = 1.0 - out.bottom.eigenvalue;
    out.psi = out.top.vector;
    out.phi = out.bottom.vector;
    return out;
}

/// Subset sweep with the power method in place of the full eigensolver.
inline LipschitzReport lipschitz_tn(const DecisionModel& model, const PowerIterationConfig& cfg = {}) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const Povm& povm = model.povm();
    const int n = model.num_qubits();
    const auto subsets = pivot_subsets(povm.size());

    LipschitzReport rep;
    rep.backend = "tensor-network";
    double best = -1.0;
    Vector best_psi, best_phi;
    std::optional<OperatorNetwork> best_net;
    bool all_converged = true;
    for (const auto& s : subsets) {
        const OperatorNetwork net_a = build_operator_network(model, s, cfg.max_support_qubits);
        const OperatorNetwork net_c =
            build_operator_network(model, complement_of(s, povm.size()), cfg.max_support_qubits);
        ExtremalEigs e = extremal_eigs(net_a, net_c, cfg);
        all_converged = all_converged && e.top.converged && e.bottom.converged;

        // Gram-Schmidt keeps the pair exactly orthogonal; the reported
        // eigenvalues are the Rayleigh quotients of the final vectors.
        Vector psi = e.psi.normalized();
        Vector phi = e.phi - psi.dot(e.phi) * psi;
        const double phi_norm = phi.norm();
        double lmax = net_a.matvec(psi).dot(psi).real();
        double lmin = lmax;
        if (phi_norm > 1e-12) {
            phi /= phi_norm;
            lmin = phi.dot(net_a.matvec(phi)).real();
        }
        const double spread = lmax - lmin;
        auto labels = subset_labels(povm, s);
        rep.subset_spreads[subset_key(labels)] = spread;
        if (spread > best || (spread == best && detail::subset_less(labels, rep.optimal_subset))) {
            best = spread;
            rep.optimal_subset = labels;
            rep.lambda_max = lmax;
            rep.lambda_min = lmin;
            best_psi = psi;
            best_phi = phi;
            rep.solver.iterations_max = e.top.iterations;
            rep.solver.iterations_min = e.bottom.iterations;
            rep.solver.residual_max = e.top.residual;
            rep.solver.residual_min = e.bottom.residual;
        }
    }
    rep.solver.converged = all_converged;
    rep.k_star = std::max(best, 0.0);
    if (subsets.empty() || rep.k_star <= tolerances().degenerate_spread) {
        rep.degenerate = true;
        rep.kernel_psi = PureState::basis(n, 0);
        rep.kernel_phi = PureState::basis(n, 1);
        if (subsets.empty()) rep.lambda_max = rep.lambda_min = 1.0;
    } else {
        normalize_phase(best_psi);
        normalize_phase(best_phi);
        rep.kernel_psi = PureState::normalized(n, best_psi);
        rep.kernel_phi = PureState::normalized(n, best_phi);
    }
    rep.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace qfair
