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

#include <gtest/gtest.h>

#include <random>

#include "qfair/lipschitz_dense.hpp"
#include "qfair/lipschitz_tn.hpp"
#include "support.hpp"

using namespace qfair;

namespace {

double max_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

Matrix dense_m_a(const DecisionModel& m, const std::vector<std::size_t>& subset) {
    const auto dim = static_cast<Eigen::Index>(dimension_of(m.num_qubits()));
    Matrix acc = Matrix::Zero(dim, dim);
    for (std::size_t i : subset) acc += oracle::adjoint(m.circuit(), oracle::effect(m.povm(), i));
    return acc;
}

DecisionModel random_noisy_model(std::mt19937_64& rng, int n) {
    CircuitChannel c = gen::random_unitary_circuit(n, 2 * n + 2, rng);
    gen::append_random_noise(c, rng);
    const CircuitChannel tail = gen::random_unitary_circuit(n, n, rng);
    for (const auto& op : tail.layers()) c.push_back(op);
    return DecisionModel(c, Povm::last_qubit_projective(n));
}

const std::vector<std::size_t> kA{0};
const std::vector<std::size_t> kComp{1};

}  // namespace

TEST(OperatorNetwork, IdentityCircuitContractsToLocalEffect) {
    const auto net = build_operator_network(DecisionModel(CircuitChannel(2), Povm::last_qubit_projective(2)), kA);
    Matrix expect = Matrix::Zero(4, 4);
    expect(0, 0) = expect(2, 2) = 1.0;
    EXPECT_LT(max_diff(net.to_dense(), expect), 1e-15);
    EXPECT_EQ(net.support(), std::vector<int>{1});
}

TEST(OperatorNetwork, FullOutcomeSetContractsToIdentity) {
    std::mt19937_64 rng(1);
    for (int n = 1; n <= 3; ++n) {
        const auto m = random_noisy_model(rng, n);
        const auto dim = static_cast<Eigen::Index>(dimension_of(n));
        const std::vector<std::size_t> all{0, 1};
        EXPECT_LT(max_diff(build_operator_network(m, all).to_dense(), Matrix::Identity(dim, dim)), 1e-9);
    }
}

TEST(OperatorNetwork, NoisyQcnnMatchesDenseEffect) {
    const auto m = build_qcnn({3, std::nullopt, 4, NoiseSpec::parse("depolarizing:0.01")});
    EXPECT_LT(max_diff(build_operator_network(m, kA).to_dense(), dense_m_a(m, kA)), 1e-9);
}

TEST(OperatorNetwork, NodeStructure) {
    const auto m = build_qcnn({8, std::nullopt, 4, NoiseSpec::parse("bit-flip:0.01")});
    const auto net = build_operator_network(m, kA);
    ASSERT_FALSE(net.nodes().empty());
    EXPECT_EQ(net.nodes().front().kind, NodeKind::effect);
    std::size_t gates = 0, adjoints = 0, channels = 0;
    for (const auto& node : net.nodes()) {
        gates += node.kind == NodeKind::gate;
        adjoints += node.kind == NodeKind::gate_adjoint;
        channels += node.kind == NodeKind::channel;
    }
    EXPECT_EQ(gates, adjoints);
    // Only the pooled pair is inside the cone when the noise layer is reached.
    EXPECT_EQ(channels, 2u);
    // Brickwork convolution keeps the backward light cone at four qubits.
    EXPECT_EQ(net.support(), (std::vector<int>{4, 5, 6, 7}));
}

TEST(OperatorNetwork, LightConeStaysConstantForLargeQcnn) {
    const auto m = build_qcnn({24, std::nullopt, 2, NoiseSpec::parse("depolarizing:0.001")});
    EXPECT_EQ(build_operator_network(m, kA).support().size(), 4u);
}

TEST(OperatorNetwork, CapacityGuard) {
    const auto m = build_rotation_entangling({5, 3, 2, std::nullopt, 1, {}});
    EXPECT_THROW(build_operator_network(m, kA, 4), CapacityError);
    EXPECT_NO_THROW(build_operator_network(m, kA, 5));
}

TEST(OperatorNetwork, DiagonalEntryIsAProbability) {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        const auto m = random_noisy_model(rng, 2 + t % 5);
        const Complex e = build_operator_network(m, kA).entry(0, 0);
        EXPECT_NEAR(e.imag(), 0.0, 1e-12);
        EXPECT_GE(e.real(), -1e-9);
        EXPECT_LE(e.real(), 1 + 1e-9);
    }
}

TEST(OperatorNetwork, EntryMatchesDense) {
    const auto m = build_qcnn({6, std::nullopt, 8, NoiseSpec::parse("mixed:0.02")});
    const auto net = build_operator_network(m, kA);
    const Matrix d = net.to_dense();
    for (std::uint64_t r = 0; r < 64; r += 5) {
        for (std::uint64_t c = 0; c < 64; c += 3) {
            EXPECT_LT(std::abs(net.entry(r, c) - d(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))), 1e-15);
        }
    }
    EXPECT_THROW(net.entry(64, 0), DimensionError);
}

TEST(Matvec, IdentityNetworkFixesBasisVectors) {
    const auto m = build_qcnn({3, std::nullopt, 1, NoiseSpec::parse("bit-flip:0.2")});
    const auto net = build_operator_network(m, std::vector<std::size_t>{0, 1});
    for (std::uint64_t i = 0; i < 8; ++i) {
        const Vector e = PureState::basis(3, i).amplitudes();
        EXPECT_LT((net.matvec(e) - e).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Matvec, LinearAndSelfAdjoint) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 10; ++t) {
        const auto m = random_noisy_model(rng, 2 + t % 5);
        const auto net = build_operator_network(m, kA);
        const auto dim = static_cast<Eigen::Index>(dimension_of(m.num_qubits()));
        const Vector u = gen::gaussian(dim, 1, rng), v = gen::gaussian(dim, 1, rng);
        const Complex a(0.3, -1.2), b(-0.7, 0.4);
        EXPECT_LT((net.matvec(a * u + b * v) - a * net.matvec(u) - b * net.matvec(v)).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LT(std::abs(u.dot(net.matvec(v)) - std::conj(v.dot(net.matvec(u)))), 1e-9);
    }
    EXPECT_THROW(build_operator_network(random_noisy_model(rng, 2), kA).matvec(Vector::Zero(3)), DimensionError);
}

TEST(Matvec, AgreesWithDenseUpToTenQubits) {
    std::mt19937_64 rng(4);
    for (int n : {2, 4, 6, 8, 10}) {
        const auto m = n <= 6 ? build_rotation_entangling({n, 3, 2, std::nullopt, rng(), NoiseSpec::parse("depolarizing:0.05")})
                              : build_qcnn({n, std::nullopt, rng(), NoiseSpec::parse("mixed:0.01")});
        const auto net = build_operator_network(m, kA);
        const Matrix w = heisenberg_effects(m)[0];
        const Vector v = gen::gaussian(w.rows(), 1, rng);
        EXPECT_LT((net.matvec(v) - w * v).cwiseAbs().maxCoeff(), 1e-8) << n;
    }
}

TEST(ExtremalEigs, ProjectiveEffect) {
    const DecisionModel m(CircuitChannel(3), Povm::last_qubit_projective(3));
    const auto e = extremal_eigs(build_operator_network(m, kA), build_operator_network(m, kComp), {});
    EXPECT_NEAR(e.lambda_max, 1.0, 1e-12);
    EXPECT_NEAR(e.lambda_min, 0.0, 1e-12);
    for (Eigen::Index i = 1; i < e.psi.size(); i += 2) EXPECT_LT(std::abs(e.psi[i]), 1e-12);
}

TEST(ExtremalEigs, UninformativeIsDegenerate) {
    const DecisionModel m(CircuitChannel(1),
                          Povm::from_effects(1, {0}, {0.5 * Matrix::Identity(2, 2), 0.5 * Matrix::Identity(2, 2)}));
    const auto e = extremal_eigs(build_operator_network(m, kA), build_operator_network(m, kComp), {});
    EXPECT_NEAR(e.lambda_max, 0.5, 1e-12);
    EXPECT_NEAR(e.lambda_min, 0.5, 1e-12);
    const auto r = lipschitz_tn(m);
    EXPECT_TRUE(r.degenerate);
    EXPECT_NEAR(r.k_star, 0.0, 1e-12);
}

TEST(ExtremalEigs, MatchDenseEigenvalues) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 12; ++t) {
        const int n = 2 + t % 9;
        const auto m = n <= 5 ? random_noisy_model(rng, n)
                              : build_qcnn({n, std::nullopt, rng(), NoiseSpec::parse("depolarizing:0.02")});
        const auto e = extremal_eigs(build_operator_network(m, kA), build_operator_network(m, kComp), {});
        const auto d = lipschitz(m);
        EXPECT_NEAR(e.lambda_max, d.lambda_max, 1e-6) << n;
        EXPECT_NEAR(e.lambda_min, d.lambda_min, 1e-6) << n;
        EXPECT_TRUE(e.top.converged && e.bottom.converged);
    }
}

TEST(ExtremalEigs, RayleighQuotientsReproduceEigenvalues) {
    const auto m = build_qcnn({6, std::nullopt, 12, NoiseSpec::parse("bit-flip:0.03")});
    const auto net = build_operator_network(m, kA);
    PowerIterationConfig cfg;
    const auto e = extremal_eigs(net, build_operator_network(m, kComp), cfg);
    EXPECT_NEAR(e.psi.dot(net.matvec(e.psi)).real(), e.lambda_max, cfg.tolerance);
    EXPECT_NEAR(e.phi.dot(net.matvec(e.phi)).real(), e.lambda_min, cfg.tolerance);
}

TEST(PowerIteration, RayleighQuotientIsMonotone) {
    const auto m = build_qcnn({8, std::nullopt, 21, NoiseSpec::parse("phase-flip:0.01")});
    PowerIterationConfig cfg;
    cfg.record_history = true;
    const auto net = build_operator_network(m, kA);
    const Matrix& w = net.support_operator();
    const auto r = power_iteration([&](const Vector& x) -> Vector { return w * x; }, w.rows(), cfg);
    ASSERT_GT(r.history.size(), 2u);
    for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_GE(r.history[i], r.history[i - 1] - 1e-12);
}

TEST(PowerIteration, ReportsNonConvergenceWithResidual) {
    const auto m = build_qcnn({4, std::nullopt, 2, NoiseSpec::parse("bit-flip:0.001")});
    PowerIterationConfig cfg;
    cfg.max_iters = 3;
    const auto r = lipschitz_tn(m, cfg);
    EXPECT_FALSE(r.solver.converged);
    EXPECT_GT(r.solver.residual_max + r.solver.residual_min, 0.0);
    EXPECT_EQ(r.solver.iterations_max, 3);
}

TEST(PowerIteration, DeadlineRaisesTimeout) {
    const auto m = build_qcnn({4, std::nullopt, 2, NoiseSpec::parse("bit-flip:0.001")});
    PowerIterationConfig cfg;
    cfg.tolerance = 1e-300;
    cfg.deadline = std::chrono::steady_clock::now();
    EXPECT_THROW(lipschitz_tn(m, cfg), TimeoutError);
}

TEST(PowerIteration, ConfigValidation) {
    PowerIterationConfig cfg;
    cfg.max_iters = 0;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg.max_iters = 1;
    cfg.tolerance = 0.0;
    EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(LipschitzTn, NoiselessQcnnIsOne) {
    for (int n : {2, 5, 9, 16, 20}) {
        const auto r = lipschitz_tn(build_qcnn({n, std::nullopt, static_cast<std::uint64_t>(n), {}}));
        EXPECT_NEAR(r.k_star, 1.0, 1e-6) << n;
        EXPECT_EQ(r.backend, "tensor-network");
    }
}

TEST(LipschitzTn, GlobalDepolarizingLaw) {
    for (double p : {1e-3, 0.05, 0.3}) {
        auto m = build_qcnn({10, std::nullopt, 3, {}});
        append_global_depolarizing(m, p);
        EXPECT_NEAR(lipschitz_tn(m).k_star, 1.0 - p, 1e-6);
    }
}

TEST(LipschitzTn, EightQubitBitFlipMatchesDense) {
    const auto m = build_qcnn({8, std::nullopt, 1, NoiseSpec::parse("bit-flip:0.01")});
    EXPECT_NEAR(lipschitz_tn(m).k_star, lipschitz(m).k_star, 1e-6);
}

TEST(LipschitzTn, FullSpaceIterationAgreesWithReduced) {
    const auto m = build_qcnn({7, std::nullopt, 6, NoiseSpec::parse("depolarizing:0.05")});
    PowerIterationConfig full;
    full.reduce_to_support = false;
    EXPECT_NEAR(lipschitz_tn(m, full).k_star, lipschitz_tn(m).k_star, 1e-6);
}

TEST(LipschitzTn, MultiOutcomeSweepMatchesDense) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 6; ++t) {
        const int n = 2 + t % 3;
        CircuitChannel c = gen::random_unitary_circuit(n, 3 * n, rng);
        gen::append_random_noise(c, rng);
        const DecisionModel m(c, gen::random_povm(n, {n - 1}, 3 + t % 2, rng));
        const auto d = lipschitz(m), tn = lipschitz_tn(m);
        EXPECT_NEAR(tn.k_star, d.k_star, 1e-6);
        EXPECT_EQ(tn.subset_spreads.size(), d.subset_spreads.size());
    }
}

TEST(LipschitzTn, KernelIsOrthogonalAndOptimal) {
    const auto m = build_qcnn({9, std::nullopt, 31, NoiseSpec::parse("mixed:0.01")});
    const auto r = lipschitz_tn(m);
    EXPECT_LT(std::abs(r.kernel_psi.amplitudes().dot(r.kernel_phi.amplitudes())), 1e-9);
    EXPECT_NEAR(tv_distance(forward(m, r.kernel_psi), forward(m, r.kernel_phi)), r.k_star, 1e-9);
}
