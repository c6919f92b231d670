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

#include <filesystem>
#include <random>

#include "qfair/report.hpp"
#include "support.hpp"

using namespace qfair;

namespace {

DecisionModel mixed_layer_model() {
    std::mt19937_64 rng(21);
    CircuitChannel c(3);
    c.push_back(LocalOp::gate("RY", {0}, {0.3}));
    c.push_back(LocalOp::gate("CRX", {0, 2}, {1.1}));
    c.push_back(LocalOp::gate("QCONV", {1, 2}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}));
    c.push_back(LocalOp::unitary(gen::random_unitary(4, rng), {2, 0}));
    c.push_back(LocalOp::noise("bit-phase-flip", 0.1, 1));
    c.push_back(LocalOp::raw_kraus(gen::random_kraus(2, 3, rng), {1}));
    c.push_back(LocalOp::global_depolarizing(0.05));
    return DecisionModel(std::move(c), gen::random_povm(3, {0, 1}, 3, rng), "mixed-layers", {{"origin", "test"}});
}

double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(ModelJson, RoundTripPreservesBehaviour) {
    const auto m = mixed_layer_model();
    const json j = model_to_json(m);
    const auto back = model_from_json(json::parse(j.dump()));
    EXPECT_EQ(back.name(), "mixed-layers");
    EXPECT_EQ(back.metadata().at("origin"), "test");
    EXPECT_EQ(model_to_json(back), j);

    std::mt19937_64 rng(4);
    for (int t = 0; t < 5; ++t) {
        const auto rho = gen::random_density(3, rng);
        const auto a = forward(m, rho), b = forward(back, rho);
        ASSERT_EQ(a.labels, b.labels);
        for (std::size_t i = 0; i < a.probabilities.size(); ++i) {
            EXPECT_NEAR(a.probabilities[i], b.probabilities[i], 1e-14);
        }
    }
}

TEST(ModelJson, BuiltModelsRoundTripThroughFiles) {
    const auto path = (std::filesystem::temp_directory_path() / "qfair_model_rt.json").string();
    for (const auto& m : {build_qcnn({5, std::nullopt, 3, NoiseSpec::parse("mixed:0.02")}),
                          build_rotation_entangling({4, 3, 2, std::nullopt, 8, NoiseSpec::parse("phase-flip:0.1")})}) {
        save_model(m, path);
        const auto back = load_model(path);
        EXPECT_EQ(model_to_json(back), model_to_json(m));
        EXPECT_NEAR(lipschitz(back).k_star, lipschitz(m).k_star, 1e-12);
    }
    std::filesystem::remove(path);
}

TEST(ModelJson, RawMeasurementOperators) {
    const json j = json::parse(R"({
        "num_qubits": 2,
        "layers": [],
        "measurement": {"raw_ops": [[[0.5, 0], [0, 0.5]], [[0.5, 0], [0, 0.5]],
                                    [[0.5, 0], [0, 0.5]], [[0.5, 0], [0, 0.5]]],
                        "targets": [1], "labels": ["a", "b", "c", "d"]}
    })");
    const auto m = model_from_json(j);
    EXPECT_EQ(m.povm().labels().size(), 4u);
    EXPECT_LT(max_abs(m.povm().effect(2) - 0.25 * Matrix::Identity(4, 4)), 1e-15);
}

TEST(ModelJson, MalformedSpecs) {
    const auto bad = [](const char* text) { return model_from_json(json::parse(text)); };
    EXPECT_THROW(bad("[]"), FormatError);
    EXPECT_THROW(bad(R"({"layers": [], "measurement": "last_qubit"})"), FormatError);
    EXPECT_THROW(bad(R"({"num_qubits": 0, "layers": [], "measurement": "last_qubit"})"), FormatError);
    EXPECT_THROW(bad(R"({"num_qubits": 2, "layers": []})"), FormatError);
    EXPECT_THROW(bad(R"({"num_qubits": 2, "layers": [{"kind": "teleport"}], "measurement": "last_qubit"})"),
                 FormatError);
    EXPECT_THROW(bad(R"({"num_qubits": 2, "layers": [{"kind": "gate", "targets": [0]}], "measurement": "last_qubit"})"),
                 FormatError);
    EXPECT_THROW(bad(R"({"num_qubits": "two", "layers": [], "measurement": "last_qubit"})"), FormatError);
    EXPECT_THROW(bad(R"({"num_qubits": 2, "layers": [], "measurement": {"targets": [0]}})"), FormatError);
    EXPECT_THROW(bad(R"({"num_qubits": 2, "layers": [], "measurement": "first_qubit"})"), FormatError);
    EXPECT_THROW(read_json_file("/nonexistent/model.json"), FormatError);
}

TEST(ModelJson, SemanticErrorsAreValidationErrors) {
    const auto bad = [](const char* text) { return model_from_json(json::parse(text)); };
    EXPECT_THROW(bad(R"({"num_qubits": 2, "layers": [{"kind": "noise", "name": "bit-flip", "p": 1.5, "targets": [0]}],
                         "measurement": "last_qubit"})"),
                 ValidationError);
    EXPECT_THROW(bad(R"({"num_qubits": 2, "layers": [{"kind": "gate", "name": "warp", "targets": [0]}],
                         "measurement": "last_qubit"})"),
                 ValidationError);
    EXPECT_THROW(bad(R"({"num_qubits": 2, "layers": [],
                         "measurement": {"effects": [[[1, 0], [0, 0]]], "targets": [0]}})"),
                 ValidationError);
}

TEST(ModelJson, SolverBlock) {
    PowerIterationConfig cfg;
    apply_solver_block(json::parse(R"({"solver": {"tolerance": 1e-9, "max_iters": 50, "seed": 3}})"), cfg);
    EXPECT_EQ(cfg.tolerance, 1e-9);
    EXPECT_EQ(cfg.max_iters, 50);
    EXPECT_EQ(cfg.seed, 3u);
    EXPECT_THROW(apply_solver_block(json::parse(R"({"solver": {"tolerance": -1}})"), cfg), ValidationError);
}

TEST(Report, RoundTripAndVerdict) {
    const auto m = build_qcnn({4, std::nullopt, 6, NoiseSpec::parse("depolarizing:0.05")});
    const auto lr = lipschitz(m);
    const auto v = decide(lr, 0.1, 0.01);
    ASSERT_FALSE(v.fair);
    const auto r = make_report(m, lr, v);
    ASSERT_TRUE(r.kernel_psi.has_value());
    EXPECT_FALSE(r.kernel_psi->truncated);

    const auto back = report_from_json(json::parse(report_to_json(r).dump()));
    EXPECT_EQ(back.k_star, r.k_star);
    EXPECT_EQ(back.optimal_subset, r.optimal_subset);
    EXPECT_EQ(back.subset_spreads, r.subset_spreads);
    EXPECT_EQ(back.backend, "dense");
    EXPECT_EQ(verdict_from_report(back), std::optional<bool>(false));
    const auto psi = back.kernel_psi->to_state();
    EXPECT_NEAR(overlap_magnitude(psi, lr.kernel_psi), 1.0, 1e-14);
    EXPECT_EQ(model_to_json(model_from_json(back.model)), model_to_json(m));
}

TEST(Report, FairVerdictOmitsKernel) {
    const auto m = build_qcnn({3, std::nullopt, 6, NoiseSpec::parse("depolarizing:0.05")});
    const auto lr = lipschitz(m);
    const auto r = make_report(m, lr, decide(lr, 0.1, 0.2));
    EXPECT_FALSE(r.kernel_psi.has_value());
    const auto j = report_to_json(r);
    EXPECT_FALSE(j.contains("kernel"));
    EXPECT_EQ(verdict_from_report(report_from_json(j)), std::optional<bool>(true));
    EXPECT_EQ(verdict_from_report(make_report(m, lr)), std::nullopt);
}

TEST(Report, KernelTruncation) {
    const auto s = random_pure_state(8, 5);
    const auto k = KernelRecord::from_state(s, 10);
    EXPECT_TRUE(k.truncated);
    EXPECT_EQ(k.amplitudes.size(), 10u);
    double smallest_kept = 1.0;
    for (const auto& [i, z] : k.amplitudes) smallest_kept = std::min(smallest_kept, std::abs(z));
    int larger = 0;
    for (Eigen::Index i = 0; i < s.amplitudes().size(); ++i) larger += std::abs(s.amplitudes()[i]) > smallest_kept;
    EXPECT_EQ(larger, 9);
    EXPECT_NEAR(k.to_state().amplitudes().norm(), 1.0, 1e-14);

    const auto sparse = KernelRecord::from_state(PureState::basis(8, 17), 4);
    EXPECT_FALSE(sparse.truncated);
    ASSERT_EQ(sparse.amplitudes.size(), 1u);
    EXPECT_EQ(sparse.amplitudes[0].first, 17u);
}

TEST(Report, MalformedReports) {
    EXPECT_THROW(report_from_json(json::parse("[1]")), FormatError);
    EXPECT_THROW(report_from_json(json::parse(R"({"backend": "dense"})")), FormatError);
    KernelRecord k;
    k.num_qubits = 1;
    k.amplitudes = {{5, Complex{1.0, 0.0}}};
    EXPECT_THROW(k.to_state(), FormatError);
    EXPECT_THROW(io::kernel_from_json(json::parse(R"({"num_qubits": 1, "truncated": false, "amplitudes": [[0, 1]]})")),
                 FormatError);
}
