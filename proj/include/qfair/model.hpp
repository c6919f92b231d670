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

#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qfair/channel.hpp"
#include "qfair/common.hpp"
#include "qfair/measurement.hpp"
#include "qfair/qstate.hpp"

namespace qfair {

/// The pair (circuit, measurement) plus descriptive metadata.
class DecisionModel {
   public:
    DecisionModel(CircuitChannel circuit, Povm povm, std::string name = "model",
                  std::map<std::string, std::string> metadata = {})
        : circuit_(std::move(circuit)), povm_(std::move(povm)), name_(std::move(name)), metadata_(std::move(metadata)) {
        if (circuit_.num_qubits() != povm_.num_qubits()) {
            throw DimensionError("circuit and measurement act on different qubit counts");
        }
    }

    int num_qubits() const { return circuit_.num_qubits(); }
    const CircuitChannel& circuit() const { return circuit_; }
    CircuitChannel& circuit() { return circuit_; }
    const Povm& povm() const { return povm_; }
    const std::string& name() const { return name_; }
    const std::map<std::string, std::string>& metadata() const { return metadata_; }
    std::map<std::string, std::string>& metadata() { return metadata_; }

   private:
    CircuitChannel circuit_;
    Povm povm_;
    std::string name_;
    std::map<std::string, std::string> metadata_;
};

/// p_i = tr(M_i E(rho)).
inline OutcomeDistribution forward(const DecisionModel& model, const DensityMatrix& rho) {
    if (rho.num_qubits() != model.num_qubits()) {
        throw DimensionError("forward: state and model act on different qubit counts");
    }
    const DensityMatrix out = apply(model.circuit(), rho);
    const Povm& povm = model.povm();
    OutcomeDistribution dist;
    dist.labels = povm.labels();
    dist.probabilities.reserve(povm.size());
    for (const Matrix& e : povm.local_effects()) {
        dist.probabilities.push_back(
            kernels::local_expectation(out.matrix(), e, povm.targets(), model.num_qubits()).real());
    }
    return dist;
}

inline OutcomeDistribution forward(const DecisionModel& model, const PureState& psi) {
    return forward(model, pure_to_density(psi));
}

/// Label of the most likely outcome. Probabilities within 1e-12 of the maximum
/// count as tied; ties go to the lexicographically smallest label.
inline std::string classify(const DecisionModel& model, const DensityMatrix& rho) {
    const OutcomeDistribution d = forward(model, rho);
    double best = d.probabilities.front();
    for (double p : d.probabilities) best = std::max(best, p);
    std::optional<std::string> pick;
    for (std::size_t i = 0; i < d.labels.size(); ++i) {
        if (d.probabilities[i] >= best - 1e-12 && (!pick || d.labels[i] < *pick)) {
            pick = d.labels[i];
        }
    }
    return *pick;
}

/// Noise selection for the builders: "none" or "<name>:<p>".
struct NoiseSpec {
    std::string name = "none";
    double probability = 0.0;

    bool none() const { return name == "none"; }

    std::string str() const {
        if (none()) return "none";
        return name + ":" + format_real(probability);
    }

    static NoiseSpec parse(const std::string& text) {
        if (text == "none" || text.empty()) return {};
        const auto colon = text.find(':');
        if (colon == std::string::npos) {
            throw ValidationError("noise spec must be 'none' or '<name>:<probability>', got '" + text + "'");
        }
        NoiseSpec spec;
        spec.name = text.substr(0, colon);
        try {
            std::size_t used = 0;
            spec.probability = std::stod(text.substr(colon + 1), &used);
            if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ValidationError("bad noise probability in '" + text + "'");
        }
        noise_weights(spec.name, spec.probability);  // validates name and range
        return spec;
    }
};

/// Angles drawn uniformly from [0, 2 pi) by a seeded 64-bit Mersenne twister.
inline std::vector<double> sample_angles(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 2.0 * std::numbers::pi);
    std::vector<double> out(count);
    for (double& a : out) a = unif(rng);
    return out;
}

namespace detail {

inline std::vector<std::pair<int, int>> cyclic_pairs(int n) {
    std::vector<std::pair<int, int>> pairs;
    if (n == 2) {
        pairs.emplace_back(0, 1);
    } else if (n >= 3) {
        for (int i = 0; i < n; ++i) pairs.emplace_back(i, (i + 1) % n);
    }
    return pairs;
}

inline std::vector<std::pair<int, int>> qcnn_conv_pairs(int n) {
    std::vector<std::pair<int, int>> pairs;
    for (int parity = 0; parity < 2; ++parity) {
        for (int i = parity; i + 1 < n; i += 2) pairs.emplace_back(i, i + 1);
    }
    return pairs;
}

inline std::vector<std::pair<int, int>> qcnn_pool_pairs(int n) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = n % 2; i + 1 < n; i += 2) pairs.emplace_back(i, i + 1);
    return pairs;
}

class ParamCursor {
   public:
    explicit ParamCursor(const std::vector<double>& p) : p_(p) {}
    std::vector<double> take(std::size_t k) {
        std::vector<double> out(p_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                p_.begin() + static_cast<std::ptrdiff_t>(pos_ + k));
        pos_ += k;
        return out;
    }

   private:
    const std::vector<double>& p_;
    std::size_t pos_ = 0;
};

inline void add_noise_everywhere(CircuitChannel& c, const NoiseSpec& noise) {
    if (noise.none()) return;
    for (int q = 0; q < c.num_qubits(); ++q) c.push_back(LocalOp::noise(noise.name, noise.probability, q));
}

inline std::vector<double> resolve_params(const std::optional<std::vector<double>>& params, std::size_t expected,
                                          std::uint64_t seed, std::map<std::string, std::string>& meta) {
    if (params) {
        if (params->size() != expected) {
            throw ValidationError("expected " + std::to_string(expected) + " parameters, got " +
                                  std::to_string(params->size()));
        }
        meta["param_source"] = "explicit";
        return *params;
    }
    meta["param_source"] = "seed";
    meta["param_seed"] = std::to_string(seed);
    return sample_angles(expected, seed);
}

inline void describe_noise(const NoiseSpec& noise, std::map<std::string, std::string>& meta) {
    meta["noise"] = noise.name;
    if (!noise.none()) meta["noise_probability"] = format_real(noise.probability);
    if (noise.name == "mixed") {
        meta["mixed_noise_order"] = "bit-flip,phase-flip,depolarizing";
    }
}

}  // namespace detail

struct RotationEntanglingOptions {
    int num_qubits = 1;
    int rotation_blocks = 3;
    int entangling_blocks = 2;
    std::optional<std::vector<double>> params;
    std::uint64_t seed = 0;
    NoiseSpec noise;
};

inline std::size_t rotation_entangling_param_count(int n, int rotation_blocks, int entangling_blocks) {
    return static_cast<std::size_t>(rotation_blocks) * 3 * static_cast<std::size_t>(n) +
           static_cast<std::size_t>(entangling_blocks) * detail::cyclic_pairs(n).size();
}

/// Alternating Z-X-Z rotation blocks and cyclic XX entangling blocks (starting
/// with a rotation block), noise on every qubit after the first rotation
/// block, last-qubit projective measurement.
inline DecisionModel build_rotation_entangling(const RotationEntanglingOptions& opt) {
    const int n = opt.num_qubits;
    if (n < 1 || opt.rotation_blocks < 0 || opt.entangling_blocks < 0) {
        throw ValidationError("rotation/entangling model needs n >= 1 and non-negative block counts");
    }
    std::map<std::string, std::string> meta{{"builder", "rotation-entangling"},
                                            {"rotation_blocks", std::to_string(opt.rotation_blocks)},
                                            {"entangling_blocks", std::to_string(opt.entangling_blocks)}};
    const auto params = detail::resolve_params(
        opt.params, rotation_entangling_param_count(n, opt.rotation_blocks, opt.entangling_blocks), opt.seed, meta);
    detail::describe_noise(opt.noise, meta);

    detail::ParamCursor cur(params);
    CircuitChannel c(n);
    int rot_left = opt.rotation_blocks;
    int ent_left = opt.entangling_blocks;
    bool noise_placed = false;
    if (rot_left == 0) {
        detail::add_noise_everywhere(c, opt.noise);
        noise_placed = true;
    }
    bool rotation_turn = true;
    while (rot_left > 0 || ent_left > 0) {
        if ((rotation_turn && rot_left > 0) || ent_left == 0) {
            for (int q = 0; q < n; ++q) {
                const auto a = cur.take(3);
                c.push_back(LocalOp::gate("RZ", {q}, {a[0]}));
                c.push_back(LocalOp::gate("RX", {q}, {a[1]}));
                c.push_back(LocalOp::gate("RZ", {q}, {a[2]}));
            }
            --rot_left;
            if (!noise_placed) {
                detail::add_noise_everywhere(c, opt.noise);
                noise_placed = true;
            }
        } else {
            for (auto [a, b] : detail::cyclic_pairs(n)) {
                c.push_back(LocalOp::gate("XX", {a, b}, cur.take(1)));
            }
            --ent_left;
        }
        rotation_turn = !rotation_turn;
    }
    return DecisionModel(std::move(c), Povm::last_qubit_projective(n), "rotation-entangling", std::move(meta));
}

struct QcnnOptions {
    int num_qubits = 2;
    std::optional<std::vector<double>> params;
    std::uint64_t seed = 0;
    NoiseSpec noise;
};

inline std::size_t qcnn_param_count(int n) {
    return detail::qcnn_conv_pairs(n).size() * 9 + detail::qcnn_pool_pairs(n).size() * 7 + 3;
}

struct QcnnTopology {
    std::size_t conv_gates;
    std::size_t pool_gates;
};

inline QcnnTopology qcnn_topology(int n) { return {detail::qcnn_conv_pairs(n).size(), detail::qcnn_pool_pairs(n).size()}; }

/// One convolution layer (QCONV on adjacent pairs, even pairs then odd pairs),
/// noise on every qubit, one pooling layer (QPOOL on disjoint pairs, keeping
/// the higher index), a final Z-X-Z gate on the last qubit, and last-qubit
/// projective measurement.
inline DecisionModel build_qcnn(const QcnnOptions& opt) {
    const int n = opt.num_qubits;
    if (n < 2) {
        throw ValidationError("QCNN needs at least two qubits");
    }
    std::map<std::string, std::string> meta{
        {"builder", "qcnn"},
        {"qcnn_form",
         "QCONV=ZXZ(x)ZXZ then exp(-i(aXX+bYY+cZZ)/2); QPOOL=ZXZ(x)ZXZ then CRX(discarded->kept); final ZXZ"}};
    const auto params = detail::resolve_params(opt.params, qcnn_param_count(n), opt.seed, meta);
    detail::describe_noise(opt.noise, meta);

    detail::ParamCursor cur(params);
    CircuitChannel c(n);
    for (auto [a, b] : detail::qcnn_conv_pairs(n)) c.push_back(LocalOp::gate("QCONV", {a, b}, cur.take(9)));
    detail::add_noise_everywhere(c, opt.noise);
    for (auto [a, b] : detail::qcnn_pool_pairs(n)) c.push_back(LocalOp::gate("QPOOL", {a, b}, cur.take(7)));
    c.push_back(LocalOp::gate("ZXZ", {n - 1}, cur.take(3)));
    return DecisionModel(std::move(c), Povm::last_qubit_projective(n), "qcnn", std::move(meta));
}

/// Appends (1-p) rho + p I/N after the whole circuit.
inline void append_global_depolarizing(DecisionModel& model, double p) {
    model.circuit().push_back(LocalOp::global_depolarizing(p));
    model.metadata()["appended_global_depolarizing"] = format_real(p);
}

/// Appends single-qubit noise on every qubit after the whole circuit.
inline void append_noise_layer(DecisionModel& model, const NoiseSpec& noise) {
    detail::add_noise_everywhere(model.circuit(), noise);
    model.metadata()["appended_noise"] = noise.str();
}

}  // namespace qfair
