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

// Named gate matrices. Rotations are exp(-i theta P / 2).

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qfair/common.hpp"

namespace qfair::gates {

inline Matrix pauli(char p) {
    Matrix m(2, 2);
    switch (p) {
        case 'I': m << 1, 0, 0, 1; break;
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
        case 'Z': m << 1, 0, 0, -1; break;
        default: throw ValidationError(std::string("unknown Pauli ") + p);
    }
    return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// exp(-i theta P / 2) for an involutory Hermitian P.
inline Matrix rotation(const Matrix& p, double theta) {
    const Matrix id = Matrix::Identity(p.rows(), p.cols());
    return std::cos(theta / 2) * id - Complex(0, 1) * std::sin(theta / 2) * p;
}

inline Matrix rx(double t) { return rotation(pauli('X'), t); }
inline Matrix ry(double t) { return rotation(pauli('Y'), t); }
inline Matrix rz(double t) { return rotation(pauli('Z'), t); }

/// RZ(a), then RX(b), then RZ(c) in time order.
inline Matrix zxz(double a, double b, double c) { return rz(c) * rx(b) * rz(a); }

/// Controlled RX; control is the first (most significant) qubit.
inline Matrix crx(double t) {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = 1;
    m(1, 1) = 1;
    m.block(2, 2, 2, 2) = rx(t);
    return m;
}

/// Two-qubit convolution unit: Z-X-Z on each qubit, then exp(-i(a XX + b YY + c ZZ)/2).
inline Matrix qconv(std::span<const double> p) {
    const Matrix local = kron(zxz(p[0], p[1], p[2]), zxz(p[3], p[4], p[5]));
    const Matrix xx = rotation(kron(pauli('X'), pauli('X')), p[6]);
    const Matrix yy = rotation(kron(pauli('Y'), pauli('Y')), p[7]);
    const Matrix zz = rotation(kron(pauli('Z'), pauli('Z')), p[8]);
    return zz * yy * xx * local;
}

/// Two-qubit pooling unit on (discarded, kept): Z-X-Z on both, then CRX from discarded onto kept.
inline Matrix qpool(std::span<const double> p) {
    const Matrix local = kron(zxz(p[0], p[1], p[2]), zxz(p[3], p[4], p[5]));
    return crx(p[6]) * local;
}

struct GateInfo {
    int arity;
    int num_params;
};

/// Arity and parameter count of a named gate; throws for unknown names.
inline GateInfo info(const std::string& name) {
    if (name == "I" || name == "X" || name == "Y" || name == "Z" || name == "H") return {1, 0};
    if (name == "RX" || name == "RY" || name == "RZ") return {1, 1};
    if (name == "ZXZ") return {1, 3};
    if (name == "XX" || name == "YY" || name == "ZZ" || name == "CRX") return {2, 1};
    if (name == "QCONV") return {2, 9};
    if (name == "QPOOL") return {2, 7};
    throw ValidationError("unknown gate '" + name + "'");
}

inline Matrix matrix(const std::string& name, std::span<const double> params) {
    const GateInfo gi = info(name);
    if (static_cast<int>(params.size()) != gi.num_params) {
        throw ValidationError("gate " + name + " expects " + std::to_string(gi.num_params) + " parameters, got " +
                              std::to_string(params.size()));
    }
    if (name.size() == 1 && name != "H") return pauli(name[0]);
    if (name == "H") {
        Matrix h(2, 2);
        h << 1, 1, 1, -1;
        return h / std::numbers::sqrt2;
    }
    if (name == "RX") return rx(params[0]);
    if (name == "RY") return ry(params[0]);
    if (name == "RZ") return rz(params[0]);
    if (name == "ZXZ") return zxz(params[0], params[1], params[2]);
    if (name == "XX") return rotation(kron(pauli('X'), pauli('X')), params[0]);
    if (name == "YY") return rotation(kron(pauli('Y'), pauli('Y')), params[0]);
    if (name == "ZZ") return rotation(kron(pauli('Z'), pauli('Z')), params[0]);
    if (name == "CRX") return crx(params[0]);
    if (name == "QCONV") return qconv(params);
    return qpool(params);
}

}  // namespace qfair::gates
