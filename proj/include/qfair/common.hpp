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

#include <charconv>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qfair {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

/// Numerical tolerances used by every validation check in the library.
///
/// One process-wide instance is returned by `tolerances()`. Adjust it before
/// constructing objects; it is read without synchronization.
struct Tolerances {
    double state_norm = 1e-12;
    double hermitian = 1e-12;
    double psd = 1e-10;
    double trace = 1e-12;
    double distribution_entry = 1e-12;
    double distribution_sum = 1e-10;
    double kraus_completeness = 1e-10;
    double unitarity = 1e-10;
    double povm_completeness = 1e-10;
    double measurement_ops_completeness = 1e-8;
    double kernel_orthogonality = 1e-8;
    /// Roundoff allowed when testing D(rho, sigma) <= epsilon.
    double input_distance_slack = 1e-12;
    /// Roundoff allowed when comparing delta against K* epsilon.
    double verdict_slack = 1e-12;
    /// Spread below which a kernel is reported as degenerate.
    double degenerate_spread = 1e-9;
};

inline Tolerances& tolerances() {
    static Tolerances t;
    return t;
}

/// Base of every exception thrown by qfair.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Operands live on different Hilbert spaces or outcome sets.
class DimensionError : public Error {
   public:
    using Error::Error;
};

/// An input violates a documented invariant (norm, trace, completeness, range).
class ValidationError : public Error {
   public:
    using Error::Error;
};

/// A size guard was hit (outcome set, oracle qubit count, network support).
class CapacityError : public Error {
   public:
    using Error::Error;
};

/// Malformed file content (model spec, report, CSV).
class FormatError : public Error {
   public:
    using Error::Error;
};

/// Cooperative deadline expired inside a long computation.
class TimeoutError : public Error {
   public:
    using Error::Error;
};

inline std::uint64_t dimension_of(int num_qubits) {
    return std::uint64_t{1} << num_qubits;
}

inline double hermitian_defect(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_real(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace qfair
