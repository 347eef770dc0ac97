// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Error taxonomy. Every failure the library can diagnose is a subclass of
// lcskit::Error carrying a human-readable message; call sites that need the
// structured payload (pivot index, source location, ...) catch the concrete
// type.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lcskit {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// ---- AD / linear algebra -------------------------------------------------

struct SingularMatrixError : Error {
    std::size_t pivotIndex;
    double pivotMagnitude;
    SingularMatrixError(std::size_t idx, double mag)
        : Error("singular matrix: pivot " + std::to_string(idx) +
                " has magnitude " + std::to_string(mag)),
          pivotIndex(idx),
          pivotMagnitude(mag) {}
};

// Raised when an operation would need a derivative level beyond the evaluator
// tower (four scalar levels: value plus three nested tangents).
struct NestingOverflowError : Error {
    NestingOverflowError()
        : Error("derivative nesting exceeds the supported depth (3)") {}
};

// ---- expression DSL ------------------------------------------------------

struct SyntaxError : Error {
    std::size_t line, column;
    SyntaxError(std::size_t ln, std::size_t col, const std::string& what)
        : Error("syntax error at " + std::to_string(ln) + ":" +
                std::to_string(col) + ": " + what),
          line(ln),
          column(col) {}
};

struct UnknownIdentifierError : Error {
    std::string name;
    UnknownIdentifierError(const std::string& id, std::size_t ln, std::size_t col)
        : Error("unknown identifier '" + id + "' at " + std::to_string(ln) +
                ":" + std::to_string(col)),
          name(id) {}
};

// Evaluation left the domain of a primitive (log of a non-positive value,
// division by zero, fractional power of a negative base, ...).
struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// ---- charts, forms, maps -------------------------------------------------

struct ChartMismatchError : Error {
    explicit ChartMismatchError(const std::string& msg) : Error(msg) {}
};

struct DegreeOverflowError : Error {
    explicit DegreeOverflowError(const std::string& msg) : Error(msg) {}
};

struct DegreeUnderflowError : Error {
    explicit DegreeUnderflowError(const std::string& msg) : Error(msg) {}
};

// A map sent a sample outside the admissible domain of its target chart.
struct TargetInadmissibleError : Error {
    explicit TargetInadmissibleError(const std::string& msg) : Error(msg) {}
};

struct SamplingError : Error {
    explicit SamplingError(const std::string& msg) : Error(msg) {}
};

// ---- symmetry checks -----------------------------------------------------

struct ZeroBetaError : Error {
    ZeroBetaError()
        : Error("cannot rescale a symmetry of conformal degree beta = 0") {}
};

// The Hamiltonian vanishes on too many samples to estimate a degree.
struct IndeterminateDegreeError : Error {
    explicit IndeterminateDegreeError(const std::string& msg) : Error(msg) {}
};

struct DenominatorNearZeroError : Error {
    explicit DenominatorNearZeroError(const std::string& msg) : Error(msg) {}
};

// ---- dynamics ------------------------------------------------------------

struct InadmissibleStartError : Error {
    explicit InadmissibleStartError(const std::string& msg) : Error(msg) {}
};

struct StepFailureError : Error {
    explicit StepFailureError(const std::string& msg) : Error(msg) {}
};

// Residuals sit at rounding floor; no convergence order can be measured.
struct NoiseFloorError : Error {
    explicit NoiseFloorError(const std::string& msg) : Error(msg) {}
};

// ---- scenarios / reports -------------------------------------------------

struct SchemaError : Error {
    explicit SchemaError(const std::string& msg) : Error(msg) {}
};

}  // namespace lcskit
