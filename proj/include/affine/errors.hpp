#pragma once

#include <stdexcept>
#include <string>

namespace affine {

/// Base class for all library errors. `kind()` is a stable machine-readable
/// tag, the what() string carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class MalformedRateMatrix final : public Error {
public:
    explicit MalformedRateMatrix(const std::string& msg) : Error("MalformedRateMatrix", msg) {}
};

/// Thrown when a jump vector admits no normalized jump counter on the given
/// state space, i.e. it cannot be a jump size of any affine process there.
class NoCounter final : public Error {
public:
    explicit NoCounter(const std::string& msg) : Error("NoCounter", msg) {}
};

/// Thrown when a pair of counters fits none of the three allowed interaction
/// patterns; the two jumps cannot coexist in one affine model.
class TrichotomyViolation final : public Error {
public:
    explicit TrichotomyViolation(const std::string& msg) : Error("TrichotomyViolation", msg) {}
};

class InconsistentModel final : public Error {
public:
    explicit InconsistentModel(const std::string& msg) : Error("InconsistentModel", msg) {}
};

class NotAffine1D final : public Error {
public:
    explicit NotAffine1D(const std::string& msg) : Error("NotAffine1D", msg) {}
};

class UnclassifiableModel final : public Error {
public:
    explicit UnclassifiableModel(const std::string& msg) : Error("UnclassifiableModel", msg) {}
};

class NotCounterCoordinates final : public Error {
public:
    explicit NotCounterCoordinates(const std::string& msg) : Error("NotCounterCoordinates", msg) {}
};

class NonPolynomialSystem final : public Error {
public:
    explicit NonPolynomialSystem(const std::string& msg) : Error("NonPolynomialSystem", msg) {}
};

class ToleranceNotMet final : public Error {
public:
    explicit ToleranceNotMet(const std::string& msg) : Error("ToleranceNotMet", msg) {}
};

class ParseError final : public Error {
public:
    explicit ParseError(const std::string& msg) : Error("ParseError", msg) {}
};

class SchemaError final : public Error {
public:
    explicit SchemaError(const std::string& msg) : Error("SchemaError", msg) {}
};

} // namespace affine
