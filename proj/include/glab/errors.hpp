#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace glab {

/// Base class of every error raised by the library. `code()` is a stable,
/// machine-readable identifier (used by the CLI for reports and tests).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string &what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string &code() const noexcept { return code_; }

private:
    std::string code_;
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string &what) : Error("dimension_mismatch", what) {}
};

class NonNilpotentSubstitution : public Error {
public:
    explicit NonNilpotentSubstitution(const std::string &what)
        : Error("non_nilpotent_substitution", what) {}
};

class NotAUnit : public Error {
public:
    explicit NotAUnit(const std::string &what) : Error("not_a_unit", what) {}
};

class SingularMatrix : public Error {
public:
    explicit SingularMatrix(const std::string &what) : Error("singular_matrix", what) {}
};

class SingularLinearPart : public Error {
public:
    explicit SingularLinearPart(const std::string &what) : Error("singular_linear_part", what) {}
};

/// Raised when an exact quotient does not exist. `witness` is the exponent
/// vector of the lowest-degree monomial where the division failed.
class DivisibilityViolation : public Error {
public:
    DivisibilityViolation(const std::string &what, std::vector<int> witness)
        : Error("divisibility_violation", what), witness_(std::move(witness)) {}

    const std::vector<int> &witness() const noexcept { return witness_; }

private:
    std::vector<int> witness_;
};

class PoincareViolation : public Error {
public:
    PoincareViolation(const std::string &what, long order)
        : Error("poincare_violation", what), order_(order) {}

    long order() const noexcept { return order_; }

private:
    long order_;
};

class TruncationTooSmall : public Error {
public:
    explicit TruncationTooSmall(const std::string &what) : Error("truncation_too_small", what) {}
};

class InconclusiveBound : public Error {
public:
    explicit InconclusiveBound(const std::string &what) : Error("inconclusive_bound", what) {}
};

class InsufficientData : public Error {
public:
    explicit InsufficientData(const std::string &what) : Error("insufficient_data", what) {}
};

class NonPositiveNorm : public Error {
public:
    explicit NonPositiveNorm(const std::string &what) : Error("non_positive_norm", what) {}
};

class EmptyTermSet : public Error {
public:
    explicit EmptyTermSet(const std::string &what) : Error("empty_term_set", what) {}
};

class RegressionMismatch : public Error {
public:
    explicit RegressionMismatch(const std::string &what) : Error("regression_mismatch", what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string &what) : Error("domain_error", what) {}
};

} // namespace glab
